//! Monte Carlo checks on the channel generator and the noise path.

use cpdsss_core::channel::{draw_channel, draw_channel_set, GaussianSource};
use cpdsss_core::{ChannelParams, Complex64, ZcMatrix};

#[test]
fn mean_gain_per_bin_is_one() {
    let params = ChannelParams::default();
    let trials = 1000;
    let mut mean = vec![0.0; params.n];
    for t in 0..trials {
        let ch = draw_channel(&params, 2024, t).unwrap();
        for (m, g) in mean.iter_mut().zip(ch.gain_spectrum()) {
            *m += g / trials as f64;
        }
    }
    let worst = mean.iter().map(|m| (m - 1.0).abs()).fold(0.0, f64::max);
    assert!(worst < 0.1, "worst bin deviation {worst}");
}

#[test]
fn tap_variance_follows_profile() {
    let params = ChannelParams {
        normalize_per_realization: false,
        ..ChannelParams::default()
    };
    let profile = params.power_profile();
    let trials = 10_000;
    let mut var = vec![0.0; params.num_taps];
    for t in 0..trials {
        let ch = draw_channel(&params, 99, t).unwrap();
        for (v, h) in var.iter_mut().zip(ch.taps()) {
            *v += h.norm_sqr() / trials as f64;
        }
    }
    for (k, (v, p)) in var.iter().zip(&profile).enumerate() {
        assert!((v / p - 1.0).abs() < 0.1, "tap {k}: {v} vs {p}");
    }
}

#[test]
fn parseval_per_realization() {
    for normalize in [true, false] {
        let params = ChannelParams {
            normalize_per_realization: normalize,
            ..ChannelParams::default()
        };
        for t in 0..20 {
            let ch = draw_channel(&params, 5, t).unwrap();
            let freq: f64 = ch.gain_spectrum().iter().sum::<f64>() / ch.n() as f64;
            assert!((ch.energy() - freq).abs() < 1e-9);
        }
    }
}

#[test]
fn antennas_are_uncorrelated() {
    let params = ChannelParams::default();
    let set = draw_channel_set(&params, 77, 1000, 2).unwrap();
    let mean: Complex64 = set
        .iter()
        .map(|trial| {
            trial[0]
                .taps()
                .iter()
                .zip(trial[1].taps())
                .map(|(a, b)| a * b.conj())
                .sum::<Complex64>()
        })
        .sum::<Complex64>()
        / set.len() as f64;
    assert!(mean.norm() < 0.05, "{mean}");
}

#[test]
fn same_seed_same_bits() {
    let params = ChannelParams::default();
    let a = draw_channel_set(&params, 3, 4, 2).unwrap();
    let b = draw_channel_set(&params, 3, 4, 2).unwrap();
    for (x, y) in a.iter().flatten().zip(b.iter().flatten()) {
        for (p, q) in x.taps().iter().zip(y.taps()) {
            assert_eq!(p.re.to_bits(), q.re.to_bits());
            assert_eq!(p.im.to_bits(), q.im.to_bits());
        }
    }
}

#[test]
fn despread_noise_stays_white() {
    let n = 16;
    let z = ZcMatrix::with_default_root(n).unwrap();
    let sigma2 = 0.5;
    let draws = 10_000;
    let mut src = GaussianSource::new(11, 0);
    let mut cov = vec![Complex64::new(0.0, 0.0); n * n];
    for _ in 0..draws {
        let v: Vec<Complex64> = (0..n).map(|_| src.complex_gaussian(sigma2)).collect();
        let w = z.despread(&v).unwrap();
        for r in 0..n {
            for c in 0..n {
                cov[r * n + c] += w[r] * w[c].conj() / draws as f64;
            }
        }
    }
    for r in 0..n {
        for c in 0..n {
            let target = if r == c { sigma2 } else { 0.0 };
            let err = (cov[r * n + c] - Complex64::new(target, 0.0)).norm();
            assert!(err < 0.05 * sigma2, "({r},{c}) err {err}");
        }
    }
}
