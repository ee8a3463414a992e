//! Dense-matrix reference computations.
//!
//! Everything here rebuilds the model as explicit matrices and uses
//! nalgebra's general decompositions, so it shares no code path with the
//! spectral shortcuts in `cpdsss-core`. Only practical for small `N`.

use cpdsss_core::capacity::{
    aliased_spectrum, capacity_downlink_mimo, capacity_uplink_mimo, capacity_rate_reduced,
    downlink_tr_precoders,
};
use cpdsss_core::channel::{draw_channel, draw_channel_set, GaussianSource};
use cpdsss_core::precoder::{build_precoder, waterfill_allocation};
use cpdsss_core::waveform::{sample_level_rx, simulate_despread_rx};
use cpdsss_core::{
    ChannelParams, ChannelRealization, Complex64, DenseMatrix, Direction, ExpanderSpec,
    LinkConfig, PrecoderKind, PrecoderSpec, ZcMatrix,
};
use nalgebra::DMatrix;

use crate::Result;

pub fn to_nalgebra(m: &DenseMatrix) -> DMatrix<Complex64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_row_major())
}

/// Eigenvalues of a general square matrix: the diagonal of its complex
/// Schur form.
pub fn dense_eigenvalues(m: &DenseMatrix) -> Vec<Complex64> {
    let (_, t) = nalgebra::Schur::new(to_nalgebra(m)).unpack();
    t.diagonal().iter().copied().collect()
}

/// Eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &DenseMatrix) -> Vec<f64> {
    to_nalgebra(m).symmetric_eigenvalues().iter().copied().collect()
}

/// Largest distance in a greedy nearest-neighbour pairing of two multisets.
/// Returns infinity when the lengths differ.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("equal lengths");
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// `log2 det(I + scale A^H A)` from the Hermitian eigenvalues of `A^H A`.
pub fn log2det_identity_plus_gram(a: &DenseMatrix, scale: f64) -> Result<f64> {
    let gram = a.adjoint().matmul(a)?;
    Ok(hermitian_eigenvalues(&gram)
        .iter()
        .map(|&v| (1.0 + scale * v.max(0.0)).log2())
        .sum())
}

/// Water-filling by enumerating every active set (`N <= 16`). Returns the
/// allocation of the unique set satisfying the KKT conditions.
pub fn brute_force_waterfill(gains: &[f64], p_total: f64, noise: f64) -> Option<Vec<f64>> {
    let n = gains.len();
    assert!(n <= 16, "brute force is exponential in N");
    let inv: Vec<f64> = gains.iter().map(|&g| noise / g).collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << n) {
        let active: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        if active.iter().any(|&i| gains[i] <= 0.0) {
            continue;
        }
        let level = (p_total + active.iter().map(|&i| inv[i]).sum::<f64>()) / active.len() as f64;
        let feasible = (0..n).all(|i| {
            if mask & (1 << i) != 0 {
                level > inv[i]
            } else {
                gains[i] <= 0.0 || level <= inv[i] * (1.0 + 1e-12)
            }
        });
        if !feasible {
            continue;
        }
        let alloc: Vec<f64> = (0..n)
            .map(|i| if mask & (1 << i) != 0 { level - inv[i] } else { 0.0 })
            .collect();
        let rate: f64 = alloc
            .iter()
            .zip(gains)
            .map(|(p, g)| (1.0 + p * g / noise).log2())
            .sum();
        if best.as_ref().is_none_or(|(r, _)| rate > *r) {
            best = Some((rate, alloc));
        }
    }
    best.map(|(_, a)| a)
}

/// Effective single-link matrix `Z^H H G Z E_L` (N x N/L).
pub fn single_link_matrix(channel: &ChannelRealization, prec: &PrecoderSpec, l: usize) -> Result<DenseMatrix> {
    let n = channel.n();
    let z = ZcMatrix::with_default_root(n)?.to_dense()?;
    let h = channel.circulant().to_dense()?;
    let g = prec.matrix().to_dense()?;
    let e = ExpanderSpec::new(n, l)?.to_dense()?;
    let m = z.adjoint().matmul(&h)?.matmul(&g)?.matmul(&z)?.matmul(&e)?;
    Ok(m)
}

/// Stacked uplink matrix `[H_1 Z E; ...; H_M Z E]` (MN x N/L).
pub fn uplink_matrix(channels: &[ChannelRealization], l: usize) -> Result<DenseMatrix> {
    let n = channels[0].n();
    let z = ZcMatrix::with_default_root(n)?.to_dense()?;
    let ze = z.matmul(&ExpanderSpec::new(n, l)?.to_dense()?)?;
    let blocks = channels
        .iter()
        .map(|ch| Ok(ch.circulant().to_dense()?.matmul(&ze)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(DenseMatrix::vstack(&blocks)?)
}

/// Downlink matrix `[H_1 ... H_M] [G_1; ...; G_M] Z E` (N x N/L).
pub fn downlink_matrix(channels: &[ChannelRealization], l: usize) -> Result<DenseMatrix> {
    let n = channels[0].n();
    let z = ZcMatrix::with_default_root(n)?.to_dense()?;
    let ze = z.matmul(&ExpanderSpec::new(n, l)?.to_dense()?)?;
    let hs = channels
        .iter()
        .map(|ch| Ok(ch.circulant().to_dense()?))
        .collect::<Result<Vec<_>>>()?;
    let gs = downlink_tr_precoders(channels)?
        .iter()
        .map(|g| Ok(g.to_dense()?))
        .collect::<Result<Vec<_>>>()?;
    let row = DenseMatrix::hstack(&hs)?;
    let col = DenseMatrix::vstack(&gs)?;
    Ok(row.matmul(&col)?.matmul(&ze)?)
}

/// Stacked downlink precoder `[G_1; ...; G_M]`, whose trace power should be N.
pub fn downlink_precoder_power(channels: &[ChannelRealization]) -> Result<f64> {
    let gs = downlink_tr_precoders(channels)?
        .iter()
        .map(|g| Ok(g.to_dense()?))
        .collect::<Result<Vec<_>>>()?;
    let col = DenseMatrix::vstack(&gs)?;
    Ok(col.adjoint().matmul(&col)?.trace().re)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn small_params(n: usize) -> ChannelParams {
    ChannelParams {
        num_taps: n.min(6),
        rolloff: 2.0,
        n,
        ..ChannelParams::default()
    }
}

fn check_eigenvalues(seed: u64) -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    for n in [4, 8, 16, 32] {
        for t in 0..10 {
            let ch = draw_channel(&small_params(n), seed, t)?;
            let dense = dense_eigenvalues(&ch.circulant().to_dense()?);
            worst = worst.max(multiset_distance(ch.circulant().eigenvalues(), &dense));
        }
    }
    Ok(CheckOutcome {
        name: "circulant eigenvalues",
        passed: worst < 1e-9,
        detail: format!("max distance {worst:.3e}"),
    })
}

fn check_zc(seed: u64) -> Result<CheckOutcome> {
    let n = 64;
    let z = ZcMatrix::with_default_root(n)?.to_dense()?;
    let unit = z.adjoint().matmul(&z)?.max_abs_diff(&DenseMatrix::identity(n)?)?;
    let n = 2048;
    let z = ZcMatrix::with_default_root(n)?;
    let ch = draw_channel(&ChannelParams::default(), seed, 0)?;
    let mut src = GaussianSource::new(seed, u64::MAX);
    let s: Vec<Complex64> = (0..n).map(|_| src.complex_gaussian(1.0)).collect();
    let v: Vec<Complex64> = (0..n).map(|_| src.complex_gaussian(0.1)).collect();
    let block = simulate_despread_rx(ch.circulant(), &z, &s, &v)?;
    let chain = sample_level_rx(ch.taps(), &z, &s, 130, &v)?;
    let cp = block
        .iter()
        .zip(&chain)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok(CheckOutcome {
        name: "zc unitarity and cp equivalence",
        passed: unit < 1e-10 && cp < 1e-9,
        detail: format!("unitarity {unit:.3e}, cp chain {cp:.3e}"),
    })
}

fn check_waterfill(seed: u64) -> Result<CheckOutcome> {
    let mut src = GaussianSource::new(seed, u64::MAX - 1);
    let mut worst: f64 = 0.0;
    for case in 0..200 {
        let n = 2 + case % 11;
        let gains: Vec<f64> = (0..n).map(|_| src.complex_gaussian(1.0).norm_sqr()).collect();
        let p = 0.1 + 10.0 * src.uniform();
        let noise = 0.05 + src.uniform();
        let fast = waterfill_allocation(&gains, p, noise)?;
        let slow = brute_force_waterfill(&gains, p, noise).expect("a KKT point exists");
        for (a, b) in fast.iter().zip(&slow) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(CheckOutcome {
        name: "water-filling vs enumeration",
        passed: worst < 1e-9,
        detail: format!("max allocation error {worst:.3e}"),
    })
}

fn check_capacities(seed: u64) -> Result<CheckOutcome> {
    let n = 16;
    let mut worst: f64 = 0.0;
    for t in 0..10 {
        let ch = draw_channel(&small_params(n), seed, t)?;
        for snr in [0.01, 1.0, 100.0] {
            for kind in PrecoderKind::ALL {
                let prec = build_precoder(kind, &ch, snr)?;
                for l in [1, 2, 4, 8] {
                    let cfg = LinkConfig::new(n, 1.0, snr).with_reduction(l);
                    let fast = capacity_rate_reduced(&ch, &prec, &cfg)?.bits_per_block;
                    let dense = log2det_identity_plus_gram(&single_link_matrix(&ch, &prec, l)?, l as f64 * snr)?;
                    worst = worst.max(rel(fast, dense));
                }
            }
        }
    }
    Ok(CheckOutcome {
        name: "single-link capacity vs dense log-det",
        passed: worst < 1e-9,
        detail: format!("max relative error {worst:.3e}"),
    })
}

fn check_mimo(seed: u64) -> Result<CheckOutcome> {
    let n = 8;
    let mut worst: f64 = 0.0;
    let mut power: f64 = 0.0;
    let sets = draw_channel_set(&small_params(n), seed, 5, 3)?;
    for set in &sets {
        for m in 1..=3 {
            let chs = &set[..m];
            for l in [1, 2] {
                let snr = 0.5;
                let ul = LinkConfig::new(n, 1.0, snr).with_reduction(l).with_antennas(m, Direction::Uplink);
                let dl = LinkConfig::new(n, 1.0, snr).with_reduction(l).with_antennas(m, Direction::Downlink);
                let ul_fast = capacity_uplink_mimo(chs, &ul)?.bits_per_block;
                let dl_fast = capacity_downlink_mimo(chs, &dl)?.bits_per_block;
                let scale = l as f64 * snr;
                let ul_dense = log2det_identity_plus_gram(&uplink_matrix(chs, l)?, scale)?;
                let dl_dense = log2det_identity_plus_gram(&downlink_matrix(chs, l)?, scale)?;
                worst = worst.max(rel(ul_fast, ul_dense)).max(rel(dl_fast, dl_dense));
            }
            power = power.max((downlink_precoder_power(chs)? - n as f64).abs());
        }
    }
    Ok(CheckOutcome {
        name: "multi-antenna capacity vs stacked dense",
        passed: worst < 1e-9 && power < 1e-9,
        detail: format!("max relative error {worst:.3e}, precoder power error {power:.3e}"),
    })
}

fn check_aliasing(seed: u64) -> Result<CheckOutcome> {
    let n = 32;
    let mut worst: f64 = 0.0;
    for t in 0..5 {
        let ch = draw_channel(&small_params(n), seed, t)?;
        let h = ch.circulant().to_dense()?;
        let gram = h.adjoint().matmul(&h)?;
        for l in [2, 4, 8] {
            let e = ExpanderSpec::new(n, l)?.to_dense()?;
            let reduced = e.adjoint().matmul(&gram)?.matmul(&e)?;
            let dense: Vec<Complex64> = hermitian_eigenvalues(&reduced)
                .into_iter()
                .map(|v| Complex64::new(v, 0.0))
                .collect();
            let fast: Vec<Complex64> = aliased_spectrum(ch.gain_spectrum(), l)?
                .into_iter()
                .map(|v| Complex64::new(v, 0.0))
                .collect();
            worst = worst.max(multiset_distance(&fast, &dense));
        }
    }
    Ok(CheckOutcome {
        name: "aliased spectrum vs dense expander",
        passed: worst < 1e-9,
        detail: format!("max distance {worst:.3e}"),
    })
}

/// Runs every dense cross-check at small `N`.
pub fn run_validation_suite(seed: u64) -> Result<Vec<CheckOutcome>> {
    Ok(vec![
        check_eigenvalues(seed)?,
        check_zc(seed)?,
        check_waterfill(seed)?,
        check_capacities(seed)?,
        check_aliasing(seed)?,
        check_mimo(seed)?,
    ])
}
