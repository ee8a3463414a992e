//! Seeded Monte Carlo capacity sweeps.
//!
//! A sweep is a grid of points (SNR, rate reduction, antenna count,
//! precoder). Each trial draws one set of channels and evaluates every
//! point on that same draw, so comparisons between points are paired.
//! Trials are independent and may run on any number of rayon workers; the
//! per-trial results are reduced in trial order, which keeps the output
//! bit-for-bit identical whatever the scheduling.

use std::cmp::Ordering;

use cpdsss_core::capacity::{
    downlink_effective_spectrum, reduced_bits_per_block, uplink_gram_spectrum,
};
use cpdsss_core::channel::draw_channel_range;
use cpdsss_core::precoder::build_precoder;
use cpdsss_core::{ChannelRealization, Direction, PrecoderKind};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, SweepKind};
use crate::{Error, Result};

/// Converts decibels to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// One coordinate of a sweep grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub snr_db: f64,
    pub l: usize,
    pub antennas: usize,
    pub direction: Direction,
    pub precoder: PrecoderKind,
}

impl SweepPoint {
    /// Output order: SNR, then L, antennas, direction, precoder.
    pub fn cmp_coords(&self, other: &Self) -> Ordering {
        self.snr_db
            .total_cmp(&other.snr_db)
            .then(self.l.cmp(&other.l))
            .then(self.antennas.cmp(&other.antennas))
            .then(self.direction.cmp(&other.direction))
            .then(self.precoder.cmp(&other.precoder))
    }
}

/// Aggregated result for one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub sweep: SweepKind,
    pub point: SweepPoint,
    pub capacity_mean_bps: f64,
    /// Sample standard deviation (n - 1 denominator); zero for one trial.
    pub capacity_std_bps: f64,
    /// `mean / ((N / L) W)`.
    pub code_rate_bits_per_symbol: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Per-trial capacities (bits/s) for every sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialTable {
    pub points: Vec<SweepPoint>,
    /// `values[trial][point]`.
    pub values: Vec<Vec<f64>>,
}

impl TrialTable {
    pub fn index_of(&self, point: &SweepPoint) -> Option<usize> {
        self.points
            .iter()
            .position(|p| p.cmp_coords(point) == Ordering::Equal)
    }

    /// Capacities of one point across trials.
    pub fn column(&self, index: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[index]).collect()
    }
}

fn sorted_unique_f64(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| a.total_cmp(b) == Ordering::Equal);
    v
}

fn sorted_unique(values: &[usize]) -> Vec<usize> {
    let mut v = values.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

fn trial_channels(cfg: &ExperimentConfig, trial: usize, antennas: usize) -> Result<Vec<ChannelRealization>> {
    let mut set = draw_channel_range(&cfg.channel, cfg.seed, trial..trial + 1, antennas)?;
    Ok(set.pop().expect("one trial requested"))
}

fn evaluate_single(cfg: &ExperimentConfig, channel: &ChannelRealization) -> Result<Vec<(SweepPoint, f64)>> {
    let snrs = sorted_unique_f64(&cfg.snr_grid_db);
    let ls = sorted_unique(&cfg.l_grid);
    let mut out = Vec::with_capacity(snrs.len() * ls.len() * cfg.precoders.len());
    for &precoder in &cfg.precoders {
        for &snr_db in &snrs {
            let snr = db_to_linear(snr_db);
            let prec = build_precoder(precoder, channel, snr)?;
            let gram: Vec<f64> = channel
                .gain_spectrum()
                .iter()
                .zip(prec.allocation())
                .map(|(g, a)| g * a)
                .collect();
            for &l in &ls {
                let bits = reduced_bits_per_block(&gram, l, snr)?;
                let point = SweepPoint {
                    snr_db,
                    l,
                    antennas: 1,
                    direction: Direction::Single,
                    precoder,
                };
                out.push((point, cfg.w_hz * bits));
            }
        }
    }
    Ok(out)
}

fn evaluate_antennas(
    cfg: &ExperimentConfig,
    channels: &[ChannelRealization],
) -> Result<Vec<(SweepPoint, f64)>> {
    let snrs = sorted_unique_f64(&cfg.snr_grid_db);
    let ls = sorted_unique(&cfg.l_grid);
    let mut out = Vec::new();
    for antennas in sorted_unique(&cfg.antenna_grid) {
        let subset = &channels[..antennas];
        for &precoder in &cfg.precoders {
            let (direction, gram) = match precoder {
                PrecoderKind::Ep => (Direction::Uplink, uplink_gram_spectrum(subset)?),
                PrecoderKind::Tr => (
                    Direction::Downlink,
                    downlink_effective_spectrum(subset)?
                        .into_iter()
                        .map(|e| e * e)
                        .collect(),
                ),
                PrecoderKind::Wf => {
                    return Err(Error::config(
                        "precoders",
                        "the antenna sweep supports EP (uplink) and TR (downlink) only",
                    ))
                }
            };
            for &snr_db in &snrs {
                let snr = db_to_linear(snr_db);
                for &l in &ls {
                    let bits = reduced_bits_per_block(&gram, l, snr)?;
                    let point = SweepPoint {
                        snr_db,
                        l,
                        antennas,
                        direction,
                        precoder,
                    };
                    out.push((point, cfg.w_hz * bits));
                }
            }
        }
    }
    Ok(out)
}

/// Capacities of every sweep point for trial `trial`.
pub fn evaluate_trial(cfg: &ExperimentConfig, trial: usize) -> Result<Vec<(SweepPoint, f64)>> {
    match cfg.sweep_kind {
        SweepKind::Snr | SweepKind::L => {
            let channels = trial_channels(cfg, trial, 1)?;
            evaluate_single(cfg, &channels[0])
        }
        SweepKind::Antenna => {
            let max = cfg.antenna_grid.iter().copied().max().unwrap_or(1);
            let channels = trial_channels(cfg, trial, max)?;
            evaluate_antennas(cfg, &channels)
        }
    }
}

/// Evaluates every trial on the current rayon pool.
pub fn run_trials(cfg: &ExperimentConfig) -> Result<TrialTable> {
    cfg.validate()?;
    let rows: Vec<Vec<(SweepPoint, f64)>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| evaluate_trial(cfg, t))
        .collect::<Result<_>>()?;
    let points: Vec<SweepPoint> = rows[0].iter().map(|(p, _)| *p).collect();
    let values = rows
        .into_iter()
        .map(|row| row.into_iter().map(|(_, v)| v).collect())
        .collect();
    Ok(TrialTable { points, values })
}

/// Mean and sample standard deviation, two-pass.
pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

/// Reduces a trial table to one record per point, sorted by coordinates.
pub fn aggregate(cfg: &ExperimentConfig, table: &TrialTable) -> Vec<SweepRecord> {
    let mut records: Vec<SweepRecord> = table
        .points
        .iter()
        .enumerate()
        .map(|(i, point)| {
            let (mean, std) = mean_and_std(&table.column(i));
            let symbols = (cfg.n / point.l) as f64;
            SweepRecord {
                sweep: cfg.sweep_kind,
                point: *point,
                capacity_mean_bps: mean,
                capacity_std_bps: std,
                code_rate_bits_per_symbol: mean / (symbols * cfg.w_hz),
                trials: table.values.len(),
                seed: cfg.seed,
            }
        })
        .collect();
    records.sort_by(|a, b| a.point.cmp_coords(&b.point));
    records
}

fn run_kind(cfg: &ExperimentConfig, kind: SweepKind) -> Result<Vec<SweepRecord>> {
    if cfg.sweep_kind != kind {
        return Err(Error::config(
            "sweep_kind",
            format!("expected a {kind} sweep, got {}", cfg.sweep_kind),
        ));
    }
    let table = run_trials(cfg)?;
    Ok(aggregate(cfg, &table))
}

/// Capacity against SNR for each precoder (and each L in the grid).
pub fn run_snr_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRecord>> {
    run_kind(cfg, SweepKind::Snr)
}

/// Capacity against the rate-reduction factor L.
pub fn run_l_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRecord>> {
    run_kind(cfg, SweepKind::L)
}

/// Uplink (EP) and downlink (TR) capacity against antenna count; the
/// first `M` channels of each trial are shared by every grid entry `>= M`.
pub fn run_antenna_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRecord>> {
    run_kind(cfg, SweepKind::Antenna)
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRecord>> {
    run_kind(cfg, cfg.sweep_kind)
}

#[cfg(test)]
mod tests {
    use super::*;
    use cpdsss_core::capacity::{
        capacity_downlink_mimo, capacity_ep, capacity_precoded, capacity_uplink_mimo,
    };
    use cpdsss_core::channel::draw_channel;
    use cpdsss_core::precoder::tr_precoder;
    use cpdsss_core::LinkConfig;

    fn small(kind: SweepKind) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::defaults(kind);
        cfg.n = 64;
        cfg.channel.n = 64;
        cfg.channel.num_taps = 8;
        cfg.channel.rolloff = 3.0;
        cfg.trials = 20;
        cfg.l_grid.retain(|&l| l <= 64);
        cfg.antenna_grid.retain(|&a| a <= 4);
        cfg
    }

    #[test]
    fn decibels() {
        assert_eq!(db_to_linear(0.0), 1.0);
        assert!((db_to_linear(-20.0) - 0.01).abs() < 1e-17);
    }

    #[test]
    fn single_trial_equals_direct_call() {
        let mut cfg = small(SweepKind::Snr);
        cfg.trials = 1;
        cfg.snr_grid_db = vec![-3.0];
        let records = run_snr_sweep(&cfg).unwrap();
        let ch = draw_channel(&cfg.channel, cfg.seed, 0).unwrap();
        let link = LinkConfig::new(64, cfg.w_hz, db_to_linear(-3.0));
        let ep = records.iter().find(|r| r.point.precoder == PrecoderKind::Ep).unwrap();
        assert_eq!(ep.capacity_mean_bps, capacity_ep(&ch, &link).unwrap().bits_per_second);
        assert_eq!(ep.capacity_std_bps, 0.0);
        let tr = records.iter().find(|r| r.point.precoder == PrecoderKind::Tr).unwrap();
        let direct = capacity_precoded(&ch, &tr_precoder(&ch).unwrap(), &link).unwrap();
        assert!((tr.capacity_mean_bps - direct.bits_per_second).abs() <= 1e-12 * direct.bits_per_second);
    }

    #[test]
    fn wf_dominates_on_every_trial() {
        let cfg = small(SweepKind::Snr);
        let table = run_trials(&cfg).unwrap();
        for (i, p) in table.points.iter().enumerate() {
            if p.precoder != PrecoderKind::Wf {
                continue;
            }
            for other in [PrecoderKind::Ep, PrecoderKind::Tr] {
                let j = table.index_of(&SweepPoint { precoder: other, ..*p }).unwrap();
                for row in &table.values {
                    assert!(row[i] >= row[j] - 1e-9 * cfg.w_hz, "{p:?} vs {other}");
                }
            }
        }
    }

    #[test]
    fn l_sweep_is_monotone_per_trial() {
        let cfg = small(SweepKind::L);
        let table = run_trials(&cfg).unwrap();
        for prec in [PrecoderKind::Ep, PrecoderKind::Tr] {
            let cols: Vec<Vec<f64>> = table
                .points
                .iter()
                .enumerate()
                .filter(|(_, p)| p.precoder == prec)
                .map(|(i, _)| table.column(i))
                .collect();
            for w in cols.windows(2) {
                for (a, b) in w[0].iter().zip(&w[1]) {
                    assert!(b <= &(a * (1.0 + 1e-12)));
                }
            }
        }
        let records = aggregate(&cfg, &table);
        for r in &records {
            let expected = r.capacity_mean_bps / ((64 / r.point.l) as f64 * cfg.w_hz);
            assert_eq!(r.code_rate_bits_per_symbol, expected);
        }
    }

    #[test]
    fn antenna_sweep_matches_direct_calls() {
        let mut cfg = small(SweepKind::Antenna);
        cfg.trials = 1;
        cfg.snr_grid_db = vec![-10.0];
        let records = run_antenna_sweep(&cfg).unwrap();
        let set = draw_channel_range(&cfg.channel, cfg.seed, 0..1, 4).unwrap();
        for r in &records {
            let m = r.point.antennas;
            let link = LinkConfig::new(64, cfg.w_hz, 0.1).with_antennas(m, r.point.direction);
            let direct = match r.point.direction {
                Direction::Uplink => capacity_uplink_mimo(&set[0][..m], &link),
                Direction::Downlink => capacity_downlink_mimo(&set[0][..m], &link),
                Direction::Single => unreachable!(),
            }
            .unwrap();
            assert!((r.capacity_mean_bps - direct.bits_per_second).abs() <= 1e-9 * direct.bits_per_second);
        }
    }

    #[test]
    fn one_antenna_matches_snr_sweep() {
        let mut ant = small(SweepKind::Antenna);
        ant.antenna_grid = vec![1];
        ant.snr_grid_db = vec![-6.0];
        ant.precoders = vec![PrecoderKind::Ep];
        let mut snr = small(SweepKind::Snr);
        snr.snr_grid_db = vec![-6.0];
        snr.precoders = vec![PrecoderKind::Ep];
        let a = run_antenna_sweep(&ant).unwrap();
        let s = run_snr_sweep(&snr).unwrap();
        assert_eq!(a[0].capacity_mean_bps, s[0].capacity_mean_bps);
        assert_eq!(a[0].capacity_std_bps, s[0].capacity_std_bps);
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let cfg = small(SweepKind::Snr);
        assert!(run_l_sweep(&cfg).unwrap_err().is_config());
    }

    #[test]
    fn records_sorted_and_independent_of_workers() {
        let cfg = small(SweepKind::Snr);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| run_snr_sweep(&cfg)).unwrap();
        let b = four.install(|| run_snr_sweep(&cfg)).unwrap();
        assert_eq!(a, b);
        for w in a.windows(2) {
            assert_eq!(w[0].point.cmp_coords(&w[1].point), Ordering::Less);
        }
    }

    #[test]
    fn streaming_statistics_agree() {
        let cfg = small(SweepKind::Snr);
        let table = run_trials(&cfg).unwrap();
        let records = aggregate(&cfg, &table);
        for r in &records {
            let col = table.column(table.index_of(&r.point).unwrap());
            // Welford
            let (mut n, mut mean, mut m2) = (0.0, 0.0, 0.0);
            for x in col {
                n += 1.0;
                let d = x - mean;
                mean += d / n;
                m2 += d * (x - mean);
            }
            let std = (m2 / (n - 1.0)).sqrt();
            assert!((mean - r.capacity_mean_bps).abs() <= 1e-12 * mean);
            assert!((std - r.capacity_std_bps).abs() <= 1e-9 * std.max(1e-300));
        }
    }

    #[test]
    fn sample_std() {
        assert_eq!(mean_and_std(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_and_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
