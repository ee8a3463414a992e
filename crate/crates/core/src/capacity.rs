//! Shannon capacity of the despread CP-DSSS link.
//!
//! Everything is evaluated from circulant spectra:
//!
//! - single antenna, precoder `G`: `sum_i log2(1 + snr |H_i|^2 |G_i|^2)`;
//! - symbol-rate reduction by `L`: the `N/L`-dimensional Gram
//!   `E_L^H G^H H^H H G E_L` is again circulant, its eigenvalues are the
//!   aliased sums `mu_k = (1/L) sum_m lambda_{k + m N/L}` of the full
//!   spectrum, and each symbol carries `L` times the power;
//! - uplink with several receive antennas: `|I + snr H H^H| =
//!   |I + snr H^H H|` and `H^H H = sum_m H_m^H H_m` is circulant;
//! - downlink with per-antenna time reversal: `H G = sum_j H_j G_j` is
//!   circulant.
//!
//! Capacities exclude cyclic-prefix overhead.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::channel::ChannelRealization;
use crate::precoder::{tr_precoder, PrecoderKind, PrecoderSpec};
use crate::spectral::{log2_1p, CirculantMatrix, DenseMatrix};
use crate::{Error, Result};

/// Bin bandwidth of the reference numerology, Hz.
pub const DEFAULT_BIN_WIDTH_HZ: f64 = 15_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum Direction {
    #[default]
    Single,
    Uplink,
    Downlink,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Single => "single",
            Direction::Uplink => "uplink",
            Direction::Downlink => "downlink",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    /// Block length `N`.
    pub n: usize,
    /// Bin bandwidth `W` in Hz.
    pub w_hz: f64,
    /// Linear `sigma_s^2 / sigma_v^2`.
    pub snr: f64,
    /// Symbol-rate reduction factor `L`.
    pub reduction_l: usize,
    pub antenna_count: usize,
    pub direction: Direction,
}

impl LinkConfig {
    pub fn new(n: usize, w_hz: f64, snr: f64) -> Self {
        Self {
            n,
            w_hz,
            snr,
            reduction_l: 1,
            antenna_count: 1,
            direction: Direction::Single,
        }
    }

    pub fn with_reduction(mut self, l: usize) -> Self {
        self.reduction_l = l;
        self
    }

    pub fn with_antennas(mut self, antenna_count: usize, direction: Direction) -> Self {
        self.antenna_count = antenna_count;
        self.direction = direction;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::EmptyDimension);
        }
        if !(self.snr > 0.0) || !self.snr.is_finite() {
            return Err(Error::InvalidParameter {
                name: "snr",
                reason: "must be positive and finite",
            });
        }
        if !(self.w_hz > 0.0) || !self.w_hz.is_finite() {
            return Err(Error::InvalidParameter {
                name: "w_hz",
                reason: "must be positive and finite",
            });
        }
        if self.reduction_l == 0 || self.n % self.reduction_l != 0 {
            return Err(Error::ReductionDoesNotDivide {
                l: self.reduction_l,
                n: self.n,
            });
        }
        if self.antenna_count == 0 {
            return Err(Error::InvalidParameter {
                name: "antenna_count",
                reason: "must be at least 1",
            });
        }
        Ok(())
    }

    /// Symbols per block, `N / L`.
    pub fn symbols_per_block(&self) -> usize {
        self.n / self.reduction_l
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityResult {
    pub bits_per_block: f64,
    pub bits_per_second: f64,
    pub config: LinkConfig,
    pub precoder_kind: PrecoderKind,
}

impl CapacityResult {
    fn new(bits_per_block: f64, config: &LinkConfig, precoder_kind: PrecoderKind) -> Self {
        Self {
            bits_per_block,
            bits_per_second: config.w_hz * bits_per_block,
            config: config.clone(),
            precoder_kind,
        }
    }

    /// Bits each transmitted symbol must carry, `C / ((N/L) W)`.
    pub fn code_rate_bits_per_symbol(&self) -> f64 {
        self.bits_per_block / self.config.symbols_per_block() as f64
    }
}

/// The `N x N/L` expander: `I_{N/L}` with `L - 1` zero rows after each row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExpanderSpec {
    pub n: usize,
    pub l: usize,
}

impl ExpanderSpec {
    pub fn new(n: usize, l: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyDimension);
        }
        if l == 0 || n % l != 0 {
            return Err(Error::ReductionDoesNotDivide { l, n });
        }
        Ok(Self { n, l })
    }

    pub fn columns(&self) -> usize {
        self.n / self.l
    }

    /// Places `N/L` symbols on every `L`-th sample.
    pub fn expand(&self, symbols: &[num_complex::Complex64]) -> Result<Vec<num_complex::Complex64>> {
        if symbols.len() != self.columns() {
            return Err(Error::DimensionMismatch {
                expected: self.columns(),
                actual: symbols.len(),
            });
        }
        let mut out = vec![num_complex::Complex64::new(0.0, 0.0); self.n];
        for (k, &s) in symbols.iter().enumerate() {
            out[k * self.l] = s;
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> Result<DenseMatrix> {
        let l = self.l;
        DenseMatrix::from_fn(self.n, self.columns(), |r, c| {
            if r == c * l {
                num_complex::Complex64::new(1.0, 0.0)
            } else {
                num_complex::Complex64::new(0.0, 0.0)
            }
        })
    }
}

/// Aliased spectrum `mu_k = (1/L) sum_{m<L} lambda_{k + m N/L}`: the
/// eigenvalues of `E_L^H C E_L` for a circulant `C` with eigenvalues
/// `lambda`.
pub fn aliased_spectrum(spectrum: &[f64], l: usize) -> Result<Vec<f64>> {
    let n = spectrum.len();
    if n == 0 {
        return Err(Error::EmptyDimension);
    }
    if l == 0 || n % l != 0 {
        return Err(Error::ReductionDoesNotDivide { l, n });
    }
    let m = n / l;
    let scale = 1.0 / l as f64;
    Ok((0..m)
        .map(|k| (0..l).map(|j| spectrum[k + j * m]).sum::<f64>() * scale)
        .collect())
}

/// Bits per block for an effective Gram spectrum under rate reduction `l`:
/// `sum_k log2(1 + l snr mu_k)`.
pub fn reduced_bits_per_block(gram_spectrum: &[f64], l: usize, snr: f64) -> Result<f64> {
    let mu = aliased_spectrum(gram_spectrum, l)?;
    let scale = l as f64 * snr;
    let mut acc = 0.0;
    for (index, &value) in mu.iter().enumerate() {
        if value < -crate::spectral::NEGATIVE_EIGENVALUE_TOLERANCE || value.is_nan() {
            return Err(Error::NegativeEigenvalue { index, value });
        }
        acc += log2_1p(scale * value.max(0.0));
    }
    Ok(acc)
}

fn check_channel(channel: &ChannelRealization, cfg: &LinkConfig) -> Result<()> {
    if channel.n() != cfg.n {
        return Err(Error::DimensionMismatch {
            expected: cfg.n,
            actual: channel.n(),
        });
    }
    Ok(())
}

fn require_single(cfg: &LinkConfig) -> Result<()> {
    if cfg.reduction_l != 1 {
        return Err(Error::InvalidParameter {
            name: "reduction_l",
            reason: "must be 1 without rate reduction",
        });
    }
    if cfg.antenna_count != 1 {
        return Err(Error::InvalidParameter {
            name: "antenna_count",
            reason: "must be 1 for a single-antenna link",
        });
    }
    Ok(())
}

/// Capacity without precoding: `W sum_i log2(1 + snr |H_i|^2)`.
pub fn capacity_ep(channel: &ChannelRealization, cfg: &LinkConfig) -> Result<CapacityResult> {
    cfg.validate()?;
    require_single(cfg)?;
    check_channel(channel, cfg)?;
    let bits = crate::spectral::log2det_identity_plus_scaled_gram(channel.gain_spectrum(), cfg.snr)?;
    Ok(CapacityResult::new(bits, cfg, PrecoderKind::Ep))
}

fn precoded_gram(channel: &ChannelRealization, prec: &PrecoderSpec) -> Result<Vec<f64>> {
    if prec.n() != channel.n() {
        return Err(Error::DimensionMismatch {
            expected: channel.n(),
            actual: prec.n(),
        });
    }
    Ok(channel
        .gain_spectrum()
        .iter()
        .zip(prec.allocation())
        .map(|(g, a)| g * a)
        .collect())
}

/// Capacity with a circulant precoder:
/// `W sum_i log2(1 + snr |H_i|^2 |G_i|^2)`.
pub fn capacity_precoded(
    channel: &ChannelRealization,
    prec: &PrecoderSpec,
    cfg: &LinkConfig,
) -> Result<CapacityResult> {
    cfg.validate()?;
    require_single(cfg)?;
    check_channel(channel, cfg)?;
    let gram = precoded_gram(channel, prec)?;
    let bits = crate::spectral::log2det_identity_plus_scaled_gram(&gram, cfg.snr)?;
    Ok(CapacityResult::new(bits, cfg, prec.kind()))
}

/// Capacity with `N/L` symbols per block, each at `L` times the power:
/// `W log2 |I + L snr H G E_L E_L^H G^H H^H|`.
pub fn capacity_rate_reduced(
    channel: &ChannelRealization,
    prec: &PrecoderSpec,
    cfg: &LinkConfig,
) -> Result<CapacityResult> {
    cfg.validate()?;
    if cfg.antenna_count != 1 {
        return Err(Error::InvalidParameter {
            name: "antenna_count",
            reason: "must be 1 for a single-antenna link",
        });
    }
    check_channel(channel, cfg)?;
    let gram = precoded_gram(channel, prec)?;
    let bits = reduced_bits_per_block(&gram, cfg.reduction_l, cfg.snr)?;
    Ok(CapacityResult::new(bits, cfg, prec.kind()))
}

fn check_antennas(channels: &[ChannelRealization], cfg: &LinkConfig) -> Result<()> {
    if channels.is_empty() {
        return Err(Error::NoChannels);
    }
    if channels.len() != cfg.antenna_count {
        return Err(Error::DimensionMismatch {
            expected: cfg.antenna_count,
            actual: channels.len(),
        });
    }
    channels.iter().try_for_each(|ch| check_channel(ch, cfg))
}

/// Spectrum `sum_m |H_i^(m)|^2` of the stacked uplink Gram `H^H H`.
pub fn uplink_gram_spectrum(channels: &[ChannelRealization]) -> Result<Vec<f64>> {
    let first = channels.first().ok_or(Error::NoChannels)?;
    let mut gram = vec![0.0; first.n()];
    for ch in channels {
        if ch.n() != first.n() {
            return Err(Error::DimensionMismatch {
                expected: first.n(),
                actual: ch.n(),
            });
        }
        for (acc, g) in gram.iter_mut().zip(ch.gain_spectrum()) {
            *acc += g;
        }
    }
    Ok(gram)
}

/// Uplink to `M` receive antennas without precoding. The stacked channel's
/// Gram `H^H H = sum_m H_m^H H_m` has spectrum `sum_m |H_i^(m)|^2`.
pub fn capacity_uplink_mimo(
    channels: &[ChannelRealization],
    cfg: &LinkConfig,
) -> Result<CapacityResult> {
    cfg.validate()?;
    check_antennas(channels, cfg)?;
    let gram = uplink_gram_spectrum(channels)?;
    let bits = reduced_bits_per_block(&gram, cfg.reduction_l, cfg.snr)?;
    Ok(CapacityResult::new(bits, cfg, PrecoderKind::Ep))
}

/// Per-antenna time-reversal precoders
/// `G_j = H_j^H / sqrt(tr(H_j^H H_j) M / N)`, so that `tr(G G^H) = N`.
pub fn downlink_tr_precoders(channels: &[ChannelRealization]) -> Result<Vec<CirculantMatrix>> {
    if channels.is_empty() {
        return Err(Error::NoChannels);
    }
    let m = channels.len() as f64;
    channels
        .iter()
        .map(|ch| {
            // single-antenna TR with the extra 1/sqrt(M)
            tr_precoder(ch).map(|p| p.matrix().scale(1.0 / libm::sqrt(m)))
        })
        .collect()
}

/// Effective downlink spectrum `sum_j H_j,i G_j,i`; with time reversal it is
/// `sum_j |H_j,i|^2 / sqrt(tr_j M / N)`, real and non-negative.
pub fn downlink_effective_spectrum(channels: &[ChannelRealization]) -> Result<Vec<f64>> {
    if channels.is_empty() {
        return Err(Error::NoChannels);
    }
    let n = channels[0].n();
    let m = channels.len() as f64;
    let mut eff = vec![0.0; n];
    for ch in channels {
        if ch.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: ch.n(),
            });
        }
        let trace: f64 = ch.gain_spectrum().iter().sum();
        if !(trace > 0.0) {
            return Err(Error::ZeroEnergyChannel);
        }
        let k = 1.0 / libm::sqrt(trace * m / n as f64);
        for (acc, g) in eff.iter_mut().zip(ch.gain_spectrum()) {
            *acc += g * k;
        }
    }
    Ok(eff)
}

/// Downlink from `M` transmit antennas with per-antenna time reversal.
pub fn capacity_downlink_mimo(
    channels: &[ChannelRealization],
    cfg: &LinkConfig,
) -> Result<CapacityResult> {
    cfg.validate()?;
    check_antennas(channels, cfg)?;
    let gram: Vec<f64> = downlink_effective_spectrum(channels)?
        .into_iter()
        .map(|e| e * e)
        .collect();
    let bits = reduced_bits_per_block(&gram, cfg.reduction_l, cfg.snr)?;
    Ok(CapacityResult::new(bits, cfg, PrecoderKind::Tr))
}
