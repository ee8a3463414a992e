//! Circulant precoders: equal power, water-filling and time reversal.
//!
//! A circulant precoder `G` only reshapes the transmit power over the DFT
//! bins. Its per-bin power `|lambda_G,i|^2` is the `allocation`, and the
//! power constraint `tr(G^H G) = P_total` becomes `sum allocation = P_total`.
//! With unit symbol power the default budget is `P_total = N`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;

use crate::channel::ChannelRealization;
use crate::spectral::CirculantMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PrecoderKind {
    /// Equal power, no precoding.
    Ep,
    /// Water-filling.
    Wf,
    /// Time reversal.
    Tr,
}

impl PrecoderKind {
    pub const ALL: [PrecoderKind; 3] = [PrecoderKind::Ep, PrecoderKind::Wf, PrecoderKind::Tr];

    pub fn as_str(self) -> &'static str {
        match self {
            PrecoderKind::Ep => "EP",
            PrecoderKind::Wf => "WF",
            PrecoderKind::Tr => "TR",
        }
    }
}

impl fmt::Display for PrecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PrecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "EP" | "ep" => Ok(PrecoderKind::Ep),
            "WF" | "wf" => Ok(PrecoderKind::Wf),
            "TR" | "tr" => Ok(PrecoderKind::Tr),
            _ => Err(Error::InvalidParameter {
                name: "precoder",
                reason: "expected one of EP, WF, TR",
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderSpec {
    kind: PrecoderKind,
    g: CirculantMatrix,
    allocation: Vec<f64>,
    p_total: f64,
}

impl PrecoderSpec {
    pub fn kind(&self) -> PrecoderKind {
        self.kind
    }

    /// The precoding circulant `G`.
    pub fn matrix(&self) -> &CirculantMatrix {
        &self.g
    }

    /// Per-bin power `|lambda_G,i|^2`.
    pub fn allocation(&self) -> &[f64] {
        &self.allocation
    }

    pub fn p_total(&self) -> f64 {
        self.p_total
    }

    pub fn n(&self) -> usize {
        self.allocation.len()
    }
}

/// No precoding: `G = I`, one unit of power per bin.
pub fn ep_precoder(n: usize) -> Result<PrecoderSpec> {
    Ok(PrecoderSpec {
        kind: PrecoderKind::Ep,
        g: CirculantMatrix::identity(n)?,
        allocation: vec![1.0; n],
        p_total: n as f64,
    })
}

/// Solution of the water-filling problem.
#[derive(Debug, Clone, PartialEq)]
pub struct WaterFilling {
    /// Per-bin power `P_i`.
    pub allocation: Vec<f64>,
    /// Water level `mu = P_total / gamma_0`; active bins satisfy
    /// `noise / gain + P_i = mu`.
    pub water_level: f64,
    /// Number of bins with positive power.
    pub active: usize,
}

impl WaterFilling {
    /// Threshold `gamma_0` of the `gamma_i = P_total |H_i|^2 / noise` form.
    pub fn gamma_0(&self, p_total: f64) -> f64 {
        p_total / self.water_level
    }
}

/// Water-filling over bins with gains `|H_i|^2`.
///
/// Bins are sorted by `noise / gain`; for each active-set size `k` the water
/// level follows in closed form from the budget, and the largest `k` whose
/// weakest member still gets positive power is kept.
pub fn waterfill(gains: &[f64], p_total: f64, noise_power: f64) -> Result<WaterFilling> {
    if gains.is_empty() {
        return Err(Error::EmptyDimension);
    }
    if !(p_total > 0.0) || !p_total.is_finite() {
        return Err(Error::InvalidParameter {
            name: "p_total",
            reason: "must be positive and finite",
        });
    }
    if !(noise_power > 0.0) || !noise_power.is_finite() {
        return Err(Error::InvalidParameter {
            name: "noise_power",
            reason: "must be positive and finite",
        });
    }
    if let Some((index, &value)) = gains.iter().enumerate().find(|(_, g)| !(**g >= 0.0)) {
        return Err(Error::NegativeEigenvalue { index, value });
    }

    // inverse SNR per usable bin, strongest first
    let mut order: Vec<(f64, usize)> = gains
        .iter()
        .enumerate()
        .filter(|(_, &g)| g > 0.0)
        .map(|(i, &g)| (noise_power / g, i))
        .collect();
    if order.is_empty() {
        return Err(Error::NoWaterLevel);
    }
    order.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut best = (1, p_total + order[0].0);
    let mut floor_sum = 0.0;
    for (k, &(inv, _)) in order.iter().enumerate() {
        floor_sum += inv;
        let level = (p_total + floor_sum) / (k + 1) as f64;
        if level > inv {
            best = (k + 1, level);
        } else {
            break;
        }
    }
    let (active, water_level) = best;

    let mut allocation = vec![0.0; gains.len()];
    for &(inv, i) in &order[..active] {
        allocation[i] = water_level - inv;
    }
    Ok(WaterFilling {
        allocation,
        water_level,
        active,
    })
}

/// Per-bin water-filling powers `P_i`, summing to `p_total`.
pub fn waterfill_allocation(gains: &[f64], p_total: f64, noise_power: f64) -> Result<Vec<f64>> {
    waterfill(gains, p_total, noise_power).map(|w| w.allocation)
}

/// Water-filling precoder: eigenvalues `sqrt(P_i)` with zero phase, first
/// column by inverse DFT.
pub fn wf_precoder(
    channel: &ChannelRealization,
    p_total: f64,
    noise_power: f64,
) -> Result<PrecoderSpec> {
    let allocation = waterfill_allocation(channel.gain_spectrum(), p_total, noise_power)?;
    let spectrum = allocation
        .iter()
        .map(|&p| Complex64::new(libm::sqrt(p), 0.0))
        .collect();
    Ok(PrecoderSpec {
        kind: PrecoderKind::Wf,
        g: CirculantMatrix::from_spectrum(spectrum)?,
        allocation,
        p_total,
    })
}

/// Time-reversal precoder `G = H^H / sqrt(tr(H^H H) / N)`, with the trace
/// taken as the sum of `|H_i|^2`.
pub fn tr_precoder(channel: &ChannelRealization) -> Result<PrecoderSpec> {
    let n = channel.n();
    let trace: f64 = channel.gain_spectrum().iter().sum();
    if !(trace > 0.0) {
        return Err(Error::ZeroEnergyChannel);
    }
    let norm = n as f64 / trace;
    let allocation = channel.gain_spectrum().iter().map(|g| g * norm).collect();
    Ok(PrecoderSpec {
        kind: PrecoderKind::Tr,
        g: channel.circulant().hermitian().scale(libm::sqrt(norm)),
        allocation,
        p_total: n as f64,
    })
}

/// Builds the precoder of `kind` for a single-antenna link at linear SNR
/// `snr` (unit symbol power, budget `N`).
pub fn build_precoder(
    kind: PrecoderKind,
    channel: &ChannelRealization,
    snr: f64,
) -> Result<PrecoderSpec> {
    match kind {
        PrecoderKind::Ep => ep_precoder(channel.n()),
        PrecoderKind::Wf => wf_precoder(channel, channel.n() as f64, 1.0 / snr),
        PrecoderKind::Tr => tr_precoder(channel),
    }
}
