//! Seeded frequency-selective channel draws.
//!
//! Tap `k` is `g_k * sqrt(p_k)` with `g_k` circularly-symmetric unit-variance
//! complex Gaussian and `p_k` an exponential power-delay profile normalised
//! to unit sum. Every draw is a pure function of `(seed, trial, antenna)`:
//! the generator is ChaCha12 keyed from the seed, with the `(trial, antenna)`
//! pair selecting the stream, so trials can be generated in any order or in
//! parallel.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use crate::spectral::CirculantMatrix;
use crate::{Error, Result};

/// Human-readable name of the random stream construction.
pub const PRNG_ALGORITHM: &str =
    "ChaCha12 (rand_chacha 0.9): key = seed_from_u64(seed), stream = (trial << 32) | antenna; \
     complex Gaussian via Box-Muller on 53-bit uniforms in (0, 1]";

pub const DEFAULT_NUM_TAPS: usize = 130;
pub const DEFAULT_ROLLOFF: f64 = 25.0;
pub const DEFAULT_BLOCK_LEN: usize = 2048;

/// What the e-folding constant of the delay profile applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RolloffKind {
    /// `p_k ∝ exp(-k / rolloff)`.
    #[default]
    Power,
    /// `|h_k| ∝ exp(-k / rolloff)`, so `p_k ∝ exp(-2k / rolloff)`.
    Amplitude,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParams {
    pub num_taps: usize,
    pub rolloff: f64,
    pub rolloff_kind: RolloffKind,
    pub n: usize,
    pub normalize_per_realization: bool,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            num_taps: DEFAULT_NUM_TAPS,
            rolloff: DEFAULT_ROLLOFF,
            rolloff_kind: RolloffKind::Power,
            n: DEFAULT_BLOCK_LEN,
            normalize_per_realization: true,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if self.num_taps == 0 {
            return Err(Error::InvalidParameter {
                name: "num_taps",
                reason: "must be at least 1",
            });
        }
        if !(self.rolloff > 0.0) || !self.rolloff.is_finite() {
            return Err(Error::InvalidParameter {
                name: "rolloff",
                reason: "must be positive and finite",
            });
        }
        if self.n == 0 {
            return Err(Error::EmptyDimension);
        }
        if self.num_taps > self.n {
            return Err(Error::TooManyTaps {
                taps: self.num_taps,
                n: self.n,
            });
        }
        Ok(())
    }

    /// Power-delay profile `p_k`, summing to one.
    pub fn power_profile(&self) -> Vec<f64> {
        let decay = match self.rolloff_kind {
            RolloffKind::Power => 1.0 / self.rolloff,
            RolloffKind::Amplitude => 2.0 / self.rolloff,
        };
        let raw: Vec<f64> = (0..self.num_taps)
            .map(|k| libm::exp(-(k as f64) * decay))
            .collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|p| p / total).collect()
    }
}

/// One draw of the random channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    taps: Vec<Complex64>,
    circulant: CirculantMatrix,
    gain_spectrum: Vec<f64>,
}

impl ChannelRealization {
    /// Wraps an explicit impulse response zero-padded to length `n`.
    pub fn from_taps(taps: Vec<Complex64>, n: usize) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::EmptyDimension);
        }
        let circulant = CirculantMatrix::from_taps(&taps, n)?;
        let gain_spectrum = circulant.gram_spectrum();
        Ok(Self {
            taps,
            circulant,
            gain_spectrum,
        })
    }

    /// Channel with a flat unit frequency response.
    pub fn flat(n: usize) -> Result<Self> {
        Self::from_taps(alloc::vec![Complex64::new(1.0, 0.0)], n)
    }

    pub fn n(&self) -> usize {
        self.circulant.n()
    }

    pub fn taps(&self) -> &[Complex64] {
        &self.taps
    }

    pub fn circulant(&self) -> &CirculantMatrix {
        &self.circulant
    }

    /// `|H_i|^2` per bin.
    pub fn gain_spectrum(&self) -> &[f64] {
        &self.gain_spectrum
    }

    /// `sum |h_k|^2`.
    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|t| t.norm_sqr()).sum()
    }
}

/// Complex Gaussian source on one ChaCha12 stream.
pub struct GaussianSource {
    rng: ChaCha12Rng,
}

impl GaussianSource {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    /// Stream reserved for `(trial, antenna)`.
    pub fn for_channel(seed: u64, trial: u32, antenna: u32) -> Self {
        Self::new(seed, (u64::from(trial) << 32) | u64::from(antenna))
    }

    /// Uniform in `(0, 1]` with 53 bits of resolution.
    pub fn uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Circularly-symmetric complex Gaussian with `E|g|^2 = variance`.
    pub fn complex_gaussian(&mut self, variance: f64) -> Complex64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = libm::sqrt(-variance * libm::log(u1));
        let theta = 2.0 * PI * u2;
        Complex64::new(r * libm::cos(theta), r * libm::sin(theta))
    }
}

fn draw_on_stream(
    params: &ChannelParams,
    profile: &[f64],
    seed: u64,
    trial: u32,
    antenna: u32,
) -> Result<ChannelRealization> {
    let mut src = GaussianSource::for_channel(seed, trial, antenna);
    let mut taps: Vec<Complex64> = profile
        .iter()
        .map(|&p| src.complex_gaussian(1.0) * libm::sqrt(p))
        .collect();
    if params.normalize_per_realization {
        let energy: f64 = taps.iter().map(|t| t.norm_sqr()).sum();
        if energy > 0.0 {
            let k = 1.0 / libm::sqrt(energy);
            for t in &mut taps {
                *t *= k;
            }
        }
    }
    ChannelRealization::from_taps(taps, params.n)
}

fn stream_index(value: usize, name: &'static str) -> Result<u32> {
    u32::try_from(value).map_err(|_| Error::InvalidParameter {
        name,
        reason: "must fit in 32 bits",
    })
}

/// Realization `index` of the single-antenna channel.
pub fn draw_channel(params: &ChannelParams, seed: u64, index: usize) -> Result<ChannelRealization> {
    params.validate()?;
    let profile = params.power_profile();
    draw_on_stream(params, &profile, seed, stream_index(index, "index")?, 0)
}

/// `count` trials of `antennas` independent realizations each; entry
/// `[t][a]` is the same for every `count > t` and `antennas > a`.
pub fn draw_channel_set(
    params: &ChannelParams,
    seed: u64,
    count: usize,
    antennas: usize,
) -> Result<Vec<Vec<ChannelRealization>>> {
    draw_channel_range(params, seed, 0..count, antennas)
}

/// Like [`draw_channel_set`] for a sub-range of trial indices.
pub fn draw_channel_range(
    params: &ChannelParams,
    seed: u64,
    trials: core::ops::Range<usize>,
    antennas: usize,
) -> Result<Vec<Vec<ChannelRealization>>> {
    params.validate()?;
    if trials.is_empty() {
        return Err(Error::InvalidParameter {
            name: "count",
            reason: "must be at least 1",
        });
    }
    if antennas == 0 {
        return Err(Error::InvalidParameter {
            name: "antennas",
            reason: "must be at least 1",
        });
    }
    stream_index(trials.end - 1, "count")?;
    stream_index(antennas - 1, "antennas")?;
    let profile = params.power_profile();
    trials
        .map(|t| {
            (0..antennas)
                .map(|a| draw_on_stream(params, &profile, seed, t as u32, a as u32))
                .collect()
        })
        .collect()
}
