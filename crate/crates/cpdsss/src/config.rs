//! Experiment configuration and its flat TOML file form.
//!
//! Every key of the file mirrors one [`ExperimentConfig`] field (channel
//! parameters are flattened). Values are layered: built-in defaults for the
//! sweep kind, then the file, then command-line overrides.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use cpdsss_core::channel::{
    ChannelParams, RolloffKind, DEFAULT_BLOCK_LEN,
    PRNG_ALGORITHM,
};
use cpdsss_core::capacity::DEFAULT_BIN_WIDTH_HZ;
use cpdsss_core::PrecoderKind;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const DEFAULT_TRIALS: usize = 1000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_L_GRID: [usize; 12] = [1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048];
pub const DEFAULT_ANTENNA_GRID: [usize; 7] = [1, 2, 4, 8, 16, 32, 64];
/// Fixed SNR of the rate-reduction sweep, dB.
pub const DEFAULT_L_SWEEP_SNR_DB: f64 = -20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepKind {
    Snr,
    L,
    Antenna,
}

impl SweepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepKind::Snr => "snr",
            SweepKind::L => "l",
            SweepKind::Antenna => "antennas",
        }
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "snr" => Ok(SweepKind::Snr),
            "l" => Ok(SweepKind::L),
            "antennas" => Ok(SweepKind::Antenna),
            other => Err(Error::config(
                "sweep_kind",
                format!("unknown sweep kind {other:?} (expected snr, l or antennas)"),
            )),
        }
    }
}

/// SNR grid from -30 dB to +30 dB in 2 dB steps.
pub fn default_snr_grid_db() -> Vec<f64> {
    (-15..=15).map(|k| 2.0 * k as f64).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub sweep_kind: SweepKind,
    pub snr_grid_db: Vec<f64>,
    pub l_grid: Vec<usize>,
    pub antenna_grid: Vec<usize>,
    pub trials: usize,
    pub channel: ChannelParams,
    pub precoders: Vec<PrecoderKind>,
    pub seed: u64,
    pub n: usize,
    pub w_hz: f64,
}

impl ExperimentConfig {
    /// Reference setup for each sweep: N = 2048, W = 15 kHz, 130-tap
    /// channels with roll-off 25, 1000 trials.
    pub fn defaults(sweep_kind: SweepKind) -> Self {
        let (snr_grid_db, l_grid, antenna_grid, precoders) = match sweep_kind {
            SweepKind::Snr => (
                default_snr_grid_db(),
                vec![1],
                vec![1],
                PrecoderKind::ALL.to_vec(),
            ),
            SweepKind::L => (
                vec![DEFAULT_L_SWEEP_SNR_DB],
                DEFAULT_L_GRID.to_vec(),
                vec![1],
                vec![PrecoderKind::Ep, PrecoderKind::Tr],
            ),
            SweepKind::Antenna => (
                default_snr_grid_db(),
                vec![1],
                DEFAULT_ANTENNA_GRID.to_vec(),
                vec![PrecoderKind::Ep, PrecoderKind::Tr],
            ),
        };
        Self {
            sweep_kind,
            snr_grid_db,
            l_grid,
            antenna_grid,
            trials: DEFAULT_TRIALS,
            channel: ChannelParams::default(),
            precoders,
            seed: DEFAULT_SEED,
            n: DEFAULT_BLOCK_LEN,
            w_hz: DEFAULT_BIN_WIDTH_HZ,
        }
    }

    /// Checks every invariant, reporting the first offending field.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::config("n", "must be at least 1"));
        }
        if self.channel.n != self.n {
            return Err(Error::config("n", "channel block length differs from n"));
        }
        if !(self.w_hz > 0.0) || !self.w_hz.is_finite() {
            return Err(Error::config("w_hz", "must be positive and finite"));
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if u32::try_from(self.trials).is_err() {
            return Err(Error::config("trials", "must fit in 32 bits"));
        }
        if self.snr_grid_db.is_empty() {
            return Err(Error::config("snr_grid_db", "must not be empty"));
        }
        if let Some(bad) = self.snr_grid_db.iter().find(|s| !s.is_finite()) {
            return Err(Error::config("snr_grid_db", format!("{bad} is not finite")));
        }
        if self.l_grid.is_empty() {
            return Err(Error::config("l_grid", "must not be empty"));
        }
        if let Some(&l) = self.l_grid.iter().find(|&&l| l == 0 || self.n % l != 0) {
            return Err(Error::config(
                "l_grid",
                format!("l must divide n (l={l}, n={})", self.n),
            ));
        }
        if self.antenna_grid.is_empty() {
            return Err(Error::config("antenna_grid", "must not be empty"));
        }
        if let Some(&a) = self
            .antenna_grid
            .iter()
            .find(|&&a| a == 0 || u32::try_from(a).is_err())
        {
            return Err(Error::config(
                "antenna_grid",
                format!("antenna count {a} out of range"),
            ));
        }
        if self.sweep_kind != SweepKind::Antenna && self.antenna_grid != [1] {
            return Err(Error::config(
                "antenna_grid",
                "only the antenna sweep uses more than one antenna",
            ));
        }
        if self.precoders.is_empty() {
            return Err(Error::config("precoders", "must not be empty"));
        }
        if self.sweep_kind == SweepKind::Antenna && self.precoders.contains(&PrecoderKind::Wf) {
            return Err(Error::config(
                "precoders",
                "the antenna sweep supports EP (uplink) and TR (downlink) only",
            ));
        }
        if self.channel.num_taps == 0 {
            return Err(Error::config("num_taps", "must be at least 1"));
        }
        if self.channel.num_taps > self.n {
            return Err(Error::config(
                "num_taps",
                format!("{} taps exceed n={}", self.channel.num_taps, self.n),
            ));
        }
        if !(self.channel.rolloff > 0.0) || !self.channel.rolloff.is_finite() {
            return Err(Error::config("rolloff", "must be positive and finite"));
        }
        Ok(())
    }

    /// The file form with every key filled in.
    pub fn to_file(&self) -> ConfigFile {
        ConfigFile {
            sweep_kind: Some(self.sweep_kind.as_str().to_owned()),
            snr_grid_db: Some(self.snr_grid_db.clone()),
            l_grid: Some(self.l_grid.clone()),
            antenna_grid: Some(self.antenna_grid.clone()),
            trials: Some(self.trials),
            seed: Some(self.seed),
            n: Some(self.n),
            w_hz: Some(self.w_hz),
            precoders: Some(self.precoders.iter().map(|p| p.as_str().to_owned()).collect()),
            num_taps: Some(self.channel.num_taps),
            rolloff: Some(self.channel.rolloff),
            rolloff_kind: Some(rolloff_kind_name(self.channel.rolloff_kind).to_owned()),
            normalize_per_realization: Some(self.channel.normalize_per_realization),
            prng_algorithm: Some(PRNG_ALGORITHM.to_owned()),
        }
    }
}

fn rolloff_kind_name(kind: RolloffKind) -> &'static str {
    match kind {
        RolloffKind::Power => "power",
        RolloffKind::Amplitude => "amplitude",
    }
}

fn parse_rolloff_kind(s: &str) -> Result<RolloffKind> {
    match s {
        "power" => Ok(RolloffKind::Power),
        "amplitude" => Ok(RolloffKind::Amplitude),
        other => Err(Error::config(
            "rolloff_kind",
            format!("unknown value {other:?} (expected power or amplitude)"),
        )),
    }
}

/// Parses and de-duplicates precoder names, keeping EP, WF, TR order.
pub fn parse_precoders<S: AsRef<str>>(names: &[S]) -> Result<Vec<PrecoderKind>> {
    let mut out = Vec::new();
    for name in names {
        let kind = name.as_ref().parse::<PrecoderKind>().map_err(|_| {
            Error::config(
                "precoders",
                format!("unknown precoder {:?} (expected EP, WF or TR)", name.as_ref()),
            )
        })?;
        out.push(kind);
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Flat key-value form of [`ExperimentConfig`]; every key is optional and
/// unset keys keep their defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_grid_db: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_grid: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub antenna_grid: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precoders: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_taps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rolloff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rolloff_kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalize_per_realization: Option<bool>,
    /// Present in metadata sidecars; must match this build's generator.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prng_algorithm: Option<String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let message = e.message().trim().to_owned();
            Error::config("config", message)
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config always serializes")
    }

    /// Overwrites `cfg` with every key set here.
    pub fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        if let Some(kind) = &self.sweep_kind {
            cfg.sweep_kind = kind.parse()?;
        }
        if let Some(v) = &self.snr_grid_db {
            cfg.snr_grid_db = v.clone();
        }
        if let Some(v) = &self.l_grid {
            cfg.l_grid = v.clone();
        }
        if let Some(v) = &self.antenna_grid {
            cfg.antenna_grid = v.clone();
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.n {
            cfg.n = v;
            cfg.channel.n = v;
        }
        if let Some(v) = self.w_hz {
            cfg.w_hz = v;
        }
        if let Some(v) = &self.precoders {
            cfg.precoders = parse_precoders(v)?;
        }
        if let Some(v) = self.num_taps {
            cfg.channel.num_taps = v;
        }
        if let Some(v) = self.rolloff {
            cfg.channel.rolloff = v;
        }
        if let Some(v) = &self.rolloff_kind {
            cfg.channel.rolloff_kind = parse_rolloff_kind(v)?;
        }
        if let Some(v) = self.normalize_per_realization {
            cfg.channel.normalize_per_realization = v;
        }
        if let Some(v) = &self.prng_algorithm {
            if v != PRNG_ALGORITHM {
                return Err(Error::config(
                    "prng_algorithm",
                    "written by a different random generator; results would not reproduce",
                ));
            }
        }
        Ok(())
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::defaults(SweepKind::Snr)
    }
}
