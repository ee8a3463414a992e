//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on runtime or validation failure, 2 on a
//! usage or configuration error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use cpdsss_core::channel::draw_channel_range;
use cpdsss_core::RolloffKind;

use crate::config::{parse_precoders, ConfigFile, ExperimentConfig, SweepKind};
use crate::experiments::run_sweep;
use crate::io::{save_sweep, write_channels_bin, write_channels_csv};
use crate::oracle::run_validation_suite;
use crate::{Error, Result};

/// Directory for sweep tables when `--out` is not given.
pub const OUT_DIR_ENV: &str = "CPDSSS_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "cpdsss", version, about = "CP-DSSS capacity sweeps and model checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Capacity against SNR for each precoder.
    SweepSnr(SweepArgs),
    /// Capacity against the rate-reduction factor L.
    SweepL(SweepArgs),
    /// Uplink (EP) and downlink (TR) capacity against antenna count.
    SweepAntennas(SweepArgs),
    /// Cross-check the spectral model against dense linear algebra.
    Validate {
        #[arg(long, default_value_t = crate::config::DEFAULT_SEED)]
        seed: u64,
    },
    /// Write channel realizations to a file.
    DumpChannels(DumpArgs),
}

#[derive(Debug, Args)]
struct ChannelArgs {
    /// Block length N.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    num_taps: Option<usize>,
    /// E-folding constant of the delay profile, in taps.
    #[arg(long)]
    rolloff: Option<f64>,
    #[arg(long, value_enum)]
    rolloff_kind: Option<RolloffArg>,
    /// Keep raw draws instead of scaling each to unit energy.
    #[arg(long)]
    no_normalize: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// TOML file with any subset of the configuration keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Bin width W in Hz.
    #[arg(long)]
    w_hz: Option<f64>,
    /// Comma-separated SNR grid in dB.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    snr_db: Option<Vec<f64>>,
    /// Comma-separated rate-reduction factors.
    #[arg(long, value_delimiter = ',')]
    l: Option<Vec<usize>>,
    /// Comma-separated antenna counts.
    #[arg(long, value_delimiter = ',')]
    antennas: Option<Vec<usize>>,
    /// Comma-separated precoders (EP, WF, TR).
    #[arg(long, value_delimiter = ',')]
    precoders: Option<Vec<String>>,
    #[command(flatten)]
    channel: ChannelArgs,
    /// Output CSV; a `.meta.toml` sidecar is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RolloffArg {
    Power,
    Amplitude,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DumpFormat {
    Csv,
    Bin,
}

#[derive(Debug, Args)]
struct DumpArgs {
    #[arg(long, default_value_t = crate::config::DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Index of the first trial.
    #[arg(long, default_value_t = 0)]
    first_trial: usize,
    #[arg(long, default_value_t = 1)]
    antennas: usize,
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long, value_enum, default_value_t = DumpFormat::Csv)]
    format: DumpFormat,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ChannelArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(n) = self.n {
            cfg.n = n;
            cfg.channel.n = n;
        }
        if let Some(v) = self.num_taps {
            cfg.channel.num_taps = v;
        }
        if let Some(v) = self.rolloff {
            cfg.channel.rolloff = v;
        }
        if let Some(v) = self.rolloff_kind {
            cfg.channel.rolloff_kind = match v {
                RolloffArg::Power => RolloffKind::Power,
                RolloffArg::Amplitude => RolloffKind::Amplitude,
            };
        }
        if self.no_normalize {
            cfg.channel.normalize_per_realization = false;
        }
    }
}

/// Layers defaults, the config file and flags into one configuration.
fn build_config(kind: SweepKind, args: &SweepArgs) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::defaults(kind);
    if let Some(path) = &args.config {
        let file = ConfigFile::load(path)?;
        if let Some(k) = &file.sweep_kind {
            if k.parse::<SweepKind>()? != kind {
                return Err(Error::config(
                    "sweep_kind",
                    format!("config file is for a {k} sweep, command is {kind}"),
                ));
            }
        }
        file.apply(&mut cfg)?;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.trials {
        cfg.trials = v;
    }
    if let Some(v) = args.w_hz {
        cfg.w_hz = v;
    }
    if let Some(v) = &args.snr_db {
        cfg.snr_grid_db = v.clone();
    }
    if let Some(v) = &args.l {
        cfg.l_grid = v.clone();
    }
    if let Some(v) = &args.antennas {
        cfg.antenna_grid = v.clone();
    }
    if let Some(v) = &args.precoders {
        cfg.precoders = parse_precoders(v)?;
    }
    args.channel.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

fn output_path(kind: SweepKind, out: Option<&Path>) -> Option<PathBuf> {
    out.map(Path::to_path_buf).or_else(|| {
        std::env::var_os(OUT_DIR_ENV).map(|dir| PathBuf::from(dir).join(format!("sweep_{kind}.csv")))
    })
}

fn run_sweep_command(kind: SweepKind, args: &SweepArgs) -> Result<()> {
    let cfg = build_config(kind, args)?;
    let records = match args.workers {
        Some(0) => return Err(Error::config("workers", "must be at least 1")),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::config("workers", e.to_string()))?
            .install(|| run_sweep(&cfg))?,
        None => run_sweep(&cfg)?,
    };
    match output_path(kind, args.out.as_deref()) {
        Some(path) => {
            save_sweep(&path, &cfg, &records)?;
            eprintln!("wrote {} rows to {}", records.len(), path.display());
        }
        None => {
            let text = crate::io::sweep_csv_string(&cfg, &records)?;
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| Error::io("<stdout>", e))?;
        }
    }
    Ok(())
}

fn run_dump(args: &DumpArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::defaults(SweepKind::Snr);
    args.channel.apply(&mut cfg);
    if args.antennas == 0 {
        return Err(Error::config("antennas", "must be at least 1"));
    }
    cfg.channel.validate().map_err(|e| Error::config("channel", e.to_string()))?;
    let range = args.first_trial..args.first_trial + args.trials;
    let set = draw_channel_range(&cfg.channel, args.seed, range, args.antennas)?;
    let mut buf = Vec::new();
    match args.format {
        DumpFormat::Csv => write_channels_csv(&mut buf, &set)?,
        DumpFormat::Bin => write_channels_bin(&mut buf, &set)?,
    }
    match &args.out {
        Some(path) => crate::io::write_atomic(path, &buf),
        None => std::io::stdout()
            .write_all(&buf)
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn run_validate(seed: u64) -> Result<bool> {
    let outcomes = run_validation_suite(seed)?;
    let mut all = true;
    for o in &outcomes {
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {}: {}", o.name, o.detail);
        all &= o.passed;
    }
    Ok(all)
}

fn exit_code(e: &Error) -> i32 {
    if e.is_config() {
        2
    } else {
        1
    }
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit code.
pub fn parse_and_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match &cli.command {
        Command::SweepSnr(a) => run_sweep_command(SweepKind::Snr, a).map(|_| true),
        Command::SweepL(a) => run_sweep_command(SweepKind::L, a).map(|_| true),
        Command::SweepAntennas(a) => run_sweep_command(SweepKind::Antenna, a).map(|_| true),
        Command::Validate { seed } => run_validate(*seed),
        Command::DumpChannels(a) => run_dump(a).map(|_| true),
    };
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sweep_args(argv: &[&str]) -> SweepArgs {
        let mut full = vec!["cpdsss", "sweep-snr"];
        full.extend_from_slice(argv);
        match Cli::try_parse_from(full).unwrap().command {
            Command::SweepSnr(a) => a,
            _ => unreachable!(),
        }
    }

    #[test]
    fn flags_override_defaults() {
        let a = sweep_args(&["--snr-db", "-20,-10,0", "--trials", "5", "--n", "64", "--num-taps", "16", "--precoders", "tr,EP"]);
        let cfg = build_config(SweepKind::Snr, &a).unwrap();
        assert_eq!(cfg.snr_grid_db, vec![-20.0, -10.0, 0.0]);
        assert_eq!(cfg.trials, 5);
        assert_eq!((cfg.n, cfg.channel.n), (64, 64));
        assert_eq!(cfg.precoders.len(), 2);
    }

    #[test]
    fn config_file_then_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "trials = 9\nseed = 4\n").unwrap();
        let a = sweep_args(&["--config", path.to_str().unwrap(), "--seed", "8"]);
        let cfg = build_config(SweepKind::Snr, &a).unwrap();
        assert_eq!((cfg.trials, cfg.seed), (9, 8));
    }

    #[test]
    fn mismatched_config_kind() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "sweep_kind = \"l\"\n").unwrap();
        let a = sweep_args(&["--config", path.to_str().unwrap()]);
        assert!(build_config(SweepKind::Snr, &a).unwrap_err().is_config());
    }

    #[test]
    fn bad_l_is_a_config_error() {
        let a = sweep_args(&["--l", "3"]);
        let e = build_config(SweepKind::Snr, &a).unwrap_err();
        assert_eq!(exit_code(&e), 2);
        assert!(e.to_string().contains("l must divide n"), "{e}");
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(parse_and_dispatch(["cpdsss", "no-such-command"]), 2);
        assert_eq!(parse_and_dispatch(["cpdsss", "sweep-snr", "--trials", "many"]), 2);
        assert_eq!(parse_and_dispatch(["cpdsss", "--help"]), 0);
    }
}
