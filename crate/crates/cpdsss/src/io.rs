//! Result tables, metadata sidecars and channel dumps.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use cpdsss_core::channel::PRNG_ALGORITHM;
use cpdsss_core::{ChannelRealization, Complex64};

use crate::config::{ConfigFile, ExperimentConfig};
use crate::experiments::SweepRecord;
use crate::{Error, Result};

pub const SWEEP_HEADER: [&str; 13] = [
    "sweep",
    "snr_db",
    "l",
    "antennas",
    "direction",
    "precoder",
    "capacity_mean_bps",
    "capacity_std_bps",
    "code_rate_bits_per_symbol",
    "trials",
    "n",
    "w_hz",
    "seed",
];

pub const CHANNEL_HEADER: [&str; 5] = ["trial", "antenna", "tap_index", "re", "im"];

/// Magic bytes opening a binary channel dump.
pub const CHANNEL_MAGIC: &[u8; 8] = b"CPDSCH01";

/// Writes the sweep table. Floats use the shortest round-trip form.
pub fn write_sweep_csv<W: Write>(writer: W, cfg: &ExperimentConfig, records: &[SweepRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SWEEP_HEADER)?;
    for r in records {
        w.write_record([
            r.sweep.as_str().to_owned(),
            r.point.snr_db.to_string(),
            r.point.l.to_string(),
            r.point.antennas.to_string(),
            r.point.direction.as_str().to_owned(),
            r.point.precoder.as_str().to_owned(),
            r.capacity_mean_bps.to_string(),
            r.capacity_std_bps.to_string(),
            r.code_rate_bits_per_symbol.to_string(),
            r.trials.to_string(),
            cfg.n.to_string(),
            cfg.w_hz.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn sweep_csv_string(cfg: &ExperimentConfig, records: &[SweepRecord]) -> Result<String> {
    let mut buf = Vec::new();
    write_sweep_csv(&mut buf, cfg, records)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// `<out>.meta.toml`
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".meta.toml");
    out.with_file_name(name)
}

/// Writes `bytes` through a temporary file in the target directory, then
/// renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| Error::io(&dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Writes the table and its metadata sidecar.
pub fn save_sweep(out: &Path, cfg: &ExperimentConfig, records: &[SweepRecord]) -> Result<()> {
    let csv = sweep_csv_string(cfg, records)?;
    write_atomic(out, csv.as_bytes())?;
    write_atomic(&sidecar_path(out), cfg.to_file().to_toml().as_bytes())
}

/// Reads a sidecar back into a configuration, checking the generator name.
pub fn load_sidecar(path: &Path) -> Result<ExperimentConfig> {
    let file = ConfigFile::load(path)?;
    let kind = file
        .sweep_kind
        .as_deref()
        .ok_or_else(|| Error::config("sweep_kind", "missing from metadata"))?
        .parse()?;
    let mut cfg = ExperimentConfig::defaults(kind);
    file.apply(&mut cfg)?;
    Ok(cfg)
}

/// Tap dump of `channels[trial][antenna]` as CSV.
pub fn write_channels_csv<W: Write>(writer: W, channels: &[Vec<ChannelRealization>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CHANNEL_HEADER)?;
    for (t, trial) in channels.iter().enumerate() {
        for (a, ch) in trial.iter().enumerate() {
            for (k, h) in ch.taps().iter().enumerate() {
                w.write_record([
                    t.to_string(),
                    a.to_string(),
                    k.to_string(),
                    h.re.to_string(),
                    h.im.to_string(),
                ])?;
            }
        }
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

fn format_err(what: &'static str, message: impl Into<String>) -> Error {
    Error::Format {
        what,
        message: message.into(),
    }
}

/// Reads a CSV tap dump. Rows must be ordered by trial, antenna, tap.
pub fn read_channels_csv<R: Read>(reader: R, n: usize) -> Result<Vec<Vec<ChannelRealization>>> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != CHANNEL_HEADER {
        return Err(format_err("channel csv", format!("unexpected header {header:?}")));
    }
    let mut taps: Vec<Vec<Vec<Complex64>>> = Vec::new();
    for (line, row) in r.records().enumerate() {
        let row = row?;
        let field = |i: usize| row.get(i).unwrap_or("");
        let bad = |i: usize| format_err("channel csv", format!("row {}: bad {}", line + 1, CHANNEL_HEADER[i]));
        let t: usize = field(0).parse().map_err(|_| bad(0))?;
        let a: usize = field(1).parse().map_err(|_| bad(1))?;
        let k: usize = field(2).parse().map_err(|_| bad(2))?;
        let re: f64 = field(3).parse().map_err(|_| bad(3))?;
        let im: f64 = field(4).parse().map_err(|_| bad(4))?;
        if t == taps.len() {
            taps.push(Vec::new());
        }
        let trial = taps.get_mut(t).ok_or_else(|| bad(0))?;
        if a == trial.len() {
            trial.push(Vec::new());
        }
        let ant = trial.get_mut(a).ok_or_else(|| bad(1))?;
        if k != ant.len() {
            return Err(bad(2));
        }
        ant.push(Complex64::new(re, im));
    }
    taps.into_iter()
        .map(|trial| {
            trial
                .into_iter()
                .map(|t| ChannelRealization::from_taps(t, n).map_err(Error::from))
                .collect()
        })
        .collect()
}

/// Binary tap dump: magic, then little-endian `u32` trials, antennas,
/// taps and n, then `f64` re/im pairs in trial, antenna, tap order.
pub fn write_channels_bin<W: Write>(writer: W, channels: &[Vec<ChannelRealization>]) -> Result<()> {
    let trials = channels.len();
    let antennas = channels.first().map_or(0, Vec::len);
    let first = channels.first().and_then(|t| t.first());
    let num_taps = first.map_or(0, |c| c.taps().len());
    let n = first.map_or(0, ChannelRealization::n);
    for trial in channels {
        if trial.len() != antennas || trial.iter().any(|c| c.taps().len() != num_taps || c.n() != n) {
            return Err(format_err("channel dump", "ragged channel set"));
        }
    }
    let to_u32 = |v: usize, what: &str| {
        u32::try_from(v).map_err(|_| format_err("channel dump", format!("{what} exceeds u32")))
    };
    let mut w = BufWriter::new(writer);
    let io_err = |e| Error::io("<channel dump>", e);
    w.write_all(CHANNEL_MAGIC).map_err(io_err)?;
    for (v, what) in [(trials, "trials"), (antennas, "antennas"), (num_taps, "taps"), (n, "n")] {
        w.write_all(&to_u32(v, what)?.to_le_bytes()).map_err(io_err)?;
    }
    for ch in channels.iter().flatten() {
        for h in ch.taps() {
            w.write_all(&h.re.to_le_bytes()).map_err(io_err)?;
            w.write_all(&h.im.to_le_bytes()).map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

pub fn read_channels_bin<R: Read>(reader: R) -> Result<Vec<Vec<ChannelRealization>>> {
    let mut r = BufReader::new(reader);
    let mut magic = [0u8; 8];
    let short = |_| format_err("channel dump", "truncated");
    r.read_exact(&mut magic).map_err(short)?;
    if &magic != CHANNEL_MAGIC {
        return Err(format_err("channel dump", "bad magic"));
    }
    let mut dims = [0usize; 4];
    for d in &mut dims {
        let mut b = [0u8; 4];
        r.read_exact(&mut b).map_err(short)?;
        *d = u32::from_le_bytes(b) as usize;
    }
    let [trials, antennas, num_taps, n] = dims;
    let mut f64_at = || -> Result<f64> {
        let mut b = [0u8; 8];
        r.read_exact(&mut b).map_err(short)?;
        Ok(f64::from_le_bytes(b))
    };
    let mut out = Vec::with_capacity(trials);
    for _ in 0..trials {
        let mut trial = Vec::with_capacity(antennas);
        for _ in 0..antennas {
            let mut taps = Vec::with_capacity(num_taps);
            for _ in 0..num_taps {
                let re = f64_at()?;
                let im = f64_at()?;
                taps.push(Complex64::new(re, im));
            }
            trial.push(ChannelRealization::from_taps(taps, n)?);
        }
        out.push(trial);
    }
    let mut rest = Vec::new();
    r.read_to_end(&mut rest).map_err(|e| Error::io("<channel dump>", e))?;
    if !rest.is_empty() {
        return Err(format_err("channel dump", "trailing bytes"));
    }
    Ok(out)
}

/// Per-bin gain and power allocation of one precoder.
pub fn write_allocation_csv<W: Write>(writer: W, gains: &[f64], power: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["bin", "gain", "power"])?;
    for (k, (g, p)) in gains.iter().zip(power).enumerate() {
        w.write_record([k.to_string(), g.to_string(), p.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn create_file(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::io(path, e))
}

/// Name of the generator recorded in every sidecar.
pub fn prng_algorithm() -> &'static str {
    PRNG_ALGORITHM
}
