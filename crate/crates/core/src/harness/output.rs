use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ExperimentConfig;
use super::run::{ExperimentOutput, RunRecord};
use super::stats::SummaryStats;
use crate::error::Result;

pub const PLOT_HEADER: &str = "t,mean_norm_gap,std_norm_gap";

/// `<path>.partial`, where output is staged until it is complete.
pub fn partial_path(path: &Path) -> PathBuf {
    let mut name: OsString = path.as_os_str().to_owned();
    name.push(".partial");
    PathBuf::from(name)
}

/// Writes through `<path>.partial` and renames on success. A failed write
/// leaves the partial file behind as a marker.
pub fn write_atomically<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let staged = partial_path(path);
    let mut w = BufWriter::new(File::create(&staged)?);
    body(&mut w)?;
    w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
    fs::rename(&staged, path)?;
    Ok(())
}

pub fn records_header(hops: &[usize]) -> String {
    let mut h = String::from("run_id,t,gap,gap_sq,norm_gap");
    for k in hops {
        h.push_str(&format!(",phi_{k}"));
    }
    h
}

pub fn write_records_csv<W: Write + ?Sized>(
    w: &mut W,
    hops: &[usize],
    records: &[RunRecord],
) -> io::Result<()> {
    writeln!(w, "{}", records_header(hops))?;
    for r in records {
        write!(
            w,
            "{},{},{},{},{}",
            r.run_id, r.t, r.gap, r.gap_squared, r.normalized_gap
        )?;
        for p in &r.phi {
            write!(w, ",{p}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_plot_csv<W: Write + ?Sized>(w: &mut W, stats: &SummaryStats) -> io::Result<()> {
    writeln!(w, "{PLOT_HEADER}")?;
    for (t, m) in stats.times.iter().zip(&stats.normalized_gap) {
        writeln!(w, "{t},{},{}", m.mean, m.std)?;
    }
    Ok(())
}

/// One row per sampling timestamp: `t, mean normalized gap, its std`.
pub fn emit_plot_data(stats: &SummaryStats, path: &Path) -> Result<()> {
    write_atomically(path, |w| write_plot_csv(w, stats))
}

#[derive(Serialize)]
struct Sidecar<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a ExperimentConfig,
    hops: &'a [usize],
    sample_every: u64,
    burn_in: u64,
    records: usize,
}

/// `<path>` with a `json` extension.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Writes the records CSV to `path` and the resolved configuration next to it.
pub fn write_experiment(output: &ExperimentOutput, path: &Path) -> Result<()> {
    write_atomically(path, |w| {
        write_records_csv(w, &output.hops, &output.records)
    })?;
    write_json(
        &sidecar_path(path),
        &Sidecar {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            config: &output.config,
            hops: &output.hops,
            sample_every: output.config.sample_stride(),
            burn_in: output.config.burn_in_steps(),
            records: output.records.len(),
        },
    )
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    write_atomically(path, |w| {
        w.write_all(text.as_bytes())?;
        w.write_all(b"\n")
    })
}
