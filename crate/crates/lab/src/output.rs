//! Result files. Everything is written into a staging directory next to the
//! target and renamed into place once complete.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::run::{Check, Outcome};

pub const RECORDS: &str = "records.jsonl";
pub const AGGREGATES: &str = "aggregates.csv";
pub const MANIFEST: &str = "manifest.json";

#[derive(Serialize)]
struct Manifest<'a> {
    digest: String,
    config: serde_json::Value,
    version: &'static str,
    records: usize,
    checks: &'a [Check],
    passed: bool,
}

pub fn default_dir(cfg: &ExperimentConfig) -> PathBuf {
    PathBuf::from("out").join(format!("{}-{}", cfg.experiment, &cfg.digest()[..12]))
}

pub fn write_records<W: Write>(w: W, outcome: &Outcome) -> io::Result<()> {
    let mut w = BufWriter::new(w);
    for r in &outcome.records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn write_aggregates<W: Write>(w: W, outcome: &Outcome) -> csv::Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    for a in &outcome.aggregates {
        csv.serialize(a)?;
    }
    csv.flush()?;
    Ok(())
}

/// Writes the three result files into `dir`, replacing an earlier run.
pub fn write_all(dir: &Path, cfg: &ExperimentConfig, outcome: &Outcome) -> io::Result<()> {
    let parent = match dir.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent)?;
    let name = dir
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "output path has no final component"))?;
    let staging = parent.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    if staging.exists() {
        fs::remove_dir_all(&staging)?;
    }
    fs::create_dir(&staging)?;
    let result = (|| {
        write_records(fs::File::create(staging.join(RECORDS))?, outcome)?;
        write_aggregates(fs::File::create(staging.join(AGGREGATES))?, outcome).map_err(io::Error::other)?;
        let manifest = Manifest {
            digest: cfg.digest(),
            config: serde_json::from_str(&cfg.canonical()).map_err(io::Error::other)?,
            version: env!("CARGO_PKG_VERSION"),
            records: outcome.records.len(),
            checks: &outcome.checks,
            passed: outcome.passed(),
        };
        let mut f = fs::File::create(staging.join(MANIFEST))?;
        serde_json::to_writer_pretty(&mut f, &manifest)?;
        f.write_all(b"\n")?;
        if dir.exists() {
            fs::remove_dir_all(dir)?;
        }
        fs::rename(&staging, dir)
    })();
    if result.is_err() {
        let _ = fs::remove_dir_all(&staging);
    }
    result
}
