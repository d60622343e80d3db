//! Batch orchestration: configuration, forward simulation, inversion and the
//! built-in verification suites, each writing its artifacts and a manifest.

mod config;
mod forward;
mod invert;
mod manifest;
mod verify;

use std::path::{Path, PathBuf};

pub use config::{
    DetectorConfig, ExperimentConfig, ForwardConfig, GridConfig, GruneisenConfig, InclusionConfig,
    InversionConfig, LatticeConfig, MediumConfig, PressureModel, PulseConfig, RegionConfig,
    ScatteringModel, SolverConfig, Suite, VerifyConfig,
};
pub use forward::{run_forward, ForwardOutput, OCT_RECORD_FILE, PAT_RECORD_STEM};
pub use invert::{run_inversion, InversionOutput};
pub use manifest::{sha256_hex, Manifest, ManifestEntry};
pub use verify::{run_verify, VerifyEntry, VerifyReport};

use crate::error::{Error, Result};
use crate::medium::volume::read_header;

/// Environment variable overriding the configured worker count.
pub const WORKERS_ENV: &str = "PHOTOCT_WORKERS";

/// Runs `f` on a pool of `workers` threads, or on the global pool for 0.
pub(crate) fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    if workers == 0 {
        return f();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::precondition(format!("cannot start {workers} workers: {e}")))?
        .install(f)
}

/// Hash of the configuration with run-location fields cleared.
pub(crate) fn config_hash(cfg: &ExperimentConfig) -> Result<String> {
    let mut c = cfg.clone();
    c.output_dir = PathBuf::new();
    c.workers = 0;
    Ok(sha256_hex(c.to_toml()?.as_bytes()))
}

pub(crate) fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// CSV with a header row; numbers use the shortest round-trip form.
pub(crate) fn write_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let err = |e: csv::Error| crate::oct::csv_error(path, e);
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.serialize(row).map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub(crate) fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::format(path, e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

/// Short human-readable description of an artifact written by this crate.
pub fn describe_artifact(path: &Path) -> Result<String> {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    if name.ends_with(".csv") {
        let mut r = csv::Reader::from_path(path).map_err(|e| crate::oct::csv_error(path, e))?;
        let header = r.headers().map_err(|e| crate::oct::csv_error(path, e))?.clone();
        let rows = r.records().count();
        return Ok(format!(
            "{name}: CSV table, {rows} rows, columns [{}]",
            header.iter().collect::<Vec<_>>().join(", ")
        ));
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
    if value.get("format").and_then(|f| f.as_str()) == Some(crate::medium::volume::FORMAT_TAG) {
        let h = read_header(path)?;
        return Ok(format!(
            "{name}: volume '{}' ({:?}, {} component(s)), grid {:?} spacing {}, {} frequencies, payload {}",
            h.quantity,
            h.scalar,
            h.components,
            h.grid.dims,
            h.grid.spacing,
            h.frequencies.len(),
            h.payload
        ));
    }
    if let Ok(m) = serde_json::from_value::<Manifest>(value.clone()) {
        let root = path.parent().unwrap_or_else(|| Path::new("."));
        let stale = m.stale_entries(root);
        let mut out = format!(
            "{name}: manifest of '{}' ({} {}), seed {}, config {}, {} file(s)",
            m.command,
            m.tool,
            m.version,
            m.seed,
            &m.config_sha256[..12.min(m.config_sha256.len())],
            m.files.len()
        );
        for f in &m.files {
            out.push_str(&format!("\n  {} {} bytes {}", &f.sha256[..12], f.bytes, f.path));
        }
        if !stale.is_empty() {
            out.push_str(&format!("\n  stale: {}", stale.join(", ")));
        }
        return Ok(out);
    }
    Ok(format!("{name}: JSON document\n{}", serde_json::to_string_pretty(&value).unwrap_or(text)))
}
