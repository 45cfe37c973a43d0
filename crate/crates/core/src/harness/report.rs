//! CSV result tables and the reproducibility manifest.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::sweep::{SweepRow, SweepSpec};
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};

pub const RESULT_HEADER: [&str; 7] = [
    "snr_db",
    "family",
    "median_nmse_db",
    "mean_nmse_db",
    "crlb_db",
    "trials_ok",
    "trials_failed",
];

pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RESULT_HEADER).expect("in-memory write");
    for r in rows {
        w.write_record([
            r.snr_db.to_string(),
            r.family.clone(),
            r.median_nmse_db.to_string(),
            r.mean_nmse_db.to_string(),
            r.crlb_db.to_string(),
            r.trials_ok.to_string(),
            r.trials_failed.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

pub fn rows_from_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != RESULT_HEADER {
        return Err(Error::Parse(format!("unexpected header {header:?}")));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|_| Error::Parse(format!("bad number {s:?}")));
    let count = |s: &str| s.parse::<usize>().map_err(|_| Error::Parse(format!("bad count {s:?}")));
    r.records()
        .map(|rec| {
            let rec = rec?;
            Ok(SweepRow {
                snr_db: num(&rec[0])?,
                family: rec[1].to_string(),
                median_nmse_db: num(&rec[2])?,
                mean_nmse_db: num(&rec[3])?,
                crlb_db: num(&rec[4])?,
                trials_ok: count(&rec[5])?,
                trials_failed: count(&rec[6])?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
struct ManifestBody<'a> {
    tool: &'static str,
    version: &'static str,
    master_seed: u64,
    trials: usize,
    /// SNR points as text so that the noise-free `inf` survives JSON.
    snr_db: Vec<String>,
    scenario: &'a ScenarioConfig,
}

/// Manifest JSON: the full run configuration plus a SHA-256 of its
/// canonical (key-sorted, compact) serialization. No timestamps, so equal
/// configurations give byte-identical manifests.
pub fn manifest_json(spec: &SweepSpec) -> String {
    let body = ManifestBody {
        tool: "nfirs",
        version: env!("CARGO_PKG_VERSION"),
        master_seed: spec.master_seed,
        trials: spec.trials,
        snr_db: spec.snr_db.iter().map(f64::to_string).collect(),
        scenario: &spec.scenario,
    };
    // serde_json::Value keeps object keys sorted, which makes this canonical.
    let mut value = serde_json::to_value(&body).expect("plain data serializes");
    let canonical = value.to_string();
    let digest = Sha256::digest(canonical.as_bytes());
    let hash: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    value
        .as_object_mut()
        .expect("struct serializes to an object")
        .insert("config_sha256".into(), hash.into());
    serde_json::to_string_pretty(&value).expect("plain data serializes") + "\n"
}

/// Path of the manifest written next to a result file.
pub fn manifest_path(results: &Path) -> PathBuf {
    results.with_extension("manifest.json")
}

/// Writes the result CSV to `path` and the manifest next to it.
pub fn emit_results(rows: &[SweepRow], spec: &SweepSpec, path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidConfig("no result rows to write".into()));
    }
    std::fs::write(path, rows_to_csv(rows))?;
    std::fs::write(manifest_path(path), manifest_json(spec))?;
    Ok(())
}
