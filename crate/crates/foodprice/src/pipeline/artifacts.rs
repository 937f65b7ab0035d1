//! Byte-deterministic artifact writers: shortest round-trip float
//! formatting, CSV/JSON emission, and content digests.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Shortest decimal representation that parses back to the same f64
/// (ryu, as used for JSON numbers). Non-finite values get fixed tokens.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        serde_json::Number::from_f64(v)
            .expect("finite float")
            .to_string()
    }
}

/// JSON value for a float that may be non-finite (stored as a string).
pub fn json_f64(v: f64) -> serde_json::Value {
    match serde_json::Number::from_f64(v) {
        Some(n) => serde_json::Value::Number(n),
        None => serde_json::Value::String(fmt_f64(v)),
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Records every file written during a run, with content digests.
#[derive(Debug, Default)]
pub struct OutputLog {
    /// (path relative to out_dir, sha256 digest), in write order.
    pub entries: Vec<(String, String)>,
}

impl OutputLog {
    pub fn write(&mut self, out_dir: &Path, rel_path: &str, contents: &str) -> Result<()> {
        let path: PathBuf = out_dir.join(rel_path);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.entries.retain(|(p, _)| p != rel_path);
        self.entries
            .push((rel_path.to_string(), sha256_hex(contents.as_bytes())));
        Ok(())
    }
}

/// Builds a CSV document from a header and formatted rows.
pub fn csv_document(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn read_to_string(path: &Path) -> Result<String> {
    if !path.exists() {
        return Err(Error::MissingArtifact {
            path: path.to_path_buf(),
        });
    }
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// File names shared by the pipeline stages.
pub mod names {
    pub const PROCESSED: &str = "processed.csv";
    pub const SPLIT: &str = "split.json";
    pub const SUMMARY_STATS: &str = "summary_stats.csv";
    pub const NORMALITY: &str = "normality.csv";
    pub const KDE_DIR: &str = "kde";
    pub const HEATMAP: &str = "heatmap.csv";
    pub const CLUSTERS: &str = "clusters.json";
    pub const SELECTED: &str = "selected_features.json";
    pub const CV_RESULTS: &str = "cv_results.csv";
    pub const TRAIN_META: &str = "train_meta.json";
    pub const MODELS_DIR: &str = "models";
    pub const COMPARISON: &str = "model_comparison.csv";
    pub const MANIFEST: &str = "manifest.json";
}

/// Replaces path-hostile characters in a feature name used as a file stem.
pub fn safe_file_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}
