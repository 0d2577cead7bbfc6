//! CSV tables and their manifests.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

/// A header plus rows of already formatted cells.
#[derive(Debug, Clone, Default)]
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn count(n: u64) -> String {
    n.to_string()
}

pub fn flag(b: bool) -> String {
    b.to_string()
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

/// `key: value` lines describing one run.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub subcommand: String,
    pub params: Vec<(String, String)>,
    pub version: &'static str,
    pub duration_seconds: f64,
    pub digest: String,
}

impl RunManifest {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "subcommand: {}", self.subcommand);
        let _ = writeln!(out, "version: {}", self.version);
        for (k, v) in &self.params {
            let _ = writeln!(out, "param.{k}: {v}");
        }
        let _ = writeln!(out, "duration_seconds: {:.6}", self.duration_seconds);
        let _ = writeln!(out, "data_sha256: {}", self.digest);
        out
    }

    /// Path of the manifest written next to `data_path`.
    pub fn path_for(data_path: &Path) -> std::path::PathBuf {
        let mut name = data_path.as_os_str().to_owned();
        name.push(".manifest");
        name.into()
    }
}
