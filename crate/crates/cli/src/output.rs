use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use serde_json::Value;

use crate::args::{Format, Global};

/// Result of one subcommand: the same data as JSON and as CSV, whether
/// its check passed, and a one-line summary for stderr.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub json: Value,
    pub csv: String,
    pub pass: bool,
    pub summary: String,
}

/// 17 significant digits: enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Builds CSV text from a header and rows.
pub struct Csv(String);

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Csv(format!("{}\n", header.join(",")))
    }

    pub fn row(&mut self, cols: Vec<String>) {
        self.0.push_str(&cols.join(","));
        self.0.push('\n');
    }

    pub fn finish(self) -> String {
        self.0
    }
}

/// Space-separated floats for a single CSV cell.
pub fn list(v: &[f64]) -> String {
    v.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(" ")
}

pub fn write(global: &Global, outcome: &Outcome) -> Result<()> {
    let text = match global.format {
        Format::Csv => outcome.csv.clone(),
        Format::Json => format!("{}\n", serde_json::to_string_pretty(&outcome.json)?),
    };
    match &global.out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

/// `PATH.manifest.json` beside the output, or one line on stderr.
pub fn manifest_path(global: &Global) -> Option<PathBuf> {
    global.out.as_ref().map(|p| {
        let mut s: OsString = p.clone().into_os_string();
        s.push(".manifest.json");
        PathBuf::from(s)
    })
}

pub fn write_manifest(global: &Global, manifest: &Value) -> Result<()> {
    match manifest_path(global) {
        Some(p) => std::fs::write(&p, format!("{}\n", serde_json::to_string_pretty(manifest)?))
            .with_context(|| format!("writing {}", p.display())),
        None => {
            eprintln!("manifest: {manifest}");
            Ok(())
        }
    }
}
