//! Output directory handling: atomic file writes, CSV with a schema comment line,
//! JSON, and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;

use atc_core::optimizer::OptimizerSettings;
use atc_core::Scenario;

use crate::Common;

/// File name of the resolved scenario written next to every output set.
pub const RESOLVED_SCENARIO: &str = "scenario.cfg";
pub const MANIFEST: &str = "manifest.json";

pub struct OutputDir {
    path: PathBuf,
}

impl OutputDir {
    pub fn create(path: &Path) -> Result<Self> {
        fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))?;
        Ok(Self { path: path.to_path_buf() })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Writes through a temporary sibling and a rename, so readers never see half a file.
    pub fn write_atomic(&self, name: &str, bytes: &[u8]) -> Result<()> {
        let target = self.path.join(name);
        let tmp = self.path.join(format!(".{name}.tmp"));
        fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
        fs::rename(&tmp, &target).with_context(|| format!("renaming to {}", target.display()))?;
        Ok(())
    }

    pub fn write_csv(&self, name: &str, schema: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut buf = format!("# schema={schema}\n").into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(header)?;
            for row in rows {
                debug_assert_eq!(row.len(), header.len());
                w.write_record(row)?;
            }
            w.flush()?;
        }
        self.write_atomic(name, &buf)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_atomic(name, text.as_bytes())
    }
}

/// Shortest round-trip text for a number; empty for a missing or non-finite value.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        v.to_string()
    } else {
        String::new()
    }
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Everything needed to rerun a command and get the same files back.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub scenario: String,
    pub out: String,
    pub threads: Option<usize>,
    pub seed: u64,
    pub options: BTreeMap<String, String>,
    pub timestamp_unix: u64,
    /// Rerun with `--scenario <out>/scenario.cfg` to reproduce the outputs.
    pub resolved_scenario: &'static str,
    #[serde(skip)]
    resolved: String,
}

impl Manifest {
    pub fn new(command: &str, common: &Common, params: &Scenario, settings: &OptimizerSettings) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(&params.to_config_string()).context("re-reading resolved scenario")?;
        table.insert("optimizer".into(), toml::Value::try_from(settings)?);
        let resolved = format!(
            "# Resolved scenario and optimizer settings of this run.\n{}",
            toml::to_string(&table)?
        );
        Ok(Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            scenario: common
                .scenario
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_else(|| "builtin:baseline".into()),
            out: common.out.display().to_string(),
            threads: common.threads,
            seed: settings.seed,
            options: BTreeMap::new(),
            timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            resolved_scenario: RESOLVED_SCENARIO,
            resolved,
        })
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.options.insert(key.to_string(), value.to_string());
    }

    pub fn write(&self, out: &OutputDir) -> Result<()> {
        out.write_atomic(RESOLVED_SCENARIO, self.resolved.as_bytes())?;
        out.write_json(MANIFEST, self)
    }
}
