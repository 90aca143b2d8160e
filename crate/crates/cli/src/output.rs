use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

pub const SCHEMA_VERSION: u32 = 1;

/// Formats a number for CSV output; infinity prints as `inf`.
pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Output directory that remembers every artifact written to it.
pub struct OutDir {
    root: PathBuf,
    artifacts: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).with_context(|| format!("creating output directory {}", root.display()))?;
        Ok(OutDir {
            root: root.to_path_buf(),
            artifacts: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn artifacts(&self) -> &[String] {
        &self.artifacts
    }

    fn record(&mut self, name: &str) -> PathBuf {
        if !self.artifacts.iter().any(|a| a == name) {
            self.artifacts.push(name.to_string());
        }
        self.root.join(name)
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
        let path = self.record(name);
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `body` (a JSON object) with `schema_version` and `kind` added.
    pub fn json(&mut self, name: &str, kind: &str, body: impl Serialize) -> Result<()> {
        let mut value = serde_json::to_value(body)?;
        let obj = value.as_object_mut().context("JSON artifacts must be objects")?;
        obj.insert("schema_version".into(), json!(SCHEMA_VERSION));
        obj.insert("kind".into(), json!(kind));
        self.write_text(name, &(serde_json::to_string_pretty(&value)? + "\n"))
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.record(name);
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }

    /// The only artifact allowed to vary between identical runs.
    pub fn write_manifest(&self, command: &str, config: &Value) -> Result<()> {
        let manifest = json!({
            "schema_version": SCHEMA_VERSION,
            "kind": "run_manifest",
            "command": command,
            "tool_version": env!("CARGO_PKG_VERSION"),
            "finished_at": chrono::Utc::now().to_rfc3339(),
            "config": config,
            "artifacts": self.artifacts,
        });
        let path = self.root.join("run_manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
            .with_context(|| format!("writing {}", path.display()))
    }
}
