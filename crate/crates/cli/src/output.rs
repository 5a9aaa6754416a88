use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::{json, Map, Value};

use crate::config::RunConfig;

/// A finished command: a JSON summary and a CSV table, both always written.
pub struct Report {
    /// File stem under the output directory.
    pub name: String,
    pub summary: Map<String, Value>,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub failures: Vec<String>,
}

impl Report {
    pub fn new(name: &str, header: Vec<&'static str>) -> Self {
        Report { name: name.to_string(), summary: Map::new(), header, rows: Vec::new(), failures: Vec::new() }
    }

    pub fn set(&mut self, key: &str, v: impl serde::Serialize) {
        self.summary.insert(key.to_string(), serde_json::to_value(v).expect("serializable summary"));
    }

    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }

    /// Records a failure unless `ok`.
    pub fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) -> bool {
        if !ok {
            self.failures.push(msg());
        }
        ok
    }

    fn document(&self, cfg: &RunConfig) -> Value {
        let mut doc = self.summary.clone();
        doc.insert("pass".into(), json!(self.pass()));
        doc.insert("failures".into(), json!(self.failures));
        doc.insert("config".into(), serde_json::to_value(cfg).expect("serializable config"));
        Value::Object(doc)
    }

    /// Writes `<name>.json` and `<name>.csv` and returns the JSON text.
    pub fn write(&self, cfg: &RunConfig) -> Result<String> {
        let dir = Path::new(&cfg.out_dir);
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let text = serde_json::to_string_pretty(&self.document(cfg))? + "\n";
        fs::write(dir.join(format!("{}.json", self.name)), &text)?;
        let mut w = csv::Writer::from_path(dir.join(format!("{}.csv", self.name)))?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(text)
    }
}

/// Shortest round-trip representation, so output is reproducible.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn flag(b: bool) -> String {
    if b { "true" } else { "false" }.to_string()
}
