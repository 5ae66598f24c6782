//! Single writer for experiment artifacts: JSON lines, CSV tables and plot data.

use crate::config::ExperimentConfig;
use serde::Serialize;
use serde_json::{json, Value};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

pub struct Artifacts {
    dir: PathBuf,
    header: Value,
    jsonl: BufWriter<File>,
}

/// One named pass/fail comparison.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: String,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Check { name: name.into(), value, bound: format!("<= {bound:e}"), pass: value <= bound }
    }

    pub fn within(name: &str, value: f64, lo: f64, hi: f64) -> Self {
        Check { name: name.into(), value, bound: format!("in [{lo}, {hi}]"), pass: (lo..=hi).contains(&value) }
    }

    pub fn holds(name: &str, ok: bool) -> Self {
        Check { name: name.into(), value: f64::from(u8::from(ok)), bound: "true".into(), pass: ok }
    }
}

impl Artifacts {
    pub fn create(cfg: &ExperimentConfig) -> std::io::Result<Self> {
        fs::create_dir_all(&cfg.out)?;
        fs::write(cfg.out.join("config.txt"), cfg.canonical())?;
        let header = json!({
            "experiment": cfg.experiment.name(),
            "config_hash": cfg.hash(),
            "seed": cfg.seed,
            "versions": { "ymh-core": ymh_core::VERSION, "ymh-cli": env!("CARGO_PKG_VERSION") },
        });
        let jsonl = BufWriter::new(File::create(cfg.out.join("results.jsonl"))?);
        Ok(Artifacts { dir: cfg.out.clone(), header, jsonl })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn stamp(&self) -> String {
        format!(
            "# experiment={} config_hash={} seed={} ymh-core={} ymh-cli={}",
            self.header["experiment"].as_str().unwrap_or(""),
            self.header["config_hash"].as_str().unwrap_or(""),
            self.header["seed"],
            ymh_core::VERSION,
            env!("CARGO_PKG_VERSION")
        )
    }

    /// Appends `{header..., kind, ...record}` to `results.jsonl`.
    pub fn record(&mut self, kind: &str, record: impl Serialize) -> std::io::Result<()> {
        let mut v = self.header.clone();
        v["kind"] = json!(kind);
        if let Value::Object(m) = serde_json::to_value(record)? {
            for (k, x) in m {
                v[k] = x;
            }
        }
        writeln!(self.jsonl, "{v}")?;
        Ok(())
    }

    pub fn table(&self, name: &str, columns: &[&str], rows: &[Vec<f64>]) -> std::io::Result<()> {
        let mut w = BufWriter::new(File::create(self.dir.join(name))?);
        writeln!(w, "{}", self.stamp())?;
        writeln!(w, "{}", columns.join(","))?;
        for r in rows {
            writeln!(w, "{}", r.iter().map(|v| format!("{v:.12e}")).collect::<Vec<_>>().join(","))?;
        }
        w.flush()
    }

    /// Two-column plot data.
    pub fn plot(&self, name: &str, x: &str, y: &str, points: &[(f64, f64)]) -> std::io::Result<()> {
        let rows: Vec<Vec<f64>> = points.iter().map(|(a, b)| vec![*a, *b]).collect();
        self.table(name, &[x, y], &rows)
    }

    pub fn finish(mut self, checks: &[Check]) -> std::io::Result<bool> {
        let pass = checks.iter().all(|c| c.pass);
        self.record("summary", json!({ "pass": pass, "checks": checks }))?;
        self.jsonl.flush()?;
        Ok(pass)
    }
}
