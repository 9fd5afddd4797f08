use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// The fully resolved description of one run, written as `config.json`
/// into every output directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub params: serde_json::Value,
    pub inputs: Vec<PathBuf>,
    pub output: PathBuf,
    pub seed: Option<u64>,
    pub threads: usize,
    pub version: String,
}

/// Result of the checks a run performed.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Outcome {
    pub passed: bool,
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn from_failures(failures: Vec<String>) -> Self {
        Outcome { passed: failures.is_empty(), failures }
    }
}

pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(OutDir { root: root.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<()> {
        let p = self.path(name);
        fs::write(&p, text).with_context(|| format!("writing {}", p.display()))
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_text(name, &text)
    }

    pub fn write_csv<T: Serialize>(&self, name: &str, rows: impl IntoIterator<Item = T>) -> Result<()> {
        let p = self.path(name);
        let mut w = csv::Writer::from_path(&p).with_context(|| format!("writing {}", p.display()))?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    /// `config.json`, plus `failures.json` when a check failed.
    pub fn finish(&self, config: &RunConfig, outcome: &Outcome) -> Result<()> {
        self.write_json("config.json", config)?;
        if !outcome.passed {
            self.write_json("failures.json", &outcome.failures)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_config_round_trips() {
        let c = RunConfig {
            subcommand: "sweep".into(),
            params: serde_json::json!({"op": "smoothed", "deltas": [0.125, 0.0625, 0.03125], "eps": 0.25}),
            inputs: vec![PathBuf::from("cfg.json")],
            output: PathBuf::from("out/sweep"),
            seed: Some(7),
            threads: 2,
            version: VERSION.into(),
        };
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), c);
    }
}
