//! Result files: CSV tables and gnuplot data carrying the config hash and
//! seed in a leading comment, plus the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::CliError;

pub struct OutputDir {
    pub root: PathBuf,
    header: String,
    pub files: Vec<String>,
}

impl OutputDir {
    pub fn create(config: &ExperimentConfig) -> Result<Self, CliError> {
        let root = PathBuf::from(&config.output_dir);
        fs::create_dir_all(&root).map_err(|e| CliError::Runtime(format!("{}: {e}", root.display())))?;
        let header = format!("# config_hash={} seed={}\n", config.hash(), config.seed);
        Ok(Self { root, header, files: Vec::new() })
    }

    fn write(&mut self, name: &str, body: &[u8]) -> Result<(), CliError> {
        let path = self.root.join(name);
        fs::write(&path, body).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(self.header.clone().into_bytes());
        w.write_record(header).map_err(csv_error)?;
        for r in rows {
            w.write_record(r).map_err(csv_error)?;
        }
        let body = w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))?;
        self.write(name, &body)
    }

    /// Whitespace-separated columns for gnuplot, with one commented header
    /// line naming them. Blank lines in `blocks` separate data sets.
    pub fn gnuplot(&mut self, name: &str, columns: &[&str], blocks: &[Vec<Vec<f64>>]) -> Result<(), CliError> {
        let mut text = self.header.clone();
        text.push_str(&format!("# {}\n", columns.join(" ")));
        for (b, block) in blocks.iter().enumerate() {
            if b > 0 {
                text.push_str("\n\n");
            }
            for row in block {
                let cells: Vec<String> = row.iter().map(|v| format!("{v:.12e}")).collect();
                text.push_str(&cells.join(" "));
                text.push('\n');
            }
        }
        self.write(name, text.as_bytes())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, config: &ExperimentConfig, value: &T) -> Result<(), CliError> {
        let wrapped = serde_json::json!({
            "config_hash": config.hash(),
            "seed": config.seed,
            "result": value,
        });
        let text = serde_json::to_string_pretty(&wrapped).map_err(|e| CliError::Runtime(e.to_string()))?;
        self.write(name, text.as_bytes())
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        self.write(name, body.as_bytes())
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub kind: String,
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub wall_time_s: f64,
    pub finished_unix: u64,
    pub files: Vec<String>,
    pub config: String,
}

pub fn write_manifest(root: &Path, manifest: &Manifest) -> Result<(), CliError> {
    let path = root.join("manifest.json");
    let text = serde_json::to_string_pretty(manifest).map_err(|e| CliError::Runtime(e.to_string()))?;
    fs::write(&path, text).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

pub fn fmt(v: f64) -> String {
    format!("{v:.12e}")
}
