//! Staged output writing.
//!
//! Commands stage every file in memory and flush once at the end, so a
//! failure halfway through a command leaves no partial results on disk:
//! either every file of a run lands or none does.
//!
//! Every product carries the config hash and the seed. Tables honor the
//! requested format (CSV rows under a `# config-hash ...` comment line, or
//! a JSON envelope); datasets meant to be re-ingested are always CSV, and
//! fit summaries and reports are always JSON.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::{ExperimentConfig, OutputFormat};

pub struct Artifacts {
    root: PathBuf,
    format: OutputFormat,
    config_hash: String,
    seed: u64,
    files: Vec<(PathBuf, Vec<u8>)>,
}

#[derive(Serialize)]
struct Envelope<T: Serialize> {
    config_hash: String,
    seed: u64,
    data: T,
}

impl Artifacts {
    pub fn new(cfg: &ExperimentConfig) -> Artifacts {
        Artifacts {
            root: cfg.out_dir.clone(),
            format: cfg.format,
            config_hash: cfg.hash(),
            seed: cfg.seed,
            files: Vec::new(),
        }
    }

    fn stamp_line(&self) -> String {
        format!("# config-hash {} seed {}\n", self.config_hash, self.seed)
    }

    /// Stages `name.csv` or `name.json` from flat rows, honoring the
    /// configured format.
    pub fn table<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        match self.format {
            OutputFormat::Csv => self.csv_table(name, rows),
            OutputFormat::Json => self.json(name, rows),
        }
    }

    /// Stages `name.csv` from flat rows regardless of the configured
    /// format, for datasets that feed back into other commands.
    pub fn csv_table<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        let mut buf = self.stamp_line().into_bytes();
        let mut writer = csv::Writer::from_writer(&mut buf);
        for row in rows {
            writer.serialize(row).with_context(|| format!("serializing {name} row"))?;
        }
        writer.flush()?;
        drop(writer);
        self.files.push((PathBuf::from(format!("{name}.csv")), buf));
        Ok(())
    }

    /// Stages `name.json` regardless of the configured format.
    pub fn json<T: Serialize>(&mut self, name: &str, data: T) -> Result<()> {
        let envelope = Envelope {
            config_hash: self.config_hash.clone(),
            seed: self.seed,
            data,
        };
        let mut bytes = serde_json::to_vec_pretty(&envelope)
            .with_context(|| format!("serializing {name}"))?;
        bytes.push(b'\n');
        self.files.push((PathBuf::from(format!("{name}.json")), bytes));
        Ok(())
    }

    /// Stages `name.csv` regardless of the configured format, with the
    /// stamp comment ahead of whatever `write` produces. Datasets that feed
    /// back into `ingest` go through here.
    pub fn stamped_csv<F>(&mut self, name: impl Into<PathBuf>, write: F) -> Result<()>
    where
        F: FnOnce(&mut Vec<u8>) -> Result<()>,
    {
        let mut buf = self.stamp_line().into_bytes();
        write(&mut buf)?;
        let mut path = name.into();
        path.set_extension("csv");
        self.files.push((path, buf));
        Ok(())
    }

    /// Writes everything staged so far. On any error the files already
    /// written by this call are removed before returning.
    pub fn flush(self) -> Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        for (rel, bytes) in &self.files {
            let path = self.root.join(rel);
            if let Err(err) = write_file(&path, bytes) {
                for w in &written {
                    let _ = fs::remove_file(w);
                }
                return Err(err);
            }
            written.push(path);
        }
        Ok(written)
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)
            .with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}
