use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use loadsense::FORMAT_VERSION;

/// First line of every text or CSV file a command writes.
pub fn header(command: &str, seed: u64) -> String {
    format!("# loadsense {command} seed={seed} format_version={FORMAT_VERSION}\n")
}

/// An output directory bound to one command run.
pub struct OutputDir {
    pub root: PathBuf,
    command: &'static str,
    seed: u64,
}

impl OutputDir {
    /// Creates the directory and proves it is writable before any work
    /// starts.
    pub fn prepare(root: &Path, command: &'static str, seed: u64) -> Result<OutputDir> {
        fs::create_dir_all(root).with_context(|| format!("cannot create output directory {}", root.display()))?;
        let probe = root.join(".loadsense-write-probe");
        fs::write(&probe, b"").with_context(|| format!("output directory {} is not writable", root.display()))?;
        fs::remove_file(&probe).with_context(|| format!("cannot clean up {}", probe.display()))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            command,
            seed,
        })
    }

    /// Writes `body` behind the provenance header line.
    pub fn write_text(&self, name: &str, body: &str) -> Result<PathBuf> {
        let mut text = header(self.command, self.seed);
        text.push_str(body);
        if !text.ends_with('\n') {
            text.push('\n');
        }
        self.write_raw(name, text.as_bytes())
    }

    /// Writes `{"format_version", "command", "seed", <key>: value}`.
    pub fn write_json<T: Serialize>(&self, name: &str, key: &str, value: &T) -> Result<PathBuf> {
        let mut doc = serde_json::Map::new();
        doc.insert("format_version".into(), FORMAT_VERSION.into());
        doc.insert("command".into(), self.command.into());
        doc.insert("seed".into(), self.seed.into());
        doc.insert(key.into(), serde_json::to_value(value)?);
        let mut text = serde_json::to_string_pretty(&doc)?;
        text.push('\n');
        self.write_raw(name, text.as_bytes())
    }

    pub fn write_raw(&self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(name);
        fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(path)
    }

    /// Provenance record: the command, its seed and the normalized config
    /// with its sha256. Thread counts are not part of the config.
    pub fn write_run_record<T: Serialize>(&self, config: &T) -> Result<PathBuf> {
        let value = serde_json::to_value(config)?;
        let canonical = serde_json::to_string(&value)?;
        let digest = hex::encode(Sha256::digest(canonical.as_bytes()));
        let record = serde_json::json!({
            "format_version": FORMAT_VERSION,
            "command": self.command,
            "seed": self.seed,
            "config": value,
            "config_sha256": digest,
        });
        let mut text = serde_json::to_string_pretty(&record)?;
        text.push('\n');
        self.write_raw("run.json", text.as_bytes())
    }
}
