//! Output directory bookkeeping and the run manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::config::Config;
use crate::error::AppError;

pub const MANIFEST: &str = "manifest.json";

/// Record of one run; written last, listing every other file it produced.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: Config,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub version: &'static str,
    pub outputs: Vec<String>,
    pub wall_time_s: f64,
}

/// Writes files into one directory and remembers their names.
pub struct OutputDir {
    /// `None` discards every write.
    root: Option<PathBuf>,
    files: Vec<String>,
    started: Instant,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, AppError> {
        std::fs::create_dir_all(root).map_err(|e| AppError::io(format!("creating {}", root.display()), e))?;
        Ok(Self {
            root: Some(root.to_path_buf()),
            files: Vec::new(),
            started: Instant::now(),
        })
    }

    /// A sink that writes nothing.
    pub fn discard() -> Self {
        Self {
            root: None,
            files: Vec::new(),
            started: Instant::now(),
        }
    }

    pub fn root(&self) -> Option<&Path> {
        self.root.as_deref()
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    fn record(&mut self, name: &str) -> Option<PathBuf> {
        let root = self.root.as_ref()?;
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        Some(root.join(name))
    }

    pub fn write_csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<(), AppError> {
        let Some(path) = self.record(name) else { return Ok(()) };
        let format_err = |e: csv::Error| AppError::Format {
            path: path.display().to_string(),
            message: e.to_string(),
        };
        let mut w = csv::Writer::from_path(&path).map_err(format_err)?;
        for row in rows {
            w.serialize(row).map_err(format_err)?;
        }
        w.flush()
            .map_err(|e| AppError::io(format!("writing {}", path.display()), e))
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), AppError> {
        let Some(path) = self.record(name) else { return Ok(()) };
        let mut text = serde_json::to_string_pretty(value).map_err(|e| AppError::Format {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| AppError::io(format!("writing {}", path.display()), e))
    }

    /// Writes the manifest and returns it.
    pub fn finish(
        self,
        subcommand: &str,
        config: &Config,
        parameters: serde_json::Value,
        seed: Option<u64>,
    ) -> Result<RunManifest, AppError> {
        let manifest = RunManifest {
            subcommand: subcommand.to_string(),
            config: *config,
            parameters,
            seed,
            version: env!("CARGO_PKG_VERSION"),
            outputs: self.files.clone(),
            wall_time_s: self.started.elapsed().as_secs_f64(),
        };
        let Some(root) = &self.root else { return Ok(manifest) };
        let path = root.join(MANIFEST);
        let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| AppError::Format {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| AppError::io(format!("writing {}", path.display()), e))?;
        Ok(manifest)
    }
}
