//! Run outputs: every file is written to a temp name and renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{Result, RunError};

pub const MANIFEST: &str = "manifest.toml";

/// Shortest round-trip rendering, scientific for very large or small values.
/// Negative zero is written as `0.0`.
pub fn num(v: f64) -> String {
    if v == 0.0 {
        return "0.0".into();
    }
    format!("{v:?}")
}

pub fn csv_bytes<I>(header: &[&str], rows: I) -> Vec<u8>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for r in rows {
        w.write_record(&r).expect("writing to memory");
    }
    w.into_inner().expect("flushing to memory")
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        RunError::io(path, e)
    })
}

/// Collects the files of one run and closes it with a manifest.
#[derive(Debug)]
pub struct OutputDir {
    dir: PathBuf,
    artifacts: Vec<String>,
}

#[derive(Serialize)]
struct RunInfo<'a> {
    command: &'a str,
    version: &'a str,
    artifacts: &'a [String],
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            artifacts: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn artifacts(&self) -> &[String] {
        &self.artifacts
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.dir.join(name), bytes)?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    pub fn csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<()>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        self.write(name, &csv_bytes(header, rows))
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value).expect("report types serialize");
        bytes.push(b'\n');
        self.write(name, &bytes)
    }

    /// Writes `manifest.toml`: the resolved config plus a `[run]` table.
    pub fn finish(self, command: &str, config: &ExperimentConfig) -> Result<PathBuf> {
        let mut table = toml::Table::try_from(config).expect("config serializes to a table");
        let run = RunInfo {
            command,
            version: env!("CARGO_PKG_VERSION"),
            artifacts: &self.artifacts,
        };
        table.insert("run".into(), toml::Value::try_from(run).expect("run info serializes"));
        let text = toml::to_string(&table).expect("table serializes");
        let path = self.dir.join(MANIFEST);
        write_atomic(&path, text.as_bytes())?;
        Ok(path)
    }
}
