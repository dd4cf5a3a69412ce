//! Output files: column tables, JSON documents and the run manifest.
//!
//! Every file goes through [`OutputDir`], which only accepts bare file
//! names inside its directory and deletes what it wrote if the run fails.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{fmt_f64, Resolved, ResolvedSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub struct Column {
    pub name: &'static str,
    pub unit: &'static str,
    pub values: Vec<Cell>,
}

#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Text(String),
    Missing,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Num)
    }
}

impl Column {
    pub fn num(name: &'static str, unit: &'static str, values: impl IntoIterator<Item = f64>) -> Self {
        Column { name, unit, values: values.into_iter().map(Cell::Num).collect() }
    }

    pub fn cells(name: &'static str, unit: &'static str, values: Vec<Cell>) -> Self {
        Column { name, unit, values }
    }
}

/// Column-oriented data with free-form header notes.
pub struct Table {
    pub title: String,
    pub notes: Vec<String>,
    pub columns: Vec<Column>,
}

impl Table {
    pub fn new(title: impl Into<String>, columns: Vec<Column>) -> Self {
        Table { title: title.into(), notes: Vec::new(), columns }
    }

    pub fn note(mut self, text: impl Into<String>) -> Self {
        self.notes.push(text.into());
        self
    }

    fn rows(&self) -> usize {
        self.columns.iter().map(|c| c.values.len()).max().unwrap_or(0)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# {}\n", self.title);
        for n in &self.notes {
            out.push_str(&format!("# {n}\n"));
        }
        for c in &self.columns {
            out.push_str(&format!("# column {}: {}\n", c.name, c.unit));
        }
        out.push_str(&self.columns.iter().map(|c| c.name).collect::<Vec<_>>().join(","));
        out.push('\n');
        for k in 0..self.rows() {
            let row: Vec<String> = self
                .columns
                .iter()
                .map(|c| match c.values.get(k) {
                    Some(Cell::Num(v)) => fmt_f64(*v),
                    Some(Cell::Text(s)) => s.clone(),
                    Some(Cell::Missing) | None => String::new(),
                })
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Vec<u8> {
        let columns: Vec<serde_json::Value> = self
            .columns
            .iter()
            .map(|c| {
                let values: Vec<serde_json::Value> = c
                    .values
                    .iter()
                    .map(|v| match v {
                        Cell::Num(x) => serde_json::json!(x),
                        Cell::Text(s) => serde_json::json!(s),
                        Cell::Missing => serde_json::Value::Null,
                    })
                    .collect();
                serde_json::json!({ "name": c.name, "unit": c.unit, "values": values })
            })
            .collect();
        let doc = serde_json::json!({ "title": self.title, "notes": self.notes, "columns": columns });
        let mut bytes = serde_json::to_vec_pretty(&doc).expect("table serializes");
        bytes.push(b'\n');
        bytes
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

pub struct OutputDir {
    dir: PathBuf,
    created_dir: bool,
    written: Vec<OutputFile>,
    committed: bool,
}

impl OutputDir {
    pub fn create(dir: &Path) -> io::Result<Self> {
        let created_dir = !dir.exists();
        fs::create_dir_all(dir)?;
        Ok(OutputDir { dir: dir.to_path_buf(), created_dir, written: Vec::new(), committed: false })
    }

    pub fn files(&self) -> &[OutputFile] {
        &self.written
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> io::Result<()> {
        let plain = Path::new(name).file_name().is_some_and(|f| f == name);
        if !plain {
            return Err(io::Error::new(io::ErrorKind::InvalidInput, format!("refusing to write `{name}` outside the output directory")));
        }
        fs::write(self.dir.join(name), bytes)?;
        self.written.retain(|f| f.name != name);
        self.written.push(OutputFile { name: name.to_string(), bytes: bytes.len() as u64, sha256: sha256_hex(bytes) });
        Ok(())
    }

    pub fn table(&mut self, stem: &str, table: &Table, format: Format) -> io::Result<()> {
        match format {
            Format::Csv => self.write(&format!("{stem}.csv"), table.to_csv().as_bytes()),
            Format::Json => self.write(&format!("{stem}.json"), &table.to_json()),
        }
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> io::Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(io::Error::other)?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }

    pub fn commit(mut self) {
        self.committed = true;
    }
}

impl Drop for OutputDir {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for f in &self.written {
            let _ = fs::remove_file(self.dir.join(&f.name));
        }
        if self.created_dir {
            let _ = fs::remove_dir(&self.dir);
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash of the canonical configuration, as stored in the manifest.
pub fn config_hash(config: &BTreeMap<String, String>) -> String {
    sha256_hex(&serde_json::to_vec(config).expect("string map serializes"))
}

pub fn unix_seconds(t: SystemTime) -> f64 {
    t.duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

#[derive(Serialize)]
pub struct RunManifest<'a> {
    pub tool_version: &'static str,
    pub command: String,
    pub arguments: Vec<String>,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub config_hash: String,
    pub config: &'a BTreeMap<String, String>,
    pub resolved: ResolvedSummary<'a>,
    pub outputs: Vec<OutputFile>,
}

impl<'a> RunManifest<'a> {
    pub fn new(command: &str, arguments: Vec<String>, started: SystemTime, run: &'a Resolved, outputs: &[OutputFile]) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            arguments,
            started_unix: unix_seconds(started),
            finished_unix: unix_seconds(SystemTime::now()),
            config_hash: config_hash(&run.canonical),
            config: &run.canonical,
            resolved: ResolvedSummary { physical: &run.physical, reduced: &run.reduced, integrator: &run.integrator },
            outputs: outputs.to_vec(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_unit_headers_and_round_trip_floats() {
        let t = Table::new("demo", vec![Column::num("t", "1/gamma", [0.1, 1.0 / 3.0]), Column::cells("tag", "label", vec![Cell::Text("A".into())])]);
        let csv = t.to_csv();
        assert!(csv.contains("# column t: 1/gamma"));
        let last = csv.lines().last().unwrap();
        assert_eq!(last.split(',').next().unwrap().parse::<f64>().unwrap(), 1.0 / 3.0);
        assert!(last.ends_with(','));
    }

    #[test]
    fn rejects_paths_outside_the_directory() {
        let tmp = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(tmp.path()).unwrap();
        assert!(out.write("../escape.txt", b"x").is_err());
        assert!(out.write("sub/escape.txt", b"x").is_err());
        out.write("ok.txt", b"x").unwrap();
        out.commit();
        assert!(tmp.path().join("ok.txt").exists());
    }

    #[test]
    fn uncommitted_outputs_are_removed() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("run");
        {
            let mut out = OutputDir::create(&dir).unwrap();
            out.write("partial.csv", b"1,2\n").unwrap();
        }
        assert!(!dir.exists());
    }
}
