//! Tables, reports and the staged output directory.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    /// Locale-free rendering; floats carry 17 significant digits.
    pub fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) if v.is_finite() => format!("{v:.16e}"),
            Cell::Float(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

/// A named pass/fail property computed by an experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Everything an experiment produces, before it is written.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: serde_json::Value,
    pub checks: Vec<Check>,
    pub table: Table,
    /// Relative path and line-delimited contents of each event log.
    pub logs: Vec<(String, String)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WallClock {
    pub started_unix_ms: u128,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub artifact: &'static str,
    pub artifact_version: &'static str,
    pub experiment: String,
    pub config_fingerprint: String,
    pub config: Vec<String>,
    pub seed: u64,
    pub workers: usize,
    pub records: serde_json::Value,
    pub checks: Vec<Check>,
    pub event_logs: Vec<String>,
    pub wall_clock: WallClock,
}

/// Files are written into a hidden staging directory and moved into place
/// only once everything succeeded; dropping an unfinished stage removes it.
pub struct Stage {
    out: PathBuf,
    dir: PathBuf,
    written: Vec<PathBuf>,
    committed: bool,
}

impl Stage {
    pub fn new(out: &Path) -> io::Result<Self> {
        fs::create_dir_all(out)?;
        let dir = out.join(format!(".partial-{}", std::process::id()));
        if dir.exists() {
            fs::remove_dir_all(&dir)?;
        }
        fs::create_dir_all(&dir)?;
        Ok(Self {
            out: out.to_path_buf(),
            dir,
            written: Vec::new(),
            committed: false,
        })
    }

    pub fn write(&mut self, rel: &str, contents: &str) -> io::Result<()> {
        let rel = PathBuf::from(rel);
        let path = self.dir.join(&rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, contents)?;
        self.written.push(rel);
        Ok(())
    }

    pub fn commit(mut self) -> io::Result<Vec<PathBuf>> {
        let mut done = Vec::new();
        for rel in &self.written {
            let dest = self.out.join(rel);
            if let Some(parent) = dest.parent() {
                fs::create_dir_all(parent)?;
            }
            fs::rename(self.dir.join(rel), &dest)?;
            done.push(dest);
        }
        fs::remove_dir_all(&self.dir)?;
        self.committed = true;
        Ok(done)
    }
}

impl Drop for Stage {
    fn drop(&mut self) {
        if !self.committed {
            let _ = fs::remove_dir_all(&self.dir);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, 2.5e-17, 12345.678, 0.0] {
            let s = Cell::Float(v).render();
            assert_eq!(s.parse::<f64>().unwrap(), v);
            assert!(!s.contains(','));
        }
        assert_eq!(Cell::from(None::<f64>).render(), "");
    }

    #[test]
    fn csv_has_header_and_quotes() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![1u64.into(), "x,y".into()]);
        assert_eq!(t.to_csv(), "a,b\n1,\"x,y\"\n");
    }

    #[test]
    fn unfinished_stage_leaves_nothing() {
        let tmp = tempfile::tempdir().unwrap();
        {
            let mut s = Stage::new(tmp.path()).unwrap();
            s.write("table.csv", "a\n").unwrap();
        }
        assert_eq!(fs::read_dir(tmp.path()).unwrap().count(), 0);
        let mut s = Stage::new(tmp.path()).unwrap();
        s.write("events/x.jsonl", "{}\n").unwrap();
        s.commit().unwrap();
        assert!(tmp.path().join("events/x.jsonl").exists());
        assert_eq!(fs::read_dir(tmp.path()).unwrap().count(), 1);
    }
}
