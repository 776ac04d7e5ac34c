//! Bit-stable CSV emission and the output-directory manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// A header plus rows of doubles.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(Error::LengthMismatch {
                expected: self.header.len(),
                got: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    s.push(',');
                }
                let _ = write!(s, "{}", fmt_f64(*v));
            }
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| Error::InvalidArgument("empty CSV".into()))?
            .split(',')
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let row = line
                .split(',')
                .map(|v| v.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::InvalidArgument(format!("CSV row {}: {e}", i + 2)))?;
            if row.len() != header.len() {
                return Err(Error::LengthMismatch {
                    expected: header.len(),
                    got: row.len(),
                });
            }
            rows.push(row);
        }
        Ok(Self { header, rows })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.render()).map_err(|e| Error::io(path, e))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Tracks files written into an output directory and writes `MANIFEST`.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    files: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, relative: &str) -> PathBuf {
        self.root.join(relative)
    }

    /// Creates parent directories, writes, and records the file.
    pub fn write_bytes(&mut self, relative: &str, bytes: &[u8]) -> Result<PathBuf> {
        let p = self.root.join(relative);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        fs::write(&p, bytes).map_err(|e| Error::io(&p, e))?;
        self.record(relative);
        Ok(p)
    }

    pub fn write_csv(&mut self, relative: &str, table: &CsvTable) -> Result<PathBuf> {
        self.write_bytes(relative, table.render().as_bytes())
    }

    /// Records a file that was written by someone else (e.g. a checkpoint).
    pub fn record(&mut self, relative: &str) {
        if !self.files.iter().any(|f| f == relative) {
            self.files.push(relative.to_string());
        }
    }

    /// `MANIFEST`: a status line then `sha256  path` per recorded file, sorted.
    pub fn write_manifest(&self, complete: bool) -> Result<PathBuf> {
        let mut files = self.files.clone();
        files.sort();
        let mut text = format!("status {}\n", if complete { "complete" } else { "incomplete" });
        for f in &files {
            let p = self.root.join(f);
            let bytes = fs::read(&p).map_err(|e| Error::io(&p, e))?;
            let _ = writeln!(text, "{}  {f}", sha256_hex(&bytes));
        }
        let p = self.root.join("MANIFEST");
        fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
        Ok(p)
    }
}
