//! Tables written as CSV or JSON, atomically when going to a file.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
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

#[derive(Debug, Clone, PartialEq, Serialize)]
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
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(csv_cell).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    /// JSON document with the table plus `version`, `command` and `config`.
    pub fn to_json<C: Serialize>(&self, command: &str, config: &C) -> String {
        #[derive(Serialize)]
        struct Doc<'a, C> {
            version: &'static str,
            command: &'a str,
            config: &'a C,
            columns: &'a [String],
            rows: &'a [Vec<Cell>],
        }
        let doc = Doc {
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            columns: &self.columns,
            rows: &self.rows,
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("table serializes");
        s.push('\n');
        s
    }

    pub fn render<C: Serialize>(&self, format: Format, command: &str, config: &C) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(command, config),
        }
    }
}

fn csv_cell(c: &Cell) -> String {
    match c {
        Cell::Num(v) => format!("{v:.16e}"),
        Cell::Text(t) if t.contains([',', '"', '\n']) => format!("\"{}\"", t.replace('"', "\"\"")),
        Cell::Text(t) => t.clone(),
    }
}

/// `dir/stem_lambda=<v>.ext` for fan-out over several lambdas.
pub fn lambda_path(base: &Path, lambda: f64) -> PathBuf {
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match base.extension() {
        Some(ext) => format!("{stem}_lambda={lambda}.{}", ext.to_string_lossy()),
        None => format!("{stem}_lambda={lambda}"),
    };
    base.with_file_name(name)
}

/// Writes through a temporary file in the same directory and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_doubles() {
        let mut t = Table::new(&["r", "name"]);
        let x = 0.1 + 0.2;
        t.push(vec![x.into(), "a,b".into()]);
        let csv = t.to_csv();
        let line = csv.lines().nth(1).unwrap();
        let (num, text) = line.split_once(',').unwrap();
        assert_eq!(num.parse::<f64>().unwrap(), x);
        assert_eq!(text, "\"a,b\"");
    }

    #[test]
    fn fan_out_names() {
        assert_eq!(lambda_path(Path::new("out/k.csv"), 0.5), PathBuf::from("out/k_lambda=0.5.csv"));
        assert_eq!(lambda_path(Path::new("k"), 2.0), PathBuf::from("k_lambda=2"));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        write_atomic(&p, "one").unwrap();
        write_atomic(&p, "two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
