//! CSV layout of trajectories and key/value reports.

use std::fmt;
use std::fs::File;
use std::path::Path;

use reinfect::model::SystemKind;

use crate::error::{CliError, Result};

/// Header of a full trajectory file: `t`, the totals, then (micro) S1..Sn, E1..En, I1..In, R1..Rn.
pub fn columns(kind: SystemKind, observed: bool) -> Vec<String> {
    let mut c: Vec<String> = vec!["t".into()];
    match kind {
        SystemKind::Sis => c.extend(["S", "I", "N", "S1", "I1"].map(String::from)),
        _ => c.extend(["S", "E", "I", "R", "N"].map(String::from)),
    }
    if let Some(n) = kind.truncation() {
        for name in ["S", "E", "I", "R"] {
            c.extend((1..=n).map(|i| format!("{name}{i}")));
        }
    }
    if observed {
        c.extend(["y", "y1"].map(String::from));
    }
    c
}

/// Values for every column of [`columns`] except `t`, from a flat state.
pub fn row(kind: SystemKind, alpha: Option<f64>, x: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(x.len() + 3);
    let (i, i1) = match kind {
        SystemKind::Sis => {
            v.extend([x[0], x[1], x[0] + x[1], x[2], x[3]]);
            (x[1], x[3])
        }
        _ => {
            v.extend_from_slice(&x[..4]);
            v.push(x[..4].iter().sum());
            (x[2], x.get(6).copied().unwrap_or(f64::NAN))
        }
    };
    if let Some(n) = kind.truncation() {
        for k in 0..4 {
            v.extend((0..n).map(|b| x[4 + 4 * b + k]));
        }
    }
    if let Some(a) = alpha {
        v.extend([a * i, a * i1]);
    }
    v
}

pub fn fmt_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `header` and `rows` to `path`, formatting every value with 17 significant digits.
pub fn write_csv(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header).map_err(|e| CliError::csv(path, e))?;
    for r in rows {
        w.write_record(r.iter().map(|&v| fmt_value(v))).map_err(|e| CliError::csv(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Named numeric columns read from a CSV with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn read(path: &Path) -> Result<CsvTable> {
        let file = File::open(path).map_err(|e| CliError::io(path, e))?;
        let mut r = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(file);
        let header: Vec<String> = r.headers().map_err(|e| CliError::csv(path, e))?.iter().map(String::from).collect();
        if header.is_empty() {
            return Err(CliError::csv(path, "missing header row"));
        }
        let mut columns = vec![Vec::new(); header.len()];
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| CliError::csv(path, e))?;
            for (k, field) in rec.iter().enumerate() {
                let v: f64 = field
                    .parse()
                    .map_err(|_| CliError::csv(path, format!("row {}: column {:?}: not a number: {field:?}", line + 2, header[k])))?;
                columns[k].push(v);
            }
        }
        Ok(CsvTable { header, columns })
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.header.iter().position(|h| h == name).map(|k| self.columns[k].as_slice())
    }
}

/// Ordered `key = value` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub lines: Vec<(String, String)>,
}

impl Report {
    pub fn push(&mut self, key: impl Into<String>, value: impl fmt::Display) {
        self.lines.push((key.into(), value.to_string()));
    }

    pub fn num(&mut self, key: impl Into<String>, v: f64) {
        self.push(key, format!("{v:e}"));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.lines.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| CliError::io(path, e))?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(["key", "value"]).map_err(|e| CliError::csv(path, e))?;
        for (k, v) in &self.lines {
            w.write_record([k, v]).map_err(|e| CliError::csv(path, e))?;
        }
        w.flush().map_err(|e| CliError::io(path, e))
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.lines {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}
