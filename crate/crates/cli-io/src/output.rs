use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use rupture_analysis::{RuptureTrace, TraceRecord};
use rupture_core::FilmState;
use rupture_similarity::SimilarityProfile;

/// Round-trippable double formatting (17 significant digits).
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Writes `#`-prefixed metadata lines, a header row and one row per entry.
pub fn write_csv(path: &Path, metadata: &[(String, String)], columns: &[&str], rows: &[Vec<f64>]) -> io::Result<()> {
    let mut out = String::new();
    for (k, v) in metadata {
        let _ = writeln!(out, "# {k} = {v}");
    }
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&v| num(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    fs::write(path, out)
}

pub const TRACE_COLUMNS: [&str; 8] = ["t", "h_min", "x_c", "hxx_c", "hxxxx_c", "dt", "E", "mass"];

pub fn write_trace(path: &Path, metadata: &[(String, String)], trace: &RuptureTrace) -> io::Result<()> {
    let rows: Vec<Vec<f64>> = trace
        .records
        .iter()
        .map(|r| vec![r.t, r.h_min, r.x_c, r.hxx_c, r.hxxxx_c, r.dt, r.energy, r.mass])
        .collect();
    write_csv(path, metadata, &TRACE_COLUMNS, &rows)
}

pub fn write_snapshot(path: &Path, metadata: &[(String, String)], state: &FilmState) -> io::Result<()> {
    let rows: Vec<Vec<f64>> = state.grid.centers().iter().zip(&state.h).map(|(&x, &h)| vec![x, h]).collect();
    write_csv(path, metadata, &["x", "h"], &rows)
}

pub fn write_profile(path: &Path, metadata: &[(String, String)], profile: &SimilarityProfile) -> io::Result<()> {
    let (h, dh, d2h) = (profile.h(), profile.dh(), profile.d2h());
    let rows: Vec<Vec<f64>> = (0..profile.eta.len()).map(|i| vec![profile.eta[i], h[i], dh[i], d2h[i]]).collect();
    write_csv(path, metadata, &["eta", "H", "dH", "d2H"], &rows)
}

/// Parsed comma-separated file: metadata pairs, column names and rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

pub fn read_csv(path: &Path) -> io::Result<Table> {
    let text = fs::read_to_string(path)?;
    let bad = |msg: String| io::Error::new(io::ErrorKind::InvalidData, format!("{}: {msg}", path.display()));
    let mut metadata = Vec::new();
    let mut columns = None;
    let mut rows = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        if let Some(meta) = line.strip_prefix('#') {
            if let Some((k, v)) = meta.split_once('=') {
                metadata.push((k.trim().to_string(), v.trim().to_string()));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        if columns.is_none() {
            columns = Some(line.split(',').map(|c| c.trim().to_string()).collect::<Vec<_>>());
            continue;
        }
        let row = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| bad(format!("line {}: {e}", ln + 1)))?;
        rows.push(row);
    }
    let columns = columns.ok_or_else(|| bad("missing header row".into()))?;
    if let Some(r) = rows.iter().find(|r| r.len() != columns.len()) {
        return Err(bad(format!("row has {} fields, header has {}", r.len(), columns.len())));
    }
    Ok(Table { metadata, columns, rows })
}

pub fn read_trace(path: &Path) -> io::Result<RuptureTrace> {
    let table = read_csv(path)?;
    let idx: Vec<usize> = TRACE_COLUMNS
        .iter()
        .map(|c| {
            table
                .columns
                .iter()
                .position(|n| n == c)
                .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidData, format!("trace lacks column `{c}`")))
        })
        .collect::<io::Result<_>>()?;
    let mut trace = RuptureTrace::new();
    for r in &table.rows {
        trace.push(TraceRecord {
            t: r[idx[0]],
            h_min: r[idx[1]],
            x_c: r[idx[2]],
            hxx_c: r[idx[3]],
            hxxxx_c: r[idx[4]],
            dt: r[idx[5]],
            energy: r[idx[6]],
            mass: r[idx[7]],
        });
    }
    Ok(trace)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Int(i64),
    Bool(bool),
    Str(String),
    Nums(Vec<f64>),
}

impl Value {
    fn render(&self) -> String {
        match self {
            Value::Num(v) => num(*v),
            Value::Int(v) => v.to_string(),
            Value::Bool(v) => v.to_string(),
            Value::Str(s) => format!("{s:?}"),
            Value::Nums(v) => {
                let items: Vec<String> = v.iter().map(|&x| num(x)).collect();
                format!("[{}]", items.join(", "))
            }
        }
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Num(v)
    }
}
impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}
impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}
impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Str(v.to_string())
    }
}
impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Str(v)
    }
}
impl From<Vec<f64>> for Value {
    fn from(v: Vec<f64>) -> Self {
        Value::Nums(v)
    }
}
impl From<(f64, f64)> for Value {
    fn from(v: (f64, f64)) -> Self {
        Value::Nums(vec![v.0, v.1])
    }
}

/// Nested key/value report written as dotted `[section]` tables.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    sections: Vec<(String, Vec<(String, Value)>)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, section: &str, key: &str, value: impl Into<Value>) -> &mut Self {
        let value = value.into();
        let entries = match self.sections.iter().position(|(s, _)| s == section) {
            Some(i) => &mut self.sections[i].1,
            None => {
                self.sections.push((section.to_string(), Vec::new()));
                &mut self.sections.last_mut().unwrap().1
            }
        };
        match entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = value,
            None => entries.push((key.to_string(), value)),
        }
        self
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&Value> {
        self.sections
            .iter()
            .find(|(s, _)| s == section)
            .and_then(|(_, e)| e.iter().find(|(k, _)| k == key))
            .map(|(_, v)| v)
    }

    /// Appends every section of `other` under `prefix`.
    pub fn nest(&mut self, prefix: &str, other: &Report) {
        for (s, entries) in &other.sections {
            for (k, v) in entries {
                self.set(&format!("{prefix}.{s}"), k, v.clone());
            }
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, (section, entries)) in self.sections.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let _ = writeln!(out, "[{section}]");
            for (k, v) in entries {
                let _ = writeln!(out, "{k} = {}", v.render());
            }
        }
        out
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        fs::write(path, self.render())
    }
}
