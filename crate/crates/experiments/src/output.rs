//! CSV tables with `#` comment lines. Floats use the shortest decimal
//! representation that round-trips (`{:?}` formatting).

use std::fmt;
use std::path::Path;

use crate::error::{ExpError, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    F(f64),
    U(u64),
    B(bool),
    S(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::F(x) => write!(f, "{x:?}"),
            Value::U(x) => write!(f, "{x}"),
            Value::B(x) => write!(f, "{x}"),
            Value::S(x) => f.write_str(x),
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::F(x)
    }
}

impl From<usize> for Value {
    fn from(x: usize) -> Self {
        Value::U(x as u64)
    }
}

impl From<u64> for Value {
    fn from(x: u64) -> Self {
        Value::U(x)
    }
}

impl From<bool> for Value {
    fn from(x: bool) -> Self {
        Value::B(x)
    }
}

impl From<&str> for Value {
    fn from(x: &str) -> Self {
        Value::S(x.to_string())
    }
}

impl From<String> for Value {
    fn from(x: String) -> Self {
        Value::S(x)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    /// File name, including the `.csv` extension.
    pub file: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    /// Extra comment lines written after the provenance header.
    pub notes: Vec<String>,
    /// Comment lines written after the data rows.
    pub footer: Vec<String>,
}

impl Table {
    pub fn new(file: &str, columns: &[&str]) -> Self {
        Self {
            file: file.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            notes: Vec::new(),
            footer: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width for {}", self.file);
        self.rows.push(row);
    }

    /// Numeric column by name.
    pub fn column_f64(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        self.rows
            .iter()
            .map(|r| match &r[j] {
                Value::F(x) => Some(*x),
                Value::U(x) => Some(*x as f64),
                _ => None,
            })
            .collect()
    }

    pub fn render(&self, header: &str) -> Result<String> {
        let mut out = String::new();
        out.push_str(&format!("# {header}\r\n"));
        for n in &self.notes {
            out.push_str(&format!("# {n}\r\n"));
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|v| v.to_string()))?;
        }
        let body = w.into_inner().map_err(|e| ExpError::Io(e.into_error()))?;
        out.push_str(&String::from_utf8(body).expect("CSV output is UTF-8"));
        for f in &self.footer {
            out.push_str(&format!("# {f}\r\n"));
        }
        Ok(out)
    }
}

/// Provenance line placed at the top of every CSV.
pub fn provenance_header(experiment: &str, config_hash: &str, seed: u64) -> String {
    format!("specgeo experiment={experiment} config_sha256={config_hash} seed={seed}")
}

/// A CSV file read back with comments skipped.
#[derive(Clone, Debug, PartialEq)]
pub struct ParsedCsv {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl ParsedCsv {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let columns = r.headers()?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()))
            .collect::<std::result::Result<_, _>>()?;
        Ok(Self { columns, rows })
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn f64_column(&self, name: &str) -> Result<Option<Vec<f64>>> {
        let Some(j) = self.index(name) else {
            return Ok(None);
        };
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                r[j].parse::<f64>()
                    .map_err(|_| ExpError::Input(format!("row {}: column {name} is not a number: {:?}", i + 1, r[j])))
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    /// 1-based label column converted to 0-based indices.
    pub fn label_column(&self, name: &str) -> Result<Option<Vec<usize>>> {
        let Some(j) = self.index(name) else {
            return Ok(None);
        };
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| match r[j].parse::<usize>() {
                Ok(z) if z >= 1 => Ok(z - 1),
                _ => Err(ExpError::Input(format!("row {}: label must be a positive integer, got {:?}", i + 1, r[j]))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 2.5e17, -0.0, 123456.789] {
            let s = Value::F(x).to_string();
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn render_and_parse() {
        let mut t = Table::new("t.csv", &["x", "label", "ok"]);
        t.push(vec![0.5.into(), 2usize.into(), true.into()]);
        t.push(vec![1.25.into(), 1usize.into(), false.into()]);
        t.footer.push("r_squared=1.0".into());
        let text = t.render("hdr").unwrap();
        assert!(text.starts_with("# hdr\r\n"));
        let p = ParsedCsv::parse(&text).unwrap();
        assert_eq!(p.columns, vec!["x", "label", "ok"]);
        assert_eq!(p.f64_column("x").unwrap().unwrap(), vec![0.5, 1.25]);
        assert_eq!(p.label_column("label").unwrap().unwrap(), vec![1, 0]);
        assert!(p.f64_column("missing").unwrap().is_none());
    }

    #[test]
    fn bad_label_reported() {
        let p = ParsedCsv::parse("x,label\n1.0,0\n").unwrap();
        assert!(matches!(p.label_column("label"), Err(ExpError::Input(_))));
    }
}
