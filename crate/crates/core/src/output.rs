//! Number formatting and plain-text tables.
//!
//! Every number leaves the crate with 12 significant digits so that equal
//! inputs give byte-identical files.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde_json::Value;

use crate::error::{Error, Result};
use crate::sparse::C64;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// `x` with 12 significant digits, positional for moderate magnitudes.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..].parse().expect("integer exponent");
    if (-5..15).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

/// `x` rounded to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x.is_finite() {
        fmt_num(x).parse().expect("formatted number parses")
    } else {
        x
    }
}

/// Rounds every number in a JSON tree; non-finite values become strings.
pub fn round_json(v: &Value) -> Value {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => {
                serde_json::Number::from_f64(round_sig(x)).map(Value::Number).unwrap_or(Value::Null)
            }
            _ => v.clone(),
        },
        Value::Array(a) => Value::Array(a.iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.iter().map(|(k, x)| (k.clone(), round_json(x))).collect()),
        _ => v.clone(),
    }
}

/// Serializes with rounded numbers; ±∞ and NaN are written as strings.
pub fn to_json<T: serde::Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::Parse(e.to_string()))?;
    let v = round_json(&v);
    serde_json::to_string_pretty(&v).map_err(|e| Error::Parse(e.to_string()))
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(self.to_csv().as_bytes())
    }

    /// Reads a table written by [`Table::to_csv`]. Cells that parse as
    /// numbers become `Num`, `true`/`false` become `Bool`.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = match lines.next() {
            Some(l) => l.map_err(|e| Error::Parse(e.to_string()))?,
            None => return Err(Error::Parse("empty table".into())),
        };
        let header: Vec<String> = header.trim().split(',').map(str::to_string).collect();
        if header.iter().any(|h| h.is_empty()) {
            return Err(Error::Parse("empty column name in header".into()));
        }
        let mut rows = Vec::new();
        for (k, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::Parse(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let cells: Vec<Cell> = line
                .trim()
                .split(',')
                .map(|c| match c {
                    "true" => Cell::Bool(true),
                    "false" => Cell::Bool(false),
                    _ => c.parse::<f64>().map(Cell::Num).unwrap_or_else(|_| Cell::Text(c.to_string())),
                })
                .collect();
            if cells.len() != header.len() {
                return Err(Error::Parse(format!(
                    "row {} has {} cells, header has {}",
                    k + 2,
                    cells.len(),
                    header.len()
                )));
            }
            rows.push(cells);
        }
        Ok(Self { header, rows })
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

/// Field dump with columns x,y,re,im,|ψ|².
pub fn field_table(positions: &[(f64, f64)], values: &[C64]) -> Table {
    let mut t = Table::new(&["x", "y", "re", "im", "abs2"]);
    for (&(x, y), z) in positions.iter().zip(values) {
        t.push(vec![x.into(), y.into(), z.re.into(), z.im.into(), z.norm_sqr().into()]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(fmt_num(0.590106125), "0.590106125000");
        assert_eq!(fmt_num(-1.0), "-1.00000000000");
        assert_eq!(fmt_num(1234.5), "1234.50000000");
        assert_eq!(fmt_num(1.5e-9), "1.50000000000e-9");
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(round_sig(1.0 / 3.0), 0.333333333333);
    }

    #[test]
    fn csv_round_trip() {
        let mut t = Table::new(&["a", "ok"]);
        t.push(vec![0.25.into(), true.into()]);
        let back = Table::read_csv(t.to_csv().as_bytes()).unwrap();
        assert_eq!(back, t);
    }
}
