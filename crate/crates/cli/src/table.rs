//! CSV tables: header always present, reals with 17 significant digits,
//! flags as `yes`/`no`.

use std::fmt::Write as _;
use std::path::Path;

use crate::output::{write_atomic, OutputError};

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(u64),
    Real(f64),
    Flag(bool),
    Text(String),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Flag(v)
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

/// `{:.16e}`: 17 significant digits, enough to round-trip any binary64.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_cell(out: &mut String, cell: &Cell) {
    match cell {
        Cell::Int(v) => {
            let _ = write!(out, "{v}");
        }
        Cell::Real(v) => out.push_str(&format_real(*v)),
        Cell::Flag(v) => out.push_str(if *v { "yes" } else { "no" }),
        Cell::Text(s) if s.contains([',', '"', '\n', '\r']) => {
            out.push('"');
            out.push_str(&s.replace('"', "\"\""));
            out.push('"');
        }
        Cell::Text(s) => out.push_str(s),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: vec![],
        }
    }

    pub fn header(&self) -> &[&'static str] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    /// Panics if the row width differs from the header.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width must match header {:?}", self.header);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_cell(&mut out, cell);
            }
            out.push('\n');
        }
        out
    }
}

/// Writes the table through a temporary file and a rename.
pub fn emit_csv(table: &Table, path: &Path) -> Result<(), OutputError> {
    write_atomic(path, table.to_csv().as_bytes())
}

#[macro_export]
macro_rules! row {
    ($($x:expr),* $(,)?) => {
        vec![$($crate::table::Cell::from($x)),*]
    };
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_is_header_only() {
        assert_eq!(Table::new(&["n", "lambda_n"]).to_csv(), "n,lambda_n\n");
    }

    #[test]
    fn reals_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 0.0] {
            let s = format_real(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(format_real(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn cells() {
        let mut t = Table::new(&["n", "x", "ok", "note"]);
        t.push(row![3usize, 0.5, true, "a, \"b\""]);
        t.push(row![4usize, -1.0, false, "plain"]);
        assert_eq!(
            t.to_csv(),
            "n,x,ok,note\n3,5.0000000000000000e-1,yes,\"a, \"\"b\"\"\"\n4,-1.0000000000000000e0,no,plain\n"
        );
    }

    #[test]
    #[should_panic]
    fn ragged_row() {
        Table::new(&["a", "b"]).push(row![1usize]);
    }
}
