//! Result tables as CSV: a header row of column names, then one row per
//! record. Table entries are printed to 7 significant digits; missing
//! entries are left empty.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nonlocal_core::diagnostics::RunReport;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

/// `v` rounded to 7 significant digits.
pub fn sig7(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let e = v.abs().log10().floor() as i32;
    if (-4..7).contains(&e) {
        let decimals = (6 - e).max(0) as usize;
        let s = format!("{v:.decimals$}");
        // rounding may carry into the next decade, e.g. 9.9999999
        let digits = s
            .bytes()
            .filter(u8::is_ascii_digit)
            .skip_while(|&c| c == b'0')
            .count();
        if digits > 7 && decimals > 0 {
            let d = decimals - 1;
            return format!("{v:.d$}");
        }
        s
    } else {
        format!("{v:.6e}")
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            for (n, c) in row.iter().enumerate() {
                if n > 0 {
                    s.push(',');
                }
                match c {
                    Cell::Num(v) => s.push_str(&sig7(*v)),
                    Cell::Int(v) => write!(s, "{v}").unwrap(),
                    Cell::Text(t) => s.push_str(t),
                    Cell::Empty => {}
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|e| CliError::io(path, e))
    }
}

/// Per-step run history, `step,t,min,linf,l1_1,...`. Values keep full
/// precision so that conservation can be checked from the file.
pub fn report_csv(report: &RunReport) -> String {
    let n = report.first().map_or(0, |r| r.l1.len());
    let mut s = String::from("step,t,min,linf");
    for k in 1..=n {
        write!(s, ",l1_{k}").unwrap();
    }
    s.push('\n');
    let mut b = ryu::Buffer::new();
    for r in report.records() {
        write!(s, "{},{}", r.step, b.format(r.t)).unwrap();
        write!(s, ",{}", b.format(r.min)).unwrap();
        write!(s, ",{}", b.format(r.linf)).unwrap();
        for v in &r.l1 {
            write!(s, ",{}", b.format(*v)).unwrap();
        }
        s.push('\n');
    }
    s
}
