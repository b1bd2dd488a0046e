//! Snapshot CSV files.
//!
//! ```text
//! # t=0.5 nx=2 ny=2 x1=0.0 x2=1.0 y1=0.0 y2=1.0 species=1
//! 0.25,0.25,0.1
//! 0.25,0.75,0.0
//! ...
//! ```
//!
//! One row per cell, `i` outer and `j` inner, with every float printed as the
//! shortest decimal that parses back to the same value.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nonlocal_core::{Field, Grid, GridSpec};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub spec: GridSpec,
    pub field: Field,
}

fn fmt_f64(buf: &mut ryu::Buffer, v: f64) -> &str {
    buf.format(v)
}

pub fn write_snapshot<W: Write>(mut w: W, t: f64, grid: &Grid, field: &Field) -> io::Result<()> {
    let mut b = ryu::Buffer::new();
    let s = grid.spec();
    write!(w, "# t={}", fmt_f64(&mut b, t))?;
    write!(w, " nx={} ny={}", s.nx, s.ny)?;
    write!(w, " x1={}", fmt_f64(&mut b, s.x1))?;
    write!(w, " x2={}", fmt_f64(&mut b, s.x2))?;
    write!(w, " y1={}", fmt_f64(&mut b, s.y1))?;
    write!(w, " y2={}", fmt_f64(&mut b, s.y2))?;
    writeln!(w, " species={}", field.n_species())?;
    let xs = grid.x_centers();
    let ys = grid.y_centers();
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            w.write_all(fmt_f64(&mut b, x).as_bytes())?;
            w.write_all(b",")?;
            w.write_all(fmt_f64(&mut b, y).as_bytes())?;
            for k in 0..field.n_species() {
                w.write_all(b",")?;
                w.write_all(fmt_f64(&mut b, field.get(k, i, j)).as_bytes())?;
            }
            w.write_all(b"\n")?;
        }
    }
    Ok(())
}

pub fn snapshot_string(t: f64, grid: &Grid, field: &Field) -> String {
    let mut out = Vec::new();
    write_snapshot(&mut out, t, grid, field).expect("writing to memory");
    String::from_utf8(out).expect("ascii output")
}

pub fn save_snapshot(path: &Path, t: f64, grid: &Grid, field: &Field) -> Result<()> {
    let io_err = |e| CliError::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    write_snapshot(&mut w, t, grid, field).map_err(io_err)?;
    w.flush().map_err(io_err)
}

/// Parses a snapshot; errors carry the offending line number (`name` is used
/// only in messages).
pub fn read_snapshot<R: BufRead>(r: R, name: &Path) -> Result<Snapshot> {
    let err = |line: usize, message: String| CliError::Parse {
        path: name.to_path_buf(),
        line,
        message,
    };
    let mut lines = r.lines();
    let header = match lines.next() {
        Some(l) => l.map_err(|e| CliError::io(name, e))?,
        None => return Err(err(1, "empty file".into())),
    };
    let body = header
        .strip_prefix('#')
        .ok_or_else(|| err(1, "header must start with '#'".into()))?;
    let mut fields: [Option<&str>; 8] = [None; 8];
    const KEYS: [&str; 8] = ["t", "nx", "ny", "x1", "x2", "y1", "y2", "species"];
    for tok in body.split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| err(1, format!("malformed header token {tok:?}")))?;
        let slot = KEYS
            .iter()
            .position(|&key| key == k)
            .ok_or_else(|| err(1, format!("unknown header key {k:?}")))?;
        fields[slot] = Some(v);
    }
    let get = |idx: usize| fields[idx].ok_or_else(|| err(1, format!("missing header key {:?}", KEYS[idx])));
    let float = |idx: usize| -> Result<f64> {
        get(idx)?
            .parse::<f64>()
            .map_err(|e| err(1, format!("{}: {e}", KEYS[idx])))
    };
    let int = |idx: usize| -> Result<usize> {
        get(idx)?
            .parse::<usize>()
            .map_err(|e| err(1, format!("{}: {e}", KEYS[idx])))
    };
    let t = float(0)?;
    let (nx, ny, n) = (int(1)?, int(2)?, int(7)?);
    let spec = GridSpec::new(float(3)?, float(4)?, float(5)?, float(6)?, nx, ny);
    let mut field = Field::zeros(n, nx, ny);
    let mut count = 0usize;
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        let line = line.map_err(|e| CliError::io(name, e))?;
        if line.is_empty() {
            continue;
        }
        if count == nx * ny {
            return Err(err(lineno, format!("more than nx*ny = {} rows", nx * ny)));
        }
        let values = line
            .split(',')
            .map(|p| p.parse::<f64>().map_err(|e| err(lineno, format!("{p:?}: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != 2 + n {
            return Err(err(
                lineno,
                format!("expected {} columns, got {}", 2 + n, values.len()),
            ));
        }
        let (i, j) = (count / ny, count % ny);
        for k in 0..n {
            field.set(k, i, j, values[2 + k]);
        }
        count += 1;
    }
    if count != nx * ny {
        return Err(err(count + 2, format!("expected {} rows, got {count}", nx * ny)));
    }
    Ok(Snapshot { t, spec, field })
}

pub fn load_snapshot(path: &Path) -> Result<Snapshot> {
    let f = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_snapshot(BufReader::new(f), path)
}
