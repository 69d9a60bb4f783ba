//! CSV output. Numbers use Rust's shortest round-trip formatting, so repeated runs are
//! byte-identical.

use crate::error::{Error, Result};
use crate::grid::GridField;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

fn put(out: &mut String, v: f64) {
    if v.is_nan() {
        out.push_str("nan");
    } else {
        write!(out, "{v:e}").expect("writing to a String");
    }
}

/// Node-major dump with header `t,x,<name>`.
pub fn grid_field_csv(field: &GridField, name: &str) -> String {
    let g = field.grid;
    let mut s = format!("t,x,{name}\n");
    for j in 0..g.n_t {
        for i in 0..g.n_x {
            put(&mut s, g.t(j));
            s.push(',');
            put(&mut s, g.x(i));
            s.push(',');
            put(&mut s, field.at(j, i));
            s.push('\n');
        }
    }
    s
}

/// Equal-length columns under the given header.
pub fn columns_csv(header: &[&str], cols: &[&[f64]]) -> Result<String> {
    if header.len() != cols.len() {
        return Err(Error::Io("header and column counts differ".into()));
    }
    let n = cols.first().map_or(0, |c| c.len());
    if cols.iter().any(|c| c.len() != n) {
        return Err(Error::Io("columns of different lengths".into()));
    }
    let mut s = header.join(",");
    s.push('\n');
    for r in 0..n {
        for (k, c) in cols.iter().enumerate() {
            if k > 0 {
                s.push(',');
            }
            put(&mut s, c[r]);
        }
        s.push('\n');
    }
    Ok(s)
}

pub fn write(dir: &Path, file: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(file), contents)?;
    Ok(())
}

pub fn write_grid_field(dir: &Path, file: &str, field: &GridField, name: &str) -> Result<()> {
    write(dir, file, &grid_field_csv(field, name))
}
