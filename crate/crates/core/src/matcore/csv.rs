//! Plain-text matrix export: one `i,j,re,im` line per entry, row-major,
//! floats printed with 17 significant digits so binary64 values round-trip.

use faer::{c64, Mat};

use super::matrix::{BasisTag, OperatorMatrix};
use crate::error::{Result, VlabError};

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn to_csv(a: &OperatorMatrix) -> String {
    let n = a.dim();
    let mut out = String::with_capacity(n * n * 52);
    for i in 0..n {
        for j in 0..n {
            let z = a.entry(i, j);
            out.push_str(&format!("{i},{j},{},{}\n", format_float(z.re), format_float(z.im)));
        }
    }
    out
}

pub fn from_csv(text: &str, basis: BasisTag) -> Result<OperatorMatrix> {
    let mut entries = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(VlabError::Parse(format!("line {}: expected 4 fields", lineno + 1)));
        }
        let bad = |what: &str| VlabError::Parse(format!("line {}: bad {what}", lineno + 1));
        let i: usize = fields[0].parse().map_err(|_| bad("row index"))?;
        let j: usize = fields[1].parse().map_err(|_| bad("column index"))?;
        let re: f64 = fields[2].parse().map_err(|_| bad("real part"))?;
        let im: f64 = fields[3].parse().map_err(|_| bad("imaginary part"))?;
        entries.push((i, j, c64::new(re, im)));
    }
    let n = (entries.len() as f64).sqrt().round() as usize;
    if n == 0 || n * n != entries.len() {
        return Err(VlabError::Parse(format!("{} entries do not form a square matrix", entries.len())));
    }
    let mut m = Mat::<c64>::zeros(n, n);
    for (pos, (i, j, z)) in entries.into_iter().enumerate() {
        if i != pos / n || j != pos % n {
            return Err(VlabError::Parse(format!("entry ({i},{j}) out of row-major order")));
        }
        m[(i, j)] = z;
    }
    OperatorMatrix::from_mat(m, basis)
}
