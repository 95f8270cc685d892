//! Matrix Market coordinate format (`real general`).

use std::fmt::Write as _;
use std::path::Path;

use super::{CsrMatrix, TripletBuilder};
use crate::{Error, Result};

pub fn format_matrix_market(a: &CsrMatrix) -> String {
    let mut s = String::with_capacity(32 * a.nnz() + 64);
    s.push_str("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(s, "{} {} {}", a.nrows(), a.ncols(), a.nnz());
    for i in 0..a.nrows() {
        for (j, v) in a.row(i) {
            let _ = writeln!(s, "{} {} {:.17e}", i + 1, j + 1, v);
        }
    }
    s
}

pub fn parse_matrix_market(text: &str) -> Result<CsrMatrix> {
    let mut lines = text.lines().enumerate();
    let perr = |line: usize, msg: &str| Error::Parse { line: line + 1, msg: msg.to_string() };
    let (l0, header) = lines.next().ok_or_else(|| perr(0, "empty Matrix Market file"))?;
    let h = header.to_ascii_lowercase();
    if !h.starts_with("%%matrixmarket matrix coordinate real") {
        return Err(perr(l0, "expected a coordinate real Matrix Market header"));
    }
    let symmetric = h.contains("symmetric");
    let mut size = None;
    let mut t: Option<TripletBuilder> = None;
    let mut seen = 0usize;
    for (ln, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let tok: Vec<&str> = line.split_whitespace().collect();
        match size {
            None => {
                if tok.len() != 3 {
                    return Err(perr(ln, "size line must hold rows, columns and entries"));
                }
                let v: Vec<usize> = tok.iter().map(|s| s.parse().map_err(|_| perr(ln, "bad size"))).collect::<Result<_>>()?;
                size = Some((v[0], v[1], v[2]));
                t = Some(TripletBuilder::new(v[0], v[1]));
            }
            Some((nr, nc, _)) => {
                if tok.len() != 3 {
                    return Err(perr(ln, "entry line must hold row, column and value"));
                }
                let i: usize = tok[0].parse().map_err(|_| perr(ln, "bad row index"))?;
                let j: usize = tok[1].parse().map_err(|_| perr(ln, "bad column index"))?;
                let v: f64 = tok[2].parse().map_err(|_| perr(ln, "bad value"))?;
                if i == 0 || j == 0 || i > nr || j > nc {
                    return Err(perr(ln, "index out of range"));
                }
                let tb = t.as_mut().unwrap();
                tb.add(i - 1, j - 1, v);
                if symmetric && i != j {
                    tb.add(j - 1, i - 1, v);
                }
                seen += 1;
            }
        }
    }
    let (_, _, nnz) = size.ok_or_else(|| perr(0, "missing size line"))?;
    if seen != nnz {
        return Err(perr(0, &format!("expected {nnz} entries, found {seen}")));
    }
    Ok(t.unwrap().build())
}

pub fn write_matrix_market(a: &CsrMatrix, path: &Path) -> Result<()> {
    std::fs::write(path, format_matrix_market(a))?;
    Ok(())
}

pub fn read_matrix_market(path: &Path) -> Result<CsrMatrix> {
    parse_matrix_market(&std::fs::read_to_string(path)?)
}
