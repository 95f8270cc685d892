//! Plain-text polygon mesh format.
//!
//! ```text
//! POLYMESH
//! <n_vertices> <n_elements>
//! x y                                  (one line per vertex)
//! k v0 v1 ... v{k-1} <physics> <region> (one line per element)
//! ```
//!
//! Lines starting with `#` and blank lines are ignored. `physics` is one of
//! `elastic`, `poroelastic`, `acoustic`.

use std::fmt::Write as _;
use std::path::Path;

use super::{Physics, PolyMesh, Subdomain};
use crate::{Error, Point, Result};

pub fn parse_mesh(text: &str) -> Result<PolyMesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let perr = |line: usize, msg: &str| Error::Parse { line, msg: msg.to_string() };

    let (ln, magic) = lines.next().ok_or_else(|| perr(0, "empty mesh file"))?;
    if magic != "POLYMESH" {
        return Err(perr(ln, "expected POLYMESH header"));
    }
    let (ln, counts) = lines.next().ok_or_else(|| perr(ln, "missing counts line"))?;
    let counts: Vec<usize> = counts
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| perr(ln, "bad count")))
        .collect::<Result<_>>()?;
    if counts.len() != 2 {
        return Err(perr(ln, "counts line must hold two integers"));
    }
    let (nv, ne) = (counts[0], counts[1]);

    let mut vertices: Vec<Point> = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines.next().ok_or_else(|| perr(0, "unexpected end of vertex list"))?;
        let xy: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| perr(ln, "bad coordinate")))
            .collect::<Result<_>>()?;
        if xy.len() != 2 {
            return Err(perr(ln, "vertex line must hold two coordinates"));
        }
        vertices.push([xy[0], xy[1]]);
    }

    let mut elements = Vec::with_capacity(ne);
    let mut labels = Vec::with_capacity(ne);
    for _ in 0..ne {
        let (ln, l) = lines.next().ok_or_else(|| perr(0, "unexpected end of element list"))?;
        let tok: Vec<&str> = l.split_whitespace().collect();
        let k: usize = tok.first().and_then(|t| t.parse().ok()).ok_or_else(|| perr(ln, "bad vertex count"))?;
        if tok.len() != k + 3 {
            return Err(perr(ln, "element line must be: k v0..v{k-1} physics region"));
        }
        let loop_: Vec<usize> = tok[1..=k]
            .iter()
            .map(|t| t.parse().map_err(|_| perr(ln, "bad vertex index")))
            .collect::<Result<_>>()?;
        let physics = Physics::parse(tok[k + 1]).ok_or_else(|| perr(ln, "unknown physics label"))?;
        let region: u32 = tok[k + 2].parse().map_err(|_| perr(ln, "bad region index"))?;
        elements.push(loop_);
        labels.push(Subdomain::new(physics, region));
    }
    if let Some((ln, _)) = lines.next() {
        return Err(perr(ln, "trailing content after element list"));
    }
    PolyMesh::new(vertices, elements, labels)
}

pub fn format_mesh(mesh: &PolyMesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "POLYMESH");
    let _ = writeln!(s, "{} {}", mesh.vertices().len(), mesh.n_elements());
    for p in mesh.vertices() {
        let _ = writeln!(s, "{:e} {:e}", p[0], p[1]);
    }
    for k in 0..mesh.n_elements() {
        let e = mesh.element(k);
        let _ = write!(s, "{}", e.len());
        for v in e {
            let _ = write!(s, " {v}");
        }
        let sd = mesh.subdomain(k);
        let _ = writeln!(s, " {} {}", sd.physics.name(), sd.region);
    }
    s
}

pub fn read_mesh(path: &Path) -> Result<PolyMesh> {
    parse_mesh(&std::fs::read_to_string(path)?)
}

pub fn write_mesh(mesh: &PolyMesh, path: &Path) -> Result<()> {
    std::fs::write(path, format_mesh(mesh))?;
    Ok(())
}
