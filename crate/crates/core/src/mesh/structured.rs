//! Structured quadrilateral and triangle grids on rectangles.

use super::geometry::Rect;
use super::{PolyMesh, Physics, Subdomain};
use crate::{Error, Point, Result};

fn grid_vertices(rect: &Rect, nx: usize, ny: usize) -> Vec<Point> {
    let mut v = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            // endpoints exact so that sides coincide with the rectangle
            let x = if i == nx { rect.max[0] } else { rect.min[0] + rect.width() * i as f64 / nx as f64 };
            let y = if j == ny { rect.max[1] } else { rect.min[1] + rect.height() * j as f64 / ny as f64 };
            v.push([x, y]);
        }
    }
    v
}

fn check(rect: &Rect, nx: usize, ny: usize) -> Result<()> {
    if nx == 0 || ny == 0 || !(rect.area() > 0.0) {
        return Err(Error::InvalidInput("structured grid needs nx, ny >= 1 and a non-degenerate box".into()));
    }
    Ok(())
}

/// `nx * ny` axis-aligned quadrilaterals.
pub fn structured_quads(rect: &Rect, nx: usize, ny: usize) -> Result<PolyMesh> {
    check(rect, nx, ny)?;
    let v = grid_vertices(rect, nx, ny);
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut e = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            e.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    PolyMesh::with_label(v, e, Subdomain::new(Physics::Elastic, 0))
}

/// `2 * nx * ny` right triangles with alternating diagonals.
pub fn structured_triangles(rect: &Rect, nx: usize, ny: usize) -> Result<PolyMesh> {
    check(rect, nx, ny)?;
    let v = grid_vertices(rect, nx, ny);
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut e = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if (i + j) % 2 == 0 {
                e.push(vec![a, b, c]);
                e.push(vec![a, c, d]);
            } else {
                e.push(vec![a, b, d]);
                e.push(vec![b, c, d]);
            }
        }
    }
    PolyMesh::with_label(v, e, Subdomain::new(Physics::Elastic, 0))
}
