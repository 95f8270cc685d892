//! Clipped Voronoi meshes with Lloyd relaxation.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::geometry::{self, Rect};
use super::{PolyMesh, Physics, Subdomain};
use crate::{Error, Point, Result};

/// Voronoi cells of `seeds` clipped to `rect`, in seed order.
pub fn voronoi_cells(rect: &Rect, seeds: &[Point]) -> Vec<Vec<Point>> {
    let mut order: Vec<usize> = Vec::with_capacity(seeds.len());
    seeds
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            order.clear();
            order.extend((0..seeds.len()).filter(|&j| j != i));
            order.sort_by(|&a, &b| {
                let da = geometry::dist(seeds[a], s);
                let db = geometry::dist(seeds[b], s);
                da.total_cmp(&db).then(a.cmp(&b))
            });
            let mut cell = rect.corners();
            for &j in &order {
                let q = seeds[j];
                let d = geometry::dist(q, s);
                let reach = cell.iter().map(|&v| geometry::dist(v, s)).fold(0.0, f64::max);
                if d > 2.0 * reach {
                    break;
                }
                // keep points closer to s than to q
                let n = geometry::sub(q, s);
                let c = 0.5 * (geometry::dot(q, q) - geometry::dot(s, s));
                cell = geometry::clip_halfplane(&cell, n, c);
                if cell.is_empty() {
                    break;
                }
            }
            cell
        })
        .collect()
}

/// Uniform random seeds in `rect` relaxed by `lloyd_iters` Lloyd steps.
pub fn lloyd_seeds(rect: &Rect, n: usize, lloyd_iters: usize, rng_seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut seeds: Vec<Point> = (0..n)
        .map(|_| {
            [
                rect.min[0] + rng.gen::<f64>() * rect.width(),
                rect.min[1] + rng.gen::<f64>() * rect.height(),
            ]
        })
        .collect();
    for _ in 0..lloyd_iters {
        let cells = voronoi_cells(rect, &seeds);
        for (s, cell) in seeds.iter_mut().zip(&cells) {
            if cell.len() >= 3 {
                *s = geometry::centroid(cell);
            }
        }
    }
    seeds
}

/// Clipped, Lloyd-relaxed Voronoi mesh of `rect` with `n_elements` cells.
///
/// Deterministic for a fixed `(n_elements, lloyd_iters, rng_seed)`. All
/// elements are labelled elastic region 0; relabel with
/// [`PolyMesh::assign_subdomains`].
pub fn generate_voronoi_mesh(rect: &Rect, n_elements: usize, lloyd_iters: usize, rng_seed: u64) -> Result<PolyMesh> {
    if !(rect.width() > 0.0 && rect.height() > 0.0) {
        return Err(Error::InvalidInput(format!("degenerate domain {:?}", rect)));
    }
    if n_elements == 0 {
        return Err(Error::InvalidInput("at least one element is required".into()));
    }
    let seeds = lloyd_seeds(rect, n_elements, lloyd_iters, rng_seed);
    let cells = voronoi_cells(rect, &seeds);
    let scale = rect.width().max(rect.height());
    build_conforming(cells, 1e-9 * scale, Subdomain::new(Physics::Elastic, 0))
}

// Merges coincident cell vertices (within `tol`) into a shared vertex list and
// snaps points that sit on the rectangle sides exactly onto them.
fn build_conforming(cells: Vec<Vec<Point>>, tol: f64, label: Subdomain) -> Result<PolyMesh> {
    let mut vertices: Vec<Point> = Vec::new();
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let key = |p: Point| ((p[0] / tol).floor() as i64, (p[1] / tol).floor() as i64);
    let mut elements = Vec::with_capacity(cells.len());
    for cell in cells {
        let mut loop_: Vec<usize> = Vec::with_capacity(cell.len());
        for p in cell {
            let (kx, ky) = key(p);
            let mut found = None;
            'search: for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(ids) = grid.get(&(kx + dx, ky + dy)) {
                        for &id in ids {
                            if geometry::dist(vertices[id], p) <= tol {
                                found = Some(id);
                                break 'search;
                            }
                        }
                    }
                }
            }
            let id = match found {
                Some(id) => id,
                None => {
                    vertices.push(p);
                    grid.entry((kx, ky)).or_default().push(vertices.len() - 1);
                    vertices.len() - 1
                }
            };
            if loop_.last() != Some(&id) {
                loop_.push(id);
            }
        }
        while loop_.len() > 1 && loop_.first() == loop_.last() {
            loop_.pop();
        }
        if loop_.len() < 3 {
            return Err(Error::Mesh("Voronoi cell collapsed during vertex merging".into()));
        }
        elements.push(loop_);
    }
    let n = elements.len();
    PolyMesh::new(vertices, elements, vec![label; n])
}
