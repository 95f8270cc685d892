//! Time wavelets, point and distributed sources, and manufactured forcings.

pub mod manufactured;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::fespace::{polygon_rule, segment_rule, DgSpace};
use crate::mesh::geometry;
use crate::{Error, Point, Result};

/// Source time function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Wavelet {
    /// `A0 (1 - 2β_p (t - t0)²) exp(-β_p (t - t0)²)` with `β_p = π² f_p²`.
    Ricker { a0: f64, fp: f64, t0: f64 },
    /// Linear interpolation of samples, zero outside.
    Samples { times: Vec<f64>, values: Vec<f64> },
}

impl Wavelet {
    pub fn ricker(a0: f64, fp: f64, t0: f64) -> Result<Self> {
        let w = Wavelet::Ricker { a0, fp, t0 };
        w.validate()?;
        Ok(w)
    }

    /// Ricker wavelet from `β_p` instead of the peak frequency.
    pub fn ricker_beta(a0: f64, beta_p: f64, t0: f64) -> Result<Self> {
        Self::ricker(a0, beta_p.sqrt() / std::f64::consts::PI, t0)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Wavelet::Ricker { fp, .. } if !(*fp > 0.0) => Err(Error::InvalidInput(format!("Ricker peak frequency {fp} must be positive"))),
            Wavelet::Samples { times, values } => {
                if times.len() != values.len() || times.len() < 2 {
                    return Err(Error::InvalidInput("wavelet samples need at least two (time, value) pairs".into()));
                }
                if times.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::InvalidInput("wavelet sample times must increase".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Wavelet::Ricker { a0, fp, t0 } => ricker(t, *a0, *fp, *t0),
            Wavelet::Samples { times, values } => {
                if t < times[0] || t > *times.last().unwrap() {
                    return 0.0;
                }
                let i = times.partition_point(|&s| s <= t).clamp(1, times.len() - 1);
                let (t0, t1) = (times[i - 1], times[i]);
                let s = (t - t0) / (t1 - t0);
                values[i - 1] * (1.0 - s) + values[i] * s
            }
        }
    }

    /// Reads two whitespace-separated columns `time value`; `#` starts a comment.
    pub fn read_samples(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_samples(&text)
    }

    pub fn parse_samples(text: &str) -> Result<Self> {
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace().map(str::parse::<f64>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(t)), Some(Ok(v)), None) => {
                    times.push(t);
                    values.push(v);
                }
                _ => return Err(Error::Parse { line: i + 1, msg: format!("expected 'time value', got '{line}'") }),
            }
        }
        let w = Wavelet::Samples { times, values };
        w.validate()?;
        Ok(w)
    }
}

pub fn ricker(t: f64, a0: f64, fp: f64, t0: f64) -> f64 {
    let bp = (std::f64::consts::PI * fp).powi(2);
    let s = (t - t0).powi(2);
    a0 * (1.0 - 2.0 * bp * s) * (-bp * s).exp()
}

/// Host element of a point source, lowest id on shared faces.
fn host(space: &DgSpace, x0: Point) -> Result<usize> {
    let mesh = space.mesh();
    let mut candidates = (0..mesh.n_elements()).filter(|&k| space.contains(k)).filter(|&k| {
        let pts = mesh.element_points(k);
        geometry::point_in_polygon(x0, &pts) || geometry::distance_to_boundary(x0, &pts) <= 1e-12 * mesh.diameter(k)
    });
    let k = candidates
        .next()
        .ok_or_else(|| Error::InvalidInput(format!("source point ({}, {}) lies outside the space", x0[0], x0[1])))?;
    if geometry::distance_to_boundary(x0, &mesh.element_points(k)) <= 1e-12 * mesh.diameter(k) {
        log::warn!("source point ({}, {}) lies on a face; assigned to element {k}", x0[0], x0[1]);
    }
    Ok(k)
}

/// Pairing of `e δ(x - x0)` with every basis function: entry `e · φ_j(x0)`.
pub fn point_force_load(space: &DgSpace, x0: Point, dir: [f64; 2]) -> Result<Vec<f64>> {
    let k = host(space, x0)?;
    let (v, _) = space.eval_basis(k, x0);
    let nb = v.len();
    let o = space.offset(k);
    let mut out = vec![0.0; space.n_dofs()];
    for c in 0..space.components() {
        let e = if space.components() == 1 { 1.0 } else { dir[c] };
        for i in 0..nb {
            out[o + c * nb + i] = e * v[i];
        }
    }
    Ok(out)
}

/// Pairing of a point moment tensor: entry `Σ_il m_il ∂_l (φ_j)_i (x0)`.
pub fn double_couple_load(space: &DgSpace, x0: Point, m: [[f64; 2]; 2]) -> Result<Vec<f64>> {
    if space.components() != 2 {
        return Err(Error::InvalidInput("moment tensor sources need a vector space".into()));
    }
    if (m[0][1] - m[1][0]).abs() > 1e-12 * (m[0][1].abs() + m[1][0].abs()) {
        return Err(Error::InvalidInput("moment tensor must be symmetric".into()));
    }
    let k = host(space, x0)?;
    let (_, g) = space.eval_basis(k, x0);
    let nb = g.len();
    let o = space.offset(k);
    let mut out = vec![0.0; space.n_dofs()];
    for i in 0..2 {
        for j in 0..nb {
            out[o + i * nb + j] = m[i][0] * g[j][0] + m[i][1] * g[j][1];
        }
    }
    Ok(out)
}

/// Double-couple moment tensor of a fault with slip direction `s` and normal `n`: `M0 (s⊗n + n⊗s)`.
pub fn double_couple_tensor(m0: f64, s: [f64; 2], n: [f64; 2]) -> [[f64; 2]; 2] {
    let mut m = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = m0 * (s[i] * n[j] + n[i] * s[j]);
        }
    }
    m
}

/// `∫ φ_j e` over the disk of radius `r` around `center`, per unit area.
///
/// The disk is a regular 64-gon clipped against each element, so the load
/// integrates to `e` against constants.
pub fn disk_load(space: &DgSpace, center: Point, r: f64, dir: [f64; 2]) -> Result<Vec<f64>> {
    let n = 64;
    let disk: Vec<Point> = (0..n)
        .map(|i| {
            let a = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            [center[0] + r * a.cos(), center[1] + r * a.sin()]
        })
        .collect();
    let area = geometry::signed_area(&disk);
    let mesh = space.mesh();
    let mut out = vec![0.0; space.n_dofs()];
    let mut covered = 0.0;
    for &k in space.elements() {
        let b = mesh.bbox(k);
        if b.max[0] < center[0] - r || b.min[0] > center[0] + r || b.max[1] < center[1] - r || b.min[1] > center[1] + r {
            continue;
        }
        // clip the element by every edge half-plane of the (convex) disk polygon
        let mut poly = mesh.element_points(k);
        for i in 0..n {
            let (a, c) = (disk[i], disk[(i + 1) % n]);
            let outward = [c[1] - a[1], -(c[0] - a[0])];
            poly = geometry::clip_halfplane(&poly, outward, geometry::dot(outward, a));
            if poly.len() < 3 {
                break;
            }
        }
        if poly.len() < 3 || geometry::signed_area(&poly) <= 1e-14 * area {
            continue;
        }
        covered += geometry::signed_area(&poly);
        let rule = polygon_rule(&poly, 2 * space.degree(k) + 2)?;
        let t = space.tabulate(k, rule);
        let nb = t.n_basis;
        let o = space.offset(k);
        for (q, &w) in t.rule.weights.iter().enumerate() {
            for c in 0..space.components() {
                let e = if space.components() == 1 { 1.0 } else { dir[c] };
                for i in 0..nb {
                    out[o + c * nb + i] += w * e * t.val(q, i) / area;
                }
            }
        }
    }
    if covered < 0.999 * area {
        log::warn!("disk source at ({}, {}) is only {:.1}% inside the domain", center[0], center[1], 100.0 * covered / area);
    }
    Ok(out)
}

/// `∫_{y = y0} φ_j e dx`, a horizontal line source (plane-wave driver).
///
/// A line lying on mesh faces is assigned to the elements above it, using
/// the half-open convention that a vertex with `y <= y0` is below the line.
pub fn line_load(space: &DgSpace, y0: f64, dir: [f64; 2]) -> Result<Vec<f64>> {
    let mesh = space.mesh();
    let mut out = vec![0.0; space.n_dofs()];
    for &k in space.elements() {
        let pts = mesh.element_points(k);
        let mut xs = Vec::new();
        for i in 0..pts.len() {
            let (a, b) = (pts[i], pts[(i + 1) % pts.len()]);
            if (a[1] <= y0) != (b[1] <= y0) {
                let s = (y0 - a[1]) / (b[1] - a[1]);
                xs.push(a[0] + s * (b[0] - a[0]));
            }
        }
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for seg in xs.chunks_exact(2) {
            let rule = segment_rule([seg[0], y0], [seg[1], y0], 2 * space.degree(k) + 2);
            let t = space.tabulate(k, rule);
            let nb = t.n_basis;
            let o = space.offset(k);
            for (q, &w) in t.rule.weights.iter().enumerate() {
                for c in 0..space.components() {
                    let e = if space.components() == 1 { 1.0 } else { dir[c] };
                    for i in 0..nb {
                        out[o + c * nb + i] += w * e * t.val(q, i);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Displacement of a vertically incident plane wave driven by `wavelet` at `z0`:
/// `(2ρc)⁻¹ H(t - |z - z0|/c) ∫_0^{t - |z - z0|/c} f`.
pub fn plane_wave_amplitude(t: f64, z: f64, z0: f64, c: f64, rho: f64, wavelet: &Wavelet) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::InvalidInput(format!("wave speed {c} must be positive")));
    }
    let tr = t - (z - z0).abs() / c;
    if tr <= 0.0 {
        return Ok(0.0);
    }
    let f = |s: f64| wavelet.eval(s);
    Ok(adaptive_simpson(&f, 0.0, tr, 1e-12, 40) / (2.0 * rho * c))
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: usize) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    // split first so that narrow pulses are not missed by the initial samples
    let n = 64;
    let h = (b - a) / n as f64;
    (0..n)
        .map(|i| {
            let (x0, x1) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            let (fa, fm, fb) = (f(x0), f(0.5 * (x0 + x1)), f(x1));
            let whole = (x1 - x0) / 6.0 * (fa + 4.0 * fm + fb);
            rec(f, x0, x1, fa, fm, fb, whole, tol / n as f64, depth)
        })
        .sum()
}
