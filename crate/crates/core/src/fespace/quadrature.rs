//! Gauss rules on segments, triangles (collapsed coordinates) and polygons
//! (centroid fan).

use crate::mesh::{geometry, PolyMesh};
use crate::{Error, Point, Result};

#[derive(Clone, Debug, Default)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate<F: Fn(Point) -> f64>(&self, f: F) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&p, &w)| w * f(p)).sum()
    }
}

/// `n`-point Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 1..n {
                let kf = k as f64;
                let p2 = ((2.0 * kf + 1.0) * z * p1 - kf * p0) / (kf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            z = 0.0;
            dp = 1.0;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n == 1 {
        w[0] = 2.0;
    }
    (x, w)
}

/// Gauss rule on the segment `ab`, exact for polynomials of degree `order`.
pub fn segment_rule(a: Point, b: Point, order: usize) -> QuadratureRule {
    let n = (order + 2) / 2;
    let (x, w) = gauss_legendre(n.max(1));
    let len = geometry::dist(a, b);
    let points = x
        .iter()
        .map(|&s| {
            let t = 0.5 * (s + 1.0);
            [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
        })
        .collect();
    let weights = w.iter().map(|&wi| 0.5 * len * wi).collect();
    QuadratureRule { points, weights }
}

/// Collapsed-coordinate Gauss rule on a counter-clockwise triangle, exact for
/// polynomials of degree `order`.
pub fn triangle_rule_into(a: Point, b: Point, c: Point, order: usize, rule: &mut QuadratureRule) {
    let nr = (order + 3) / 2;
    let nq = (order + 2) / 2;
    let (xr, wr) = gauss_legendre(nr.max(1));
    let (xq, wq) = gauss_legendre(nq.max(1));
    let area2 = 2.0 * geometry::triangle_area(a, b, c);
    let (ab, ac) = (geometry::sub(b, a), geometry::sub(c, a));
    for (i, &sr) in xr.iter().enumerate() {
        let r = 0.5 * (sr + 1.0);
        for (j, &sq) in xq.iter().enumerate() {
            let q = 0.5 * (sq + 1.0);
            let (l1, l2) = (r * (1.0 - q), r * q);
            rule.points.push([a[0] + l1 * ab[0] + l2 * ac[0], a[1] + l1 * ab[1] + l2 * ac[1]]);
            rule.weights.push(0.25 * wr[i] * wq[j] * area2 * r);
        }
    }
}

pub fn triangle_rule(a: Point, b: Point, c: Point, order: usize) -> QuadratureRule {
    let mut r = QuadratureRule::default();
    triangle_rule_into(a, b, c, order, &mut r);
    r
}

/// Centroid-fan rule on a polygon; fails when a fan triangle is not positively oriented.
pub fn polygon_rule(pts: &[Point], order: usize) -> Result<QuadratureRule> {
    let g = geometry::centroid(pts);
    let n = pts.len();
    let scale = geometry::diameter(pts);
    let mut rule = QuadratureRule::default();
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        let area = geometry::triangle_area(g, a, b);
        if !(area > 1e-14 * scale * scale) {
            return Err(Error::Mesh(format!(
                "centroid fan triangle on edge {i} has non-positive area {area:.3e}; the element is not star-shaped with respect to its centroid"
            )));
        }
        triangle_rule_into(g, a, b, order, &mut rule);
    }
    Ok(rule)
}

pub fn element_quadrature(mesh: &PolyMesh, k: usize, order: usize) -> Result<QuadratureRule> {
    polygon_rule(&mesh.element_points(k), order)
        .map_err(|e| Error::Mesh(format!("element {k}: {e}")))
}

/// Rule on face `f`, ordered from its first to its second vertex.
pub fn face_quadrature(mesh: &PolyMesh, f: usize, order: usize) -> QuadratureRule {
    let [a, b] = mesh.face_points(f);
    segment_rule(a, b, order)
}
