//! Planar polygon helpers shared by the mesh, quadrature and source code.

use crate::Point;

#[inline]
pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    let d = sub(a, b);
    d[0].hypot(d[1])
}

/// Signed area of a polygon (positive when counter-clockwise).
pub fn signed_area(pts: &[Point]) -> f64 {
    let n = pts.len();
    let mut a = 0.0;
    for i in 0..n {
        a += cross(pts[i], pts[(i + 1) % n]);
    }
    0.5 * a
}

/// Area centroid of a simple polygon.
pub fn centroid(pts: &[Point]) -> Point {
    let n = pts.len();
    let mut a = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..n {
        let p = pts[i];
        let q = pts[(i + 1) % n];
        let c = cross(p, q);
        a += c;
        cx += (p[0] + q[0]) * c;
        cy += (p[1] + q[1]) * c;
    }
    if a.abs() < f64::MIN_POSITIVE {
        let s = pts.iter().fold([0.0, 0.0], |s, p| [s[0] + p[0], s[1] + p[1]]);
        return [s[0] / n as f64, s[1] / n as f64];
    }
    [cx / (3.0 * a), cy / (3.0 * a)]
}

/// Maximum pairwise vertex distance.
pub fn diameter(pts: &[Point]) -> f64 {
    let mut h: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            h = h.max(dist(pts[i], pts[j]));
        }
    }
    h
}

pub fn triangle_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * cross(sub(b, a), sub(c, a))
}

/// Crossing-number point-in-polygon test. Points on the boundary may land on
/// either side; use [`distance_to_boundary`] when that matters.
pub fn point_in_polygon(p: Point, pts: &[Point]) -> bool {
    let n = pts.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (pts[i], pts[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = (b[0] - a[0]) * (p[1] - a[1]) / (b[1] - a[1]) + a[0];
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

pub fn distance_to_segment(p: Point, a: Point, b: Point) -> f64 {
    let ab = sub(b, a);
    let l2 = dot(ab, ab);
    if l2 == 0.0 {
        return dist(p, a);
    }
    let t = (dot(sub(p, a), ab) / l2).clamp(0.0, 1.0);
    dist(p, [a[0] + t * ab[0], a[1] + t * ab[1]])
}

pub fn distance_to_boundary(p: Point, pts: &[Point]) -> f64 {
    let n = pts.len();
    (0..n)
        .map(|i| distance_to_segment(p, pts[i], pts[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

/// True when the open segments `ab` and `cd` cross at a single interior point.
pub fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = cross(sub(b, a), sub(c, a));
    let d2 = cross(sub(b, a), sub(d, a));
    let d3 = cross(sub(d, c), sub(a, c));
    let d4 = cross(sub(d, c), sub(b, c));
    let scale = dot(sub(b, a), sub(b, a)).max(dot(sub(d, c), sub(d, c)));
    let eps = 1e-12 * scale;
    ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps))
        && ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps))
}

/// True when the polygon has no pair of non-adjacent edges that cross.
pub fn is_simple(pts: &[Point]) -> bool {
    let n = pts.len();
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_cross(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

/// Whether the triangle `(a, b, c)` lies inside the polygon: no triangle edge
/// crosses a polygon edge and the triangle centroid is interior.
pub fn triangle_inside_polygon(a: Point, b: Point, c: Point, pts: &[Point]) -> bool {
    if triangle_area(a, b, c) <= 0.0 {
        return false;
    }
    let n = pts.len();
    for (p, q) in [(a, b), (b, c), (c, a)] {
        for i in 0..n {
            if segments_cross(p, q, pts[i], pts[(i + 1) % n]) {
                return false;
            }
        }
    }
    let scale = diameter(pts);
    let inside_or_on = |p: Point| point_in_polygon(p, pts) || distance_to_boundary(p, pts) < 1e-12 * scale;
    for (p, q) in [(a, b), (b, c), (c, a)] {
        if !inside_or_on([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]) {
            return false;
        }
    }
    // a polygon vertex strictly inside the triangle means a notch cuts into it
    let tol = 1e-12 * scale * scale;
    for &v in pts {
        if triangle_area(a, b, v) > tol && triangle_area(b, c, v) > tol && triangle_area(c, a, v) > tol {
            return false;
        }
    }
    let g = [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0];
    point_in_polygon(g, pts)
}

/// Clip a convex polygon against the half-plane `{x : n . x <= c}`.
pub fn clip_halfplane(poly: &[Point], n: Point, c: f64) -> Vec<Point> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    let len = poly.len();
    for i in 0..len {
        let p = poly[i];
        let q = poly[(i + 1) % len];
        let fp = dot(n, p) - c;
        let fq = dot(n, q) - c;
        if fp <= 0.0 {
            out.push(p);
        }
        if (fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0) {
            let t = fp / (fp - fq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

/// Axis-aligned rectangle.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn new(min: Point, max: Point) -> Self {
        Self { min, max }
    }

    pub fn unit() -> Self {
        Self::new([0.0, 0.0], [1.0, 1.0])
    }

    pub fn width(&self) -> f64 {
        self.max[0] - self.min[0]
    }

    pub fn height(&self) -> f64 {
        self.max[1] - self.min[1]
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn corners(&self) -> Vec<Point> {
        vec![
            self.min,
            [self.max[0], self.min[1]],
            self.max,
            [self.min[0], self.max[1]],
        ]
    }

    pub fn contains(&self, p: Point) -> bool {
        p[0] >= self.min[0] && p[0] <= self.max[0] && p[1] >= self.min[1] && p[1] <= self.max[1]
    }

    pub fn of_points(pts: &[Point]) -> Self {
        let mut r = Rect::new([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in pts {
            r.min[0] = r.min[0].min(p[0]);
            r.min[1] = r.min[1].min(p[1]);
            r.max[0] = r.max[0].max(p[0]);
            r.max[1] = r.max[1].max(p[1]);
        }
        r
    }
}
