//! Polytopic-regularity diagnostics.

use super::geometry;
use super::PolyMesh;
use crate::Point;

#[derive(Clone, Debug)]
pub struct RegularityReport {
    /// Worst face ratio `h |F| / (d |S|)` of each element.
    pub element_ratio: Vec<f64>,
    pub max_ratio: f64,
    /// Inscribed triangle area `|S|` per element, in local face order.
    pub face_simplex_area: Vec<Vec<f64>>,
}

// Largest triangle on the face (a, b) whose apex is a polygon vertex and which
// lies inside the polygon. Falls back to apexes pulled towards the face
// midpoint when no vertex works.
fn sampled_simplex(a: Point, b: Point, pts: &[Point]) -> f64 {
    let mut best: f64 = 0.0;
    for &v in pts {
        if geometry::triangle_inside_polygon(a, b, v, pts) {
            best = best.max(geometry::triangle_area(a, b, v));
        }
    }
    if best > 0.0 {
        return best;
    }
    let m = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
    let g = geometry::centroid(pts);
    let mut s = 0.5;
    for _ in 0..40 {
        let apex = [m[0] + s * (g[0] - m[0]), m[1] + s * (g[1] - m[1])];
        if geometry::triangle_inside_polygon(a, b, apex, pts) {
            return geometry::triangle_area(a, b, apex);
        }
        s *= 0.5;
    }
    0.0
}

pub fn regularity_report(mesh: &PolyMesh) -> RegularityReport {
    let d = 2.0;
    let mut element_ratio = Vec::with_capacity(mesh.n_elements());
    let mut face_simplex_area = Vec::with_capacity(mesh.n_elements());
    for k in 0..mesh.n_elements() {
        let pts = mesh.element_points(k);
        let g = mesh.centroid(k);
        let h = mesh.diameter(k);
        let n = pts.len();
        let mut areas = Vec::with_capacity(n);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            let s = if geometry::triangle_inside_polygon(a, b, g, &pts) {
                geometry::triangle_area(a, b, g)
            } else {
                sampled_simplex(a, b, &pts)
            };
            let len = geometry::dist(a, b);
            let r = if s > 0.0 { h * len / (d * s) } else { f64::INFINITY };
            worst = worst.max(r);
            areas.push(s);
        }
        element_ratio.push(worst);
        face_simplex_area.push(areas);
    }
    let max_ratio = element_ratio.iter().copied().fold(0.0, f64::max);
    RegularityReport { element_ratio, max_ratio, face_simplex_area }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_voronoi_mesh, Physics, Rect, Subdomain};

    #[test]
    fn unit_square_ratio() {
        let m = generate_voronoi_mesh(&Rect::unit(), 1, 0, 7).unwrap();
        let r = regularity_report(&m);
        assert!((r.max_ratio - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        for &s in &r.face_simplex_area[0] {
            assert!((s - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn hexagon_faces_equal() {
        let v: Vec<Point> = (0..6)
            .map(|i| {
                let t = std::f64::consts::PI / 3.0 * i as f64;
                [t.cos(), t.sin()]
            })
            .collect();
        let m = PolyMesh::with_label(v, vec![(0..6).collect()], Subdomain::new(Physics::Elastic, 0)).unwrap();
        let r = regularity_report(&m);
        let a = &r.face_simplex_area[0];
        for s in a {
            assert!((s - a[0]).abs() < 1e-14);
        }
    }

    #[test]
    fn nonconvex_falls_back() {
        // deep notch: centroid lies outside some face triangles
        let v = vec![[0.0, 0.0], [4.0, 0.0], [4.0, 4.0], [3.0, 4.0], [3.0, 0.5], [1.0, 0.5], [1.0, 4.0], [0.0, 4.0]];
        let m = PolyMesh::with_label(v, vec![(0..8).collect()], Subdomain::new(Physics::Elastic, 0)).unwrap();
        let r = regularity_report(&m);
        assert!(r.max_ratio.is_finite() && r.max_ratio > 0.0);
        for &s in &r.face_simplex_area[0] {
            assert!(s > 0.0 && s <= m.area(0));
        }
    }

    #[test]
    fn voronoi_regression() {
        let m = generate_voronoi_mesh(&Rect::unit(), 100, 50, 1).unwrap();
        let r = regularity_report(&m);
        assert!(r.max_ratio.is_finite() && r.max_ratio < 20.0, "max ratio {}", r.max_ratio);
    }
}
