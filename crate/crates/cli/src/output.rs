//! Field sampling, probe traces and legacy-VTK snapshots.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use polydg::fespace::element_quadrature;
use polydg::forms::BlockSystem;
use polydg::mesh::Physics;
use polydg::Point;

/// Physical fields at one point. Entries that do not exist on the element are zero.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FieldSample {
    pub u: [f64; 2],
    pub v: [f64; 2],
    pub w: [f64; 2],
    pub phi: f64,
    pub phi_t: f64,
    /// Fluid pressure (poro and acoustic), minus the mean stress on elastic elements.
    pub pressure: f64,
}

impl FieldSample {
    pub fn speed(&self) -> f64 {
        self.v[0].hypot(self.v[1])
    }

    fn scaled_add(&mut self, a: f64, o: &FieldSample) {
        for c in 0..2 {
            self.u[c] += a * o.u[c];
            self.v[c] += a * o.v[c];
            self.w[c] += a * o.w[c];
        }
        self.phi += a * o.phi;
        self.phi_t += a * o.phi_t;
        self.pressure += a * o.pressure;
    }
}

// value and divergence of a two-component field on element k
fn vector_at(vals: &[f64], grads: &[[f64; 2]], coeffs: &[f64], o: usize) -> ([f64; 2], f64) {
    let nb = vals.len();
    let mut out = [0.0; 2];
    let mut div = 0.0;
    for c in 0..2 {
        for i in 0..nb {
            let a = coeffs[o + c * nb + i];
            out[c] += a * vals[i];
            div += a * grads[i][c];
        }
    }
    (out, div)
}

/// Evaluates the discrete fields of state `(x, z)` on element `k` at `pt`.
pub fn sample(sys: &BlockSystem, x: &[f64], z: &[f64], k: usize, pt: Point) -> FieldSample {
    let mut s = FieldSample::default();
    let c = &sys.coeffs;
    if sys.space.contains(k) {
        let (vals, grads) = sys.space.eval_basis(k, pt);
        let o = sys.space.offset(k);
        let (xu, zu) = (&x[sys.layout.u.clone()], &z[sys.layout.u.clone()]);
        let (u, div_u) = vector_at(&vals, &grads, xu, o);
        s.u = u;
        s.v = vector_at(&vals, &grads, zu, o).0;
        match &sys.layout.w {
            Some(r) => {
                let (w, div_w) = vector_at(&vals, &grads, &x[r.clone()], o);
                s.w = w;
                s.pressure = -c.m[k] * (c.beta[k] * div_u + div_w);
            }
            None => s.pressure = -(c.lambda[k] + c.mu[k]) * div_u,
        }
    } else if let (Some(a), Some(r)) = (&sys.acoustic_space, &sys.layout.phi) {
        if a.contains(k) {
            s.phi = a.evaluate(&x[r.clone()], k, pt)[0];
            s.phi_t = a.evaluate(&z[r.clone()], k, pt)[0];
            s.pressure = c.rho_a[k] * s.phi_t;
        }
    }
    s
}

/// Area averages of every field on element `k`.
pub fn cell_average(sys: &BlockSystem, x: &[f64], z: &[f64], k: usize) -> polydg::Result<(FieldSample, f64)> {
    let mesh = sys.space.mesh();
    let p = sys.space.max_degree();
    let rule = element_quadrature(mesh, k, 2 * p + 1)?;
    let mut avg = FieldSample::default();
    let mut speed = 0.0;
    let area: f64 = rule.weights.iter().sum();
    for (q, &w) in rule.points.iter().zip(&rule.weights) {
        let s = sample(sys, x, z, k, *q);
        avg.scaled_add(w / area, &s);
        speed += w / area * s.speed();
    }
    Ok((avg, speed))
}

/// Points probed during a run, located once.
pub struct ProbeSet {
    pub points: Vec<Point>,
    hosts: Vec<usize>,
}

impl ProbeSet {
    pub fn new(sys: &BlockSystem, points: &[Point]) -> anyhow::Result<Self> {
        let mesh = sys.space.mesh();
        let hosts = points
            .iter()
            .enumerate()
            .map(|(i, p)| mesh.locate(*p).map(|h| h.0).ok_or_else(|| anyhow::anyhow!("output.probes[{i}] ({}, {}) lies outside the mesh", p[0], p[1])))
            .collect::<anyhow::Result<_>>()?;
        Ok(Self { points: points.to_vec(), hosts })
    }

    pub fn header(&self) -> String {
        let mut h = String::from("t");
        for i in 0..self.points.len() {
            for f in ["ux", "uy", "vx", "vy", "wx", "wy", "phi", "pressure"] {
                let _ = write!(h, ",p{i}_{f}");
            }
        }
        h
    }

    pub fn row(&self, sys: &BlockSystem, t: f64, x: &[f64], z: &[f64]) -> String {
        let mut r = format!("{t:.9e}");
        for (p, &k) in self.points.iter().zip(&self.hosts) {
            let s = sample(sys, x, z, k, *p);
            for v in [s.u[0], s.u[1], s.v[0], s.v[1], s.w[0], s.w[1], s.phi, s.pressure] {
                let _ = write!(r, ",{:.9e}", nz(v));
            }
        }
        r
    }
}

// Adding zero maps -0.0 to 0.0 so written values do not depend on sign of zero.
fn nz(v: f64) -> f64 {
    v + 0.0
}

fn physics_code(p: Physics) -> i32 {
    match p {
        Physics::Elastic => 0,
        Physics::Poroelastic => 1,
        Physics::Acoustic => 2,
    }
}

// centroid plus points pulled from the centroid towards every vertex
fn sample_points(pts: &[Point], g: Point, per_dir: usize) -> Vec<Point> {
    let mut out = vec![g];
    for j in 1..per_dir {
        let s = j as f64 / per_dir as f64;
        for v in pts {
            out.push([g[0] + s * (v[0] - g[0]), g[1] + s * (v[1] - g[1])]);
        }
    }
    out
}

/// Writes a legacy-VTK ASCII snapshot.
///
/// Every element contributes its own copy of its vertices (the fields are
/// discontinuous) as a `VTK_POLYGON` cell carrying cell averages, and a set
/// of interior sample points as `VTK_VERTEX` cells. Point data holds the
/// fields evaluated at every point inside its own element.
pub fn write_vtk(path: &Path, sys: &BlockSystem, t: f64, x: &[f64], z: &[f64], samples: usize) -> anyhow::Result<()> {
    let mesh = sys.space.mesh();
    let ne = mesh.n_elements();
    let mut points: Vec<(Point, usize)> = Vec::new();
    let mut polys: Vec<Vec<usize>> = Vec::with_capacity(ne);
    let mut verts: Vec<(usize, usize)> = Vec::new();
    for k in 0..ne {
        let pts = mesh.element_points(k);
        let base = points.len();
        points.extend(pts.iter().map(|&p| (p, k)));
        polys.push((base..base + pts.len()).collect());
        for q in sample_points(&pts, mesh.centroid(k), samples) {
            verts.push((points.len(), k));
            points.push((q, k));
        }
    }
    let values: Vec<FieldSample> = points.iter().map(|(p, k)| sample(sys, x, z, *k, *p)).collect();
    let mut avgs = Vec::with_capacity(ne);
    for k in 0..ne {
        avgs.push(cell_average(sys, x, z, k)?);
    }
    let ncells = ne + verts.len();

    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "polydg {} t={t:.9e}", sys.kind.name());
    let _ = writeln!(s, "ASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", points.len());
    for (p, _) in &points {
        let _ = writeln!(s, "{:.9e} {:.9e} 0", nz(p[0]), nz(p[1]));
    }
    let size: usize = polys.iter().map(|p| p.len() + 1).sum::<usize>() + 2 * verts.len();
    let _ = writeln!(s, "CELLS {ncells} {size}");
    for p in &polys {
        let _ = write!(s, "{}", p.len());
        for i in p {
            let _ = write!(s, " {i}");
        }
        s.push('\n');
    }
    for (i, _) in &verts {
        let _ = writeln!(s, "1 {i}");
    }
    let _ = writeln!(s, "CELL_TYPES {ncells}");
    for _ in 0..ne {
        s.push_str("7\n");
    }
    for _ in 0..verts.len() {
        s.push_str("1\n");
    }

    // cell data: averages on polygons, point values on sample vertices
    let cell: Vec<(FieldSample, f64, usize)> =
        avgs.iter().enumerate().map(|(k, (a, sp))| (*a, *sp, k)).chain(verts.iter().map(|(i, k)| (values[*i], values[*i].speed(), *k))).collect();
    let _ = writeln!(s, "CELL_DATA {ncells}");
    let _ = writeln!(s, "SCALARS physics int 1\nLOOKUP_TABLE default");
    for (_, _, k) in &cell {
        let _ = writeln!(s, "{}", physics_code(mesh.subdomain(*k).physics));
    }
    let _ = writeln!(s, "SCALARS region int 1\nLOOKUP_TABLE default");
    for (_, _, k) in &cell {
        let _ = writeln!(s, "{}", mesh.subdomain(*k).region);
    }
    let _ = writeln!(s, "SCALARS speed double 1\nLOOKUP_TABLE default");
    for (_, sp, _) in &cell {
        let _ = writeln!(s, "{:.9e}", nz(*sp));
    }
    write_fields(&mut s, cell.iter().map(|c| c.0));

    let _ = writeln!(s, "POINT_DATA {}", points.len());
    let _ = writeln!(s, "SCALARS speed double 1\nLOOKUP_TABLE default");
    for v in &values {
        let _ = writeln!(s, "{:.9e}", nz(v.speed()));
    }
    write_fields(&mut s, values.iter().copied());

    if let Some(d) = path.parent() {
        fs::create_dir_all(d)?;
    }
    fs::write(path, s)?;
    Ok(())
}

fn write_fields(s: &mut String, vals: impl Iterator<Item = FieldSample> + Clone) {
    let vec_field = |s: &mut String, name: &str, f: &dyn Fn(&FieldSample) -> [f64; 2]| {
        let _ = writeln!(s, "VECTORS {name} double");
        for v in vals.clone() {
            let a = f(&v);
            let _ = writeln!(s, "{:.9e} {:.9e} 0", nz(a[0]), nz(a[1]));
        }
    };
    vec_field(s, "displacement", &|v| v.u);
    vec_field(s, "velocity", &|v| v.v);
    vec_field(s, "filtration", &|v| v.w);
    let scalar = |s: &mut String, name: &str, f: &dyn Fn(&FieldSample) -> f64| {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for v in vals.clone() {
            let _ = writeln!(s, "{:.9e}", nz(f(&v)));
        }
    };
    scalar(s, "potential", &|v| v.phi);
    scalar(s, "pressure", &|v| v.pressure);
}
