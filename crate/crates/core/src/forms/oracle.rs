//! Dense brute-force reference assembly.
//!
//! Every bilinear form is evaluated entry by entry from basis traces and
//! quadrature, with no sparsity or locality. Slow, meant for small meshes
//! when checking the sparse assemblers.

use nalgebra::DMatrix;

use crate::fespace::{element_quadrature, face_quadrature, DgSpace};
use crate::mesh::{generate_voronoi_mesh, structured_quads, BoundaryKind, Physics, PolyMesh, Rect, Subdomain};
use crate::Point;

// Trace of global function `g` of a vector space (component `c` of mode `i`)
// from element `k`: value and gradient (row = component).
fn vtrace(s: &DgSpace, g: usize, k: usize, x: Point) -> ([f64; 2], [[f64; 2]; 2]) {
    if !s.contains(k) || !s.dofs(k).contains(&g) {
        return ([0.0; 2], [[0.0; 2]; 2]);
    }
    let (v, gr) = s.eval_basis(k, x);
    let nb = v.len();
    let l = g - s.offset(k);
    let (c, i) = (l / nb, l % nb);
    let mut val = [0.0; 2];
    let mut grad = [[0.0; 2]; 2];
    val[c] = v[i];
    grad[c] = gr[i];
    (val, grad)
}

fn strace(s: &DgSpace, g: usize, k: usize, x: Point) -> (f64, [f64; 2]) {
    if !s.contains(k) || !s.dofs(k).contains(&g) {
        return (0.0, [0.0; 2]);
    }
    let (v, gr) = s.eval_basis(k, x);
    let i = g - s.offset(k);
    (v[i], gr[i])
}

fn stress(lam: f64, mu: f64, g: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let div = g[0][0] + g[1][1];
    let mut s = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            s[a][b] = mu * (g[a][b] + g[b][a]) + if a == b { lam * div } else { 0.0 };
        }
    }
    s
}

fn ddot(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> f64 {
    (0..2).map(|i| (0..2).map(|j| a[i][j] * b[i][j]).sum::<f64>()).sum()
}

fn outer(v: [f64; 2], n: [f64; 2]) -> [[f64; 2]; 2] {
    [[v[0] * n[0], v[0] * n[1]], [v[1] * n[0], v[1] * n[1]]]
}

fn tadd(a: [[f64; 2]; 2], b: [[f64; 2]; 2], s: f64) -> [[f64; 2]; 2] {
    [[a[0][0] + s * b[0][0], a[0][1] + s * b[0][1]], [a[1][0] + s * b[1][0], a[1][1] + s * b[1][1]]]
}

/// Faces of `s` carrying SIP terms: (face, element list, outward normals). Dirichlet only on the boundary.
fn sip_faces(s: &DgSpace, sealed: bool) -> Vec<(usize, Vec<(usize, Point)>)> {
    let m = s.mesh();
    let mut out = Vec::new();
    for f in 0..m.n_faces() {
        let face = m.face(f);
        let mut sides = Vec::new();
        for k in [Some(face.elements.0), face.elements.1].into_iter().flatten() {
            if s.contains(k) {
                sides.push((k, face.normal_from(k)));
            }
        }
        let keep = match sides.len() {
            2 => true,
            1 => face.tag == crate::mesh::FaceTag::Dirichlet || (sealed && face.tag == crate::mesh::FaceTag::InterfaceSealed),
            _ => false,
        };
        if keep {
            out.push((f, sides));
        }
    }
    out
}

fn max_pen(s: &DgSpace, sides: &[(usize, Point)], c: &dyn Fn(usize) -> f64) -> f64 {
    sides
        .iter()
        .map(|&(k, _)| c(k) * (s.degree(k) as f64).powi(2) / s.mesh().diameter(k))
        .fold(0.0, f64::max)
}

/// Elastic SIP matrix with penalty parameter `sigma0`.
pub fn oracle_elastic(s: &DgSpace, lam: &[f64], mu: &[f64], sigma0: f64) -> DMatrix<f64> {
    let n = s.n_dofs();
    let mut a = DMatrix::zeros(n, n);
    let m = s.mesh();
    for &k in s.elements() {
        let rule = element_quadrature(m, k, 2 * s.degree(k) + 3).unwrap();
        for (x, w) in rule.points.iter().zip(&rule.weights) {
            let tr: Vec<_> = (0..n).map(|g| vtrace(s, g, k, *x).1).collect();
            for b in 0..n {
                for c in 0..n {
                    let sym = |g: [[f64; 2]; 2]| tadd(g, [[g[0][0], g[1][0]], [g[0][1], g[1][1]]], 1.0);
                    let e = sym(tr[b]);
                    a[(b, c)] += w * 0.5 * ddot(stress(lam[k], mu[k], tr[c]), e);
                }
            }
        }
    }
    for (f, sides) in sip_faces(s, false) {
        let eta = sigma0 * max_pen(s, &sides, &|k| 2.0 * lam[k] + 2.0 * mu[k]);
        let avg = 1.0 / sides.len() as f64;
        let ord = sides.iter().map(|&(k, _)| s.degree(k)).sum::<usize>() + 3;
        let rule = face_quadrature(m, f, ord);
        for (x, w) in rule.points.iter().zip(&rule.weights) {
            let mut jump = vec![[[0.0; 2]; 2]; n];
            let mut sig = vec![[[0.0; 2]; 2]; n];
            for g in 0..n {
                for &(k, nk) in &sides {
                    let (v, gr) = vtrace(s, g, k, *x);
                    jump[g] = tadd(jump[g], outer(v, nk), 1.0);
                    sig[g] = tadd(sig[g], stress(lam[k], mu[k], gr), avg);
                }
            }
            for b in 0..n {
                for c in 0..n {
                    a[(b, c)] += w * (-ddot(sig[c], jump[b]) - ddot(jump[c], sig[b]) + eta * ddot(jump[c], jump[b]));
                }
            }
        }
    }
    a
}

// Oracle on [u, w] for the form at βu + w.
/// Div-div SIP matrix on `[u, w]` acting on `beta u + w`.
pub fn oracle_divdiv(s: &DgSpace, mm: &[f64], beta: &[f64], m0: f64, sealed: bool) -> DMatrix<f64> {
    let n = s.n_dofs();
    let mut a = DMatrix::zeros(2 * n, 2 * n);
    let m = s.mesh();
    // global function G < n is βφ (u block), G >= n is φ (w block)
    let field = |gg: usize, k: usize, x: Point| {
        let (g, sc) = if gg < n { (gg, if s.contains(k) { beta[k] } else { 0.0 }) } else { (gg - n, 1.0) };
        let (v, gr) = vtrace(s, g, k, x);
        ([sc * v[0], sc * v[1]], sc * (gr[0][0] + gr[1][1]))
    };
    for &k in s.elements() {
        let rule = element_quadrature(m, k, 2 * s.degree(k) + 3).unwrap();
        for (x, w) in rule.points.iter().zip(&rule.weights) {
            let d: Vec<f64> = (0..2 * n).map(|g| field(g, k, *x).1).collect();
            for b in 0..2 * n {
                for c in 0..2 * n {
                    a[(b, c)] += w * mm[k] * d[b] * d[c];
                }
            }
        }
    }
    for (f, sides) in sip_faces(s, sealed) {
        let gam = m0 * max_pen(s, &sides, &|k| mm[k]);
        let avg = 1.0 / sides.len() as f64;
        let ord = sides.iter().map(|&(k, _)| s.degree(k)).sum::<usize>() + 3;
        let rule = face_quadrature(m, f, ord);
        for (x, w) in rule.points.iter().zip(&rule.weights) {
            let mut jn = vec![0.0; 2 * n];
            let mut fl = vec![0.0; 2 * n];
            for g in 0..2 * n {
                for &(k, nk) in &sides {
                    let (v, d) = field(g, k, *x);
                    jn[g] += v[0] * nk[0] + v[1] * nk[1];
                    fl[g] += avg * mm[k] * d;
                }
            }
            for b in 0..2 * n {
                for c in 0..2 * n {
                    a[(b, c)] += w * (-fl[c] * jn[b] - jn[c] * fl[b] + gam * jn[c] * jn[b]);
                }
            }
        }
    }
    a
}

/// Acoustic SIP matrix.
pub fn oracle_acoustic(s: &DgSpace, rho: &[f64], rho0: f64) -> DMatrix<f64> {
    let n = s.n_dofs();
    let mut a = DMatrix::zeros(n, n);
    let m = s.mesh();
    for &k in s.elements() {
        let rule = element_quadrature(m, k, 2 * s.degree(k) + 3).unwrap();
        for (x, w) in rule.points.iter().zip(&rule.weights) {
            let g: Vec<[f64; 2]> = (0..n).map(|g| strace(s, g, k, *x).1).collect();
            for b in 0..n {
                for c in 0..n {
                    a[(b, c)] += w * rho[k] * (g[b][0] * g[c][0] + g[b][1] * g[c][1]);
                }
            }
        }
    }
    for (f, sides) in sip_faces(s, false) {
        let chi = rho0 * max_pen(s, &sides, &|k| rho[k]);
        let avg = 1.0 / sides.len() as f64;
        let ord = sides.iter().map(|&(k, _)| s.degree(k)).sum::<usize>() + 3;
        let rule = face_quadrature(m, f, ord);
        for (x, w) in rule.points.iter().zip(&rule.weights) {
            let mut jv = vec![[0.0; 2]; n];
            let mut fl = vec![[0.0; 2]; n];
            for g in 0..n {
                for &(k, nk) in &sides {
                    let (v, gr) = strace(s, g, k, *x);
                    jv[g] = [jv[g][0] + v * nk[0], jv[g][1] + v * nk[1]];
                    fl[g] = [fl[g][0] + avg * rho[k] * gr[0], fl[g][1] + avg * rho[k] * gr[1]];
                }
            }
            let d = |a: [f64; 2], b: [f64; 2]| a[0] * b[0] + a[1] * b[1];
            for b in 0..n {
                for c in 0..n {
                    a[(b, c)] += w * (-d(fl[c], jv[b]) - d(jv[c], fl[b]) + chi * d(jv[c], jv[b]));
                }
            }
        }
    }
    a
}

/// Weighted mass matrix.
pub fn oracle_mass(s: &DgSpace, coeff: &[f64]) -> DMatrix<f64> {
    let n = s.n_dofs();
    let mut a = DMatrix::zeros(n, n);
    for &k in s.elements() {
        let rule = element_quadrature(s.mesh(), k, 2 * s.degree(k) + 3).unwrap();
        for (x, w) in rule.points.iter().zip(&rule.weights) {
            let v: Vec<[f64; 2]> = if s.components() == 2 {
                (0..n).map(|g| vtrace(s, g, k, *x).0).collect()
            } else {
                (0..n).map(|g| [strace(s, g, k, *x).0, 0.0]).collect()
            };
            for b in 0..n {
                for c in 0..n {
                    a[(b, c)] += w * coeff[k] * (v[b][0] * v[c][0] + v[b][1] * v[c][1]);
                }
            }
        }
    }
    a
}

/// Poro-acoustic interface coupling, rows on the poro space.
pub fn oracle_coupling(sp: &DgSpace, sa: &DgSpace, rho: &[f64]) -> DMatrix<f64> {
    let m = sp.mesh();
    let (np, na) = (sp.n_dofs(), sa.n_dofs());
    let mut c = DMatrix::zeros(np, na);
    for f in 0..m.n_faces() {
        let face = m.face(f);
        if !face.tag.is_interface() {
            continue;
        }
        let (kp, ka) = (face.elements.0, face.elements.1.unwrap());
        let rule = face_quadrature(m, f, sp.degree(kp) + sa.degree(ka) + 3);
        for (x, w) in rule.points.iter().zip(&rule.weights) {
            for i in 0..np {
                let v = vtrace(sp, i, kp, *x).0;
                let vn = v[0] * face.normal[0] + v[1] * face.normal[1];
                for j in 0..na {
                    c[(i, j)] += w * rho[ka] * strace(sa, j, ka, *x).0 * vn;
                }
            }
        }
    }
    c
}

/// Interface Robin term weighted by `eta / k`.
pub fn oracle_robin(s: &DgSpace, ek: &[f64]) -> DMatrix<f64> {
    let m = s.mesh();
    let n = s.n_dofs();
    let mut b = oracle_mass(s, ek);
    for f in 0..m.n_faces() {
        let face = m.face(f);
        if face.tag != crate::mesh::FaceTag::InterfaceOpen {
            continue;
        }
        let tau = face.tau.unwrap();
        let z = (1.0 - tau) / tau;
        let k = face.elements.0;
        let rule = face_quadrature(m, f, 2 * s.degree(k) + 3);
        for (x, w) in rule.points.iter().zip(&rule.weights) {
            let vn: Vec<f64> = (0..n)
                .map(|g| {
                    let v = vtrace(s, g, k, *x).0;
                    v[0] * face.normal[0] + v[1] * face.normal[1]
                })
                .collect();
            for i in 0..n {
                for j in 0..n {
                    b[(i, j)] += w * z * vn[i] * vn[j];
                }
            }
        }
    }
    b
}

/// Max-entry difference relative to the max entry of `b`.
pub fn rel_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / b.amax().max(1e-300)
}

/// A handful of tiny elastic meshes with quads, Voronoi cells and a pentagon.
pub fn small_meshes() -> Vec<PolyMesh> {
    let el = Subdomain::new(Physics::Elastic, 0);
    let mut out = Vec::new();
    // one element
    out.push(structured_quads(&Rect::new([0.0, 0.0], [1.0, 0.7]), 1, 1).unwrap());
    // two squares with a hanging-free interface
    out.push(structured_quads(&Rect::unit(), 2, 1).unwrap());
    // three Voronoi cells
    out.push(generate_voronoi_mesh(&Rect::new([-1.0, 0.0], [0.0, 1.0]), 3, 5, 11).unwrap());
    // triangle + pentagon
    let v = vec![[0.0, 0.0], [1.0, 0.0], [1.5, 0.6], [1.0, 1.0], [0.0, 1.0], [-0.6, 0.4]];
    out.push(PolyMesh::with_label(v, vec![vec![0, 1, 2, 3, 4], vec![0, 4, 5]], el).unwrap());
    for m in &mut out {
        m.assign_subdomains(|_| el);
    }
    out
}

/// Bottom Neumann, the rest Dirichlet.
pub fn tag_mixed(m: &mut PolyMesh) {
    let ymin = m.bounding_box().min[1];
    m.classify_boundary(
        |p| Some(if (p[1] - ymin).abs() < 1e-12 { BoundaryKind::Neumann } else { BoundaryKind::Dirichlet }),
        |_| 1.0,
    )
    .unwrap();
}

pub fn coeff(m: &PolyMesh, f: impl Fn(usize) -> f64) -> Vec<f64> {
    (0..m.n_elements()).map(f).collect()
}
