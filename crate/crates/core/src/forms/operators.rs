//! Element and face assembly of the interior-penalty operators.
//!
//! Every face term is written with one kernel. On a face, side `s` of a
//! function carries a jump sign `ε_s` (+1 on the face's first element, -1 on
//! the second) and an averaging weight `ω_s` (1/2 on interior faces, 1 on
//! boundary faces). With `J = ε · trace` and `Fl = ω · flux`, the face
//! contribution for trial `a` and test `b` is
//!
//! `∫_F -Fl_a·J_b - J_a·Fl_b + pen J_a·J_b`.

use rayon::prelude::*;

use crate::fespace::{element_quadrature, face_quadrature, DgSpace, QuadratureRule};
use crate::linalg::{CsrMatrix, TripletBuilder};
use crate::materials::stiffness_norm;
use crate::mesh::{FaceTag, PolyMesh};
use crate::{Error, Point, Result};

/// Interior-penalty constants `σ0` (elastic), `m0` (div-div) and `ρ0` (acoustic).
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Penalties {
    pub sigma0: f64,
    pub m0: f64,
    pub rho0: f64,
}

impl Default for Penalties {
    fn default() -> Self {
        Self { sigma0: 10.0, m0: 10.0, rho0: 10.0 }
    }
}

impl Penalties {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma0 > 0.0 && self.m0 > 0.0 && self.rho0 > 0.0) {
            return Err(Error::InvalidInput(format!("penalty constants must be positive: {self:?}")));
        }
        Ok(())
    }
}

/// A face operator: what the jump and flux of a basis function are.
#[derive(Clone, Copy)]
pub(crate) enum FaceOp<'a> {
    /// Vector SIP for `σ(u) = λ div u I + 2μ ε(u)`.
    Elastic { lambda: &'a [f64], mu: &'a [f64] },
    /// Normal-component SIP for `m div`. With `beta` the unknowns are the
    /// pair `[u, w]` (u block first, `n` dofs each) and the field is `βu + w`.
    DivDiv { m: &'a [f64], beta: Option<&'a [f64]> },
    /// Scalar SIP for `ρ_a ∇`.
    Acoustic { rho: &'a [f64] },
}

impl FaceOp<'_> {
    fn jump_dim(&self) -> usize {
        match self {
            FaceOp::Elastic { .. } => 2,
            _ => 1,
        }
    }

    /// Face-wise stabilisation coefficient of element `k` before the max and the user constant.
    fn penalty_scale(&self, space: &DgSpace, k: usize) -> f64 {
        let p = space.degree(k) as f64;
        let h = space.mesh().diameter(k);
        let c = match self {
            FaceOp::Elastic { lambda, mu } => stiffness_norm(lambda[k], mu[k], 2),
            FaceOp::DivDiv { m, .. } => m[k],
            FaceOp::Acoustic { rho } => rho[k],
        };
        c * p * p / h
    }

    /// Global dofs of element `k` and their scale factors.
    fn local_dofs(&self, space: &DgSpace, k: usize) -> (Vec<usize>, Vec<f64>) {
        let r = space.dofs(k);
        match self {
            FaceOp::DivDiv { beta: Some(beta), .. } => {
                let n = space.n_dofs();
                let mut d: Vec<usize> = r.clone().collect();
                d.extend(r.clone().map(|i| i + n));
                let mut s = vec![beta[k]; r.len()];
                s.extend(std::iter::repeat(1.0).take(r.len()));
                (d, s)
            }
            _ => (r.clone().collect(), vec![1.0; r.len()]),
        }
    }

    fn n_rows(&self, space: &DgSpace) -> usize {
        match self {
            FaceOp::DivDiv { beta: Some(_), .. } => 2 * space.n_dofs(),
            _ => space.n_dofs(),
        }
    }
}

/// Jumps and fluxes of all local functions of one element at the face points.
pub(crate) struct Side {
    pub dofs: Vec<usize>,
    /// `[q][local][d]`
    pub jump: Vec<f64>,
    pub flux: Vec<f64>,
}

pub(crate) fn side_data(op: &FaceOp, space: &DgSpace, k: usize, eps: f64, omega: f64, n: Point, rule: &QuadratureRule) -> Side {
    let t = space.tabulate(k, rule.clone());
    let nb = t.n_basis;
    let (dofs, scale) = op.local_dofs(space, k);
    let nl = dofs.len();
    let dj = op.jump_dim();
    let nq = rule.len();
    let mut jump = vec![0.0; nq * nl * dj];
    let mut flux = vec![0.0; nq * nl * dj];
    for q in 0..nq {
        for (l, &s) in scale.iter().enumerate() {
            let comp_block = l / nb;
            let i = l % nb;
            let v = t.val(q, i);
            let g = t.grad(q, i);
            let at = (q * nl + l) * dj;
            match op {
                FaceOp::Elastic { lambda, mu } => {
                    let c = comp_block;
                    let (la, m) = (lambda[k], mu[k]);
                    let gn = g[0] * n[0] + g[1] * n[1];
                    for a in 0..2 {
                        let delta = if a == c { 1.0 } else { 0.0 };
                        jump[at + a] = eps * v * delta;
                        flux[at + a] = omega * (la * g[c] * n[a] + m * (gn * delta + n[c] * g[a]));
                    }
                }
                FaceOp::DivDiv { m, .. } => {
                    let c = comp_block % 2;
                    jump[at] = eps * s * v * n[c];
                    flux[at] = omega * m[k] * s * g[c];
                }
                FaceOp::Acoustic { rho } => {
                    jump[at] = eps * v;
                    flux[at] = omega * rho[k] * (g[0] * n[0] + g[1] * n[1]);
                }
            }
        }
    }
    Side { dofs, jump, flux }
}

/// Adds `∫ -Fl_a·J_b - J_a·Fl_b + pen J_a·J_b` over all side pairs; rows are tests.
pub(crate) fn face_kernel(sides: &[Side], weights: &[f64], pen: f64, dj: usize, out: &mut Vec<(Vec<usize>, Vec<usize>, Vec<f64>)>) {
    let nq = weights.len();
    for test in sides {
        for trial in sides {
            let (nt, na) = (test.dofs.len(), trial.dofs.len());
            let mut blk = vec![0.0; nt * na];
            for (q, &w) in weights.iter().enumerate() {
                debug_assert!(q < nq);
                for b in 0..nt {
                    let jb = &test.jump[(q * nt + b) * dj..(q * nt + b + 1) * dj];
                    let fb = &test.flux[(q * nt + b) * dj..(q * nt + b + 1) * dj];
                    for a in 0..na {
                        let ja = &trial.jump[(q * na + a) * dj..(q * na + a + 1) * dj];
                        let fa = &trial.flux[(q * na + a) * dj..(q * na + a + 1) * dj];
                        let mut s = 0.0;
                        for d in 0..dj {
                            s += -fa[d] * jb[d] - ja[d] * fb[d] + pen * ja[d] * jb[d];
                        }
                        blk[b * na + a] += w * s;
                    }
                }
            }
            out.push((test.dofs.clone(), trial.dofs.clone(), blk));
        }
    }
}

/// How a face enters an operator on `space`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum FaceRole {
    Skip,
    Interior(usize, usize),
    /// Boundary-like side: Dirichlet face, or sealed interface for the coupled div-div form.
    Boundary(usize),
}

pub(crate) fn face_role(space: &DgSpace, f: usize, include_sealed: bool) -> Result<FaceRole> {
    let mesh = space.mesh();
    let face = mesh.face(f);
    let (k0, k1) = face.elements;
    let in0 = space.contains(k0);
    let in1 = k1.map(|k| space.contains(k)).unwrap_or(false);
    match (in0, in1) {
        (false, false) => Ok(FaceRole::Skip),
        (true, true) => Ok(FaceRole::Interior(k0, k1.unwrap())),
        (a, _) => {
            let k = if a { k0 } else { k1.unwrap() };
            match face.tag {
                FaceTag::Dirichlet => Ok(FaceRole::Boundary(k)),
                FaceTag::Neumann | FaceTag::InterfaceOpen => Ok(FaceRole::Skip),
                FaceTag::InterfaceSealed => Ok(if include_sealed { FaceRole::Boundary(k) } else { FaceRole::Skip }),
                FaceTag::Untagged => Err(Error::Assembly(format!(
                    "face {f} at ({:.6}, {:.6}) has no boundary condition",
                    face.midpoint[0], face.midpoint[1]
                ))),
                FaceTag::Interior => Err(Error::Assembly(format!(
                    "face {f} between {} and {} elements is not classified as an interface",
                    mesh.subdomain(k0).physics.name(),
                    k1.map(|k| mesh.subdomain(k).physics.name()).unwrap_or("no")
                ))),
            }
        }
    }
}

fn face_order(space: &DgSpace, role: FaceRole) -> usize {
    match role {
        FaceRole::Interior(a, b) => space.degree(a) + space.degree(b) + 2,
        FaceRole::Boundary(k) => 2 * space.degree(k) + 2,
        FaceRole::Skip => 0,
    }
}

type LocalBlock = (Vec<usize>, Vec<usize>, Vec<f64>);

fn face_blocks(space: &DgSpace, op: &FaceOp, pen0: f64, include_sealed: bool) -> Result<Vec<LocalBlock>> {
    let mesh = space.mesh();
    let per_face: Vec<Result<Vec<LocalBlock>>> = (0..mesh.n_faces())
        .into_par_iter()
        .map(|f| {
            let role = face_role(space, f, include_sealed)?;
            let mut out = Vec::new();
            let face = mesh.face(f);
            let rule = face_quadrature(mesh, f, face_order(space, role));
            match role {
                FaceRole::Skip => {}
                FaceRole::Interior(a, b) => {
                    let pen = pen0 * op.penalty_scale(space, a).max(op.penalty_scale(space, b));
                    let sides = [
                        side_data(op, space, a, 1.0, 0.5, face.normal, &rule),
                        side_data(op, space, b, -1.0, 0.5, face.normal, &rule),
                    ];
                    face_kernel(&sides, &rule.weights, pen, op.jump_dim(), &mut out);
                }
                FaceRole::Boundary(k) => {
                    let pen = pen0 * op.penalty_scale(space, k);
                    let sides = [side_data(op, space, k, 1.0, 1.0, face.normal_from(k), &rule)];
                    face_kernel(&sides, &rule.weights, pen, op.jump_dim(), &mut out);
                }
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for r in per_face {
        all.extend(r?);
    }
    Ok(all)
}

fn volume_blocks(space: &DgSpace, op: &FaceOp) -> Result<Vec<LocalBlock>> {
    space
        .elements()
        .par_iter()
        .map(|&k| {
            let t = space.tabulate(k, element_quadrature(space.mesh(), k, space.default_order(k))?);
            let nb = t.n_basis;
            let (dofs, scale) = op.local_dofs(space, k);
            let nl = dofs.len();
            let mut blk = vec![0.0; nl * nl];
            for (q, &w) in t.rule.weights.iter().enumerate() {
                match op {
                    FaceOp::Elastic { lambda, mu } => {
                        let (la, m) = (lambda[k], mu[k]);
                        for bc in 0..2 {
                            for j in 0..nb {
                                let gj = t.grad(q, j);
                                let row = (bc * nb + j) * nl;
                                for ac in 0..2 {
                                    for i in 0..nb {
                                        let gi = t.grad(q, i);
                                        let dot = if ac == bc { gi[0] * gj[0] + gi[1] * gj[1] } else { 0.0 };
                                        let v = la * gi[ac] * gj[bc] + m * (dot + gi[bc] * gj[ac]);
                                        blk[row + ac * nb + i] += w * v;
                                    }
                                }
                            }
                        }
                    }
                    FaceOp::DivDiv { m, .. } => {
                        for b in 0..nl {
                            let db = scale[b] * t.grad(q, b % nb)[(b / nb) % 2];
                            if db == 0.0 {
                                continue;
                            }
                            for a in 0..nl {
                                let da = scale[a] * t.grad(q, a % nb)[(a / nb) % 2];
                                blk[b * nl + a] += w * m[k] * da * db;
                            }
                        }
                    }
                    FaceOp::Acoustic { rho } => {
                        for j in 0..nb {
                            let gj = t.grad(q, j);
                            for i in 0..nb {
                                let gi = t.grad(q, i);
                                blk[j * nl + i] += w * rho[k] * (gi[0] * gj[0] + gi[1] * gj[1]);
                            }
                        }
                    }
                }
            }
            Ok((dofs.clone(), dofs, blk))
        })
        .collect()
}

fn assemble_sip(space: &DgSpace, op: FaceOp, pen0: f64, include_sealed: bool) -> Result<CsrMatrix> {
    let n = op.n_rows(space);
    let vol = volume_blocks(space, &op)?;
    let faces = face_blocks(space, &op, pen0, include_sealed)?;
    let mut tb = TripletBuilder::new(n, n);
    for (r, c, b) in vol.iter().chain(&faces) {
        tb.add_block(r, c, b);
    }
    Ok(tb.build())
}

fn check_coeff(space: &DgSpace, c: &[f64], name: &str) -> Result<()> {
    if c.len() != space.mesh().n_elements() {
        return Err(Error::DimensionMismatch { expected: space.mesh().n_elements(), got: c.len() });
    }
    for &k in space.elements() {
        if !c[k].is_finite() {
            return Err(Error::Assembly(format!("{name} is not finite on element {k}")));
        }
    }
    Ok(())
}

/// Mass matrix `∫ c u·v`; `coeff` is indexed by mesh element.
pub fn assemble_mass(space: &DgSpace, coeff: &[f64]) -> Result<CsrMatrix> {
    check_coeff(space, coeff, "mass coefficient")?;
    let blocks: Vec<Result<(usize, usize, Vec<f64>)>> = space
        .elements()
        .par_iter()
        .map(|&k| {
            let m = space.local_mass(k, coeff[k])?;
            let nb = m.nrows();
            Ok((space.offset(k), nb, m.as_slice().to_vec()))
        })
        .collect();
    let mut tb = TripletBuilder::new(space.n_dofs(), space.n_dofs());
    for b in blocks {
        let (o, nb, m) = b?;
        for c in 0..space.components() {
            let base = o + c * nb;
            for j in 0..nb {
                for i in 0..nb {
                    // column-major storage, symmetric anyway
                    tb.add(base + i, base + j, m[j * nb + i]);
                }
            }
        }
    }
    Ok(tb.build())
}

/// Symmetric interior-penalty elastic form with `η = σ0 max D̄ p²/h`.
pub fn assemble_elastic(space: &DgSpace, lambda: &[f64], mu: &[f64], sigma0: f64) -> Result<CsrMatrix> {
    check_coeff(space, lambda, "lambda")?;
    check_coeff(space, mu, "mu")?;
    if space.components() != 2 {
        return Err(Error::InvalidInput("elastic form needs a vector space".into()));
    }
    assemble_sip(space, FaceOp::Elastic { lambda, mu }, sigma0, false)
}

/// Div-div form `(m div w, div z)` with normal-jump terms and `γ = m0 max m p²/h`.
///
/// With `beta`, the result acts on `[u, w]` (size `2n`) as the form evaluated
/// at `βu + w`. With `include_sealed`, sealed interface faces are penalised
/// like boundary faces.
pub fn assemble_divdiv(space: &DgSpace, m: &[f64], beta: Option<&[f64]>, m0: f64, include_sealed: bool) -> Result<CsrMatrix> {
    check_coeff(space, m, "Biot modulus")?;
    if let Some(b) = beta {
        check_coeff(space, b, "beta")?;
    }
    if space.components() != 2 {
        return Err(Error::InvalidInput("div-div form needs a vector space".into()));
    }
    assemble_sip(space, FaceOp::DivDiv { m, beta }, m0, include_sealed)
}

/// Scalar interior-penalty form `(ρ_a ∇φ, ∇ψ)` with `χ = ρ0 max ρ_a r²/h`.
pub fn assemble_acoustic(space: &DgSpace, rho_a: &[f64], rho0: f64) -> Result<CsrMatrix> {
    check_coeff(space, rho_a, "rho_a")?;
    if space.components() != 1 {
        return Err(Error::InvalidInput("acoustic form needs a scalar space".into()));
    }
    assemble_sip(space, FaceOp::Acoustic { rho: rho_a }, rho0, false)
}

/// The acoustic penalty `χ` on face `f`.
pub fn acoustic_penalty(space: &DgSpace, rho_a: &[f64], rho0: f64, f: usize) -> Result<f64> {
    face_penalty(space, &FaceOp::Acoustic { rho: rho_a }, rho0, f, false)
}

pub(crate) fn face_penalty(space: &DgSpace, op: &FaceOp, pen0: f64, f: usize, include_sealed: bool) -> Result<f64> {
    Ok(match face_role(space, f, include_sealed)? {
        FaceRole::Skip => 0.0,
        FaceRole::Interior(a, b) => pen0 * op.penalty_scale(space, a).max(op.penalty_scale(space, b)),
        FaceRole::Boundary(k) => pen0 * op.penalty_scale(space, k),
    })
}

fn interface_faces(mesh: &PolyMesh, space_p: &DgSpace, space_a: &DgSpace) -> Vec<usize> {
    (0..mesh.n_faces())
        .filter(|&f| {
            let face = mesh.face(f);
            face.tag.is_interface()
                && space_p.contains(face.elements.0)
                && face.elements.1.map(|k| space_a.contains(k)).unwrap_or(false)
        })
        .collect()
}

/// `C_ij = ∫_{F^I} ρ_a ψ_j (v_i·n_p)`, rows over `space_p`, columns over `space_a`.
pub fn assemble_coupling(space_p: &DgSpace, space_a: &DgSpace, rho_a: &[f64]) -> Result<CsrMatrix> {
    check_coeff(space_a, rho_a, "rho_a")?;
    if !std::ptr::eq(space_p.mesh(), space_a.mesh()) && space_p.mesh().n_faces() != space_a.mesh().n_faces() {
        return Err(Error::InvalidInput("coupling spaces live on different meshes".into()));
    }
    let mesh = space_p.mesh();
    let mut tb = TripletBuilder::new(space_p.n_dofs(), space_a.n_dofs());
    for f in interface_faces(mesh, space_p, space_a) {
        let face = mesh.face(f);
        let (kp, ka) = (face.elements.0, face.elements.1.unwrap());
        assert!(
            mesh.subdomain(kp).physics == crate::mesh::Physics::Poroelastic,
            "interface face {f} must be oriented from the poro-elastic element"
        );
        let rule = face_quadrature(mesh, f, space_p.degree(kp) + space_a.degree(ka) + 2);
        let tp = space_p.tabulate(kp, rule.clone());
        let ta = space_a.tabulate(ka, rule);
        let (nbp, nba) = (tp.n_basis, ta.n_basis);
        let (op, oa) = (space_p.offset(kp), space_a.offset(ka));
        let n = face.normal;
        let mut blk = vec![0.0; 2 * nbp * nba];
        for (q, &w) in tp.rule.weights.iter().enumerate() {
            for c in 0..2 {
                for i in 0..nbp {
                    let vi = w * rho_a[ka] * tp.val(q, i) * n[c];
                    for j in 0..nba {
                        blk[(c * nbp + i) * nba + j] += vi * ta.val(q, j);
                    }
                }
            }
        }
        let rows: Vec<usize> = (op..op + 2 * nbp).collect();
        let cols: Vec<usize> = (oa..oa + nba).collect();
        tb.add_block(&rows, &cols, &blk);
    }
    Ok(tb.build())
}

/// `B(w, z) = (η/k w, z) + Σ_{F^Io} ζ_τ (w·n)(z·n)`.
pub fn assemble_robin(space_p: &DgSpace, eta_over_k: &[f64]) -> Result<CsrMatrix> {
    let vol = assemble_mass(space_p, eta_over_k)?;
    let mesh = space_p.mesh();
    let mut tb = TripletBuilder::new(space_p.n_dofs(), space_p.n_dofs());
    for f in 0..mesh.n_faces() {
        let face = mesh.face(f);
        if face.tag != FaceTag::InterfaceOpen || !space_p.contains(face.elements.0) {
            continue;
        }
        let tau = face.tau.ok_or_else(|| Error::Assembly(format!("open interface face {f} has no tau")))?;
        assert!(tau > 0.0, "sealed face {f} passed to the Robin term");
        let zeta = crate::materials::zeta_tau(tau);
        if zeta == 0.0 {
            continue;
        }
        let k = face.elements.0;
        let rule = face_quadrature(mesh, f, 2 * space_p.degree(k) + 2);
        let t = space_p.tabulate(k, rule);
        let nb = t.n_basis;
        let n = face.normal;
        let mut blk = vec![0.0; 4 * nb * nb];
        for (q, &w) in t.rule.weights.iter().enumerate() {
            for l in 0..2 * nb {
                let zl = t.val(q, l % nb) * n[l / nb];
                for r in 0..2 * nb {
                    blk[l * 2 * nb + r] += w * zeta * zl * t.val(q, r % nb) * n[r / nb];
                }
            }
        }
        let d: Vec<usize> = space_p.dofs(k).collect();
        tb.add_block(&d, &d, &blk);
    }
    vol.add(1.0, &tb.build(), 1.0)
}

/// Nitsche load `Σ_F ∫ -J_g·Fl_v + pen J_g·J_v` for Dirichlet data.
///
/// `data(k, x, n)` gives the jump of the data at `x` on element `k` with outward normal `n`:
/// the vector `g` (elastic), the scalar `g·n` (div-div) or `g` (acoustic),
/// stored in the first `jump_dim` entries.
pub(crate) fn dirichlet_load<G>(space: &DgSpace, op: FaceOp, pen0: f64, data: G) -> Result<Vec<f64>>
where
    G: Fn(usize, Point, Point) -> [f64; 2],
{
    let mesh = space.mesh();
    let dj = op.jump_dim();
    let mut out = vec![0.0; op.n_rows(space)];
    for f in 0..mesh.n_faces() {
        let FaceRole::Boundary(k) = face_role(space, f, false)? else { continue };
        if mesh.face(f).tag != FaceTag::Dirichlet {
            continue;
        }
        let pen = pen0 * op.penalty_scale(space, k);
        let n = mesh.face(f).normal_from(k);
        let rule = face_quadrature(mesh, f, 2 * space.degree(k) + 4);
        let side = side_data(&op, space, k, 1.0, 1.0, n, &rule);
        let nl = side.dofs.len();
        for (q, &w) in rule.weights.iter().enumerate() {
            let g = data(k, rule.points[q], n);
            for b in 0..nl {
                let at = (q * nl + b) * dj;
                let mut s = 0.0;
                for d in 0..dj {
                    s += -g[d] * side.flux[at + d] + pen * g[d] * side.jump[at + d];
                }
                out[side.dofs[b]] += w * s;
            }
        }
    }
    Ok(out)
}

/// Load vector `∫ f·v` over the elements of `space`.
pub fn body_load<F: Fn(Point) -> [f64; 2]>(space: &DgSpace, f: F) -> Result<Vec<f64>> {
    let mut out = vec![0.0; space.n_dofs()];
    for &k in space.elements() {
        let t = space.element_tabulation(k, space.default_order(k) + 2)?;
        let nb = t.n_basis;
        let o = space.offset(k);
        for (q, &w) in t.rule.weights.iter().enumerate() {
            let fx = f(t.rule.points[q]);
            for c in 0..space.components() {
                for i in 0..nb {
                    out[o + c * nb + i] += w * fx[c] * t.val(q, i);
                }
            }
        }
    }
    Ok(out)
}
