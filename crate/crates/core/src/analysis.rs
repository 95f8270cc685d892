//! Energy and DG norms, discretisation errors and convergence rates.
//!
//! All norms are evaluated by quadrature of order `2p + 4` on cached
//! tabulations, so the same code measures discrete states and their distance
//! to an exact solution.

use std::ops::Add;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fespace::{element_quadrature, face_quadrature, DgSpace, Tabulation};
use crate::forms::{face_penalty, face_role, BlockSystem, FaceOp, FaceRole, ProblemKind};
use crate::materials::zeta_tau;
use crate::mesh::FaceTag;
use crate::sources::manufactured::{FieldValue, Manufactured};
use crate::timeint::State;
use crate::{Error, Point, Result};

/// Exact fields to compare against; missing fields are zero.
pub trait ExactFields: Sync {
    fn u(&self, x: Point, t: f64) -> FieldValue;
    fn w(&self, _x: Point, _t: f64) -> FieldValue {
        FieldValue::default()
    }
    /// Scalar potential in the first component.
    fn phi(&self, _x: Point, _t: f64) -> FieldValue {
        FieldValue::default()
    }
}

impl ExactFields for Manufactured {
    fn u(&self, x: Point, t: f64) -> FieldValue {
        Manufactured::u(self, x, t)
    }
    fn w(&self, x: Point, t: f64) -> FieldValue {
        Manufactured::w(self, x, t)
    }
    fn phi(&self, x: Point, t: f64) -> FieldValue {
        Manufactured::phi(self, x, t)
    }
}

/// Squared contributions of one state to the energy norms, plus the
/// integrands of the time-integrated damping terms.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NormTerms {
    pub kinetic: f64,
    pub zeta: f64,
    pub dg_elastic: f64,
    pub dg_poro: f64,
    pub sealed: f64,
    pub kinetic_acoustic: f64,
    pub dg_acoustic: f64,
    /// `‖(η/k)^{1/2} w‖²`
    pub w_damping: f64,
    /// `‖(η/k)^{1/2} ∂_t w‖²`
    pub rate_volume: f64,
    /// `‖ζ_τ^{1/2} ∂_t (w·n)‖²` on open interface faces
    pub rate_interface: f64,
    pub l2_u: f64,
    pub l2_w: f64,
    pub l2_phi: f64,
}

impl Add for NormTerms {
    type Output = NormTerms;
    fn add(self, o: NormTerms) -> NormTerms {
        NormTerms {
            kinetic: self.kinetic + o.kinetic,
            zeta: self.zeta + o.zeta,
            dg_elastic: self.dg_elastic + o.dg_elastic,
            dg_poro: self.dg_poro + o.dg_poro,
            sealed: self.sealed + o.sealed,
            kinetic_acoustic: self.kinetic_acoustic + o.kinetic_acoustic,
            dg_acoustic: self.dg_acoustic + o.dg_acoustic,
            w_damping: self.w_damping + o.w_damping,
            rate_volume: self.rate_volume + o.rate_volume,
            rate_interface: self.rate_interface + o.rate_interface,
            l2_u: self.l2_u + o.l2_u,
            l2_w: self.l2_w + o.l2_w,
            l2_phi: self.l2_phi + o.l2_phi,
        }
    }
}

struct ElemTab {
    k: usize,
    tab: Tabulation,
}

struct FaceTab {
    /// Penalty, or `ζ_τ` on open interface faces.
    coef: f64,
    normal: Point,
    /// `(element, jump sign, tabulation)`
    sides: Vec<(usize, f64, Tabulation)>,
}

impl FaceTab {
    fn weights(&self) -> &[f64] {
        &self.sides[0].2.rule.weights
    }
    fn point(&self, q: usize) -> Point {
        self.sides[0].2.rule.points[q]
    }
}

#[derive(Default)]
struct Local {
    v: [f64; 2],
    g: [[f64; 2]; 2],
}

fn eval_local(tab: &Tabulation, q: usize, data: &[f64], off: usize, ncomp: usize) -> Local {
    let nb = tab.n_basis;
    let mut out = Local::default();
    for c in 0..ncomp {
        let d = &data[off + c * nb..off + (c + 1) * nb];
        for (i, &a) in d.iter().enumerate() {
            if a != 0.0 {
                let g = tab.grad(q, i);
                out.v[c] += a * tab.val(q, i);
                out.g[c][0] += a * g[0];
                out.g[c][1] += a * g[1];
            }
        }
    }
    out
}

fn minus(a: Local, e: &FieldValue) -> Local {
    Local {
        v: [a.v[0] - e.v[0], a.v[1] - e.v[1]],
        g: [[a.g[0][0] - e.grad[0][0], a.g[0][1] - e.grad[0][1]], [a.g[1][0] - e.grad[1][0], a.g[1][1] - e.grad[1][1]]],
    }
}

fn minus_dt(a: Local, e: &FieldValue) -> [f64; 2] {
    [a.v[0] - e.dt[0], a.v[1] - e.dt[1]]
}

fn sq(v: [f64; 2]) -> f64 {
    v[0] * v[0] + v[1] * v[1]
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// `σ(e) : ε(e) = λ (div e)² + 2μ |ε(e)|²`
fn strain_energy(g: &[[f64; 2]; 2], lambda: f64, mu: f64) -> f64 {
    let div = g[0][0] + g[1][1];
    let off = 0.5 * (g[0][1] + g[1][0]);
    lambda * div * div + 2.0 * mu * (g[0][0] * g[0][0] + g[1][1] * g[1][1] + 2.0 * off * off)
}

type Exact<'e> = Option<(&'e dyn ExactFields, f64)>;

/// Cached tabulations for the norms of one block system.
pub struct NormEvaluator<'a> {
    sys: &'a BlockSystem,
    vol: Vec<ElemTab>,
    avol: Vec<ElemTab>,
    faces_e: Vec<FaceTab>,
    faces_p: Vec<FaceTab>,
    sealed: Vec<FaceTab>,
    open: Vec<FaceTab>,
    faces_a: Vec<FaceTab>,
}

fn volume_tabs(space: &DgSpace) -> Result<Vec<ElemTab>> {
    space
        .elements()
        .par_iter()
        .map(|&k| Ok(ElemTab { k, tab: space.tabulate(k, element_quadrature(space.mesh(), k, 2 * space.degree(k) + 4)?) }))
        .collect()
}

fn dg_faces(space: &DgSpace, op: &FaceOp, pen0: f64) -> Result<Vec<FaceTab>> {
    let mesh = space.mesh();
    let mut out = Vec::new();
    for f in 0..mesh.n_faces() {
        let role = face_role(space, f, false)?;
        let face = mesh.face(f);
        let (sides, normal) = match role {
            FaceRole::Skip => continue,
            FaceRole::Interior(a, b) => (vec![(a, 1.0), (b, -1.0)], face.normal),
            FaceRole::Boundary(k) => (vec![(k, 1.0)], face.normal_from(k)),
        };
        let p = sides.iter().map(|&(k, _)| space.degree(k)).max().unwrap_or(0);
        let rule = face_quadrature(mesh, f, 2 * p + 4);
        out.push(FaceTab {
            coef: face_penalty(space, op, pen0, f, false)?,
            normal,
            sides: sides.into_iter().map(|(k, e)| (k, e, space.tabulate(k, rule.clone()))).collect(),
        });
    }
    Ok(out)
}

fn interface_tabs(space: &DgSpace, tag: FaceTag, coef: impl Fn(usize) -> Result<f64>) -> Result<Vec<FaceTab>> {
    let mesh = space.mesh();
    let mut out = Vec::new();
    for f in 0..mesh.n_faces() {
        let face = mesh.face(f);
        let k = face.elements.0;
        if face.tag != tag || !space.contains(k) {
            continue;
        }
        let c = coef(f)?;
        if c == 0.0 {
            continue;
        }
        let rule = face_quadrature(mesh, f, 2 * space.degree(k) + 4);
        out.push(FaceTab { coef: c, normal: face.normal, sides: vec![(k, 1.0, space.tabulate(k, rule))] });
    }
    Ok(out)
}

impl<'a> NormEvaluator<'a> {
    pub fn new(sys: &'a BlockSystem) -> Result<Self> {
        let c = &sys.coeffs;
        let pen = &sys.penalties;
        let space = &sys.space;
        let biot = sys.kind != ProblemKind::Elastic;
        let coupled = sys.kind == ProblemKind::Coupled;
        let divdiv = FaceOp::DivDiv { m: &c.m, beta: None };
        let faces_p = if biot { dg_faces(space, &divdiv, pen.m0)? } else { Vec::new() };
        let (sealed, open) = if coupled {
            (
                interface_tabs(space, FaceTag::InterfaceSealed, |f| face_penalty(space, &divdiv, pen.m0, f, true))?,
                interface_tabs(space, FaceTag::InterfaceOpen, |f| {
                    let tau = space.mesh().face(f).tau.ok_or_else(|| Error::Assembly(format!("open interface face {f} has no tau")))?;
                    Ok(zeta_tau(tau))
                })?,
            )
        } else {
            (Vec::new(), Vec::new())
        };
        let (avol, faces_a) = match &sys.acoustic_space {
            Some(a) => (volume_tabs(a)?, dg_faces(a, &FaceOp::Acoustic { rho: &c.rho_a }, pen.rho0)?),
            None => (Vec::new(), Vec::new()),
        };
        Ok(Self {
            sys,
            vol: volume_tabs(space)?,
            avol,
            faces_e: dg_faces(space, &FaceOp::Elastic { lambda: &c.lambda, mu: &c.mu }, pen.sigma0)?,
            faces_p,
            sealed,
            open,
            faces_a,
        })
    }

    pub fn system(&self) -> &BlockSystem {
        self.sys
    }

    fn offsets(&self, k: usize) -> (usize, Option<usize>) {
        let o = self.sys.space.offset(k);
        (self.sys.layout.u.start + o, self.sys.layout.w.as_ref().map(|r| r.start + o))
    }

    /// All norm terms of `(x, z)`, or of its difference to `exact` at time `t`.
    pub fn terms(&self, x: &[f64], z: &[f64], exact: Exact) -> Result<NormTerms> {
        let n = self.sys.n_dofs();
        for v in [x, z] {
            if v.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: v.len() });
            }
        }
        let c = &self.sys.coeffs;
        let biot = self.sys.kind != ProblemKind::Elastic;
        let zero = FieldValue::default();
        let ex = |which: u8, p: Point| match exact {
            None => zero,
            Some((e, t)) => match which {
                0 => e.u(p, t),
                1 => e.w(p, t),
                _ => e.phi(p, t),
            },
        };

        let vol = self
            .vol
            .par_iter()
            .map(|et| {
                let k = et.k;
                let tab = &et.tab;
                let (ou, ow) = self.offsets(k);
                let mut s = NormTerms::default();
                for (q, &wq) in tab.rule.weights.iter().enumerate() {
                    let pt = tab.rule.points[q];
                    let eu_ex = ex(0, pt);
                    let eu = minus(eval_local(tab, q, x, ou, 2), &eu_ex);
                    let eut = minus_dt(eval_local(tab, q, z, ou, 2), &eu_ex);
                    s.dg_elastic += wq * strain_energy(&eu.g, c.lambda[k], c.mu[k]);
                    s.l2_u += wq * sq(eu.v);
                    if let Some(ow) = ow {
                        let ew_ex = ex(1, pt);
                        let ew = minus(eval_local(tab, q, x, ow, 2), &ew_ex);
                        let ewt = minus_dt(eval_local(tab, q, z, ow, 2), &ew_ex);
                        let phi = c.phi[k];
                        let rel = [eut[0] + ewt[0] / phi, eut[1] + ewt[1] / phi];
                        s.kinetic += wq * (c.rho_u[k] * sq(eut) + c.rho_f[k] * phi * sq(rel));
                        let div = c.beta[k] * (eu.g[0][0] + eu.g[1][1]) + ew.g[0][0] + ew.g[1][1];
                        s.dg_poro += wq * c.m[k] * div * div;
                        s.w_damping += wq * c.eta_k[k] * sq(ew.v);
                        s.rate_volume += wq * c.eta_k[k] * sq(ewt);
                        s.l2_w += wq * sq(ew.v);
                    } else {
                        s.kinetic += wq * c.rho[k] * sq(eut);
                        s.zeta += wq * c.rho[k] * c.zeta[k] * c.zeta[k] * sq(eu.v);
                    }
                }
                s
            })
            .reduce(NormTerms::default, |a, b| a + b);
        let mut s = vol;

        // every side of a face shares the same rule
        let jump_sum = |ft: &FaceTab, q: usize, f: &dyn Fn(usize, &Tabulation, usize, Point) -> [f64; 2]| {
            let mut j = [0.0; 2];
            let pt = ft.point(q);
            for (k, eps, tab) in &ft.sides {
                let v = f(*k, tab, q, pt);
                j[0] += eps * v[0];
                j[1] += eps * v[1];
            }
            j
        };

        for ft in &self.faces_e {
            for (q, &wq) in ft.weights().iter().enumerate() {
                let j = jump_sum(ft, q, &|k, tab, q, p| minus(eval_local(tab, q, x, self.offsets(k).0, 2), &ex(0, p)).v);
                s.dg_elastic += wq * ft.coef * sq(j);
            }
        }
        if biot {
            let combined = |k: usize, tab: &Tabulation, q: usize, p: Point, n: Point| {
                let (ou, ow) = self.offsets(k);
                let eu = minus(eval_local(tab, q, x, ou, 2), &ex(0, p)).v;
                let ew = minus(eval_local(tab, q, x, ow.unwrap(), 2), &ex(1, p)).v;
                (c.beta[k] * eu[0] + ew[0]) * n[0] + (c.beta[k] * eu[1] + ew[1]) * n[1]
            };
            for ft in &self.faces_p {
                for (q, &wq) in ft.weights().iter().enumerate() {
                    let j = jump_sum(ft, q, &|k, tab, q, p| [combined(k, tab, q, p, ft.normal), 0.0]);
                    s.dg_poro += wq * ft.coef * j[0] * j[0];
                }
            }
            for (list, rate) in [(&self.sealed, false), (&self.open, true)] {
                for ft in list {
                    let (k, _, tab) = &ft.sides[0];
                    let ow = self.offsets(*k).1.unwrap();
                    for (q, &wq) in ft.weights().iter().enumerate() {
                        let p = ft.point(q);
                        let e = ex(1, p);
                        let v = if rate { minus_dt(eval_local(tab, q, z, ow, 2), &e) } else { minus(eval_local(tab, q, x, ow, 2), &e).v };
                        let vn = dot(v, ft.normal);
                        if rate {
                            s.rate_interface += wq * ft.coef * vn * vn;
                        } else {
                            s.sealed += wq * ft.coef * vn * vn;
                        }
                    }
                }
            }
        }

        if let (Some(aspace), Some(r)) = (&self.sys.acoustic_space, &self.sys.layout.phi) {
            let a = self
                .avol
                .par_iter()
                .map(|et| {
                    let k = et.k;
                    let tab = &et.tab;
                    let o = r.start + aspace.offset(k);
                    let mut s = NormTerms::default();
                    for (q, &wq) in tab.rule.weights.iter().enumerate() {
                        let e = ex(2, tab.rule.points[q]);
                        let ep = minus(eval_local(tab, q, x, o, 1), &e);
                        let ept = eval_local(tab, q, z, o, 1).v[0] - e.dt[0];
                        s.kinetic_acoustic += wq * c.rho_a[k] / (c.c[k] * c.c[k]) * ept * ept;
                        s.dg_acoustic += wq * c.rho_a[k] * sq(ep.g[0]);
                        s.l2_phi += wq * ep.v[0] * ep.v[0];
                    }
                    s
                })
                .reduce(NormTerms::default, |a, b| a + b);
            s = s + a;
            for ft in &self.faces_a {
                for (q, &wq) in ft.weights().iter().enumerate() {
                    let j = jump_sum(ft, q, &|k, tab, q, p| {
                        let o = r.start + aspace.offset(k);
                        [eval_local(tab, q, x, o, 1).v[0] - ex(2, p).v[0], 0.0]
                    });
                    s.dg_acoustic += wq * ft.coef * j[0] * j[0];
                }
            }
        }
        Ok(s)
    }

    fn embed(&self, range: Option<std::ops::Range<usize>>, v: &[f64]) -> Result<Vec<f64>> {
        let r = range.ok_or_else(|| Error::InvalidInput(format!("{} system has no such field", self.sys.kind.name())))?;
        if v.len() != r.len() {
            return Err(Error::DimensionMismatch { expected: r.len(), got: v.len() });
        }
        let mut x = vec![0.0; self.sys.n_dofs()];
        x[r].copy_from_slice(v);
        Ok(x)
    }

    /// `‖v‖_{DG,e}` of a displacement-space vector.
    pub fn dg_norm_elastic(&self, v: &[f64]) -> Result<f64> {
        let x = self.embed(Some(self.sys.layout.u.clone()), v)?;
        Ok(self.terms(&x, &vec![0.0; x.len()], None)?.dg_elastic.sqrt())
    }

    /// `|z|_{DG,p}` of a displacement-space vector (normally `βu + w`).
    pub fn dg_seminorm_poro(&self, z: &[f64]) -> Result<f64> {
        let x = self.embed(self.sys.layout.w.clone(), z)?;
        Ok(self.terms(&x, &vec![0.0; x.len()], None)?.dg_poro.sqrt())
    }

    /// `‖φ‖_{DG,a}` of an acoustic-space vector.
    pub fn dg_norm_acoustic(&self, phi: &[f64]) -> Result<f64> {
        let x = self.embed(self.sys.layout.phi.clone(), phi)?;
        Ok(self.terms(&x, &vec![0.0; x.len()], None)?.dg_acoustic.sqrt())
    }
}

/// All terms of the energy norm at one time, squared.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub t: f64,
    pub kinetic: f64,
    pub zeta: f64,
    pub dg_elastic: f64,
    pub dg_poro: f64,
    pub kinetic_acoustic: f64,
    pub dg_acoustic: f64,
    pub sealed: f64,
    /// `‖(η/k)^{1/2} w(0)‖²`
    pub initial_w: f64,
    pub damping_volume: f64,
    pub damping_interface: f64,
}

impl EnergyBreakdown {
    pub fn total(&self) -> f64 {
        self.kinetic
            + self.zeta
            + self.dg_elastic
            + self.dg_poro
            + self.kinetic_acoustic
            + self.dg_acoustic
            + self.sealed
            + self.initial_w
            + self.damping_volume
            + self.damping_interface
    }

    /// The energy norm.
    pub fn norm(&self) -> f64 {
        self.total().sqrt()
    }

    pub const CSV_HEADER: &'static str =
        "t,kinetic,zeta,dg_elastic,dg_poro,kinetic_acoustic,dg_acoustic,sealed,initial_w,damping_volume,damping_interface,total";

    pub fn csv_row(&self) -> String {
        format!(
            "{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e}",
            self.t,
            self.kinetic,
            self.zeta,
            self.dg_elastic,
            self.dg_poro,
            self.kinetic_acoustic,
            self.dg_acoustic,
            self.sealed,
            self.initial_w,
            self.damping_volume,
            self.damping_interface,
            self.total()
        )
    }
}

/// Energy (or energy-error) monitor. Observations must be passed in time
/// order; the time integrals are accumulated with the trapezoid rule.
pub struct EnergyMonitor<'a> {
    eval: NormEvaluator<'a>,
    exact: Option<&'a dyn ExactFields>,
    initial_w: Option<f64>,
    integral: (f64, f64),
    last: Option<(f64, NormTerms)>,
}

impl<'a> EnergyMonitor<'a> {
    pub fn new(sys: &'a BlockSystem, exact: Option<&'a dyn ExactFields>) -> Result<Self> {
        Ok(Self { eval: NormEvaluator::new(sys)?, exact, initial_w: None, integral: (0.0, 0.0), last: None })
    }

    pub fn evaluator(&self) -> &NormEvaluator<'a> {
        &self.eval
    }

    pub fn observe(&mut self, state: &State) -> Result<EnergyBreakdown> {
        let t = state.t;
        let terms = self.eval.terms(&state.x, &state.z, self.exact.map(|e| (e, t)))?;
        let w0 = *self.initial_w.get_or_insert(terms.w_damping);
        if let Some((t0, prev)) = &self.last {
            let dt = t - t0;
            if dt < 0.0 {
                return Err(Error::InvalidInput(format!("energy monitor observed t={t} after t={t0}")));
            }
            self.integral.0 += 0.5 * dt * (prev.rate_volume + terms.rate_volume);
            self.integral.1 += 0.5 * dt * (prev.rate_interface + terms.rate_interface);
        }
        self.last = Some((t, terms));
        Ok(EnergyBreakdown {
            t,
            kinetic: terms.kinetic,
            zeta: terms.zeta,
            dg_elastic: terms.dg_elastic,
            dg_poro: terms.dg_poro,
            kinetic_acoustic: terms.kinetic_acoustic,
            dg_acoustic: terms.dg_acoustic,
            sealed: terms.sealed,
            initial_w: w0,
            damping_volume: self.integral.0,
            damping_interface: self.integral.1,
        })
    }

    /// `L²` errors (or norms) of the last observation.
    pub fn last_l2(&self) -> Option<(f64, f64, f64)> {
        self.last.map(|(_, s)| (s.l2_u.sqrt(), s.l2_w.sqrt(), s.l2_phi.sqrt()))
    }
}

/// One row of a convergence table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub run_id: String,
    pub kind: ProblemKind,
    pub h: f64,
    pub p: usize,
    pub dofs: usize,
    pub energy_error: f64,
    pub l2_u: f64,
    pub l2_w: Option<f64>,
    pub l2_phi: Option<f64>,
    pub wall_s: f64,
}

impl ErrorReport {
    pub const CSV_HEADER: &'static str = "run_id,kind,h,p,dofs,err_energy,err_L2_u,err_L2_w,err_L2_phi,wall_s";

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6e}")).unwrap_or_default();
        format!(
            "{},{},{:.6},{},{},{:.6e},{:.6e},{},{},{:.3}",
            self.run_id,
            self.kind.name(),
            self.h,
            self.p,
            self.dofs,
            self.energy_error,
            self.l2_u,
            opt(self.l2_w),
            opt(self.l2_phi),
            self.wall_s
        )
    }
}

/// Builds the error report from the last observation of an error monitor.
pub fn compute_errors(monitor: &EnergyMonitor, last: &EnergyBreakdown, run_id: &str, wall_s: f64) -> Result<ErrorReport> {
    let sys = monitor.eval.sys;
    let (u, w, phi) = monitor.last_l2().ok_or_else(|| Error::InvalidInput("error monitor has no observation".into()))?;
    Ok(ErrorReport {
        run_id: run_id.to_string(),
        kind: sys.kind,
        h: sys.space.mesh().h(),
        p: sys.space.max_degree(),
        dofs: sys.n_dofs(),
        energy_error: last.norm(),
        l2_u: u,
        l2_w: sys.layout.w.is_some().then_some(w),
        l2_phi: sys.layout.phi.is_some().then_some(phi),
        wall_s,
    })
}

/// Pairwise rates between consecutive meshes and the least-squares slope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    /// `None` where a pair was skipped.
    pub pairwise: Vec<Option<f64>>,
    pub least_squares: Option<f64>,
}

/// Least-squares slope of `log y` against `log x` over the positive pairs.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).filter(|(x, y)| **x > 0.0 && **y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn convergence_rates(errors: &[f64], hs: &[f64]) -> Result<Rates> {
    if errors.len() != hs.len() {
        return Err(Error::DimensionMismatch { expected: hs.len(), got: errors.len() });
    }
    let mut pairwise = Vec::new();
    for i in 1..errors.len() {
        let (e0, e1, h0, h1) = (errors[i - 1], errors[i], hs[i - 1], hs[i]);
        if e0 <= 0.0 || e1 <= 0.0 || h0 <= 0.0 || h1 <= 0.0 || h0 == h1 {
            log::warn!("skipping rate between entries {} and {i} (errors {e0:e}, {e1:e}; h {h0}, {h1})", i - 1);
            pairwise.push(None);
        } else {
            pairwise.push(Some((e0 / e1).ln() / (h0 / h1).ln()));
        }
    }
    Ok(Rates { pairwise, least_squares: loglog_slope(hs, errors) })
}

/// Pearson correlation coefficient.
pub fn correlation(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}
