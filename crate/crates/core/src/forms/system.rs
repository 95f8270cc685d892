//! The semi-discrete block system `M X'' + D X' + A X = S(t)`.

use std::ops::Range;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::operators::{self, FaceOp, Penalties};
use crate::fespace::DgSpace;
use crate::linalg::{CsrMatrix, TripletBuilder};
use crate::materials::MaterialTable;
use crate::mesh::{Physics, PolyMesh};
use crate::{Error, Point, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Elastic,
    Poro,
    Coupled,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Elastic => "elastic",
            ProblemKind::Poro => "poro",
            ProblemKind::Coupled => "coupled",
        }
    }
}

impl std::str::FromStr for ProblemKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "elastic" => Ok(ProblemKind::Elastic),
            "poro" | "poroelastic" => Ok(ProblemKind::Poro),
            "coupled" => Ok(ProblemKind::Coupled),
            _ => Err(Error::Config(format!("unknown problem kind '{s}'"))),
        }
    }
}

/// Which ranges of the global vector hold `u`, `w` and `φ`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockLayout {
    pub u: Range<usize>,
    pub w: Option<Range<usize>>,
    pub phi: Option<Range<usize>>,
    pub n: usize,
}

/// Separable load term `c(t) v`.
#[derive(Clone)]
pub struct LoadTerm {
    pub coef: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub vector: Vec<f64>,
}

impl LoadTerm {
    pub fn new<F: Fn(f64) -> f64 + Send + Sync + 'static>(coef: F, vector: Vec<f64>) -> Self {
        Self { coef: Arc::new(coef), vector }
    }
}

impl std::fmt::Debug for LoadTerm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LoadTerm").field("len", &self.vector.len()).finish()
    }
}

/// Element-wise coefficients indexed by mesh element (NaN where undefined).
#[derive(Clone, Debug)]
pub struct Coefficients {
    pub rho: Vec<f64>,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub zeta: Vec<f64>,
    pub rho_f: Vec<f64>,
    pub rho_w: Vec<f64>,
    pub rho_u: Vec<f64>,
    pub phi: Vec<f64>,
    pub eta_k: Vec<f64>,
    pub m: Vec<f64>,
    pub beta: Vec<f64>,
    pub rho_a: Vec<f64>,
    pub c: Vec<f64>,
}

impl Coefficients {
    pub fn from_materials(mesh: &PolyMesh, mats: &MaterialTable) -> Result<Self> {
        let n = mesh.n_elements();
        let nan = vec![f64::NAN; n];
        let mut c = Coefficients {
            rho: nan.clone(),
            lambda: nan.clone(),
            mu: nan.clone(),
            zeta: nan.clone(),
            rho_f: nan.clone(),
            rho_w: nan.clone(),
            rho_u: nan.clone(),
            phi: nan.clone(),
            eta_k: nan.clone(),
            m: nan.clone(),
            beta: nan.clone(),
            rho_a: nan.clone(),
            c: nan,
        };
        for k in 0..n {
            let sd = mesh.subdomain(k);
            match sd.physics {
                Physics::Elastic => {
                    let e = mats.elastic_of(sd)?;
                    e.validate()?;
                    c.rho[k] = e.rho;
                    c.lambda[k] = e.lambda;
                    c.mu[k] = e.mu;
                    c.zeta[k] = e.zeta;
                }
                Physics::Poroelastic => {
                    let p = mats.poro_of(sd)?;
                    p.validate()?;
                    let (rho, rho_w, rho_u) = p.derived_densities()?;
                    c.rho[k] = rho;
                    c.lambda[k] = p.lambda;
                    c.mu[k] = p.mu;
                    c.zeta[k] = 0.0;
                    c.rho_f[k] = p.rho_f;
                    c.rho_w[k] = rho_w;
                    c.rho_u[k] = rho_u;
                    c.phi[k] = p.phi;
                    c.eta_k[k] = p.eta_over_k();
                    c.m[k] = p.m;
                    c.beta[k] = p.beta;
                }
                Physics::Acoustic => {
                    let a = mats.acoustic_of(sd)?;
                    a.validate()?;
                    c.rho_a[k] = a.rho_a;
                    c.c[k] = a.c;
                }
            }
        }
        Ok(c)
    }

    fn map<F: Fn(usize) -> f64>(&self, n: usize, f: F) -> Vec<f64> {
        (0..n).map(f).collect()
    }
}

/// Assembled operators of one problem.
#[derive(Clone, Debug)]
pub struct BlockSystem {
    pub kind: ProblemKind,
    pub mass: CsrMatrix,
    pub damping: CsrMatrix,
    pub stiffness: CsrMatrix,
    /// Antisymmetric part of `damping` (coupling terms), if any.
    pub skew: Option<CsrMatrix>,
    pub loads: Vec<LoadTerm>,
    pub layout: BlockLayout,
    /// Global unknowns of every element, for block solvers.
    pub element_blocks: Vec<Vec<usize>>,
    /// Displacement space (`u`, and `w` for poro kinds).
    pub space: DgSpace,
    pub acoustic_space: Option<DgSpace>,
    pub coeffs: Coefficients,
    pub penalties: Penalties,
}

/// Shifts `m` into a `rows x cols` matrix at `(r, c)`.
fn place(tb: &mut TripletBuilder, m: &CsrMatrix, r: usize, c: usize, alpha: f64) {
    tb.add_matrix(m, r, c, alpha);
}

/// Assembles the operators of a problem of the given kind on `mesh` with uniform degree `p`.
pub fn build_block_system(
    kind: ProblemKind,
    mesh: Arc<PolyMesh>,
    p: usize,
    materials: &MaterialTable,
    penalties: Penalties,
) -> Result<BlockSystem> {
    penalties.validate()?;
    let coeffs = Coefficients::from_materials(&mesh, materials)?;
    let ne = mesh.n_elements();
    let count = |ph: Physics| (0..ne).filter(|&k| mesh.subdomain(k).physics == ph).count();
    let (ne_e, ne_p, ne_a) = (count(Physics::Elastic), count(Physics::Poroelastic), count(Physics::Acoustic));
    let need = |ok: bool, what: &str| {
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("{} problem: {what} (mesh has {ne_e} elastic, {ne_p} poro, {ne_a} acoustic elements)", kind.name())))
        }
    };
    match kind {
        ProblemKind::Elastic => need(ne_e == ne, "every element must be elastic")?,
        ProblemKind::Poro => need(ne_p == ne, "every element must be poro-elastic")?,
        ProblemKind::Coupled => need(ne_e == 0 && ne_p > 0 && ne_a > 0, "needs poro-elastic and acoustic elements only")?,
    }

    let disp_physics = if kind == ProblemKind::Elastic { Physics::Elastic } else { Physics::Poroelastic };
    let space = DgSpace::on_physics(mesh.clone(), disp_physics, p, 2)?;
    let n = space.n_dofs();
    let sig = penalties.sigma0;

    let ae = operators::assemble_elastic(&space, &coeffs.lambda, &coeffs.mu, sig)?;
    let m_rho = operators::assemble_mass(&space, &coeffs.rho)?;

    if kind == ProblemKind::Elastic {
        let d = operators::assemble_mass(&space, &coeffs.map(ne, |k| 2.0 * coeffs.rho[k] * coeffs.zeta[k]))?;
        let m_z2 = operators::assemble_mass(&space, &coeffs.map(ne, |k| coeffs.rho[k] * coeffs.zeta[k].powi(2)))?;
        let a = ae.add(1.0, &m_z2, 1.0)?;
        let element_blocks = space.elements().iter().map(|&k| space.dofs(k).collect()).collect();
        return Ok(BlockSystem {
            kind,
            mass: m_rho,
            damping: d,
            stiffness: a,
            skew: None,
            loads: Vec::new(),
            layout: BlockLayout { u: 0..n, w: None, phi: None, n },
            element_blocks,
            space,
            acoustic_space: None,
            coeffs,
            penalties,
        });
    }

    let coupled = kind == ProblemKind::Coupled;
    let m_rf = operators::assemble_mass(&space, &coeffs.rho_f)?;
    let m_rw = operators::assemble_mass(&space, &coeffs.rho_w)?;
    let b = if coupled {
        operators::assemble_robin(&space, &coeffs.eta_k)?
    } else {
        operators::assemble_mass(&space, &coeffs.eta_k)?
    };
    let ap = operators::assemble_divdiv(&space, &coeffs.m, Some(&coeffs.beta), penalties.m0, coupled)?;

    let (aspace, na) = if coupled {
        let s = DgSpace::on_physics(mesh.clone(), Physics::Acoustic, p, 1)?;
        let na = s.n_dofs();
        (Some(s), na)
    } else {
        (None, 0)
    };
    let total = 2 * n + na;

    let mut tm = TripletBuilder::new(total, total);
    place(&mut tm, &m_rho, 0, 0, 1.0);
    place(&mut tm, &m_rf, 0, n, 1.0);
    place(&mut tm, &m_rf, n, 0, 1.0);
    place(&mut tm, &m_rw, n, n, 1.0);

    let mut ta = TripletBuilder::new(total, total);
    place(&mut ta, &ae, 0, 0, 1.0);
    place(&mut ta, &ap, 0, 0, 1.0);

    let mut td = TripletBuilder::new(total, total);
    place(&mut td, &b, n, n, 1.0);

    let mut skew = None;
    if let Some(s) = &aspace {
        let ma = operators::assemble_mass(s, &coeffs.map(ne, |k| coeffs.rho_a[k] / coeffs.c[k].powi(2)))?;
        let aa = operators::assemble_acoustic(s, &coeffs.rho_a, penalties.rho0)?;
        let c = operators::assemble_coupling(&space, s, &coeffs.rho_a)?;
        let ct = c.transpose();
        place(&mut tm, &ma, 2 * n, 2 * n, 1.0);
        place(&mut ta, &aa, 2 * n, 2 * n, 1.0);
        let mut ts = TripletBuilder::new(total, total);
        for (r, cc, m, alpha) in [(0, 2 * n, &c, 1.0), (n, 2 * n, &c, 1.0), (2 * n, 0, &ct, -1.0), (2 * n, n, &ct, -1.0)] {
            place(&mut ts, m, r, cc, alpha);
            place(&mut td, m, r, cc, alpha);
        }
        skew = Some(ts.build());
    }

    let mut element_blocks = Vec::with_capacity(ne);
    for k in 0..ne {
        if space.contains(k) {
            let mut d: Vec<usize> = space.dofs(k).collect();
            d.extend(space.dofs(k).map(|i| i + n));
            element_blocks.push(d);
        } else if let Some(s) = &aspace {
            element_blocks.push(s.dofs(k).map(|i| i + 2 * n).collect());
        }
    }

    Ok(BlockSystem {
        kind,
        mass: tm.build(),
        damping: td.build(),
        stiffness: ta.build(),
        skew,
        loads: Vec::new(),
        layout: BlockLayout { u: 0..n, w: Some(n..2 * n), phi: coupled.then_some(2 * n..total), n: total },
        element_blocks,
        space,
        acoustic_space: aspace,
        coeffs,
        penalties,
    })
}

/// Spatial data for each field; missing fields are zero.
pub type VectorField<'a> = Option<&'a dyn Fn(Point) -> [f64; 2]>;
pub type ScalarField<'a> = Option<&'a dyn Fn(Point) -> f64>;

impl BlockSystem {
    pub fn n_dofs(&self) -> usize {
        self.layout.n
    }

    pub fn add_load(&mut self, term: LoadTerm) -> Result<()> {
        if term.vector.len() != self.n_dofs() {
            return Err(Error::DimensionMismatch { expected: self.n_dofs(), got: term.vector.len() });
        }
        self.loads.push(term);
        Ok(())
    }

    /// `S(t)`.
    pub fn load_at(&self, t: f64) -> Vec<f64> {
        let mut s = vec![0.0; self.n_dofs()];
        self.load_into(t, &mut s);
        s
    }

    pub fn load_into(&self, t: f64, s: &mut [f64]) {
        s.iter_mut().for_each(|v| *v = 0.0);
        for term in &self.loads {
            let c = (term.coef)(t);
            if c != 0.0 {
                for (a, b) in s.iter_mut().zip(&term.vector) {
                    *a += c * b;
                }
            }
        }
    }

    /// Discrete energy `½ (Zᵀ M Z + Xᵀ A X)`.
    pub fn energy(&self, x: &[f64], z: &[f64]) -> f64 {
        0.5 * (self.mass.quad_form(z) + self.stiffness.quad_form(x))
    }

    /// Element-local `L²` projection of the fields into one global vector.
    pub fn project(&self, u: VectorField, w: VectorField, phi: ScalarField) -> Result<Vec<f64>> {
        let mut x = vec![0.0; self.n_dofs()];
        if let Some(f) = u {
            let v = self.space.l2_project(f)?;
            x[self.layout.u.clone()].copy_from_slice(&v);
        }
        if let (Some(f), Some(r)) = (w, &self.layout.w) {
            let v = self.space.l2_project(f)?;
            x[r.clone()].copy_from_slice(&v);
        }
        if let (Some(f), Some(r), Some(s)) = (phi, &self.layout.phi, &self.acoustic_space) {
            let v = s.l2_project(|p| [f(p), 0.0])?;
            x[r.clone()].copy_from_slice(&v);
        }
        Ok(x)
    }

    /// Body-force load `(f, v) + (g, z) + (h, ψ)`.
    pub fn body_load(&self, f: VectorField, g: VectorField, h: ScalarField) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n_dofs()];
        if let Some(f) = f {
            let v = operators::body_load(&self.space, f)?;
            out[self.layout.u.clone()].copy_from_slice(&v);
        }
        if let (Some(g), Some(r)) = (g, &self.layout.w) {
            let v = operators::body_load(&self.space, g)?;
            out[r.clone()].copy_from_slice(&v);
        }
        if let (Some(h), Some(r), Some(s)) = (h, &self.layout.phi, &self.acoustic_space) {
            let v = operators::body_load(s, |p| [h(p), 0.0])?;
            out[r.clone()].copy_from_slice(&v);
        }
        Ok(out)
    }

    /// Nitsche load vector of Dirichlet data for each field.
    pub fn dirichlet_load(&self, gu: VectorField, gw: VectorField, gphi: ScalarField) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n_dofs()];
        let c = &self.coeffs;
        let zero2 = |_: Point| [0.0, 0.0];
        let gu_f: &dyn Fn(Point) -> [f64; 2] = gu.unwrap_or(&zero2);
        if gu.is_some() {
            let op = FaceOp::Elastic { lambda: &c.lambda, mu: &c.mu };
            let v = operators::dirichlet_load(&self.space, op, self.penalties.sigma0, |_, x, _| gu_f(x))?;
            out[self.layout.u.clone()].copy_from_slice(&v);
        }
        if self.layout.w.is_some() && (gu.is_some() || gw.is_some()) {
            let gw_f: &dyn Fn(Point) -> [f64; 2] = gw.unwrap_or(&zero2);
            let op = FaceOp::DivDiv { m: &c.m, beta: Some(&c.beta) };
            let v = operators::dirichlet_load(&self.space, op, self.penalties.m0, |k, x, n| {
                let (a, b) = (gu_f(x), gw_f(x));
                [(c.beta[k] * a[0] + b[0]) * n[0] + (c.beta[k] * a[1] + b[1]) * n[1], 0.0]
            })?;
            for (o, x) in out[..v.len()].iter_mut().zip(&v) {
                *o += x;
            }
        }
        if let (Some(g), Some(r), Some(s)) = (gphi, &self.layout.phi, &self.acoustic_space) {
            let op = FaceOp::Acoustic { rho: &c.rho_a };
            let v = operators::dirichlet_load(s, op, self.penalties.rho0, |_, x, _| [g(x), 0.0])?;
            out[r.clone()].copy_from_slice(&v);
        }
        Ok(out)
    }
}
