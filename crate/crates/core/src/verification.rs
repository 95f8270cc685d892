//! Manufactured-solution runs: meshes, single cases, h/p suites and a
//! time-step study.

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::analysis::{compute_errors, EnergyBreakdown, EnergyMonitor, ErrorReport};
use crate::forms::{build_block_system, BlockSystem, Penalties, ProblemKind};
use crate::linalg::SolveConfig;
use crate::materials::MaterialTable;
use crate::mesh::{generate_voronoi_mesh, BoundaryKind, Physics, PolyMesh, Subdomain};
use crate::sources::manufactured::Manufactured;
use crate::timeint::{initial_state, integrate, Integrator, NewmarkParams, RunStats, State};
use crate::{Error, Result};

/// One manufactured-solution run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseSpec {
    pub kind: ProblemKind,
    pub p: usize,
    pub dt: f64,
    pub t_end: f64,
    pub integrator: Integrator,
    pub penalties: Penalties,
    /// Interface permeability of the coupled case.
    pub tau: f64,
    /// Steps between energy-error samples (the damping integrals use the trapezoid rule).
    pub cadence: usize,
    pub solver: SolveConfig,
}

impl Default for CaseSpec {
    fn default() -> Self {
        Self::standard(ProblemKind::Elastic)
    }
}

impl CaseSpec {
    /// Settings of the published verification runs.
    pub fn standard(kind: ProblemKind) -> Self {
        let (integrator, t_end) = match kind {
            ProblemKind::Elastic => (Integrator::Leapfrog, 1.0),
            _ => (Integrator::default(), 0.25),
        };
        Self {
            kind,
            p: 2,
            dt: 1e-4,
            t_end,
            integrator,
            penalties: Penalties::default(),
            tau: 1.0,
            cadence: 10,
            solver: SolveConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.penalties.validate()?;
        self.solver.validate()?;
        self.integrator.params(self.dt)?;
        if self.p == 0 {
            return Err(Error::Config("polynomial degree must be at least 1".into()));
        }
        if self.cadence == 0 {
            return Err(Error::Config("cadence must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::Config(format!("tau {} outside [0, 1]", self.tau)));
        }
        Ok(())
    }
}

/// Clipped Voronoi mesh of the manufactured domain with `n_elements` cells.
///
/// The coupled mesh is a Voronoi mesh of the poro-elastic half mirrored
/// across `x = 0`, so the interface is made of whole faces.
pub fn manufactured_mesh(kind: ProblemKind, n_elements: usize, seed: u64, lloyd_iters: usize, tau: f64) -> Result<PolyMesh> {
    let case = Manufactured::for_kind(kind);
    let (rect, _) = case.domains();
    let mut mesh = match kind {
        ProblemKind::Coupled => generate_voronoi_mesh(&rect, n_elements.div_ceil(2).max(1), lloyd_iters, seed)?.reflected_union(0, 0.0)?,
        _ => generate_voronoi_mesh(&rect, n_elements, lloyd_iters, seed)?,
    };
    mesh.assign_subdomains(|c| match kind {
        ProblemKind::Elastic => Subdomain::new(Physics::Elastic, 0),
        ProblemKind::Poro => Subdomain::new(Physics::Poroelastic, 0),
        ProblemKind::Coupled if c[0] < 0.0 => Subdomain::new(Physics::Poroelastic, 0),
        ProblemKind::Coupled => Subdomain::new(Physics::Acoustic, 0),
    });
    mesh.classify_boundary(|_| Some(BoundaryKind::Dirichlet), |_| tau)?;
    Ok(mesh)
}

/// Searches the cell count whose mesh size is closest to `h_target`.
///
/// Voronoi meshes have `h ≈ c / sqrt(n)`; a few counts around the estimate
/// are tried and the closest one is returned with its count.
pub fn mesh_for_h(kind: ProblemKind, h_target: f64, seed: u64, lloyd_iters: usize, tau: f64) -> Result<(PolyMesh, usize)> {
    if !(h_target > 0.0) {
        return Err(Error::InvalidInput(format!("target mesh size {h_target} must be positive")));
    }
    let area = match kind {
        ProblemKind::Coupled => 2.0,
        _ => 1.0,
    };
    let mut n = ((1.6 / h_target).powi(2) * area).round().max(2.0) as usize;
    let mut best: Option<(f64, PolyMesh, usize)> = None;
    for _ in 0..8 {
        let m = manufactured_mesh(kind, n, seed, lloyd_iters, tau)?;
        let h = m.h();
        let gap = (h - h_target).abs();
        if best.as_ref().map(|b| gap < b.0).unwrap_or(true) {
            best = Some((gap, m, n));
        }
        if gap <= 0.02 * h_target {
            break;
        }
        let next = ((n as f64) * (h / h_target).powi(2)).round().max(2.0) as usize;
        n = if next == n { if h > h_target { n + 1 } else { n.saturating_sub(1).max(2) } } else { next };
    }
    let (gap, mesh, n) = best.unwrap();
    if gap > 0.05 * h_target {
        log::warn!("mesh size {:.4} used for target {h_target:.4}", mesh.h());
    }
    Ok((mesh, n))
}

pub fn manufactured_materials(case: &Manufactured) -> MaterialTable {
    let mut t = MaterialTable::default();
    t.elastic.insert(0, case.elastic);
    t.poro.insert(0, case.poro);
    t.acoustic.insert(0, case.acoustic);
    t
}

/// Block system with the manufactured loads attached.
pub fn manufactured_system(spec: &CaseSpec, mesh: Arc<PolyMesh>) -> Result<(BlockSystem, Manufactured)> {
    spec.validate()?;
    let case = Manufactured::for_kind(spec.kind);
    let mut sys = build_block_system(spec.kind, mesh, spec.p, &manufactured_materials(&case), spec.penalties)?;
    for l in case.loads(&sys)? {
        sys.add_load(l)?;
    }
    Ok((sys, case))
}

/// Outcome of one manufactured run.
#[derive(Clone, Debug)]
pub struct CaseOutcome {
    pub report: ErrorReport,
    pub final_state: State,
    pub stats: RunStats,
    /// Error breakdown at the sampled times.
    pub error_trace: Vec<EnergyBreakdown>,
}

/// Integrates the manufactured case from `t = 0` and measures the errors at `t_end`.
pub fn run_case(spec: &CaseSpec, mesh: Arc<PolyMesh>, run_id: &str) -> Result<CaseOutcome> {
    let start = Instant::now();
    let (sys, case) = manufactured_system(spec, mesh)?;
    let (x0, z0) = case.initial_state(&sys, 0.0)?;
    let s0 = initial_state(&sys, x0, z0, 0.0, spec.solver)?;
    let params: NewmarkParams = spec.integrator.params(spec.dt)?;
    let nsteps = crate::timeint::step_count(spec.t_end, 0.0, spec.dt)?;
    // the error integrals only exist for the Biot cases
    let sample = spec.kind != ProblemKind::Elastic;
    let mut mon = EnergyMonitor::new(&sys, Some(&case))?;
    let mut trace = Vec::new();
    let (fin, stats) = integrate(&sys, s0, spec.t_end, params, spec.solver, |k, s| {
        if k == nsteps || (sample && k % spec.cadence == 0) {
            trace.push(mon.observe(s)?);
        }
        Ok(())
    })?;
    if trace.last().map(|b| b.t) != Some(fin.t) {
        trace.push(mon.observe(&fin)?);
    }
    let last = *trace.last().unwrap();
    let report = compute_errors(&mon, &last, run_id, start.elapsed().as_secs_f64())?;
    log::info!(
        "{run_id}: {} p={} h={:.4} dofs={} energy error {:.4e} ({:.1}s)",
        spec.kind.name(),
        spec.p,
        report.h,
        report.dofs,
        report.energy_error,
        report.wall_s
    );
    Ok(CaseOutcome { report, final_state: fin, stats, error_trace: trace })
}

/// A sequence of meshes, each identified by its target size or cell count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeshSeries {
    TargetH(Vec<f64>),
    Cells(Vec<usize>),
}

/// h-convergence table: every degree on every mesh.
pub fn h_suite(base: &CaseSpec, meshes: &MeshSeries, degrees: &[usize], seed: u64, lloyd_iters: usize) -> Result<Vec<ErrorReport>> {
    let built: Vec<PolyMesh> = match meshes {
        MeshSeries::TargetH(hs) => hs.iter().map(|&h| mesh_for_h(base.kind, h, seed, lloyd_iters, base.tau).map(|m| m.0)).collect::<Result<_>>()?,
        MeshSeries::Cells(ns) => ns.iter().map(|&n| manufactured_mesh(base.kind, n, seed, lloyd_iters, base.tau)).collect::<Result<_>>()?,
    };
    let mut out = Vec::new();
    for &p in degrees {
        for (i, m) in built.iter().enumerate() {
            let spec = CaseSpec { p, ..base.clone() };
            let id = format!("{}-h{i}-p{p}", base.kind.name());
            out.push(run_case(&spec, Arc::new(m.clone()), &id)?.report);
        }
    }
    Ok(out)
}

/// p-convergence on one fixed mesh.
pub fn p_suite(base: &CaseSpec, n_elements: usize, degrees: &[usize], seed: u64, lloyd_iters: usize) -> Result<Vec<ErrorReport>> {
    let mesh = Arc::new(manufactured_mesh(base.kind, n_elements, seed, lloyd_iters, base.tau)?);
    degrees
        .iter()
        .map(|&p| {
            let spec = CaseSpec { p, ..base.clone() };
            run_case(&spec, mesh.clone(), &format!("{}-n{n_elements}-p{p}", base.kind.name())).map(|o| o.report)
        })
        .collect()
}

/// Final-time difference `‖X_Δt(T) - X_ref(T)‖_M` for each step size against
/// a run with `dt_ref`.
pub fn dt_study(base: &CaseSpec, mesh: Arc<PolyMesh>, dts: &[f64], dt_ref: f64) -> Result<Vec<(f64, f64)>> {
    let (sys, case) = manufactured_system(base, mesh)?;
    let (x0, z0) = case.initial_state(&sys, 0.0)?;
    let s0 = initial_state(&sys, x0, z0, 0.0, base.solver)?;
    let run = |dt: f64| -> Result<Vec<f64>> {
        let params = base.integrator.params(dt)?;
        Ok(integrate(&sys, s0.clone(), base.t_end, params, base.solver, |_, _| Ok(()))?.0.x)
    };
    let xref = run(dt_ref)?;
    dts.iter()
        .map(|&dt| {
            let x = run(dt)?;
            let d: Vec<f64> = x.iter().zip(&xref).map(|(a, b)| a - b).collect();
            Ok((dt, sys.mass.quad_form(&d).sqrt()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::convergence_rates;
    use crate::mesh::FaceTag;

    #[test]
    fn meshes_are_classified() {
        for kind in [ProblemKind::Elastic, ProblemKind::Poro, ProblemKind::Coupled] {
            let m = manufactured_mesh(kind, 20, 1, 5, 1.0).unwrap();
            m.validate().unwrap();
            assert!(m.faces().iter().all(|f| f.tag != FaceTag::Untagged));
            let iface = m.faces().iter().filter(|f| f.tag.is_interface()).count();
            assert_eq!(iface > 0, kind == ProblemKind::Coupled);
        }
        let m = manufactured_mesh(ProblemKind::Coupled, 20, 1, 5, 0.0).unwrap();
        assert!(m.faces().iter().any(|f| f.tag == FaceTag::InterfaceSealed));
        assert!((m.total_area() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn mesh_search_hits_target() {
        let (m, n) = mesh_for_h(ProblemKind::Elastic, 0.3, 2, 10, 1.0).unwrap();
        assert!((m.h() - 0.3).abs() < 0.05 * 0.3, "h={} n={n}", m.h());
    }

    #[test]
    fn short_runs_converge_in_h() {
        for kind in [ProblemKind::Elastic, ProblemKind::Poro, ProblemKind::Coupled] {
            let spec = CaseSpec { p: 1, dt: 1e-3, t_end: 0.02, integrator: Integrator::default(), ..CaseSpec::standard(kind) };
            let mut errs = Vec::new();
            let mut hs = Vec::new();
            let counts = if kind == ProblemKind::Coupled { [48, 192] } else { [12, 48] };
            for n in counts {
                let m = Arc::new(manufactured_mesh(kind, n, 4, 10, 1.0).unwrap());
                let out = run_case(&spec, m, "t").unwrap();
                assert!(out.report.energy_error.is_finite());
                errs.push(out.report.energy_error);
                hs.push(out.report.h);
            }
            let r = convergence_rates(&errs, &hs).unwrap().least_squares.unwrap();
            assert!(r > 0.6, "{} rate {r}", kind.name());
        }
    }

    #[test]
    fn dt_study_is_second_order() {
        let spec = CaseSpec { p: 1, t_end: 0.2, ..CaseSpec::standard(ProblemKind::Elastic) };
        let m = Arc::new(manufactured_mesh(ProblemKind::Elastic, 8, 1, 5, 1.0).unwrap());
        for integ in [Integrator::default(), Integrator::Leapfrog] {
            let s = CaseSpec { integrator: integ, ..spec.clone() };
            let r = dt_study(&s, m.clone(), &[0.02, 0.01, 0.005], 0.0005).unwrap();
            let (e, d): (Vec<f64>, Vec<f64>) = r.iter().map(|&(d, e)| (e, d)).unzip();
            let slope = convergence_rates(&e, &d).unwrap().least_squares.unwrap();
            assert!((slope - 2.0).abs() < 0.15, "{integ:?} slope {slope}");
        }
    }

    #[test]
    fn spec_validation() {
        assert!(CaseSpec { cadence: 0, ..CaseSpec::default() }.validate().is_err());
        assert!(CaseSpec { tau: 2.0, ..CaseSpec::default() }.validate().is_err());
        assert!(CaseSpec { p: 0, ..CaseSpec::default() }.validate().is_err());
    }
}
