//! Newmark-β and leap-frog time marching of `M X'' + D X' + A X = S(t)`.
//!
//! The schemes are written in acceleration form: with the predictors
//! `Xp = X + Δt Z + Δt² (1/2 - β) L` and `Zp = Z + Δt (1 - γ) L`, the new
//! acceleration solves `K L⁺ = S⁺ - D Zp - A Xp` with the constant matrix
//! `K = M + γ Δt D + β Δt² A`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::forms::BlockSystem;
use crate::linalg::{norm2, CsrMatrix, LinearSolver, SolveConfig, SolveStats};
use crate::{Error, Result};

/// The abstract second-order system.
pub trait SecondOrderSystem {
    fn mass(&self) -> &CsrMatrix;
    fn damping(&self) -> &CsrMatrix;
    fn stiffness(&self) -> &CsrMatrix;
    fn load_into(&self, t: f64, out: &mut [f64]);
    /// Unknowns of each element, for block-local solves.
    fn element_blocks(&self) -> &[Vec<usize>];

    fn n_dofs(&self) -> usize {
        self.mass().nrows()
    }
}

impl SecondOrderSystem for BlockSystem {
    fn mass(&self) -> &CsrMatrix {
        &self.mass
    }
    fn damping(&self) -> &CsrMatrix {
        &self.damping
    }
    fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }
    fn load_into(&self, t: f64, out: &mut [f64]) {
        BlockSystem::load_into(self, t, out)
    }
    fn element_blocks(&self) -> &[Vec<usize>] {
        &self.element_blocks
    }
}

/// Plain matrices with a load callback.
pub struct MatrixSystem {
    pub mass: CsrMatrix,
    pub damping: CsrMatrix,
    pub stiffness: CsrMatrix,
    /// Writes `S(t)` into the slice, overwriting it.
    pub load: Box<dyn Fn(f64, &mut [f64]) + Send + Sync>,
    pub blocks: Vec<Vec<usize>>,
}

impl MatrixSystem {
    /// System without loads; every unknown is its own block.
    pub fn unforced(mass: CsrMatrix, damping: CsrMatrix, stiffness: CsrMatrix) -> Self {
        let blocks = (0..mass.nrows()).map(|i| vec![i]).collect();
        Self { mass, damping, stiffness, load: Box::new(|_, s| s.iter_mut().for_each(|v| *v = 0.0)), blocks }
    }
}

impl SecondOrderSystem for MatrixSystem {
    fn mass(&self) -> &CsrMatrix {
        &self.mass
    }
    fn damping(&self) -> &CsrMatrix {
        &self.damping
    }
    fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }
    fn load_into(&self, t: f64, out: &mut [f64]) {
        (self.load)(t, out)
    }
    fn element_blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }
}

/// Time scheme selector as written in configuration files.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "lowercase")]
pub enum Integrator {
    Newmark { beta: f64, gamma: f64 },
    Leapfrog,
}

impl Default for Integrator {
    fn default() -> Self {
        Integrator::Newmark { beta: 0.25, gamma: 0.5 }
    }
}

impl Integrator {
    pub fn params(self, dt: f64) -> Result<NewmarkParams> {
        match self {
            Integrator::Newmark { beta, gamma } => NewmarkParams::new(beta, gamma, dt),
            Integrator::Leapfrog => NewmarkParams::new(0.0, 0.5, dt),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewmarkParams {
    pub beta: f64,
    pub gamma: f64,
    pub dt: f64,
}

impl NewmarkParams {
    pub fn new(beta: f64, gamma: f64, dt: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&beta) || !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidInput(format!("Newmark parameters beta={beta}, gamma={gamma} out of range")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidInput(format!("time step {dt} must be positive")));
        }
        Ok(Self { beta, gamma, dt })
    }

    /// The unconditionally stable average-acceleration scheme `(1/4, 1/2)`.
    pub fn average_acceleration(dt: f64) -> Result<Self> {
        Self::new(0.25, 0.5, dt)
    }

    pub fn leapfrog(dt: f64) -> Result<Self> {
        Self::new(0.0, 0.5, dt)
    }

    pub fn is_explicit(&self) -> bool {
        self.beta == 0.0
    }
}

/// Displacement `x`, velocity `z` and acceleration `l` at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub t: f64,
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub l: Vec<f64>,
}

impl State {
    pub fn zeros(n: usize, t: f64) -> Self {
        Self { t, x: vec![0.0; n], z: vec![0.0; n], l: vec![0.0; n] }
    }
}

fn residual_rhs<S: SecondOrderSystem + ?Sized>(sys: &S, t: f64, x: &[f64], z: &[f64], out: &mut [f64]) -> Result<()> {
    sys.load_into(t, out);
    sys.damping().spmv_add(-1.0, z, out)?;
    sys.stiffness().spmv_add(-1.0, x, out)?;
    Ok(())
}

/// Solves `M L0 = S(t0) - D Z0 - A X0`.
pub fn initial_acceleration<S: SecondOrderSystem + ?Sized>(sys: &S, x0: &[f64], z0: &[f64], t0: f64, cfg: SolveConfig) -> Result<Vec<f64>> {
    let n = sys.n_dofs();
    for v in [x0, z0] {
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: v.len() });
        }
    }
    let mut rhs = vec![0.0; n];
    residual_rhs(sys, t0, x0, z0, &mut rhs)?;
    let m = LinearSolver::new(sys.mass().clone(), sys.element_blocks(), cfg, "mass matrix")?;
    Ok(m.solve(&rhs, None)?.0)
}

/// Builds the initial state including the consistent acceleration.
pub fn initial_state<S: SecondOrderSystem + ?Sized>(sys: &S, x0: Vec<f64>, z0: Vec<f64>, t0: f64, cfg: SolveConfig) -> Result<State> {
    let l = initial_acceleration(sys, &x0, &z0, t0, cfg)?;
    Ok(State { t: t0, x: x0, z: z0, l })
}

/// A prepared time stepper with the factorised effective matrix.
pub struct Stepper<'a, S: SecondOrderSystem + ?Sized> {
    sys: &'a S,
    params: NewmarkParams,
    solver: LinearSolver,
    rhs: Vec<f64>,
    xp: Vec<f64>,
    zp: Vec<f64>,
}

impl<'a, S: SecondOrderSystem + ?Sized> Stepper<'a, S> {
    pub fn new(sys: &'a S, params: NewmarkParams, cfg: SolveConfig) -> Result<Self> {
        let (b, g, dt) = (params.beta, params.gamma, params.dt);
        let k = sys.mass().add(1.0, sys.damping(), g * dt)?.add(1.0, sys.stiffness(), b * dt * dt)?;
        let solver = LinearSolver::new(k, sys.element_blocks(), cfg, "effective matrix M + γΔt D + βΔt² A")?;
        if params.is_explicit() && !solver.is_block_exact() {
            return Err(Error::InvalidInput(
                "leap-frog needs M + Δt/2 D to be block-diagonal over elements; this system couples elements through D, use Newmark".into(),
            ));
        }
        let n = sys.n_dofs();
        Ok(Self { sys, params, solver, rhs: vec![0.0; n], xp: vec![0.0; n], zp: vec![0.0; n] })
    }

    pub fn params(&self) -> NewmarkParams {
        self.params
    }

    /// Advances `state` to `t_new` (normally `state.t + Δt`).
    pub fn step_to(&mut self, state: &mut State, t_new: f64) -> Result<SolveStats> {
        let NewmarkParams { beta, gamma, dt } = self.params;
        let n = state.x.len();
        let (c1, c2) = (dt * dt * (0.5 - beta), dt * (1.0 - gamma));
        for i in 0..n {
            self.xp[i] = state.x[i] + dt * state.z[i] + c1 * state.l[i];
            self.zp[i] = state.z[i] + c2 * state.l[i];
        }
        residual_rhs(self.sys, t_new, &self.xp, &self.zp, &mut self.rhs)?;
        let (l, stats) = self.solver.solve(&self.rhs, Some(&state.l))?;
        let (d1, d2) = (beta * dt * dt, gamma * dt);
        for i in 0..n {
            state.x[i] = self.xp[i] + d1 * l[i];
            state.z[i] = self.zp[i] + d2 * l[i];
        }
        state.l = l;
        state.t = t_new;
        Ok(stats)
    }

    pub fn step(&mut self, state: &mut State) -> Result<SolveStats> {
        let t = state.t + self.params.dt;
        self.step_to(state, t)
    }
}

/// One Newmark step (the effective matrix is factorised for this call only).
pub fn newmark_step<S: SecondOrderSystem + ?Sized>(sys: &S, state: &State, params: NewmarkParams, cfg: SolveConfig) -> Result<State> {
    let mut s = state.clone();
    Stepper::new(sys, params, cfg)?.step(&mut s)?;
    Ok(s)
}

/// One leap-frog step.
pub fn leapfrog_step<S: SecondOrderSystem + ?Sized>(sys: &S, state: &State, dt: f64, cfg: SolveConfig) -> Result<State> {
    newmark_step(sys, state, NewmarkParams::leapfrog(dt)?, cfg)
}

/// Summary of a completed integration.
#[derive(Clone, Debug, Default)]
pub struct RunStats {
    pub steps: usize,
    pub max_iterations: usize,
    pub max_rel_residual: f64,
    pub wall_s: f64,
}

/// Number of steps `N` with `N Δt = T` up to rounding.
pub fn step_count(t_end: f64, t0: f64, dt: f64) -> Result<usize> {
    let span = t_end - t0;
    if span < 0.0 {
        return Err(Error::InvalidInput(format!("final time {t_end} precedes start {t0}")));
    }
    let n = (span / dt).round();
    if (n * dt - span).abs() > 1e-9 * span.max(dt) {
        return Err(Error::InvalidInput(format!("time span {span} is not a multiple of the step {dt}")));
    }
    Ok(n as usize)
}

/// Marches `state` to `t_end`. The observer sees the initial state (step 0)
/// and the state after every step.
pub fn integrate<S, O>(sys: &S, mut state: State, t_end: f64, params: NewmarkParams, cfg: SolveConfig, mut observer: O) -> Result<(State, RunStats)>
where
    S: SecondOrderSystem + ?Sized,
    O: FnMut(usize, &State) -> Result<()>,
{
    let start = Instant::now();
    let nsteps = step_count(t_end, state.t, params.dt)?;
    let t0 = state.t;
    observer(0, &state)?;
    let mut stats = RunStats::default();
    if nsteps == 0 {
        return Ok((state, stats));
    }
    let mut stepper = Stepper::new(sys, params, cfg)?;
    for k in 1..=nsteps {
        let st = stepper.step_to(&mut state, t0 + k as f64 * params.dt)?;
        if !norm2(&state.x).is_finite() || !norm2(&state.z).is_finite() {
            return Err(Error::NonFinite { step: k });
        }
        stats.steps = k;
        stats.max_iterations = stats.max_iterations.max(st.iterations);
        stats.max_rel_residual = stats.max_rel_residual.max(st.rel_residual);
        observer(k, &state)?;
    }
    stats.wall_s = start.elapsed().as_secs_f64();
    Ok((state, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::TripletBuilder;

    fn scalar(m: f64, d: f64, a: f64) -> MatrixSystem {
        let s = |v: f64| CsrMatrix::identity(1).scaled(v);
        MatrixSystem::unforced(s(m), s(d), s(a))
    }

    #[test]
    fn initial_acceleration_examples() {
        let sys = scalar(2.0, 0.0, 8.0);
        let l0 = initial_acceleration(&sys, &[1.0], &[0.0], 0.0, SolveConfig::default()).unwrap();
        assert!((l0[0] + 4.0).abs() < 1e-14);
        assert_eq!(initial_acceleration(&sys, &[0.0], &[0.0], 0.0, SolveConfig::default()).unwrap(), vec![0.0]);
    }

    #[test]
    fn scalar_closed_forms() {
        let sys = scalar(1.0, 0.0, 1.0);
        let s0 = initial_state(&sys, vec![1.0], vec![0.0], 0.0, SolveConfig::default()).unwrap();
        let dt: f64 = 0.1;
        let nm = newmark_step(&sys, &s0, NewmarkParams::average_acceleration(dt).unwrap(), SolveConfig::default()).unwrap();
        let exact = (1.0 - dt * dt / 4.0) / (1.0 + dt * dt / 4.0);
        assert!((nm.x[0] - exact).abs() < 1e-14);
        assert!((nm.x[0] - 0.995012).abs() < 1e-6);
        let lf = leapfrog_step(&sys, &s0, dt, SolveConfig::default()).unwrap();
        assert!((lf.x[0] - 0.995).abs() < 1e-15);
        let zero = newmark_step(&sys, &State::zeros(1, 0.0), NewmarkParams::average_acceleration(dt).unwrap(), SolveConfig::default()).unwrap();
        assert_eq!(zero.x, vec![0.0]);
    }

    #[test]
    fn linear_in_time_solution_is_exact() {
        // X(t) = t X1 with S(t) = D X1 + A t X1
        let mut tb = TripletBuilder::new(2, 2);
        tb.add(0, 0, 2.0);
        tb.add(1, 1, 3.0);
        tb.add(0, 1, 0.5);
        tb.add(1, 0, 0.5);
        let m = tb.build();
        let d = CsrMatrix::identity(2).scaled(0.3);
        let a = m.scaled(4.0);
        let x1 = [1.0, -2.0];
        let dx1 = d.spmv(&x1).unwrap();
        let ax1 = a.spmv(&x1).unwrap();
        let sys = MatrixSystem {
            mass: m,
            damping: d,
            stiffness: a,
            load: Box::new(move |t, s| {
                for i in 0..2 {
                    s[i] = dx1[i] + t * ax1[i];
                }
            }),
            blocks: vec![vec![0, 1]],
        };
        let s0 = initial_state(&sys, vec![0.0, 0.0], x1.to_vec(), 0.0, SolveConfig::default()).unwrap();
        let p = NewmarkParams::average_acceleration(0.05).unwrap();
        let (fin, _) = integrate(&sys, s0, 1.0, p, SolveConfig::default(), |_, st| {
            for i in 0..2 {
                assert!((st.x[i] - st.t * x1[i]).abs() < 1e-12);
            }
            Ok(())
        })
        .unwrap();
        assert!((fin.t - 1.0).abs() < 1e-15);
    }

    #[test]
    fn undamped_energy_is_conserved() {
        let mut tb = TripletBuilder::new(3, 3);
        for i in 0..3 {
            tb.add(i, i, 2.0);
            if i > 0 {
                tb.add(i, i - 1, -1.0);
                tb.add(i - 1, i, -1.0);
            }
        }
        let a = tb.build();
        let m = CsrMatrix::identity(3);
        let sys = MatrixSystem::unforced(m.clone(), CsrMatrix::zeros(3, 3), a.clone());
        let s0 = initial_state(&sys, vec![1.0, 0.0, -0.5], vec![0.0, 1.0, 0.0], 0.0, SolveConfig::default()).unwrap();
        let e = |s: &State| 0.5 * (m.quad_form(&s.z) + a.quad_form(&s.x));
        let e0 = e(&s0);
        let p = NewmarkParams::average_acceleration(0.3).unwrap();
        integrate(&sys, s0, 300.0, p, SolveConfig::default(), |_, s| {
            assert!((e(s) - e0).abs() < 1e-12 * e0);
            Ok(())
        })
        .unwrap();
    }

    #[test]
    fn zero_span_returns_initial_state() {
        let sys = scalar(1.0, 0.0, 1.0);
        let s0 = initial_state(&sys, vec![1.0], vec![0.0], 0.0, SolveConfig::default()).unwrap();
        let (s, st) = integrate(&sys, s0.clone(), 0.0, NewmarkParams::leapfrog(0.1).unwrap(), SolveConfig::default(), |_, _| Ok(())).unwrap();
        assert_eq!(s, s0);
        assert_eq!(st.steps, 0);
        assert!(step_count(1.0, 0.0, 0.3).is_err());
        assert_eq!(step_count(1.0, 0.0, 1e-4).unwrap(), 10000);
    }

    #[test]
    fn leapfrog_rejects_coupling_damping() {
        let mut tb = TripletBuilder::new(2, 2);
        tb.add(0, 1, 1.0);
        tb.add(1, 0, -1.0);
        let sys = MatrixSystem::unforced(CsrMatrix::identity(2), tb.build(), CsrMatrix::identity(2));
        let r = Stepper::new(&sys, NewmarkParams::leapfrog(0.1).unwrap(), SolveConfig::default());
        assert!(matches!(r, Err(Error::InvalidInput(_))));
        assert!(Stepper::new(&sys, NewmarkParams::average_acceleration(0.1).unwrap(), SolveConfig::default()).is_ok());
    }

    #[test]
    fn instability_is_reported_as_non_finite() {
        let sys = scalar(1.0, 0.0, 1e6);
        let s0 = initial_state(&sys, vec![1.0], vec![0.0], 0.0, SolveConfig::default()).unwrap();
        let r = integrate(&sys, s0, 100.0, NewmarkParams::leapfrog(0.1).unwrap(), SolveConfig::default(), |_, _| Ok(()));
        assert!(matches!(r, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn parameter_ranges() {
        assert!(NewmarkParams::new(0.6, 0.5, 0.1).is_err());
        assert!(NewmarkParams::new(0.25, 0.5, 0.0).is_err());
        assert_eq!(Integrator::Leapfrog.params(0.1).unwrap(), NewmarkParams::leapfrog(0.1).unwrap());
    }
}
