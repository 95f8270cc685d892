//! Acceptance suite. Prints one `PASS` or `FAIL` line per criterion.
//!
//! A failing criterion does not fail `cargo test` unless
//! `POLYDG_ACCEPTANCE_STRICT=1` is set. Numeric arguments select a subset,
//! e.g. `cargo test --test acceptance -- 6 7`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{anyhow, Context};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use polydg::analysis::{convergence_rates, correlation, ErrorReport, NormEvaluator};
use polydg::forms::oracle::{
    oracle_acoustic, oracle_coupling, oracle_divdiv, oracle_elastic, oracle_mass, oracle_robin, rel_diff, small_meshes, tag_mixed,
};
use polydg::forms::{
    assemble_acoustic, assemble_coupling, assemble_divdiv, assemble_elastic, assemble_mass, assemble_robin, build_block_system, BlockSystem,
    Penalties, ProblemKind,
};
use polydg::fespace::DgSpace;
use polydg::linalg::{CsrMatrix, SolveConfig};
use polydg::materials::{ElasticMaterial, MaterialTable};
use polydg::mesh::{generate_voronoi_mesh, structured_quads, BoundaryKind, Physics, PolyMesh, Rect, Subdomain};
use polydg::timeint::{initial_state, Integrator, MatrixSystem, NewmarkParams, State, Stepper};
use polydg::verification::{dt_study, h_suite, manufactured_materials, manufactured_mesh, p_suite, CaseSpec, MeshSeries};
use polydg::sources::manufactured::Manufactured;
use polydg_cli::demos::{demo_config, DEMOS};
use polydg_cli::{run_config, RunOptions};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> anyhow::Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

fn note(s: &str) {
    println!("    {s}");
}

const DEGREES: [usize; 3] = [2, 3, 4];

// Reference energy errors at the listed mesh sizes, columns p = 2, 3, 4.
const ELASTIC_REF: [(f64, [f64; 3]); 4] = [
    (0.35, [1.1078e0, 1.4101e-1, 1.8809e-2]),
    (0.26, [4.9112e-1, 4.3925e-2, 4.3186e-3]),
    (0.19, [1.8714e-1, 1.4661e-2, 1.0703e-3]),
    (0.13, [8.0198e-2, 4.7140e-3, 2.6145e-4]),
];
const PORO_REF: [(f64, [f64; 3]); 4] = [
    (0.36, [5.8052e-1, 1.0464e-1, 1.1450e-2]),
    (0.25, [3.3505e-1, 3.1326e-2, 2.9694e-3]),
    (0.18, [1.7345e-1, 1.1617e-2, 8.0532e-4]),
    (0.13, [8.9824e-2, 4.7403e-3, 2.0572e-4]),
];
const COUPLED_H: [f64; 4] = [0.35, 0.25, 0.18, 0.13];

// Log-log interpolation of a reference column at mesh size h, extrapolating
// with the end segments.
fn reference_at(table: &[(f64, [f64; 3])], col: usize, h: f64) -> f64 {
    let i = table.windows(2).position(|w| h >= w[1].0).unwrap_or(table.len() - 2);
    let (h0, e0) = (table[i].0, table[i].1[col]);
    let (h1, e1) = (table[i + 1].0, table[i + 1].1[col]);
    let s = (e0 / e1).ln() / (h0 / h1).ln();
    (e1.ln() + s * (h / h1).ln()).exp()
}

fn by_degree(reports: &[ErrorReport], p: usize) -> (Vec<f64>, Vec<f64>) {
    reports.iter().filter(|r| r.p == p).map(|r| (r.h, r.energy_error)).unzip()
}

fn h_convergence(kind: ProblemKind, hs: &[f64], table: Option<&[(f64, [f64; 3])]>, budget_s: Option<f64>) -> anyhow::Result<Outcome> {
    let start = Instant::now();
    let base = CaseSpec::standard(kind);
    let reports = h_suite(&base, &MeshSeries::TargetH(hs.to_vec()), &DEGREES, 1, 10)?;
    let wall = start.elapsed().as_secs_f64();
    let mut pass = true;
    let mut summary = Vec::new();
    for (col, &p) in DEGREES.iter().enumerate() {
        let (h, e) = by_degree(&reports, p);
        let rates = convergence_rates(&e, &h)?;
        let ls = rates.least_squares.ok_or_else(|| anyhow!("no slope for p={p}"))?;
        let last = rates.pairwise.last().copied().flatten().unwrap_or(f64::NAN);
        let ok = ls >= p as f64 - 0.3;
        pass &= ok;
        note(&format!("p={p}: least-squares slope {ls:.2} (need >= {:.1}), finest-pair rate {last:.2}", p as f64 - 0.3));
        for (hi, ei) in h.iter().zip(&e) {
            match table {
                Some(t) => {
                    let r = reference_at(t, col, *hi);
                    let ratio = ei / r;
                    let in_band = (1.0 / 3.0..=3.0).contains(&ratio);
                    pass &= in_band;
                    note(&format!("  h={hi:.3} error {ei:.4e} reference {r:.4e} ratio {ratio:.2}{}", if in_band { "" } else { " (outside x3)" }));
                }
                None => note(&format!("  h={hi:.3} error {ei:.4e}")),
            }
        }
        summary.push(format!("p{p} {ls:.2}"));
    }
    if let Some(b) = budget_s {
        pass &= wall <= b;
    }
    outcome(pass, format!("slopes {} ({wall:.0} s)", summary.join(", ")))
}

fn c1() -> anyhow::Result<Outcome> {
    let hs: Vec<f64> = ELASTIC_REF.iter().map(|r| r.0).collect();
    h_convergence(ProblemKind::Elastic, &hs, Some(&ELASTIC_REF), Some(900.0))
}

fn c2() -> anyhow::Result<Outcome> {
    let hs: Vec<f64> = PORO_REF.iter().map(|r| r.0).collect();
    h_convergence(ProblemKind::Poro, &hs, Some(&PORO_REF), None)
}

fn c3() -> anyhow::Result<Outcome> {
    h_convergence(ProblemKind::Coupled, &COUPLED_H, None, None)
}

fn c4() -> anyhow::Result<Outcome> {
    let degrees = [1, 2, 3, 4, 5];
    let mut pass = true;
    let mut summary = Vec::new();
    for (kind, n) in [(ProblemKind::Elastic, 160), (ProblemKind::Poro, 100), (ProblemKind::Coupled, 100)] {
        let reports = p_suite(&CaseSpec::standard(kind), n, &degrees, 1, 10)?;
        let ps: Vec<f64> = reports.iter().map(|r| r.p as f64).collect();
        let mut fields: Vec<(&str, Vec<f64>)> = vec![("u", reports.iter().map(|r| r.l2_u).collect())];
        if reports[0].l2_w.is_some() {
            fields.push(("w", reports.iter().map(|r| r.l2_w.unwrap_or(f64::NAN)).collect()));
        }
        if reports[0].l2_phi.is_some() {
            fields.push(("phi", reports.iter().map(|r| r.l2_phi.unwrap_or(f64::NAN)).collect()));
        }
        for (name, e) in fields {
            let decreasing = e.windows(2).all(|w| w[1] < w[0]);
            let logs: Vec<f64> = e.iter().map(|v| v.ln()).collect();
            let corr = correlation(&ps, &logs).unwrap_or(f64::NAN);
            let ok = decreasing && corr <= -0.99;
            pass &= ok;
            let list: Vec<String> = e.iter().map(|v| format!("{v:.3e}")).collect();
            note(&format!("{} N={n} L2 {name}: [{}] corr {corr:.4}{}", kind.name(), list.join(", "), if decreasing { "" } else { " not decreasing" }));
            summary.push(format!("{}/{name} {corr:.3}", kind.name()));
        }
    }
    outcome(pass, format!("correlations {}", summary.join(", ")))
}

fn voronoi(rect: Rect, n: usize, seed: u64, label: Subdomain) -> anyhow::Result<PolyMesh> {
    let mut m = generate_voronoi_mesh(&rect, n, 10, seed)?;
    m.assign_subdomains(|_| label);
    m.classify_boundary(|_| Some(BoundaryKind::Dirichlet), |_| 1.0)?;
    Ok(m)
}

fn smooth_u(p: [f64; 2]) -> [f64; 2] {
    let (x, y) = (p[0], p[1]);
    [(3.0 * x).sin() * (2.0 * y).cos() + 0.3, (x * y).cos() - 0.5 * y]
}

fn smooth_v(p: [f64; 2]) -> [f64; 2] {
    [(p[0] - p[1]).sin(), 0.4 * (2.0 * p[0]).cos()]
}

// Projected nonzero initial displacement, filtration and potential with
// nonzero velocities.
fn projected_state(sys: &BlockSystem) -> anyhow::Result<State> {
    let w = |p: [f64; 2]| [0.5 * p[1].cos(), -(p[0] * 2.0).sin()];
    let phi = |p: [f64; 2]| (p[0] + 2.0 * p[1]).sin();
    let phi_t = |p: [f64; 2]| 0.3 * (p[0] * p[1]).cos();
    let x = sys.project(Some(&smooth_u), Some(&w), Some(&phi))?;
    let z = sys.project(Some(&smooth_v), Some(&smooth_u), Some(&phi_t))?;
    Ok(initial_state(sys, x, z, 0.0, SolveConfig::direct())?)
}

// Discrete energy after each of `steps` Newmark steps, starting with the initial one.
fn energy_history(sys: &BlockSystem, params: NewmarkParams, steps: usize) -> anyhow::Result<Vec<f64>> {
    let mut s = projected_state(sys)?;
    let mut stepper = Stepper::new(sys, params, SolveConfig::direct())?;
    let mut out = vec![sys.energy(&s.x, &s.z)];
    for _ in 0..steps {
        stepper.step(&mut s)?;
        out.push(sys.energy(&s.x, &s.z));
    }
    Ok(out)
}

fn elastic_system(zeta: f64, n: usize, p: usize) -> anyhow::Result<BlockSystem> {
    let mesh = voronoi(Rect::unit(), n, 3, Subdomain::new(Physics::Elastic, 0))?;
    let mut mats = MaterialTable::default();
    mats.elastic.insert(0, ElasticMaterial { rho: 1.0, lambda: 2.0, mu: 1.0, zeta });
    Ok(build_block_system(ProblemKind::Elastic, Arc::new(mesh), p, &mats, Penalties::default())?)
}

fn c5() -> anyhow::Result<Outcome> {
    let avg = NewmarkParams::average_acceleration(1e-2)?;
    let mut pass = true;

    // (a) damped elastic: energy never grows
    let e = energy_history(&elastic_system(0.5, 12, 2)?, avg, 500)?;
    let worst = e.windows(2).map(|w| (w[1] - w[0]) / w[0]).fold(f64::NEG_INFINITY, f64::max);
    let a_ok = worst <= 1e-10 && e.last().unwrap() < &e[0];
    pass &= a_ok;
    note(&format!("(a) zeta>0: max relative per-step increase {worst:.2e}, final/initial {:.4}", e.last().unwrap() / e[0]));

    // (b) undamped elastic over 10^4 steps
    let e = energy_history(&elastic_system(0.0, 8, 2)?, avg, 10_000)?;
    let drift = e.iter().map(|v| (v - e[0]).abs() / e[0]).fold(0.0, f64::max);
    pass &= drift <= 1e-10;
    note(&format!("(b) zeta=0: max relative drift over 1e4 steps {drift:.2e}"));

    // (c) viscous Biot and the coupled problem for each interface permeability
    let case = Manufactured::coupled();
    let mut mats = manufactured_materials(&case);
    mats.poro.get_mut(&0).unwrap().eta = 0.5;
    let mut worst_c: f64 = 0.0;
    let poro = voronoi(Rect::new([-1.0, 0.0], [0.0, 1.0]), 12, 5, Subdomain::new(Physics::Poroelastic, 0))?;
    let sys = build_block_system(ProblemKind::Poro, Arc::new(poro), 2, &mats, Penalties::default())?;
    let e = energy_history(&sys, avg, 300)?;
    let r = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max) / e[0] - 1.0;
    worst_c = worst_c.max(r);
    note(&format!("(c) poro eta>0: max/initial - 1 = {r:.2e}, final/initial {:.4}", e.last().unwrap() / e[0]));
    for tau in [0.0, 0.5, 1.0] {
        let mesh = manufactured_mesh(ProblemKind::Coupled, 16, 2, 10, tau)?;
        let sys = build_block_system(ProblemKind::Coupled, Arc::new(mesh), 2, &mats, Penalties::default())?;
        let e = energy_history(&sys, avg, 300)?;
        let r = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max) / e[0] - 1.0;
        worst_c = worst_c.max(r);
        note(&format!("(c) coupled tau={tau}: max/initial - 1 = {r:.2e}, final/initial {:.4}", e.last().unwrap() / e[0]));
    }
    pass &= worst_c <= 1e-8;
    outcome(pass, format!("step increase {worst:.1e}, drift {drift:.1e}, growth {worst_c:.1e}"))
}

fn rel_asym(a: &CsrMatrix) -> f64 {
    a.asymmetry() / a.max_abs().max(1e-300)
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn c6() -> anyhow::Result<Outcome> {
    let mut pass = true;
    let case = Manufactured::coupled();
    let mats = manufactured_materials(&case);
    let mesh = Arc::new(manufactured_mesh(ProblemKind::Coupled, 40, 3, 10, 0.5)?);
    let sys = build_block_system(ProblemKind::Coupled, mesh, 2, &mats, Penalties::default())?;
    let c = &sys.coeffs;
    let sa = sys.acoustic_space.as_ref().ok_or_else(|| anyhow!("coupled system has no acoustic space"))?;
    let ops: Vec<(&str, CsrMatrix)> = vec![
        ("A^e", assemble_elastic(&sys.space, &c.lambda, &c.mu, 10.0)?),
        ("A^p", assemble_divdiv(&sys.space, &c.m, None, 10.0, false)?),
        ("A~^p", assemble_divdiv(&sys.space, &c.m, Some(&c.beta), 10.0, true)?),
        ("A^a", assemble_acoustic(sa, &c.rho_a, 10.0)?),
        ("M_rho", assemble_mass(&sys.space, &c.rho)?),
        ("M_a", assemble_mass(sa, &c.rho_a)?),
        ("B", assemble_robin(&sys.space, &c.eta_k)?),
        ("M", sys.mass.clone()),
        ("A", sys.stiffness.clone()),
    ];
    let mut worst_sym: f64 = 0.0;
    for (name, a) in &ops {
        let r = rel_asym(a);
        worst_sym = worst_sym.max(r);
        if r > 1e-12 {
            note(&format!("{name} asymmetry {r:.2e}"));
        }
    }
    pass &= worst_sym <= 1e-12;
    note(&format!("symmetry: worst relative asymmetry {worst_sym:.2e} over {} operators", ops.len()));

    let n = sys.n_dofs();
    let spd = n <= 2000 && sys.mass.to_dense().cholesky().is_some();
    pass &= spd;
    note(&format!("mass matrix ({n} dofs) dense Cholesky: {}", if spd { "ok" } else { "failed" }));

    let skew = sys.skew.as_ref().ok_or_else(|| anyhow!("coupled system has no skew part"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst_skew: f64 = 0.0;
    for _ in 0..100 {
        let y = random_vec(&mut rng, n);
        let sy = skew.spmv(&y)?;
        let yy: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let ss: f64 = sy.iter().map(|v| v * v).sum::<f64>().sqrt();
        let q: f64 = y.iter().zip(&sy).map(|(a, b)| a * b).sum();
        worst_skew = worst_skew.max(q.abs() / (yy * ss).max(1e-300));
    }
    pass &= worst_skew <= 1e-12;
    note(&format!("skew part: max |Y^T S Y| / (|Y| |SY|) = {worst_skew:.2e} over 100 vectors"));

    // coercivity against the DG norms
    let el = elastic_system(0.0, 30, 2)?;
    let ae = assemble_elastic(&el.space, &el.coeffs.lambda, &el.coeffs.mu, 10.0)?;
    let ev = NormEvaluator::new(&el)?;
    let mut min_e = f64::INFINITY;
    for _ in 0..100 {
        let v = random_vec(&mut rng, el.space.n_dofs());
        min_e = min_e.min(ae.quad_form(&v) / ev.dg_norm_elastic(&v)?.powi(2));
    }
    let poro = manufactured_mesh(ProblemKind::Poro, 30, 3, 10, 1.0)?;
    let ps = build_block_system(ProblemKind::Poro, Arc::new(poro), 2, &mats, Penalties::default())?;
    let ap = assemble_divdiv(&ps.space, &ps.coeffs.m, None, 10.0, false)?;
    let pv = NormEvaluator::new(&ps)?;
    let mut min_p = f64::INFINITY;
    for _ in 0..100 {
        let z = random_vec(&mut rng, ps.space.n_dofs());
        min_p = min_p.min(ap.quad_form(&z) / pv.dg_seminorm_poro(&z)?.powi(2));
    }
    let coercive = min_e >= 1.0 - 1e-12 && min_p >= 1.0 - 1e-12;
    pass &= coercive;
    note(&format!("coercivity: min v^T A^e v / |v|^2_DG,e = {min_e:.4}, min z^T A^p z / |z|^2_DG,p = {min_p:.4} (need >= 1)"));
    outcome(pass, format!("asym {worst_sym:.1e}, skew {worst_skew:.1e}, coercivity ratios {min_e:.3}/{min_p:.3}"))
}

fn coupled_small(tau: f64) -> anyhow::Result<Vec<PolyMesh>> {
    let mut a = structured_quads(&Rect::new([-1.0, 0.0], [1.0, 1.0]), 2, 1)?;
    a.assign_subdomains(|c| Subdomain::new(if c[0] < 0.0 { Physics::Poroelastic } else { Physics::Acoustic }, 0));
    a.classify_boundary(|_| Some(BoundaryKind::Dirichlet), |_| tau)?;
    let mut b = generate_voronoi_mesh(&Rect::new([-1.0, -1.0], [1.0, 1.0]), 3, 3, 5)?;
    let c0 = b.centroid(0);
    b.assign_subdomains(move |c| Subdomain::new(if c == c0 { Physics::Acoustic } else { Physics::Poroelastic }, 0));
    tag_mixed(&mut b);
    b.classify_boundary(|p| Some(if p[1] < -1.0 + 1e-12 { BoundaryKind::Neumann } else { BoundaryKind::Dirichlet }), |_| tau)?;
    Ok(vec![a, b])
}

fn coeff(m: &PolyMesh, f: impl Fn(usize) -> f64) -> Vec<f64> {
    (0..m.n_elements()).map(f).collect()
}

// Closed-form Newmark recurrence for m a + d v + k x = f(t).
fn scalar_newmark(m: f64, d: f64, k: f64, f: impl Fn(f64) -> f64, s: (f64, f64, f64, f64), nm: NewmarkParams) -> (f64, f64, f64) {
    let (t, x, v, a) = s;
    let NewmarkParams { beta, gamma, dt } = nm;
    let rhs = f(t + dt) - d * (v + (1.0 - gamma) * dt * a) - k * (x + dt * v + (0.5 - beta) * dt * dt * a);
    let a1 = rhs / (m + gamma * dt * d + beta * dt * dt * k);
    let x1 = x + dt * v + dt * dt * ((0.5 - beta) * a + beta * a1);
    let v1 = v + dt * ((1.0 - gamma) * a + gamma * a1);
    (x1, v1, a1)
}

fn c7() -> anyhow::Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut track = |name: &str, a: &DMatrix<f64>, o: &DMatrix<f64>| {
        let d = rel_diff(a, o);
        if d > 1e-12 {
            note(&format!("{name}: difference {d:.2e}"));
        }
        worst = worst.max(d);
    };
    let mut checked = 0;
    for mut mesh in small_meshes() {
        tag_mixed(&mut mesh);
        let mesh = Arc::new(mesh);
        let c1 = coeff(&mesh, |k| 1.0 + 0.5 * k as f64);
        let c2 = coeff(&mesh, |k| 2.0 - 0.3 * k as f64);
        for p in 1..=3 {
            let s = DgSpace::uniform(mesh.clone(), p, 2)?;
            let sa = DgSpace::uniform(mesh.clone(), p, 1)?;
            track("elastic", &assemble_elastic(&s, &c1, &c2, 10.0)?.to_dense(), &oracle_elastic(&s, &c1, &c2, 10.0));
            track("divdiv", &assemble_divdiv(&s, &c1, Some(&c2), 10.0, false)?.to_dense(), &oracle_divdiv(&s, &c1, &c2, 10.0, false));
            track("acoustic", &assemble_acoustic(&sa, &c1, 10.0)?.to_dense(), &oracle_acoustic(&sa, &c1, 10.0));
            track("mass", &assemble_mass(&s, &c2)?.to_dense(), &oracle_mass(&s, &c2));
            checked += 4;
        }
    }
    for tau in [0.0, 0.5, 1.0] {
        for mesh in coupled_small(tau)? {
            let mesh = Arc::new(mesh);
            let rho = coeff(&mesh, |k| 1.0 + 0.25 * k as f64);
            for p in 1..=3 {
                let sp = DgSpace::on_physics(mesh.clone(), Physics::Poroelastic, p, 2)?;
                let sa = DgSpace::on_physics(mesh.clone(), Physics::Acoustic, p, 1)?;
                track("coupling", &assemble_coupling(&sp, &sa, &rho)?.to_dense(), &oracle_coupling(&sp, &sa, &rho));
                track("robin", &assemble_robin(&sp, &rho)?.to_dense(), &oracle_robin(&sp, &rho));
                track("sealed divdiv", &assemble_divdiv(&sp, &rho, Some(&rho), 10.0, true)?.to_dense(), &oracle_divdiv(&sp, &rho, &rho, 10.0, true));
                track("acoustic", &assemble_acoustic(&sa, &rho, 10.0)?.to_dense(), &oracle_acoustic(&sa, &rho, 10.0));
                checked += 4;
            }
        }
    }
    note(&format!("{checked} operator comparisons, worst relative difference {worst:.2e}"));

    // scalar Newmark steps
    let mut worst_step: f64 = 0.0;
    for (m, d, k) in [(1.0, 0.0, 1.0), (2.0, 0.3, 5.0), (0.5, 1.5, 0.2)] {
        for integ in [Integrator::default(), Integrator::Leapfrog, Integrator::Newmark { beta: 0.3, gamma: 0.6 }] {
            let nm = integ.params(0.05)?;
            let one = |v: f64| CsrMatrix::identity(1).scaled(v);
            let force = |t: f64| (2.0 * t).sin() + 0.5;
            let sys = MatrixSystem {
                mass: one(m),
                damping: one(d),
                stiffness: one(k),
                load: Box::new(move |t, out| out[0] = force(t)),
                blocks: vec![vec![0]],
            };
            let mut s = initial_state(&sys, vec![0.7], vec![-0.2], 0.0, SolveConfig::direct())?;
            let mut stepper = Stepper::new(&sys, nm, SolveConfig::direct())?;
            for _ in 0..5 {
                let (x1, v1, a1) = scalar_newmark(m, d, k, force, (s.t, s.x[0], s.z[0], s.l[0]), nm);
                stepper.step(&mut s)?;
                for (got, want) in [(s.x[0], x1), (s.z[0], v1), (s.l[0], a1)] {
                    worst_step = worst_step.max((got - want).abs() / want.abs().max(1.0));
                }
                // continue from the closed-form values so each step is compared in isolation
                s.x[0] = x1;
                s.z[0] = v1;
                s.l[0] = a1;
            }
        }
    }
    note(&format!("scalar Newmark step: worst relative difference {worst_step:.2e}"));
    outcome(worst <= 1e-12 && worst_step <= 1e-14, format!("operators {worst:.1e}, scalar step {worst_step:.1e}"))
}

fn c8() -> anyhow::Result<Outcome> {
    let mesh = Arc::new(manufactured_mesh(ProblemKind::Elastic, 20, 1, 10, 1.0)?);
    let dts = [4e-3, 2e-3, 1e-3];
    let mut pass = true;
    let mut summary = Vec::new();
    for (name, integ) in [("newmark", Integrator::default()), ("leapfrog", Integrator::Leapfrog)] {
        let spec = CaseSpec { p: 2, t_end: 0.2, integrator: integ, ..CaseSpec::standard(ProblemKind::Elastic) };
        let r = dt_study(&spec, mesh.clone(), &dts, 1e-4)?;
        let (d, e): (Vec<f64>, Vec<f64>) = r.into_iter().unzip();
        let slope = convergence_rates(&e, &d)?.least_squares.unwrap_or(f64::NAN);
        pass &= (slope - 2.0).abs() <= 0.1;
        let list: Vec<String> = e.iter().map(|v| format!("{v:.3e}")).collect();
        note(&format!("{name}: differences [{}], slope {slope:.3}", list.join(", ")));
        summary.push(format!("{name} {slope:.3}"));
    }
    outcome(pass, format!("slopes {}", summary.join(", ")))
}

fn read_energy(path: &Path) -> anyhow::Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .skip(1)
        .map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            let t: f64 = cols[1].parse()?;
            let e: f64 = cols.last().unwrap().parse()?;
            Ok((t, e))
        })
        .collect()
}

fn c9() -> anyhow::Result<Outcome> {
    let dir = tempfile::tempdir()?;
    let mut pass = true;
    for name in DEMOS {
        let cfg = demo_config(name)?;
        let t_off = cfg.sources.iter().map(|s| match s.wavelet() {
            polydg::sources::Wavelet::Ricker { t0, .. } => 2.0 * t0,
            _ => 0.0,
        });
        let t_off = t_off.fold(0.0, f64::max);
        let out = dir.path().join(name);
        let start = Instant::now();
        let summary = run_config(&cfg, &RunOptions { out_dir: Some(out.clone()), desk_scale: true, ..Default::default() })?;
        let mut desk = cfg.clone();
        desk.apply_desk_scale();
        let snaps_ok = summary.snapshots.len() == desk.output.snapshots.len() && summary.snapshots.iter().all(|p| p.is_file());
        let energy = read_energy(&out.join("energy.csv"))?;
        let finite = energy.iter().all(|(t, e)| t.is_finite() && e.is_finite());
        let e_off = energy.iter().filter(|(t, _)| *t >= t_off).map(|p| p.1).next().unwrap_or(f64::NAN);
        let e_after = energy.iter().filter(|(t, _)| *t >= t_off).map(|p| p.1).fold(0.0, f64::max);
        let bounded = e_off > 0.0 && e_after <= 1.05 * e_off;
        let ok = snaps_ok && finite && bounded;
        pass &= ok;
        note(&format!(
            "{name}: {} elements, {} steps, {} snapshots, finite {finite}, energy after source {:.3e}..max {:.3e} ({:.0} s)",
            summary.n_elements,
            summary.steps,
            summary.snapshots.len(),
            e_off,
            e_after,
            start.elapsed().as_secs_f64()
        ));
    }
    outcome(pass, "desk-scale demos")
}

type Check = fn() -> anyhow::Result<Outcome>;

fn main() {
    let _ = env_logger::builder().is_test(true).filter_level(log::LevelFilter::Warn).try_init();
    let strict = std::env::var("POLYDG_ACCEPTANCE_STRICT").map(|v| v == "1").unwrap_or(false);
    let picked: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let checks: [(usize, &str, Check); 9] = [
        (1, "elastic h-convergence", c1),
        (2, "poro-elastic h-convergence", c2),
        (3, "coupled h-convergence", c3),
        (4, "p-convergence", c4),
        (5, "dissipativity", c5),
        (6, "operator properties", c6),
        (7, "oracle equivalence", c7),
        (8, "time order", c8),
        (9, "desk-scale demos", c9),
    ];
    let mut failed = Vec::new();
    for (n, name, f) in checks {
        if !picked.is_empty() && !picked.contains(&n) {
            continue;
        }
        println!("criterion {n}: {name}");
        let start = Instant::now();
        let r = catch_unwind(AssertUnwindSafe(f));
        let (pass, detail) = match r {
            Ok(Ok(o)) => (o.pass, o.detail),
            Ok(Err(e)) => (false, format!("error: {e:#}")),
            Err(_) => (false, "panicked".to_string()),
        };
        println!("{} criterion {n}: {name}: {detail} [{:.1} s]", if pass { "PASS" } else { "FAIL" }, start.elapsed().as_secs_f64());
        if !pass {
            failed.push(n);
        }
    }
    if !failed.is_empty() {
        println!("failing criteria: {failed:?}");
        if strict {
            std::process::exit(1);
        }
    }
}
