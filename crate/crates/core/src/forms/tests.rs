//! Oracle comparisons and algebraic checks for the assembled operators.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::oracle::*;
use super::*;
use crate::fespace::DgSpace;
use crate::materials::{AcousticMaterial, ElasticMaterial, MaterialTable, PoroMaterial};
use crate::mesh::{generate_voronoi_mesh, structured_quads, BoundaryKind, Physics, PolyMesh, Rect, Subdomain};
use crate::Point;

const TOL: f64 = 1e-12;


#[test]
fn elastic_matches_dense_oracle() {
    for mut mesh in small_meshes() {
        tag_mixed(&mut mesh);
        let mesh = Arc::new(mesh);
        let lam = coeff(&mesh, |k| 1.0 + 0.5 * k as f64);
        let mu = coeff(&mesh, |k| 2.0 - 0.3 * k as f64);
        for p in 1..=3 {
            let s = DgSpace::uniform(mesh.clone(), p, 2).unwrap();
            let a = assemble_elastic(&s, &lam, &mu, 10.0).unwrap().to_dense();
            let o = oracle_elastic(&s, &lam, &mu, 10.0);
            assert!(rel_diff(&a, &o) < TOL, "p={p} diff {}", rel_diff(&a, &o));
        }
    }
}

#[test]
fn mixed_degrees_match_oracle() {
    let mut mesh = structured_quads(&Rect::unit(), 2, 1).unwrap();
    tag_mixed(&mut mesh);
    let mesh = Arc::new(mesh);
    let s = DgSpace::new(mesh.clone(), vec![0, 1], vec![1, 2], 2).unwrap();
    let lam = coeff(&mesh, |_| 1.0);
    let mu = coeff(&mesh, |k| 1.0 + k as f64);
    let a = assemble_elastic(&s, &lam, &mu, 10.0).unwrap().to_dense();
    assert!(rel_diff(&a, &oracle_elastic(&s, &lam, &mu, 10.0)) < TOL);
}

#[test]
fn divdiv_and_acoustic_match_dense_oracle() {
    for mut mesh in small_meshes() {
        tag_mixed(&mut mesh);
        let mesh = Arc::new(mesh);
        let mm = coeff(&mesh, |k| 1.0 + k as f64);
        let beta = coeff(&mesh, |k| 0.9 - 0.2 * k as f64);
        for p in 1..=3 {
            let s = DgSpace::uniform(mesh.clone(), p, 2).unwrap();
            let a = assemble_divdiv(&s, &mm, Some(&beta), 10.0, false).unwrap().to_dense();
            let o = oracle_divdiv(&s, &mm, &beta, 10.0, false);
            assert!(rel_diff(&a, &o) < TOL, "divdiv p={p} diff {}", rel_diff(&a, &o));
            let sa = DgSpace::uniform(mesh.clone(), p, 1).unwrap();
            let a = assemble_acoustic(&sa, &mm, 10.0).unwrap().to_dense();
            let o = oracle_acoustic(&sa, &mm, 10.0);
            assert!(rel_diff(&a, &o) < TOL, "acoustic p={p} diff {}", rel_diff(&a, &o));
            let a = assemble_mass(&s, &mm).unwrap().to_dense();
            assert!(rel_diff(&a, &oracle_mass(&s, &mm)) < TOL);
        }
    }
}

fn coupled_mesh(tau: f64) -> PolyMesh {
    let mut m = structured_quads(&Rect::new([-1.0, 0.0], [1.0, 1.0]), 2, 1).unwrap();
    m.assign_subdomains(|c| {
        if c[0] < 0.0 {
            Subdomain::new(Physics::Poroelastic, 0)
        } else {
            Subdomain::new(Physics::Acoustic, 0)
        }
    });
    m.classify_boundary(|_| Some(BoundaryKind::Dirichlet), |_| tau).unwrap();
    m
}

fn coupled_voronoi(tau: f64) -> PolyMesh {
    let mut m = generate_voronoi_mesh(&Rect::new([-1.0, -1.0], [1.0, 1.0]), 3, 3, 5).unwrap();
    let c0 = m.centroid(0);
    m.assign_subdomains(move |c| {
        if c == c0 {
            Subdomain::new(Physics::Acoustic, 0)
        } else {
            Subdomain::new(Physics::Poroelastic, 0)
        }
    });
    tag_mixed(&mut m);
    m.classify_boundary(
        |p| Some(if p[1] < -1.0 + 1e-12 { BoundaryKind::Neumann } else { BoundaryKind::Dirichlet }),
        |_| tau,
    )
    .unwrap();
    m
}

#[test]
fn coupling_robin_and_sealed_divdiv_match_oracle() {
    for tau in [0.0, 0.5, 1.0] {
        for mesh in [coupled_mesh(tau), coupled_voronoi(tau)] {
            let mesh = Arc::new(mesh);
            for p in 1..=3 {
                let sp = DgSpace::on_physics(mesh.clone(), Physics::Poroelastic, p, 2).unwrap();
                let sa = DgSpace::on_physics(mesh.clone(), Physics::Acoustic, p, 1).unwrap();
                let rho = coeff(&mesh, |k| 1.0 + 0.25 * k as f64);
                let c = assemble_coupling(&sp, &sa, &rho).unwrap().to_dense();
                let o = oracle_coupling(&sp, &sa, &rho);
                assert!(rel_diff(&c, &o) < TOL, "tau={tau} p={p}");
                assert!(o.amax() > 0.0);
                let b = assemble_robin(&sp, &rho).unwrap().to_dense();
                assert!(rel_diff(&b, &oracle_robin(&sp, &rho)) < TOL);
                let a = assemble_divdiv(&sp, &rho, Some(&rho), 10.0, true).unwrap().to_dense();
                let beta = rho.clone();
                assert!(rel_diff(&a, &oracle_divdiv(&sp, &rho, &beta, 10.0, true)) < TOL);
                let aa = assemble_acoustic(&sa, &rho, 10.0).unwrap().to_dense();
                assert!(rel_diff(&aa, &oracle_acoustic(&sa, &rho, 10.0)) < TOL);
            }
        }
    }
}

#[test]
fn zero_coefficient_gives_zero_operator() {
    let mesh = Arc::new(coupled_mesh(1.0));
    let sp = DgSpace::on_physics(mesh.clone(), Physics::Poroelastic, 2, 2).unwrap();
    let sa = DgSpace::on_physics(mesh.clone(), Physics::Acoustic, 2, 1).unwrap();
    let zero = vec![0.0; 2];
    assert_eq!(assemble_mass(&sp, &zero).unwrap().nnz(), 0);
    assert_eq!(assemble_coupling(&sp, &sa, &zero).unwrap().nnz(), 0);
    // η/k = 0 and τ = 1: B vanishes
    assert_eq!(assemble_robin(&sp, &zero).unwrap().nnz(), 0);
}

#[test]
fn unit_square_mass_is_gram_identity() {
    let mesh = Arc::new(structured_quads(&Rect::unit(), 1, 1).unwrap());
    let s = DgSpace::uniform(mesh, 1, 1).unwrap();
    let m = assemble_mass(&s, &[1.0]).unwrap().to_dense();
    assert!((m - DMatrix::identity(3, 3)).amax() < 1e-14);
}

#[test]
fn mass_trace_is_layer_weighted() {
    let mut mesh = structured_quads(&Rect::new([0.0, 0.0], [4800.0, 4800.0]), 4, 4).unwrap();
    mesh.assign_subdomains(|c| Subdomain::new(Physics::Elastic, (c[1] > 2400.0) as u32));
    let mesh = Arc::new(mesh);
    let s = DgSpace::uniform(mesh.clone(), 2, 2).unwrap();
    let rho = coeff(&mesh, |k| if mesh.subdomain(k).region == 1 { 2200.0 } else { 2650.0 });
    let tr: f64 = (0..s.n_dofs()).map(|i| assemble_mass(&s, &rho).unwrap().get(i, i)).sum();
    let ones = assemble_mass(&s, &vec![1.0; 16]).unwrap();
    let per_elem: f64 = s.dofs(0).map(|i| ones.get(i, i)).sum();
    let expected = 8.0 * per_elem * (2200.0 + 2650.0);
    assert!((tr - expected).abs() < 1e-10 * expected);
}

#[test]
fn rigid_motions_are_in_the_neumann_kernel() {
    let mut mesh = generate_voronoi_mesh(&Rect::unit(), 6, 5, 3).unwrap();
    mesh.tag_all_boundary(BoundaryKind::Neumann);
    let mesh = Arc::new(mesh);
    let s = DgSpace::uniform(mesh.clone(), 2, 2).unwrap();
    let lam = coeff(&mesh, |_| 1.0);
    let a = assemble_elastic(&s, &lam, &lam, 10.0).unwrap();
    for f in [|_: Point| [1.0, -2.0], |x: Point| [-x[1], x[0]]] {
        let v = s.l2_project(f).unwrap();
        let av = a.spmv(&v).unwrap();
        assert!(av.iter().all(|x| x.abs() < 1e-11), "{:e}", av.iter().fold(0.0f64, |m, x| m.max(x.abs())));
    }
    let sa = DgSpace::uniform(mesh.clone(), 2, 1).unwrap();
    let aa = assemble_acoustic(&sa, &lam, 10.0).unwrap();
    let one = sa.l2_project(|_| [1.0, 0.0]).unwrap();
    assert!(aa.spmv(&one).unwrap().iter().all(|x| x.abs() < 1e-12));
    // divergence-free field with continuous normal trace
    let dd = assemble_divdiv(&s, &lam, None, 10.0, false).unwrap();
    let v = s.l2_project(|x| [x[1] * x[1], x[0]]).unwrap();
    assert!(dd.quad_form(&v).abs() < 1e-11);
}

#[test]
fn single_square_dirichlet_is_spd() {
    let mut mesh = structured_quads(&Rect::unit(), 1, 1).unwrap();
    mesh.tag_all_boundary(BoundaryKind::Dirichlet);
    let s = DgSpace::uniform(Arc::new(mesh), 2, 2).unwrap();
    let a = assemble_elastic(&s, &[1.0], &[1.0], 10.0).unwrap();
    assert!(a.asymmetry() <= 1e-12 * a.max_abs());
    assert!(a.to_dense().cholesky().is_some());
}

#[test]
fn acoustic_penalty_formula() {
    // square of diameter 0.5
    let side = 0.5 / 2f64.sqrt();
    let mut mesh = structured_quads(&Rect::new([0.0, 0.0], [side, side]), 1, 1).unwrap();
    mesh.assign_subdomains(|_| Subdomain::new(Physics::Acoustic, 0));
    mesh.tag_all_boundary(BoundaryKind::Dirichlet);
    let s = DgSpace::uniform(Arc::new(mesh), 2, 1).unwrap();
    let chi = acoustic_penalty(&s, &[1.0], 10.0, 0).unwrap();
    assert!((chi - 80.0).abs() < 1e-12);
}

#[test]
fn coupling_and_robin_constant_examples() {
    // interface x = 0 of length 1
    let mesh = Arc::new(coupled_mesh(0.5));
    let sp = DgSpace::on_physics(mesh.clone(), Physics::Poroelastic, 1, 2).unwrap();
    let sa = DgSpace::on_physics(mesh.clone(), Physics::Acoustic, 1, 1).unwrap();
    let c = assemble_coupling(&sp, &sa, &[1.0, 1.0]).unwrap();
    // n_p = (1, 0)
    let v = sp.l2_project(|_| [1.0, 0.0]).unwrap();
    let phi = sa.l2_project(|_| [1.0, 0.0]).unwrap();
    assert!((c.bilinear(&v, &phi) - 1.0).abs() < 1e-13);
    let b = assemble_robin(&sp, &[0.0, 0.0]).unwrap();
    assert!((b.quad_form(&v) - 1.0).abs() < 1e-13);
}

#[test]
fn beta_weighted_divdiv_is_the_form_at_beta_u_plus_w() {
    let mut mesh = generate_voronoi_mesh(&Rect::unit(), 5, 3, 8).unwrap();
    tag_mixed(&mut mesh);
    let mesh = Arc::new(mesh);
    let s = DgSpace::uniform(mesh.clone(), 2, 2).unwrap();
    let m = coeff(&mesh, |k| 1.0 + k as f64);
    let beta = coeff(&mesh, |_| 0.7);
    let big = assemble_divdiv(&s, &m, Some(&beta), 10.0, false).unwrap();
    let small = assemble_divdiv(&s, &m, None, 10.0, false).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = s.n_dofs();
    for _ in 0..10 {
        let y: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let z: Vec<f64> = (0..n).map(|i| 0.7 * y[i] + y[n + i]).collect();
        let (a, b) = (big.quad_form(&y), small.quad_form(&z));
        assert!((a - b).abs() < 1e-11 * b.abs().max(1.0));
    }
}

#[test]
fn penalty_monotonicity() {
    let mut mesh = generate_voronoi_mesh(&Rect::unit(), 4, 3, 2).unwrap();
    mesh.tag_all_boundary(BoundaryKind::Dirichlet);
    let mesh = Arc::new(mesh);
    let s = DgSpace::uniform(mesh.clone(), 2, 2).unwrap();
    let one = coeff(&mesh, |_| 1.0);
    let a10 = assemble_elastic(&s, &one, &one, 10.0).unwrap();
    let a20 = assemble_elastic(&s, &one, &one, 20.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let v: Vec<f64> = (0..s.n_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    assert!(a20.quad_form(&v) > a10.quad_form(&v));
}

#[test]
fn untagged_and_unclassified_faces_are_errors() {
    let mesh = Arc::new(structured_quads(&Rect::unit(), 1, 1).unwrap());
    let s = DgSpace::uniform(mesh, 1, 2).unwrap();
    assert!(matches!(assemble_elastic(&s, &[1.0], &[1.0], 10.0), Err(crate::Error::Assembly(_))));
}

fn materials() -> MaterialTable {
    let mut t = MaterialTable::default();
    t.elastic.insert(0, ElasticMaterial { rho: 1.0, lambda: 1.0, mu: 1.0, zeta: 0.5 });
    t.poro.insert(
        0,
        PoroMaterial { rho_f: 1.0, rho_s: 2.0, phi: 0.4, a: 1.5, eta: 1.0, k: 2.0, m: 1.5, beta: 0.8, lambda: 1.0, mu: 1.0 },
    );
    t.acoustic.insert(0, AcousticMaterial { rho_a: 1.2, c: 2.0 });
    t
}

#[test]
fn block_system_structure() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for tau in [0.0, 0.5, 1.0] {
        let mesh = Arc::new(coupled_voronoi(tau));
        let sys = build_block_system(ProblemKind::Coupled, mesh, 2, &materials(), Penalties::default()).unwrap();
        let n = sys.n_dofs();
        assert!(sys.mass.asymmetry() <= 1e-12 * sys.mass.max_abs());
        assert!(sys.stiffness.asymmetry() <= 1e-12 * sys.stiffness.max_abs());
        assert!(sys.mass.to_dense().cholesky().is_some());
        let skew = sys.skew.as_ref().unwrap();
        let sym = sys.damping.add(1.0, skew, -1.0).unwrap();
        assert!(sym.asymmetry() <= 1e-12 * sym.max_abs().max(1e-300));
        for _ in 0..20 {
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            assert!(skew.quad_form(&y).abs() < 1e-12);
            assert!(sym.quad_form(&y) >= -1e-12);
        }
        assert_eq!(sys.element_blocks.iter().map(|b| b.len()).sum::<usize>(), n);
    }
}

#[test]
fn elastic_equals_poro_with_zero_beta() {
    let mut mesh = generate_voronoi_mesh(&Rect::unit(), 3, 3, 7).unwrap();
    mesh.tag_all_boundary(BoundaryKind::Dirichlet);
    let mut mats = materials();
    mats.poro.get_mut(&0).unwrap().beta = 0.0;
    let pm = mats.poro[&0];
    mats.elastic.insert(0, ElasticMaterial { rho: pm.rho(), lambda: pm.lambda, mu: pm.mu, zeta: 0.0 });
    let el = build_block_system(ProblemKind::Elastic, Arc::new(mesh.clone()), 2, &mats, Penalties::default()).unwrap();
    mesh.assign_subdomains(|_| Subdomain::new(Physics::Poroelastic, 0));
    let po = build_block_system(ProblemKind::Poro, Arc::new(mesh), 2, &mats, Penalties::default()).unwrap();
    let n = el.n_dofs();
    let idx: Vec<usize> = (0..n).collect();
    let a = po.stiffness.dense_block(&idx);
    assert!(rel_diff(&a, &el.stiffness.to_dense()) < 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let y = DVector::from_fn(2 * n, |_, _| rng.gen_range(-1.0..1.0));
    assert!(po.mass.quad_form(y.as_slice()) > 0.0);
}

#[test]
fn missing_material_is_config_error() {
    let mut mesh = structured_quads(&Rect::unit(), 1, 1).unwrap();
    mesh.tag_all_boundary(BoundaryKind::Dirichlet);
    let r = build_block_system(ProblemKind::Elastic, Arc::new(mesh), 1, &MaterialTable::default(), Penalties::default());
    assert!(matches!(r, Err(crate::Error::Config(_))));
}
