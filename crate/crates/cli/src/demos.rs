//! Physical demonstration cases: two-layer elastic and poro-elastic media
//! driven by a point force, and an acoustic layer over two poro-elastic
//! layers driven by disk sources.
//!
//! Each config carries its full-scale resolution in the main fields and a
//! reduced `desk_scale` section selected by `--desk-scale`.

use polydg::forms::{Penalties, ProblemKind};
use polydg::linalg::SolveConfig;
use polydg::materials::{AcousticMaterial, ElasticMaterial, MaterialTable, PoroMaterial};
use polydg::mesh::Physics;
use polydg::sources::Wavelet;
use polydg::timeint::Integrator;

use crate::config::{
    BoundarySpec, CellShape, DeskScale, DiskSource, InterfaceSpec, MeshSpec, Mirror, OutputSpec, PointForceSource, Region, RegionRule, RunConfig,
    SourceSpec, StructuredMesh, TimeSpec, VoronoiMesh,
    SCHEMA_VERSION,
};

pub const DEMOS: [&str; 3] = ["layered-elastic", "layered-poro", "poro-acoustic"];

const SIDE: f64 = 4800.0;
const INTERFACE_Y: f64 = 2400.0;

fn lower_elastic() -> ElasticMaterial {
    ElasticMaterial { rho: 2650.0, lambda: 1.8121e9, mu: 1.5038e9, zeta: 0.0 }
}

fn upper_elastic() -> ElasticMaterial {
    ElasticMaterial { rho: 2200.0, lambda: 7.2073e9, mu: 4.3738e9, zeta: 0.0 }
}

/// Lower-layer poro-elastic material with viscosity `eta`.
pub fn lower_poro(eta: f64) -> PoroMaterial {
    PoroMaterial { rho_f: 750.0, rho_s: 2650.0, phi: 0.2, a: 2.0, eta, k: 1e-12, m: 7.2642e9, beta: 0.9405, lambda: 1.8121e9, mu: 1.5038e9 }
}

/// Upper-layer poro-elastic material with viscosity `eta`.
pub fn upper_poro(eta: f64) -> PoroMaterial {
    PoroMaterial { rho_f: 950.0, rho_s: 2200.0, phi: 0.4, a: 2.0, eta, k: 1e-12, m: 6.8386e9, beta: 0.0290, lambda: 7.2073e9, mu: 4.3738e9 }
}

// Voronoi mesh of the lower half mirrored across the interface, so the
// material interface is made of whole faces.
fn layered_mesh(n_half: usize, lloyd: usize) -> MeshSpec {
    MeshSpec::Voronoi(VoronoiMesh {
        domain: [[0.0, 0.0], [SIDE, INTERFACE_Y]],
        n_elements: n_half,
        lloyd,
        seed: 7,
        mirror: Some(Mirror { axis: 1, line: INTERFACE_Y }),
    })
}

fn layered(kind: ProblemKind) -> RunConfig {
    let physics = if kind == ProblemKind::Elastic { Physics::Elastic } else { Physics::Poroelastic };
    let mut materials = MaterialTable::default();
    let integrator = match kind {
        ProblemKind::Elastic => {
            materials.elastic.insert(0, lower_elastic());
            materials.elastic.insert(1, upper_elastic());
            Integrator::Leapfrog
        }
        _ => {
            materials.poro.insert(0, lower_poro(0.0));
            materials.poro.insert(1, upper_poro(0.0));
            Integrator::default()
        }
    };
    RunConfig {
        version: SCHEMA_VERSION,
        name: format!("layered-{}", kind.name()),
        kind,
        // h ≈ 10 m
        mesh: layered_mesh(295_000, 10),
        regions: vec![
            RegionRule { physics, region: 0, at: Region::Below(INTERFACE_Y) },
            RegionRule { physics, region: 1, at: Region::All },
        ],
        boundary: BoundarySpec::default(),
        interfaces: InterfaceSpec::default(),
        materials,
        degree: 3,
        penalties: Penalties::default(),
        time: TimeSpec { dt: 1e-3, t_end: 1.0, integrator },
        solver: SolveConfig::default(),
        sources: vec![SourceSpec::PointForce(PointForceSource {
            at: [2400.0, 2700.0],
            direction: [0.0, 1.0],
            field: crate::config::Field::U,
            wavelet: Wavelet::Ricker { a0: 1.0, fp: 5.0, t0: 0.3 },
        })],
        manufactured: false,
        output: OutputSpec {
            dir: format!("out/layered-{}", kind.name()).into(),
            energy_every: 10,
            probe_every: 10,
            probes: vec![[2400.0, 2700.0], [2400.0, 1200.0], [4000.0, 3600.0]],
            snapshots: vec![0.3, 0.6, 1.0],
            snapshot_every: None,
            samples: 3,
        },
        desk_scale: Some(DeskScale {
            mesh: Some(layered_mesh(if kind == ProblemKind::Elastic { 800 } else { 250 }, 10)),
            degree: Some(2),
            dt: None,
            t_end: None,
            snapshots: None,
        }),
    }
}

// x extent of the simplified basin and the layer tops
const BASIN: [f64; 2] = [10_000.0, 32_000.0];
const POROUS_TOP: f64 = 8000.0;
const LOWER_TOP: f64 = 4000.0;
const HEIGHT: f64 = 10_000.0;

fn poro_acoustic() -> RunConfig {
    let mut materials = MaterialTable::default();
    materials.poro.insert(0, lower_poro(1e-3));
    materials.poro.insert(1, upper_poro(1e-3));
    materials.acoustic.insert(0, AcousticMaterial { rho_a: 1500.0, c: 1000.0 });
    let grid = |nx: usize, ny: usize| MeshSpec::Structured(StructuredMesh {
        domain: [[BASIN[0], 0.0], [BASIN[1], HEIGHT]],
        nx,
        ny,
        cells: CellShape::Triangles,
    });
    // Ricker with β_p = 39.4784 Hz², i.e. f_p = √β_p / π
    let wavelet = Wavelet::Ricker { a0: 1.0, fp: 39.4784f64.sqrt() / std::f64::consts::PI, t0: 0.75 };
    let sources = [13097.0, 16673.0, 27079.0, 29324.0]
        .iter()
        .map(|&x| SourceSpec::Disk(DiskSource {
            center: [x, 8868.0],
            radius: 100.0,
            direction: [1.0, 0.0],
            field: crate::config::Field::Phi,
            normalized: false,
            wavelet: wavelet.clone(),
        }))
        .collect();
    RunConfig {
        version: SCHEMA_VERSION,
        name: "poro-acoustic".into(),
        kind: ProblemKind::Coupled,
        // 6400 triangles, layer tops on grid lines
        mesh: grid(80, 40),
        regions: vec![
            RegionRule { physics: Physics::Acoustic, region: 0, at: Region::Above(POROUS_TOP) },
            RegionRule { physics: Physics::Poroelastic, region: 0, at: Region::Below(LOWER_TOP) },
            RegionRule { physics: Physics::Poroelastic, region: 1, at: Region::All },
        ],
        boundary: BoundarySpec::default(),
        interfaces: InterfaceSpec { tau: 1.0, rules: Vec::new() },
        materials,
        degree: 4,
        penalties: Penalties::default(),
        time: TimeSpec { dt: 1e-2, t_end: 4.0, integrator: Integrator::default() },
        solver: SolveConfig::default(),
        sources,
        manufactured: false,
        output: OutputSpec {
            dir: "out/poro-acoustic".into(),
            energy_every: 5,
            probe_every: 1,
            probes: vec![[16673.0, 9000.0], [16673.0, 7000.0], [21000.0, 6000.0]],
            snapshots: vec![1.0, 2.0, 3.0, 4.0],
            snapshot_every: None,
            samples: 3,
        },
        desk_scale: Some(DeskScale {
            mesh: Some(grid(66, 15)),
            degree: Some(2),
            dt: None,
            t_end: Some(2.5),
            snapshots: Some(vec![1.0, 1.5, 2.5]),
        }),
    }
}

/// The named demo config at full scale; `--desk-scale` selects the reduced one.
pub fn demo_config(name: &str) -> anyhow::Result<RunConfig> {
    match name {
        "layered-elastic" => Ok(layered(ProblemKind::Elastic)),
        "layered-poro" => Ok(layered(ProblemKind::Poro)),
        "poro-acoustic" => Ok(poro_acoustic()),
        _ => anyhow::bail!("unknown demo '{name}' (available: {})", DEMOS.join(", ")),
    }
}
