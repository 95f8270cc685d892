//! Versioned JSON run configuration.
//!
//! Parse errors and validation errors both carry the path of the offending
//! field (`time.dt`, `sources[1].wavelet`, ...).

use std::fmt;
use std::path::{Path, PathBuf};

use polydg::forms::{Penalties, ProblemKind};
use polydg::linalg::SolveConfig;
use polydg::materials::MaterialTable;
use polydg::mesh::{
    generate_voronoi_mesh, read_mesh, structured_quads, structured_triangles, BoundaryKind, Physics, PolyMesh, Rect, Subdomain,
};
use polydg::sources::Wavelet;
use polydg::timeint::Integrator;
use polydg::verification::{manufactured_mesh, mesh_for_h};
use polydg::Point;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { path: path.into(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() || self.path == "." {
            write!(f, "invalid config: {}", self.message)
        } else {
            write!(f, "invalid config at `{}`: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

type CResult<T> = std::result::Result<T, ConfigError>;

/// Geometric predicate on a point (element centroid or face midpoint).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    All,
    Above(f64),
    Below(f64),
    LeftOf(f64),
    RightOf(f64),
    Box { min: Point, max: Point },
}

impl Region {
    pub fn contains(&self, p: Point) -> bool {
        match self {
            Region::All => true,
            Region::Above(y) => p[1] > *y,
            Region::Below(y) => p[1] < *y,
            Region::LeftOf(x) => p[0] < *x,
            Region::RightOf(x) => p[0] > *x,
            Region::Box { min, max } => p[0] >= min[0] && p[0] <= max[0] && p[1] >= min[1] && p[1] <= max[1],
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellShape {
    #[default]
    Quads,
    Triangles,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mirror {
    /// 0 mirrors across `x = line`, 1 across `y = line`.
    pub axis: usize,
    pub line: f64,
}

fn default_lloyd() -> usize {
    10
}

/// Clipped Voronoi mesh of `domain = [min, max]`, optionally mirrored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VoronoiMesh {
    pub domain: [Point; 2],
    pub n_elements: usize,
    #[serde(default = "default_lloyd")]
    pub lloyd: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mirror: Option<Mirror>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructuredMesh {
    pub domain: [Point; 2],
    pub nx: usize,
    pub ny: usize,
    #[serde(default)]
    pub cells: CellShape,
}

/// Mesh file, relative paths resolved against the config's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileMesh {
    pub path: PathBuf,
}

/// The labelled Voronoi mesh of the manufactured-solution domain, by cell
/// count or by target mesh size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManufacturedMesh {
    #[serde(default)]
    pub n_elements: Option<usize>,
    #[serde(default)]
    pub target_h: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_lloyd")]
    pub lloyd: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum MeshSpec {
    Voronoi(VoronoiMesh),
    Structured(StructuredMesh),
    File(FileMesh),
    Manufactured(ManufacturedMesh),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionRule {
    pub physics: Physics,
    #[serde(default)]
    pub region: u32,
    #[serde(rename = "where")]
    pub at: Region,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryRule {
    pub kind: BoundaryKind,
    #[serde(rename = "where")]
    pub at: Region,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySpec {
    #[serde(default = "dirichlet")]
    pub default: BoundaryKind,
    #[serde(default)]
    pub rules: Vec<BoundaryRule>,
}

fn dirichlet() -> BoundaryKind {
    BoundaryKind::Dirichlet
}

impl Default for BoundarySpec {
    fn default() -> Self {
        Self { default: BoundaryKind::Dirichlet, rules: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauRule {
    pub tau: f64,
    #[serde(rename = "where")]
    pub at: Region,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfaceSpec {
    #[serde(default = "one")]
    pub tau: f64,
    #[serde(default)]
    pub rules: Vec<TauRule>,
}

fn one() -> f64 {
    1.0
}

impl Default for InterfaceSpec {
    fn default() -> Self {
        Self { tau: 1.0, rules: Vec::new() }
    }
}

impl InterfaceSpec {
    pub fn tau_at(&self, p: Point) -> f64 {
        self.rules.iter().find(|r| r.at.contains(p)).map(|r| r.tau).unwrap_or(self.tau)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub integrator: Integrator,
}

/// Unknown a source acts on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    #[default]
    U,
    W,
    Phi,
}

fn ey() -> [f64; 2] {
    [0.0, 1.0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointForceSource {
    pub at: Point,
    #[serde(default = "ey")]
    pub direction: [f64; 2],
    #[serde(default)]
    pub field: Field,
    pub wavelet: Wavelet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoubleCoupleSource {
    pub at: Point,
    pub m0: f64,
    pub slip: [f64; 2],
    pub normal: [f64; 2],
    pub wavelet: Wavelet,
}

/// Indicator of a disk times the wavelet; `normalized` divides by the disk area.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiskSource {
    pub center: Point,
    pub radius: f64,
    #[serde(default = "ey")]
    pub direction: [f64; 2],
    #[serde(default)]
    pub field: Field,
    #[serde(default)]
    pub normalized: bool,
    pub wavelet: Wavelet,
}

/// Horizontal line source at `y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineSource {
    pub y: f64,
    #[serde(default = "ey")]
    pub direction: [f64; 2],
    #[serde(default)]
    pub field: Field,
    pub wavelet: Wavelet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum SourceSpec {
    PointForce(PointForceSource),
    DoubleCouple(DoubleCoupleSource),
    Disk(DiskSource),
    Line(LineSource),
}

impl SourceSpec {
    pub fn wavelet(&self) -> &Wavelet {
        match self {
            SourceSpec::PointForce(PointForceSource { wavelet, .. })
            | SourceSpec::DoubleCouple(DoubleCoupleSource { wavelet, .. })
            | SourceSpec::Disk(DiskSource { wavelet, .. })
            | SourceSpec::Line(LineSource { wavelet, .. }) => wavelet,
        }
    }

    pub fn field(&self) -> Field {
        match self {
            SourceSpec::PointForce(PointForceSource { field, .. }) | SourceSpec::Disk(DiskSource { field, .. }) | SourceSpec::Line(LineSource { field, .. }) => *field,
            SourceSpec::DoubleCouple(DoubleCoupleSource { .. }) => Field::U,
        }
    }
}

fn out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn ten() -> usize {
    10
}

fn three() -> usize {
    3
}

fn one_usize() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "out_dir")]
    pub dir: PathBuf,
    /// Steps between energy rows.
    #[serde(default = "ten")]
    pub energy_every: usize,
    #[serde(default = "one_usize")]
    pub probe_every: usize,
    #[serde(default)]
    pub probes: Vec<Point>,
    /// Snapshot times; each is rounded to the nearest step.
    #[serde(default)]
    pub snapshots: Vec<f64>,
    #[serde(default)]
    pub snapshot_every: Option<usize>,
    /// Sample points per element and direction in snapshots.
    #[serde(default = "three")]
    pub samples: usize,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: out_dir(), energy_every: 10, probe_every: 1, probes: Vec::new(), snapshots: Vec::new(), snapshot_every: None, samples: 3 }
    }
}

/// Reduced-resolution overrides applied by `--desk-scale`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeskScale {
    #[serde(default)]
    pub mesh: Option<MeshSpec>,
    #[serde(default)]
    pub degree: Option<usize>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub snapshots: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    #[serde(default)]
    pub name: String,
    pub kind: ProblemKind,
    pub mesh: MeshSpec,
    /// Subdomain labels by element centroid; first match wins.
    #[serde(default)]
    pub regions: Vec<RegionRule>,
    #[serde(default)]
    pub boundary: BoundarySpec,
    #[serde(default)]
    pub interfaces: InterfaceSpec,
    #[serde(default)]
    pub materials: MaterialTable,
    pub degree: usize,
    #[serde(default)]
    pub penalties: Penalties,
    pub time: TimeSpec,
    #[serde(default)]
    pub solver: SolveConfig,
    #[serde(default)]
    pub sources: Vec<SourceSpec>,
    /// Use the manufactured solution for loads, initial data and errors.
    #[serde(default)]
    pub manufactured: bool,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub desk_scale: Option<DeskScale>,
}

fn check(ok: bool, path: impl Into<String>, msg: impl Into<String>) -> CResult<()> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError::new(path, msg))
    }
}

fn finite_point(p: Point, path: &str) -> CResult<()> {
    check(p.iter().all(|v| v.is_finite()), path, "coordinates must be finite")
}

fn check_mesh_spec(m: &MeshSpec, path: &str) -> CResult<()> {
    let domain = |d: &[Point; 2]| {
        finite_point(d[0], &format!("{path}.domain"))?;
        finite_point(d[1], &format!("{path}.domain"))?;
        check(d[0][0] < d[1][0] && d[0][1] < d[1][1], format!("{path}.domain"), "expected [min, max] with min < max")
    };
    match m {
        MeshSpec::Voronoi(VoronoiMesh { domain: d, n_elements, mirror, .. }) => {
            domain(d)?;
            check(*n_elements >= 1, format!("{path}.n_elements"), "must be at least 1")?;
            if let Some(mr) = mirror {
                check(mr.axis < 2, format!("{path}.mirror.axis"), "must be 0 (x) or 1 (y)")?;
                check(mr.line.is_finite(), format!("{path}.mirror.line"), "must be finite")?;
            }
            Ok(())
        }
        MeshSpec::Structured(StructuredMesh { domain: d, nx, ny, .. }) => {
            domain(d)?;
            check(*nx >= 1, format!("{path}.nx"), "must be at least 1")?;
            check(*ny >= 1, format!("{path}.ny"), "must be at least 1")
        }
        MeshSpec::File(FileMesh { path: p }) => check(!p.as_os_str().is_empty(), format!("{path}.path"), "must not be empty"),
        MeshSpec::Manufactured(ManufacturedMesh { n_elements, target_h, .. }) => match (n_elements, target_h) {
            (Some(n), None) => check(*n >= 1, format!("{path}.n_elements"), "must be at least 1"),
            (None, Some(h)) => check(*h > 0.0 && h.is_finite(), format!("{path}.target_h"), "must be positive"),
            _ => Err(ConfigError::new(path, "set exactly one of n_elements and target_h")),
        },
    }
}

// Serde buffers internally tagged enums, so errors inside them stop at the
// enum's own path. Re-deserialize the variant body alone to find the field.
fn refine_tagged(root: &serde_json::Value, path: &str) -> Option<ConfigError> {
    let mut node = root;
    for seg in path.split('.') {
        let (key, idx) = match seg.split_once('[') {
            Some((k, rest)) => (k, rest.trim_end_matches(']').parse::<usize>().ok()),
            None => (seg, None),
        };
        node = node.get(key)?;
        if let Some(i) = idx {
            node = node.get(i)?;
        }
    }
    let mut body = node.as_object()?.clone();
    let tag = body.remove("type")?;
    let tag = tag.as_str()?;
    let body = serde_json::Value::Object(body);
    fn inner<T: serde::de::DeserializeOwned>(v: serde_json::Value) -> Option<(String, String)> {
        serde_path_to_error::deserialize::<_, T>(v).err().map(|e| (e.path().to_string(), e.into_inner().to_string()))
    }
    let last = path.rsplit('.').next()?;
    let found = if last == "mesh" {
        match tag {
            "voronoi" => inner::<VoronoiMesh>(body),
            "structured" => inner::<StructuredMesh>(body),
            "file" => inner::<FileMesh>(body),
            "manufactured" => inner::<ManufacturedMesh>(body),
            _ => None,
        }
    } else if last.starts_with("sources[") {
        match tag {
            "point-force" => inner::<PointForceSource>(body),
            "double-couple" => inner::<DoubleCoupleSource>(body),
            "disk" => inner::<DiskSource>(body),
            "line" => inner::<LineSource>(body),
            _ => None,
        }
    } else {
        None
    }?;
    let sub = if found.0 == "." { path.to_string() } else { format!("{path}.{}", found.0) };
    Some(ConfigError::new(sub, found.1))
}

impl RunConfig {
    /// Parses and validates a JSON document.
    pub fn from_json(text: &str) -> CResult<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let msg = e.into_inner().to_string();
            serde_json::from_str::<serde_json::Value>(text)
                .ok()
                .and_then(|v| refine_tagged(&v, &path))
                .unwrap_or_else(|| ConfigError::new(path, msg))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
        Ok(Self::from_json(&text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Replaces mesh, degree, time step, final time and snapshot times with
    /// the desk-scale overrides, if any.
    pub fn apply_desk_scale(&mut self) -> bool {
        let Some(d) = self.desk_scale.clone() else { return false };
        if let Some(m) = d.mesh {
            self.mesh = m;
        }
        if let Some(p) = d.degree {
            self.degree = p;
        }
        if let Some(dt) = d.dt {
            self.time.dt = dt;
        }
        if let Some(t) = d.t_end {
            self.time.t_end = t;
        }
        if let Some(s) = d.snapshots {
            self.output.snapshots = s;
        }
        true
    }

    pub fn validate(&self) -> CResult<()> {
        check(self.version == SCHEMA_VERSION, "version", format!("unsupported schema version {} (expected {SCHEMA_VERSION})", self.version))?;
        check(self.degree >= 1, "degree", "polynomial degree must be at least 1")?;
        check_mesh_spec(&self.mesh, "mesh")?;
        if let Some(d) = &self.desk_scale {
            if let Some(m) = &d.mesh {
                check_mesh_spec(m, "desk_scale.mesh")?;
            }
            check(d.degree.map(|p| p >= 1).unwrap_or(true), "desk_scale.degree", "must be at least 1")?;
            check(d.dt.map(|v| v > 0.0).unwrap_or(true), "desk_scale.dt", "must be positive")?;
        }

        let t = &self.time;
        check(t.dt > 0.0 && t.dt.is_finite(), "time.dt", "time step must be positive")?;
        check(t.t_end >= t.dt, "time.t_end", format!("final time {} is shorter than one step {}", t.t_end, t.dt))?;
        polydg::timeint::step_count(t.t_end, 0.0, t.dt).map_err(|e| ConfigError::new("time.t_end", e.to_string()))?;
        t.integrator.params(t.dt).map_err(|e| ConfigError::new("time.integrator", e.to_string()))?;
        self.penalties.validate().map_err(|e| ConfigError::new("penalties", e.to_string()))?;
        self.solver.validate().map_err(|e| ConfigError::new("solver", e.to_string()))?;

        for (k, m) in &self.materials.elastic {
            m.validate().map_err(|e| ConfigError::new(format!("materials.elastic.{k}"), e.to_string()))?;
        }
        for (k, m) in &self.materials.poro {
            m.validate().map_err(|e| ConfigError::new(format!("materials.poro.{k}"), e.to_string()))?;
        }
        for (k, m) in &self.materials.acoustic {
            m.validate().map_err(|e| ConfigError::new(format!("materials.acoustic.{k}"), e.to_string()))?;
        }

        for (i, r) in self.regions.iter().enumerate() {
            let ok = match self.kind {
                ProblemKind::Elastic => r.physics == Physics::Elastic,
                ProblemKind::Poro => r.physics == Physics::Poroelastic,
                ProblemKind::Coupled => r.physics != Physics::Elastic,
            };
            check(ok, format!("regions[{i}].physics"), format!("{} elements are not allowed in a {} problem", r.physics.name(), self.kind.name()))?;
        }
        check(
            (0.0..=1.0).contains(&self.interfaces.tau),
            "interfaces.tau",
            "interface permeability must lie in [0, 1]",
        )?;
        for (i, r) in self.interfaces.rules.iter().enumerate() {
            check((0.0..=1.0).contains(&r.tau), format!("interfaces.rules[{i}].tau"), "interface permeability must lie in [0, 1]")?;
        }

        if self.manufactured {
            check(self.sources.is_empty(), "sources", "manufactured runs take their loads from the exact solution")?;
        }
        for (i, s) in self.sources.iter().enumerate() {
            let path = format!("sources[{i}]");
            s.wavelet().validate().map_err(|e| ConfigError::new(format!("{path}.wavelet"), e.to_string()))?;
            match s.field() {
                Field::U => Ok(()),
                Field::W => check(self.kind != ProblemKind::Elastic, format!("{path}.field"), "an elastic problem has no filtration unknown"),
                Field::Phi => check(self.kind == ProblemKind::Coupled, format!("{path}.field"), "only coupled problems have an acoustic potential"),
            }?;
            match s {
                SourceSpec::PointForce(PointForceSource { at, direction, .. }) => {
                    finite_point(*at, &format!("{path}.at"))?;
                    finite_point(*direction, &format!("{path}.direction"))?;
                }
                SourceSpec::DoubleCouple(DoubleCoupleSource { at, m0, slip, normal, .. }) => {
                    finite_point(*at, &format!("{path}.at"))?;
                    check(m0.is_finite(), format!("{path}.m0"), "must be finite")?;
                    finite_point(*slip, &format!("{path}.slip"))?;
                    finite_point(*normal, &format!("{path}.normal"))?;
                }
                SourceSpec::Disk(DiskSource { center, radius, direction, .. }) => {
                    finite_point(*center, &format!("{path}.center"))?;
                    check(*radius > 0.0 && radius.is_finite(), format!("{path}.radius"), "must be positive")?;
                    finite_point(*direction, &format!("{path}.direction"))?;
                }
                SourceSpec::Line(LineSource { y, direction, .. }) => {
                    check(y.is_finite(), format!("{path}.y"), "must be finite")?;
                    finite_point(*direction, &format!("{path}.direction"))?;
                }
            }
        }

        let o = &self.output;
        check(o.energy_every >= 1, "output.energy_every", "must be at least 1")?;
        check(o.probe_every >= 1, "output.probe_every", "must be at least 1")?;
        check(o.snapshot_every.map(|s| s >= 1).unwrap_or(true), "output.snapshot_every", "must be at least 1")?;
        check((1..=16).contains(&o.samples), "output.samples", "must lie in 1..=16")?;
        for (i, p) in o.probes.iter().enumerate() {
            finite_point(*p, &format!("output.probes[{i}]"))?;
        }
        for (i, s) in o.snapshots.iter().enumerate() {
            check(*s >= 0.0 && *s <= t.t_end + 0.5 * t.dt, format!("output.snapshots[{i}]"), format!("time {s} outside [0, {}]", t.t_end))?;
        }
        Ok(())
    }

    fn default_label(&self) -> Subdomain {
        match self.kind {
            ProblemKind::Elastic => Subdomain::new(Physics::Elastic, 0),
            _ => Subdomain::new(Physics::Poroelastic, 0),
        }
    }

    /// Builds, labels and classifies the mesh. `base_dir` resolves relative mesh paths.
    pub fn build_mesh(&self, base_dir: &Path) -> anyhow::Result<PolyMesh> {
        let rect = |d: &[Point; 2]| Rect::new(d[0], d[1]);
        let mut mesh = match &self.mesh {
            MeshSpec::Manufactured(ManufacturedMesh { n_elements, target_h, seed, lloyd }) => {
                let tau = self.interfaces.tau;
                return Ok(match (n_elements, target_h) {
                    (Some(n), _) => manufactured_mesh(self.kind, *n, *seed, *lloyd, tau)?,
                    (None, Some(h)) => mesh_for_h(self.kind, *h, *seed, *lloyd, tau)?.0,
                    (None, None) => unreachable!("validated"),
                });
            }
            MeshSpec::Voronoi(VoronoiMesh { domain, n_elements, lloyd, seed, mirror }) => {
                let m = generate_voronoi_mesh(&rect(domain), *n_elements, *lloyd, *seed)?;
                match mirror {
                    Some(mr) => m.reflected_union(mr.axis, mr.line)?,
                    None => m,
                }
            }
            MeshSpec::Structured(StructuredMesh { domain, nx, ny, cells }) => match cells {
                CellShape::Quads => structured_quads(&rect(domain), *nx, *ny)?,
                CellShape::Triangles => structured_triangles(&rect(domain), *nx, *ny)?,
            },
            MeshSpec::File(FileMesh { path }) => {
                let p = if path.is_absolute() { path.clone() } else { base_dir.join(path) };
                read_mesh(&p).map_err(|e| anyhow::anyhow!("mesh file {}: {e}", p.display()))?
            }
        };
        let default = self.default_label();
        let rules = self.regions.clone();
        mesh.assign_subdomains(|c| rules.iter().find(|r| r.at.contains(c)).map(|r| Subdomain::new(r.physics, r.region)).unwrap_or(default));
        let b = self.boundary.clone();
        let tau = self.interfaces.clone();
        mesh.classify_boundary(|p| Some(b.rules.iter().find(|r| r.at.contains(p)).map(|r| r.kind).unwrap_or(b.default)), |p| tau.tau_at(p))?;
        Ok(mesh)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "version": 1,
        "kind": "elastic",
        "mesh": {"type": "structured", "domain": [[0, 0], [1, 1]], "nx": 2, "ny": 2},
        "materials": {"elastic": {"0": {"rho": 1, "lambda": 1, "mu": 1}}},
        "degree": 1,
        "time": {"dt": 0.01, "t_end": 0.1}
    }"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let c = RunConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.time.integrator, Integrator::default());
        assert_eq!(c.output.energy_every, 10);
        assert_eq!(c.boundary.default, BoundaryKind::Dirichlet);
        assert_eq!(c.penalties, Penalties::default());
        let m = c.build_mesh(Path::new(".")).unwrap();
        assert_eq!(m.n_elements(), 4);
    }

    #[test]
    fn round_trips_through_json() {
        let c = RunConfig::from_json(MINIMAL).unwrap();
        assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn errors_carry_field_paths() {
        let bad_dt = MINIMAL.replace("\"dt\": 0.01", "\"dt\": -1");
        assert_eq!(RunConfig::from_json(&bad_dt).unwrap_err().path, "time.dt");
        let typo = MINIMAL.replace("\"nx\": 2", "\"nx\": \"two\"");
        assert_eq!(RunConfig::from_json(&typo).unwrap_err().path, "mesh.nx");
        let short = MINIMAL.replace("\"t_end\": 0.1", "\"t_end\": 0.001");
        assert_eq!(RunConfig::from_json(&short).unwrap_err().path, "time.t_end");
        let unknown = MINIMAL.replace("\"degree\": 1", "\"degree\": 1, \"degre\": 2");
        assert!(RunConfig::from_json(&unknown).is_err());
        let wrong_kind = MINIMAL.replace("\"degree\": 1", "\"degree\": 1, \"regions\": [{\"physics\": \"acoustic\", \"where\": \"all\"}]");
        assert_eq!(RunConfig::from_json(&wrong_kind).unwrap_err().path, "regions[0].physics");
        let version = MINIMAL.replace("\"version\": 1", "\"version\": 7");
        assert_eq!(RunConfig::from_json(&version).unwrap_err().path, "version");
    }

    #[test]
    fn region_rules_label_elements() {
        let text = MINIMAL.replace("\"kind\": \"elastic\"", "\"kind\": \"coupled\"").replace(
            "\"degree\": 1",
            "\"degree\": 1, \"regions\": [{\"physics\": \"acoustic\", \"where\": {\"above\": 0.5}}], \"interfaces\": {\"tau\": 0}",
        );
        let c = RunConfig::from_json(&text).unwrap();
        let m = c.build_mesh(Path::new(".")).unwrap();
        let ac = (0..m.n_elements()).filter(|&k| m.subdomain(k).physics == Physics::Acoustic).count();
        assert_eq!(ac, 2);
        assert_eq!(m.faces().iter().filter(|f| f.tag == polydg::mesh::FaceTag::InterfaceSealed).count(), 2);
    }
}
