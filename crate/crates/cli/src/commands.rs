//! Convergence suites, mesh regularity reports and small argument parsers.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use polydg::analysis::{convergence_rates, correlation, ErrorReport};
use polydg::forms::ProblemKind;
use polydg::mesh::{generate_voronoi_mesh, read_mesh, regularity_report, PolyMesh, Rect, RegularityReport};
use polydg::verification::{h_suite, p_suite, CaseSpec, MeshSeries};
use serde::{Deserialize, Serialize};

use crate::config::{ManufacturedMesh, MeshSpec, RunConfig, VoronoiMesh, SCHEMA_VERSION};
use crate::run::error_row;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteMode {
    #[default]
    H,
    P,
}

impl SuiteMode {
    pub fn name(self) -> &'static str {
        match self {
            SuiteMode::H => "h",
            SuiteMode::P => "p",
        }
    }
}

fn default_lloyd() -> usize {
    10
}

/// An h-suite (every degree on every mesh) or a p-suite (one mesh, several degrees).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub version: u32,
    pub mode: SuiteMode,
    pub case: CaseSpec,
    /// Meshes of an h-suite.
    #[serde(default)]
    pub meshes: Option<MeshSeries>,
    /// Cell count of the p-suite mesh.
    #[serde(default)]
    pub n_elements: Option<usize>,
    pub degrees: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_lloyd")]
    pub lloyd: usize,
}

impl SuiteConfig {
    /// The published setup: h ≈ {0.35, 0.26, 0.19, 0.13} with p = 2..4, or
    /// p = 1..5 on a fixed mesh.
    pub fn standard(kind: ProblemKind, mode: SuiteMode) -> Self {
        let n_el = if kind == ProblemKind::Elastic { 160 } else { 100 };
        Self {
            version: SCHEMA_VERSION,
            mode,
            case: CaseSpec::standard(kind),
            meshes: (mode == SuiteMode::H).then(|| MeshSeries::TargetH(vec![0.35, 0.26, 0.19, 0.13])),
            n_elements: (mode == SuiteMode::P).then_some(n_el),
            degrees: match mode {
                SuiteMode::H => vec![2, 3, 4],
                SuiteMode::P => vec![1, 2, 3, 4, 5],
            },
            seed: 1,
            lloyd: 10,
        }
    }

    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let s: SuiteConfig = serde_path_to_error::deserialize(de).map_err(|e| anyhow::anyhow!("invalid suite config at `{}`: {}", e.path(), e.inner()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        anyhow::ensure!(self.version == SCHEMA_VERSION, "invalid suite config at `version`: expected {SCHEMA_VERSION}");
        self.case.validate().map_err(|e| anyhow::anyhow!("invalid suite config at `case`: {e}"))?;
        anyhow::ensure!(!self.degrees.is_empty() && self.degrees.iter().all(|&p| p >= 1), "invalid suite config at `degrees`: need degrees >= 1");
        match self.mode {
            SuiteMode::H => anyhow::ensure!(self.meshes.is_some(), "invalid suite config at `meshes`: an h-suite needs a mesh series"),
            SuiteMode::P => anyhow::ensure!(self.n_elements.is_some(), "invalid suite config at `n_elements`: a p-suite needs a cell count"),
        }
        Ok(())
    }
}

/// Rates of one degree in an h-suite.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeRates {
    pub p: usize,
    pub hs: Vec<f64>,
    pub errors: Vec<f64>,
    pub pairwise: Vec<Option<f64>>,
    pub least_squares: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub reports: Vec<ErrorReport>,
    pub rates: Vec<DegreeRates>,
    /// p-suite: correlation of log L² error (of u) against p.
    pub p_correlation: Option<f64>,
    pub csv: PathBuf,
    pub rates_csv: PathBuf,
}

/// Groups h-suite rows by degree and computes the rates of the energy error.
pub fn rates_by_degree(reports: &[ErrorReport]) -> anyhow::Result<Vec<DegreeRates>> {
    let mut degrees: Vec<usize> = reports.iter().map(|r| r.p).collect();
    degrees.sort_unstable();
    degrees.dedup();
    degrees
        .into_iter()
        .map(|p| {
            let rows: Vec<&ErrorReport> = reports.iter().filter(|r| r.p == p).collect();
            let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
            let errors: Vec<f64> = rows.iter().map(|r| r.energy_error).collect();
            let r = convergence_rates(&errors, &hs)?;
            Ok(DegreeRates { p, hs, errors, pairwise: r.pairwise, least_squares: r.least_squares })
        })
        .collect()
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_default()
}

/// Runs the suite and writes `<kind>-<mode>.csv` (error rows) and
/// `<kind>-<mode>-rates.csv` into `out`.
pub fn run_suite(suite: &SuiteConfig, out: &Path, timings: bool) -> anyhow::Result<SuiteResult> {
    suite.validate()?;
    fs::create_dir_all(out)?;
    let kind = suite.case.kind;
    let reports = match suite.mode {
        SuiteMode::H => h_suite(&suite.case, suite.meshes.as_ref().unwrap(), &suite.degrees, suite.seed, suite.lloyd)?,
        SuiteMode::P => p_suite(&suite.case, suite.n_elements.unwrap(), &suite.degrees, suite.seed, suite.lloyd)?,
    };
    let stem = format!("{}-{}", kind.name(), suite.mode.name());
    let csv = out.join(format!("{stem}.csv"));
    let mut text = format!("{}\n", ErrorReport::CSV_HEADER);
    for r in &reports {
        let _ = writeln!(text, "{}", error_row(r, timings));
    }
    fs::write(&csv, text).with_context(|| format!("cannot write {}", csv.display()))?;

    let rates_csv = out.join(format!("{stem}-rates.csv"));
    let mut rt = String::new();
    let (rates, p_correlation) = match suite.mode {
        SuiteMode::H => {
            let rates = rates_by_degree(&reports)?;
            rt.push_str("kind,p,pair,rate\n");
            for d in &rates {
                for (i, r) in d.pairwise.iter().enumerate() {
                    let _ = writeln!(rt, "{},{},{}-{},{}", kind.name(), d.p, i, i + 1, fmt_opt(*r));
                }
                let _ = writeln!(rt, "{},{},least-squares,{}", kind.name(), d.p, fmt_opt(d.least_squares));
            }
            (rates, None)
        }
        SuiteMode::P => {
            let ps: Vec<f64> = reports.iter().map(|r| r.p as f64).collect();
            let le: Vec<f64> = reports.iter().map(|r| r.l2_u.ln()).collect();
            let c = correlation(&ps, &le);
            rt.push_str("kind,n_elements,quantity,value\n");
            let _ = writeln!(rt, "{},{},corr_log_l2u_vs_p,{}", kind.name(), suite.n_elements.unwrap(), fmt_opt(c));
            (Vec::new(), c)
        }
    };
    fs::write(&rates_csv, rt)?;
    Ok(SuiteResult { reports, rates, p_correlation, csv, rates_csv })
}

/// `n=N seed=S lloyd=L`, as accepted by `--voronoi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VoronoiArg {
    pub n: usize,
    pub seed: u64,
    pub lloyd: usize,
}

impl std::str::FromStr for VoronoiArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let mut v = VoronoiArg { n: 0, seed: 0, lloyd: 10 };
        for tok in s.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
            let (k, val) = tok.split_once('=').ok_or_else(|| format!("expected key=value, got '{tok}'"))?;
            let bad = |_| format!("invalid value '{val}' for {k}");
            match k {
                "n" => v.n = val.parse().map_err(bad)?,
                "seed" => v.seed = val.parse().map_err(bad)?,
                "lloyd" => v.lloyd = val.parse().map_err(bad)?,
                _ => return Err(format!("unknown key '{k}' (expected n, seed, lloyd)")),
            }
        }
        if v.n == 0 {
            return Err("n=N with N >= 1 is required".into());
        }
        Ok(v)
    }
}

/// Replaces the configured mesh by a Voronoi mesh with the same domain, or by
/// a manufactured mesh with the given cell count.
pub fn override_voronoi(cfg: &mut RunConfig, v: VoronoiArg) -> anyhow::Result<()> {
    cfg.mesh = match &cfg.mesh {
        MeshSpec::Voronoi(VoronoiMesh { domain, mirror, .. }) => MeshSpec::Voronoi(VoronoiMesh { domain: *domain, n_elements: v.n, lloyd: v.lloyd, seed: v.seed, mirror: *mirror }),
        MeshSpec::Structured(s) => MeshSpec::Voronoi(VoronoiMesh { domain: s.domain, n_elements: v.n, lloyd: v.lloyd, seed: v.seed, mirror: None }),
        MeshSpec::Manufactured(_) => MeshSpec::Manufactured(ManufacturedMesh { n_elements: Some(v.n), target_h: None, seed: v.seed, lloyd: v.lloyd }),
        MeshSpec::File(_) => anyhow::bail!("--voronoi cannot replace a mesh file (the domain is unknown)"),
    };
    Ok(())
}

/// Parses `x0,y0,x1,y1`.
pub fn parse_domain(s: &str) -> Result<Rect, String> {
    let v: Vec<f64> = s.split(',').map(|t| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}"))).collect::<Result<_, _>>()?;
    if v.len() != 4 || !(v[0] < v[2] && v[1] < v[3]) {
        return Err("expected x0,y0,x1,y1 with x0 < x1 and y0 < y1".into());
    }
    Ok(Rect::new([v[0], v[1]], [v[2], v[3]]))
}

pub fn load_or_generate_mesh(file: Option<&Path>, voronoi: Option<VoronoiArg>, domain: Rect) -> anyhow::Result<PolyMesh> {
    match (file, voronoi) {
        (Some(f), None) => Ok(read_mesh(f)?),
        (None, Some(v)) => Ok(generate_voronoi_mesh(&domain, v.n, v.lloyd, v.seed)?),
        _ => anyhow::bail!("give exactly one of --mesh and --voronoi"),
    }
}

/// Summary lines and a per-element CSV of the regularity diagnostics.
pub fn regularity_text(mesh: &PolyMesh, r: &RegularityReport) -> (String, String) {
    let mut summary = String::new();
    let _ = writeln!(summary, "elements: {}", mesh.n_elements());
    let _ = writeln!(summary, "faces: {}", mesh.n_faces());
    let _ = writeln!(summary, "h: {:.6e}", mesh.h());
    let _ = writeln!(summary, "max face ratio h|F|/(d|S|): {:.6}", r.max_ratio);
    let mut csv = String::from("element,diameter,area,ratio\n");
    for k in 0..mesh.n_elements() {
        let _ = writeln!(csv, "{k},{:.9e},{:.9e},{:.9e}", mesh.diameter(k), mesh.area(k), r.element_ratio[k]);
    }
    (summary, csv)
}

pub fn regularity(mesh: &PolyMesh) -> RegularityReport {
    regularity_report(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn voronoi_arg_parses() {
        let v: VoronoiArg = "n=40 seed=3".parse().unwrap();
        assert_eq!(v, VoronoiArg { n: 40, seed: 3, lloyd: 10 });
        assert!("seed=3".parse::<VoronoiArg>().is_err());
        assert!("n=4 q=1".parse::<VoronoiArg>().is_err());
        assert_eq!("n=5,lloyd=0".parse::<VoronoiArg>().unwrap().lloyd, 0);
    }

    #[test]
    fn domain_parses() {
        let r = parse_domain("0,0,2,1").unwrap();
        assert_eq!(r.max, [2.0, 1.0]);
        assert!(parse_domain("0,0,0,1").is_err());
    }

    #[test]
    fn standard_suites_validate_and_round_trip() {
        for kind in [ProblemKind::Elastic, ProblemKind::Poro, ProblemKind::Coupled] {
            for mode in [SuiteMode::H, SuiteMode::P] {
                let s = SuiteConfig::standard(kind, mode);
                s.validate().unwrap();
                let back = SuiteConfig::from_json(&serde_json::to_string(&s).unwrap()).unwrap();
                assert_eq!(back, s);
            }
        }
    }
}
