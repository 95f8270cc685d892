//! Single-case driver: assemble, integrate, write artifacts.

use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use anyhow::Context;
use polydg::analysis::{compute_errors, EnergyBreakdown, EnergyMonitor, ErrorReport};
use polydg::forms::{build_block_system, BlockSystem, LoadTerm};
use polydg::linalg::write_matrix_market;
use polydg::mesh::PolyMesh;
use polydg::sources::{disk_load, double_couple_load, double_couple_tensor, line_load, point_force_load, manufactured::Manufactured};
use polydg::timeint::{initial_state, integrate, step_count, State};
use polydg::verification::{manufactured_system, CaseSpec};
use serde::Serialize;

use crate::config::{DiskSource, DoubleCoupleSource, Field, LineSource, PointForceSource, RunConfig, SourceSpec};
use crate::output::{write_vtk, ProbeSet};

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Overrides `output.dir`.
    pub out_dir: Option<PathBuf>,
    /// Apply the config's desk-scale overrides.
    pub desk_scale: bool,
    /// Write `M`, `D` and `A` in Matrix Market format.
    pub dump_operators: bool,
    /// Fill the `wall_s` column of the error CSV (breaks byte-identical reruns).
    pub timings: bool,
    /// Directory that relative mesh paths are resolved against.
    pub base_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub name: String,
    pub kind: String,
    pub out_dir: PathBuf,
    pub n_elements: usize,
    pub h: f64,
    pub dofs: usize,
    pub steps: usize,
    pub energy_initial: f64,
    pub energy_max: f64,
    pub energy_final: f64,
    pub snapshots: Vec<PathBuf>,
    pub error: Option<ErrorReport>,
    pub max_solver_iterations: usize,
    pub max_rel_residual: f64,
    pub assembly_s: f64,
    pub integration_s: f64,
}

/// Loads of the configured sources, one term per source.
pub fn source_loads(cfg: &RunConfig, sys: &BlockSystem) -> anyhow::Result<Vec<LoadTerm>> {
    let n = sys.n_dofs();
    let mut out = Vec::new();
    for (i, s) in cfg.sources.iter().enumerate() {
        let ctx = || format!("sources[{i}]");
        let (space, offset) = match s.field() {
            Field::U => (&sys.space, sys.layout.u.start),
            Field::W => (&sys.space, sys.layout.w.clone().context("no filtration unknown")?.start),
            Field::Phi => (
                sys.acoustic_space.as_ref().context("no acoustic unknown")?,
                sys.layout.phi.clone().context("no acoustic unknown")?.start,
            ),
        };
        let local = match s {
            SourceSpec::PointForce(PointForceSource { at, direction, .. }) => point_force_load(space, *at, *direction),
            SourceSpec::DoubleCouple(DoubleCoupleSource { at, m0, slip, normal, .. }) => double_couple_load(space, *at, double_couple_tensor(*m0, *slip, *normal)),
            SourceSpec::Disk(DiskSource { center, radius, direction, normalized, .. }) => disk_load(space, *center, *radius, *direction).map(|mut v| {
                if !normalized {
                    // the disk is a regular 64-gon
                    let area = 32.0 * radius * radius * (2.0 * std::f64::consts::PI / 64.0).sin();
                    v.iter_mut().for_each(|x| *x *= area);
                }
                v
            }),
            SourceSpec::Line(LineSource { y, direction, .. }) => line_load(space, *y, *direction),
        }
        .with_context(ctx)?;
        let mut v = vec![0.0; n];
        v[offset..offset + local.len()].copy_from_slice(&local);
        let w = s.wavelet().clone();
        out.push(LoadTerm::new(move |t| w.eval(t), v));
    }
    Ok(out)
}

fn case_spec(cfg: &RunConfig) -> CaseSpec {
    CaseSpec {
        kind: cfg.kind,
        p: cfg.degree,
        dt: cfg.time.dt,
        t_end: cfg.time.t_end,
        integrator: cfg.time.integrator,
        penalties: cfg.penalties,
        tau: cfg.interfaces.tau,
        cadence: cfg.output.energy_every,
        solver: cfg.solver,
    }
}

/// Assembles the system described by `cfg` on `mesh`, with the manufactured
/// solution when configured.
pub fn build_system(cfg: &RunConfig, mesh: Arc<PolyMesh>) -> anyhow::Result<(BlockSystem, Option<Manufactured>)> {
    if cfg.manufactured {
        let (sys, case) = manufactured_system(&case_spec(cfg), mesh)?;
        return Ok((sys, Some(case)));
    }
    cfg.materials.check_mesh(&mesh).map_err(|e| anyhow::anyhow!("invalid config at `materials`: {e}"))?;
    let mut sys = build_block_system(cfg.kind, mesh, cfg.degree, &cfg.materials, cfg.penalties)?;
    for l in source_loads(cfg, &sys)? {
        sys.add_load(l)?;
    }
    Ok((sys, None))
}

/// Writes `mass.mtx`, `damping.mtx` and `stiffness.mtx` into `dir`.
pub fn dump_operators(sys: &BlockSystem, dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    for (name, m) in [("mass", &sys.mass), ("damping", &sys.damping), ("stiffness", &sys.stiffness)] {
        let p = dir.join(format!("{name}.mtx"));
        write_matrix_market(m, &p)?;
        out.push(p);
    }
    Ok(out)
}

fn snapshot_steps(cfg: &RunConfig, nsteps: usize) -> BTreeSet<usize> {
    let mut s: BTreeSet<usize> = cfg.output.snapshots.iter().map(|t| ((t / cfg.time.dt).round() as usize).min(nsteps)).collect();
    if let Some(every) = cfg.output.snapshot_every {
        s.extend((0..=nsteps).step_by(every));
    }
    s
}

fn csv_writer(path: &Path, header: &str) -> anyhow::Result<BufWriter<File>> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?);
    writeln!(w, "{header}")?;
    Ok(w)
}

/// Energy CSV header: the step index followed by the breakdown columns.
pub fn energy_header() -> String {
    format!("step,{}", EnergyBreakdown::CSV_HEADER)
}

/// Error CSV row, with `wall_s` left empty unless timings are requested.
pub fn error_row(r: &ErrorReport, timings: bool) -> String {
    let row = r.csv_row();
    if timings {
        row
    } else {
        let cut = row.rfind(',').expect("error rows have several columns");
        format!("{},", &row[..cut])
    }
}

/// Runs one configured case and writes its artifacts.
pub fn run_config(cfg: &RunConfig, opts: &RunOptions) -> anyhow::Result<RunSummary> {
    let start = Instant::now();
    let mut cfg = cfg.clone();
    if opts.desk_scale && !cfg.apply_desk_scale() {
        log::warn!("--desk-scale given but the config has no desk_scale section");
    }
    cfg.validate()?;
    let out_dir = opts.out_dir.clone().unwrap_or_else(|| cfg.output.dir.clone());
    fs::create_dir_all(&out_dir).with_context(|| format!("cannot create {}", out_dir.display()))?;
    let base = opts.base_dir.clone().unwrap_or_else(|| PathBuf::from("."));

    let mesh = Arc::new(cfg.build_mesh(&base)?);
    let (sys, exact) = build_system(&cfg, mesh.clone())?;
    let name = if cfg.name.is_empty() { cfg.kind.name().to_string() } else { cfg.name.clone() };
    log::info!("{name}: {} elements, h = {:.4e}, {} dofs", mesh.n_elements(), mesh.h(), sys.n_dofs());
    if opts.dump_operators {
        dump_operators(&sys, &out_dir.join("operators"))?;
    }

    let (x0, z0) = match &exact {
        Some(case) => case.initial_state(&sys, 0.0)?,
        None => (vec![0.0; sys.n_dofs()], vec![0.0; sys.n_dofs()]),
    };
    let s0 = initial_state(&sys, x0, z0, 0.0, cfg.solver)?;
    let params = cfg.time.integrator.params(cfg.time.dt)?;
    let nsteps = step_count(cfg.time.t_end, 0.0, cfg.time.dt)?;
    let assembly_s = start.elapsed().as_secs_f64();

    let mut energy_mon = EnergyMonitor::new(&sys, None)?;
    let mut error_mon = match &exact {
        Some(c) => Some(EnergyMonitor::new(&sys, Some(c))?),
        None => None,
    };
    let probes = ProbeSet::new(&sys, &cfg.output.probes)?;
    let snaps = snapshot_steps(&cfg, nsteps);
    let mut energy_csv = csv_writer(&out_dir.join("energy.csv"), &energy_header())?;
    let mut probe_csv = match probes.points.is_empty() {
        true => None,
        false => Some(csv_writer(&out_dir.join("probes.csv"), &probes.header())?),
    };
    let mut snapshots = Vec::new();
    let (mut e0, mut emax, mut elast) = (None, 0.0f64, 0.0);
    let mut last_err: Option<EnergyBreakdown> = None;
    let every = cfg.output.energy_every;

    let mut observe = |k: usize, s: &State| -> anyhow::Result<()> {
        if k % every == 0 || k == nsteps {
            let b = energy_mon.observe(s)?;
            writeln!(energy_csv, "{k},{}", b.csv_row())?;
            let e = b.total();
            e0.get_or_insert(e);
            emax = emax.max(e);
            elast = e;
            if let Some(m) = error_mon.as_mut() {
                last_err = Some(m.observe(s)?);
            }
        }
        if let Some(w) = probe_csv.as_mut() {
            if k % cfg.output.probe_every == 0 || k == nsteps {
                writeln!(w, "{}", probes.row(&sys, s.t, &s.x, &s.z))?;
            }
        }
        if snaps.contains(&k) {
            let p = out_dir.join(format!("snapshot_{k:06}.vtk"));
            write_vtk(&p, &sys, s.t, &s.x, &s.z, cfg.output.samples)?;
            snapshots.push(p);
        }
        Ok(())
    };
    let mut deferred: Option<anyhow::Error> = None;
    let res = integrate(&sys, s0, cfg.time.t_end, params, cfg.solver, |k, s| {
        observe(k, s).map_err(|e| {
            let msg = e.to_string();
            deferred = Some(e);
            polydg::Error::InvalidInput(msg)
        })
    });
    let (_, stats) = match res {
        Ok(r) => r,
        Err(e) => return Err(deferred.unwrap_or_else(|| anyhow::Error::new(e))),
    };
    energy_csv.flush()?;
    if let Some(w) = probe_csv.as_mut() {
        w.flush()?;
    }
    let integration_s = stats.wall_s;

    let error = match (&error_mon, &last_err) {
        (Some(m), Some(b)) => {
            let r = compute_errors(m, b, &name, start.elapsed().as_secs_f64())?;
            let mut w = csv_writer(&out_dir.join("errors.csv"), ErrorReport::CSV_HEADER)?;
            writeln!(w, "{}", error_row(&r, opts.timings))?;
            w.flush()?;
            Some(r)
        }
        _ => None,
    };

    let summary = RunSummary {
        name,
        kind: cfg.kind.name().into(),
        out_dir: out_dir.clone(),
        n_elements: mesh.n_elements(),
        h: mesh.h(),
        dofs: sys.n_dofs(),
        steps: stats.steps,
        energy_initial: e0.unwrap_or(0.0),
        energy_max: emax,
        energy_final: elast,
        snapshots,
        error,
        max_solver_iterations: stats.max_iterations,
        max_rel_residual: stats.max_rel_residual,
        assembly_s,
        integration_s,
    };
    write_meta(&out_dir, &cfg, &summary, start.elapsed().as_secs_f64())?;
    Ok(summary)
}

/// Timings and run facts; kept out of the CSVs so those are reproducible.
fn write_meta(dir: &Path, cfg: &RunConfig, s: &RunSummary, wall_s: f64) -> anyhow::Result<()> {
    let meta = serde_json::json!({
        "polydg_version": env!("CARGO_PKG_VERSION"),
        "threads": rayon::current_num_threads(),
        "wall_s": wall_s,
        "summary": s,
        "config": cfg,
    });
    fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}
