use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use polydg::forms::ProblemKind;
use polydg::mesh::Rect;
use polydg::verification::MeshSeries;
use polydg_cli::commands::{
    load_or_generate_mesh, override_voronoi, parse_domain, regularity, regularity_text, run_suite, SuiteConfig, SuiteMode, VoronoiArg,
};
use polydg_cli::config::{FileMesh, MeshSpec};
use polydg_cli::demos::demo_config;
use polydg_cli::run::{build_system, dump_operators};
use polydg_cli::{run_config, RunConfig, RunOptions, RunSummary};

#[derive(Parser)]
#[command(name = "polydg", version, about = "Polygonal discontinuous Galerkin solver for elastic, poro-elastic and poro-acoustic waves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configured case.
    Run {
        config: PathBuf,
        /// Output directory (overrides `output.dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Use the config's reduced-resolution settings.
        #[arg(long)]
        desk_scale: bool,
        /// Replace the configured mesh by a mesh file.
        #[arg(long, conflicts_with = "voronoi")]
        mesh: Option<PathBuf>,
        /// Replace the configured mesh by a Voronoi mesh, e.g. "n=64 seed=3".
        #[arg(long)]
        voronoi: Option<VoronoiArg>,
        /// Also write the assembled operators in Matrix Market format.
        #[arg(long)]
        dump_operators: bool,
        /// Fill the wall-time column of the error CSV.
        #[arg(long)]
        timings: bool,
    },
    /// Run one of the built-in physical demos.
    Demo {
        /// One of layered-elastic, layered-poro, poro-acoustic.
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        desk_scale: bool,
        /// Print the demo's JSON config instead of running it.
        #[arg(long)]
        print_config: bool,
    },
    /// Run an h- or p-convergence suite on the manufactured solutions.
    Converge {
        /// Suite config (JSON); defaults to the standard suite of `--kind`.
        config: Option<PathBuf>,
        #[arg(long, default_value = "elastic")]
        kind: ProblemKind,
        #[arg(long, value_parser = parse_mode, default_value = "h")]
        mode: SuiteMode,
        /// Degrees, e.g. 2,3,4.
        #[arg(long, value_delimiter = ',')]
        degrees: Option<Vec<usize>>,
        /// Target mesh sizes of an h-suite.
        #[arg(long = "h", value_delimiter = ',', conflicts_with = "cells")]
        hs: Option<Vec<f64>>,
        /// Cell counts of an h-suite.
        #[arg(long, value_delimiter = ',')]
        cells: Option<Vec<usize>>,
        /// Cell count of a p-suite.
        #[arg(long)]
        n_el: Option<usize>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out/converge")]
        out: PathBuf,
        #[arg(long)]
        timings: bool,
    },
    /// Report polytopic-regularity diagnostics of a mesh.
    Regularity {
        #[arg(long, conflicts_with = "voronoi")]
        mesh: Option<PathBuf>,
        #[arg(long)]
        voronoi: Option<VoronoiArg>,
        /// Domain of a generated mesh: x0,y0,x1,y1.
        #[arg(long, value_parser = parse_domain, default_value = "0,0,1,1")]
        domain: Rect,
        /// Per-element CSV output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Assemble a configured case and write M, D and A in Matrix Market format.
    DumpOperators {
        config: PathBuf,
        #[arg(long, default_value = "out/operators")]
        out: PathBuf,
        #[arg(long)]
        desk_scale: bool,
    },
}

fn parse_mode(s: &str) -> Result<SuiteMode, String> {
    match s {
        "h" => Ok(SuiteMode::H),
        "p" => Ok(SuiteMode::P),
        _ => Err(format!("unknown mode '{s}' (expected h or p)")),
    }
}

fn config_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."))
}

fn report(s: &RunSummary) {
    println!("{}: {} elements, h = {:.4e}, {} dofs, {} steps", s.name, s.n_elements, s.h, s.dofs, s.steps);
    println!("energy: initial {:.6e}, max {:.6e}, final {:.6e}", s.energy_initial, s.energy_max, s.energy_final);
    if let Some(e) = &s.error {
        println!("energy error {:.6e}, L2(u) error {:.6e}", e.energy_error, e.l2_u);
    }
    println!("{} snapshot(s) in {}", s.snapshots.len(), s.out_dir.display());
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn real_main() -> anyhow::Result<()> {
    polydg_cli::init_threads()?;
    match Cli::parse().command {
        Command::Run { config, out, desk_scale, mesh, voronoi, dump_operators, timings } => {
            let mut cfg = RunConfig::from_file(&config)?;
            if let Some(m) = mesh {
                let m = std::fs::canonicalize(&m).with_context(|| format!("mesh file {}", m.display()))?;
                cfg.mesh = MeshSpec::File(FileMesh { path: m });
                if let Some(d) = cfg.desk_scale.as_mut() {
                    d.mesh = None;
                }
            }
            if let Some(v) = voronoi {
                if desk_scale {
                    cfg.apply_desk_scale();
                    cfg.desk_scale = None;
                }
                override_voronoi(&mut cfg, v)?;
            }
            let opts = RunOptions { out_dir: out, desk_scale, dump_operators, timings, base_dir: Some(config_dir(&config)) };
            report(&run_config(&cfg, &opts)?);
        }
        Command::Demo { name, out, desk_scale, print_config } => {
            let cfg = demo_config(&name)?;
            if print_config {
                println!("{}", cfg.to_json());
                return Ok(());
            }
            let opts = RunOptions { out_dir: out, desk_scale, ..Default::default() };
            report(&run_config(&cfg, &opts)?);
        }
        Command::Converge { config, kind, mode, degrees, hs, cells, n_el, dt, t_end, seed, out, timings } => {
            let mut suite = match config {
                Some(p) => SuiteConfig::from_json(&std::fs::read_to_string(&p).with_context(|| format!("cannot read {}", p.display()))?)?,
                None => SuiteConfig::standard(kind, mode),
            };
            if let Some(d) = degrees {
                suite.degrees = d;
            }
            if let Some(h) = hs {
                suite.meshes = Some(MeshSeries::TargetH(h));
            }
            if let Some(c) = cells {
                suite.meshes = Some(MeshSeries::Cells(c));
            }
            if let Some(n) = n_el {
                suite.n_elements = Some(n);
            }
            if let Some(dt) = dt {
                suite.case.dt = dt;
            }
            if let Some(t) = t_end {
                suite.case.t_end = t;
            }
            if let Some(s) = seed {
                suite.seed = s;
            }
            let res = run_suite(&suite, &out, timings)?;
            for r in &res.reports {
                println!("{:<24} h={:.4} p={} err_energy={:.4e} err_L2_u={:.4e}", r.run_id, r.h, r.p, r.energy_error, r.l2_u);
            }
            for d in &res.rates {
                let pw: Vec<String> = d.pairwise.iter().map(|r| r.map(|v| format!("{v:.2}")).unwrap_or("-".into())).collect();
                println!("p={} pairwise [{}] least-squares {}", d.p, pw.join(", "), d.least_squares.map(|v| format!("{v:.3}")).unwrap_or("-".into()));
            }
            if let Some(c) = res.p_correlation {
                println!("correlation of log L2 error with p: {c:.4}");
            }
            println!("wrote {} and {}", res.csv.display(), res.rates_csv.display());
        }
        Command::Regularity { mesh, voronoi, domain, out } => {
            let m = load_or_generate_mesh(mesh.as_deref(), voronoi, domain)?;
            let r = regularity(&m);
            let (summary, csv) = regularity_text(&m, &r);
            print!("{summary}");
            if let Some(o) = out {
                std::fs::write(&o, csv).with_context(|| format!("cannot write {}", o.display()))?;
            }
        }
        Command::DumpOperators { config, out, desk_scale } => {
            let mut cfg = RunConfig::from_file(&config)?;
            if desk_scale {
                cfg.apply_desk_scale();
            }
            let mesh = cfg.build_mesh(&config_dir(&config))?;
            let (sys, _) = build_system(&cfg, std::sync::Arc::new(mesh))?;
            for p in dump_operators(&sys, &out)? {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}
