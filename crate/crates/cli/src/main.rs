//! `hna`: solves, sweeps and validation runs for the HNA scattering solver.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hna::harness::config::{parse_angle, ExperimentConfig};
use hna::harness::validation::run_validation;
use hna::harness::{
    compute_fields, psi_rows, quad_selfcheck, run_convergence, run_fields, run_reference, solve_hna, space_rows,
    specfun_table, write_angle_csv, write_boundary_csv, write_csv_to, write_psi_csv,
    SolveOptions,
};
use hna::asymptotics::leading_order_all;
use hna::geometry::IncidentWave;
use hna::hna_space::build_space;
use hna::reference_bem::ReferenceConfig;
use hna::{HnaError, Result};

const VALIDATION_FAILED: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "hna", version, about = "HNA Galerkin BEM for scattering by nonconvex polygons")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Experiment configuration (TOML); flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomised checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Polygon file with one "x y" vertex per line.
    #[arg(long, global = true, conflicts_with = "builtin")]
    polygon: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    builtin: Option<Builtin>,
    #[arg(long, global = true, value_enum)]
    operator: Option<Operator>,
    /// Coupling parameter: a positive number or `k`.
    #[arg(long, global = true)]
    eta: Option<String>,
    /// Origin of the star-combined operator as `x,y`.
    #[arg(long, global = true)]
    star_center: Option<String>,
    /// Quadrature points per wavelength (default 14)
    #[arg(long, global = true)]
    ppw: Option<f64>,
    /// Gauss points per panel (default 16)
    #[arg(long, global = true)]
    quad_order: Option<usize>,
    /// Geometric layers in singular rules (default 2p + 4)
    #[arg(long, global = true)]
    quad_layers: Option<usize>,
    /// Mesh grading ratio
    #[arg(long, global = true)]
    sigma: Option<f64>,
    /// `n = n_factor (p + 1)`.
    #[arg(long, global = true)]
    n_factor: Option<usize>,
    /// Boundary density samples (default 100000)
    #[arg(long, global = true)]
    boundary_points: Option<usize>,
    /// Near-field samples on the circle (default 30000)
    #[arg(long, global = true)]
    circle_points: Option<usize>,
    /// Far-field samples (default 30000)
    #[arg(long, global = true)]
    farfield_points: Option<usize>,
    /// Permit wavenumbers above the desk-scale limits.
    #[arg(long, global = true)]
    allow_expensive: bool,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Builtin {
    TestQuad,
    Square,
    Triangle,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Operator {
    Combined,
    Star,
}

#[derive(Args, Debug, Clone)]
struct Problem {
    /// Incidence angle, e.g. `5pi/4` or radians.
    #[arg(long, default_value = "5pi/4", allow_hyphen_values = true)]
    alpha: String,
    #[arg(long, short, default_value_t = 10.0)]
    k: f64,
}

#[derive(Args, Debug, Clone)]
struct Sweep {
    /// Comma-separated incidence angles.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    alphas: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    ks: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    ps: Option<Vec<usize>>,
    #[arg(long)]
    reference_p: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one problem and write its density, circle and far-field samples.
    Solve {
        #[command(flatten)]
        problem: Problem,
        #[arg(long, short, default_value_t = 4)]
        p: usize,
        /// Write the matrix and right-hand side in binary form.
        #[arg(long)]
        dump_system: Option<PathBuf>,
        /// Report the entry drift under doubled quadrature settings.
        #[arg(long)]
        quad_selfcheck: bool,
    },
    /// Error table against a reference degree.
    Convergence {
        #[command(flatten)]
        sweep: Sweep,
    },
    /// Boundary, circle and far-field CSVs; `psi` dumps the leading-order term.
    Fields {
        #[arg(value_enum)]
        what: Option<FieldsWhat>,
        #[command(flatten)]
        sweep: Sweep,
    },
    /// Conventional BEM on a uniform mesh.
    Reference {
        #[command(flatten)]
        problem: Problem,
        /// Elements per wavelength.
        #[arg(long, default_value_t = 20.0)]
        ppw_dof: f64,
        #[arg(long, default_value_t = 0)]
        degree: usize,
    },
    /// Golden-value table of the special functions (CSV on stdout).
    ValidateSpecfun,
    /// Property checks with a JSON verdict.
    Validate {
        /// Skip the reference-solver comparison.
        #[arg(long)]
        quick: bool,
    },
    /// Inspect the approximation space.
    Space {
        #[command(subcommand)]
        action: SpaceAction,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum FieldsWhat {
    Psi,
}

#[derive(Subcommand, Debug)]
enum SpaceAction {
    /// Per-side basis inventory as CSV on stdout.
    Describe {
        #[command(flatten)]
        problem: Problem,
        #[arg(long, short, default_value_t = 4)]
        p: usize,
    },
}

fn parse_pair(text: &str) -> Result<[f64; 2]> {
    let bad = || HnaError::Config(format!("expected x,y, got '{text}'"));
    let (a, b) = text.split_once(',').ok_or_else(bad)?;
    Ok([a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?])
}

fn build_config(g: &Global, sweep: Option<&Sweep>) -> Result<ExperimentConfig> {
    let mut cfg = match &g.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(v) = &g.out {
        cfg.out = v.clone();
    }
    if let Some(v) = g.seed {
        cfg.seed = v;
    }
    if let Some(v) = &g.polygon {
        cfg.polygon_file = Some(v.clone());
    }
    if let Some(b) = g.builtin {
        cfg.polygon_file = None;
        cfg.builtin = match b {
            Builtin::TestQuad => "test-quad",
            Builtin::Square => "square",
            Builtin::Triangle => "triangle",
        }
        .into();
    }
    if let Some(op) = g.operator {
        cfg.operator = match op {
            Operator::Combined => "combined",
            Operator::Star => "star",
        }
        .into();
    }
    if let Some(e) = &g.eta {
        cfg.eta = if e == "k" {
            None
        } else {
            Some(e.parse().map_err(|_| HnaError::Config(format!("eta must be a number or k, got '{e}'")))?)
        };
    }
    if let Some(c) = &g.star_center {
        cfg.star_center = Some(parse_pair(c)?);
    }
    cfg.ppw = g.ppw.or(cfg.ppw);
    cfg.quad_order = g.quad_order.or(cfg.quad_order);
    cfg.quad_layers = g.quad_layers.or(cfg.quad_layers);
    if let Some(v) = g.sigma {
        cfg.sigma = v;
    }
    if let Some(v) = g.n_factor {
        cfg.n_factor = v;
    }
    if let Some(v) = g.boundary_points {
        cfg.boundary_points = v;
    }
    if let Some(v) = g.circle_points {
        cfg.circle_points = v;
    }
    if let Some(v) = g.farfield_points {
        cfg.farfield_points = v;
    }
    cfg.allow_expensive |= g.allow_expensive;
    if let Some(s) = sweep {
        if let Some(v) = &s.alphas {
            cfg.alphas = v.clone();
        }
        if let Some(v) = &s.ks {
            cfg.ks = v.clone();
        }
        if let Some(v) = &s.ps {
            cfg.ps = v.clone();
        }
        if let Some(v) = s.reference_p {
            cfg.reference_p = v;
        }
    }
    Ok(cfg)
}

/// Applies the single-problem values to the sweep lists so validation covers them.
fn single(cfg: &mut ExperimentConfig, problem: &Problem, p: usize) -> Result<f64> {
    let alpha = parse_angle(&problem.alpha)?;
    cfg.alphas = vec![problem.alpha.clone()];
    cfg.ks = vec![problem.k];
    cfg.ps = vec![p];
    cfg.reference_p = p;
    cfg.validate()?;
    Ok(alpha)
}

#[derive(Serialize)]
struct SolveSummary {
    alpha: f64,
    k: f64,
    p: usize,
    n: usize,
    cond: f64,
    residual: f64,
    dof_per_wavelength: f64,
    wall_seconds: f64,
    quad_drift: Option<f64>,
    metadata: hna::galerkin_solver::AssemblyMetadata,
}

fn print_json<T: Serialize>(v: &T) {
    // a closed pipe (e.g. `| head`) is not an error worth a panic
    let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(v).expect("serialisable"));
}

fn run(cli: Cli) -> Result<u8> {
    if let Some(n) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| HnaError::Config(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Solve {
            problem,
            p,
            dump_system,
            quad_selfcheck: selfcheck,
        } => {
            let mut cfg = build_config(&cli.global, None)?;
            let alpha = single(&mut cfg, problem, *p)?;
            cfg.echo()?;
            let poly = cfg.polygon()?;
            let opts = SolveOptions {
                condition_number: true,
                dump_system: dump_system.clone(),
            };
            let run = solve_hna(&poly, alpha, problem.k, *p, &cfg, &opts)?;
            let fields = compute_fields(&poly, &run, &cfg)?;
            let tag = format!("a{:.4}_k{}_p{}", run.alpha, run.k, run.p);
            write_boundary_csv(&cfg.out.join(format!("boundary_{tag}.csv")), &fields.boundary)?;
            write_angle_csv(&cfg.out.join(format!("circle_{tag}.csv")), &fields.circle)?;
            write_angle_csv(&cfg.out.join(format!("farfield_{tag}.csv")), &fields.far)?;
            let drift = if *selfcheck {
                let d = quad_selfcheck(&poly, alpha, problem.k, *p, &cfg)?;
                eprintln!("max relative drift under doubled quadrature: {d:.3e}");
                Some(d)
            } else {
                None
            };
            let summary = SolveSummary {
                alpha: run.alpha,
                k: run.k,
                p: run.p,
                n: run.n_dof(),
                cond: run.cond.unwrap_or(f64::NAN),
                residual: run.residual,
                dof_per_wavelength: hna::harness::dof_per_wavelength(run.n_dof(), &poly, run.k),
                wall_seconds: run.wall_seconds,
                quad_drift: drift,
                metadata: run.metadata.clone(),
            };
            std::fs::write(
                cfg.out.join(format!("solve_{tag}.json")),
                serde_json::to_string_pretty(&summary).expect("serialisable"),
            )?;
            print_json(&summary);
            Ok(0)
        }
        Command::Convergence { sweep } => {
            let cfg = build_config(&cli.global, Some(sweep))?;
            let rows = run_convergence(&cfg)?;
            eprintln!("wrote {} rows to {}", rows.len(), cfg.out.join("errors.csv").display());
            Ok(if rows.iter().all(|r| r.status == "ok") { 0 } else { 3 })
        }
        Command::Fields { what, sweep } => {
            let cfg = build_config(&cli.global, Some(sweep))?;
            match what {
                Some(FieldsWhat::Psi) => {
                    cfg.validate()?;
                    cfg.echo()?;
                    let poly = cfg.polygon()?;
                    for alpha in cfg.alpha_values()? {
                        for &k in &cfg.ks {
                            let wave = IncidentWave::new(k, alpha)?;
                            let leading = leading_order_all(&poly, &wave)?;
                            let rows = psi_rows(&poly, &leading, cfg.boundary_points)?;
                            let path = cfg.out.join(format!("psi_a{:.4}_k{}.csv", wave.alpha, k));
                            write_psi_csv(&path, &rows)?;
                            eprintln!("wrote {}", path.display());
                        }
                    }
                    Ok(0)
                }
                None => {
                    let rows = run_fields(&cfg)?;
                    eprintln!("wrote field CSVs for {} runs to {}", rows.len(), cfg.out.display());
                    Ok(if rows.iter().all(|r| r.status == "ok") { 0 } else { 3 })
                }
            }
        }
        Command::Reference { problem, ppw_dof, degree } => {
            let mut cfg = build_config(&cli.global, None)?;
            let alpha = single(&mut cfg, problem, 0)?;
            cfg.echo()?;
            let mut rcfg = ReferenceConfig::new(*ppw_dof);
            rcfg.degree = *degree;
            rcfg.allow_expensive = cfg.allow_expensive;
            if let Some(v) = cfg.ppw {
                rcfg.quad.ppw = v;
            }
            if let Some(v) = cfg.quad_order {
                rcfg.quad.order = v;
            }
            if let Some(v) = cfg.quad_layers {
                rcfg.quad.layers = v;
            }
            let (r, _, far) = run_reference(&cfg, alpha, problem.k, &rcfg)?;
            print_json(&serde_json::json!({
                "alpha": alpha,
                "k": problem.k,
                "ppw_dof": ppw_dof,
                "degree": degree,
                "n": r.space.n_dof(),
                "far_field_max_abs": far.max_abs(),
                "metadata": r.metadata,
            }));
            Ok(0)
        }
        Command::ValidateSpecfun => {
            write_csv_to(std::io::stdout().lock(), &specfun_table())?;
            Ok(0)
        }
        Command::Validate { quick } => {
            let cfg = build_config(&cli.global, None)?;
            let report = run_validation(cfg.seed, !quick);
            std::fs::create_dir_all(&cfg.out)?;
            std::fs::write(
                cfg.out.join("validation.json"),
                serde_json::to_string_pretty(&report).expect("serialisable"),
            )?;
            print_json(&report);
            Ok(if report.passed { 0 } else { VALIDATION_FAILED })
        }
        Command::Space {
            action: SpaceAction::Describe { problem, p },
        } => {
            let mut cfg = build_config(&cli.global, None)?;
            let alpha = single(&mut cfg, problem, *p)?;
            let poly = cfg.polygon()?;
            let wave = IncidentWave::new(problem.k, alpha)?;
            let space = build_space(&poly, &wave, cfg.space_params(*p))?;
            write_csv_to(std::io::stdout().lock(), &space_rows(&poly, &space))?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
