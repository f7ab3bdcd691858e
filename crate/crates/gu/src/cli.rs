//! The `gu` command line.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use gu_core::optimize::{self, EnergyOracle};
use gu_core::solver::{self, SolveTrace, SolverConfig};
use gu_core::{FamilyKind, MetricFamily};
use serde::Serialize;

use crate::checks::{self, Report};
use crate::manifest::{manifest_path, RunManifest};
use crate::schema::{self, GraphFile, MapFile, SchemaError, SurfaceFile};
use crate::svg::{self, RenderOptions};

/// Process exit statuses. Graph validation failures use `GRAPH_BASE` plus
/// the graph error code.
pub mod exit {
    pub const OK: u8 = 0;
    pub const INTERNAL: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const IO: u8 = 3;
    pub const SCHEMA: u8 = 4;
    pub const MODEL: u8 = 5;
    pub const NOT_CONVERGED: u8 = 6;
    pub const CHECK_FAILED: u8 = 7;
    pub const GRAPH_BASE: u8 = 10;
}

#[derive(Parser, Debug)]
#[command(name = "gu", version, about = "Harmonic maps from graphs into hyperbolic surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct SolverArgs {
    /// Stop when every balanced residual is at most this.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
    /// Seed for random starts.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig { residual_tol: self.tol, max_iters: self.max_iters, seed: self.seed, ..SolverConfig::default() }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Relax a map to the harmonic map in its homotopy class.
    Solve {
        #[arg(long)]
        surface: Option<PathBuf>,
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Starting map: lifts and deck words, possibly with the surface and
        /// graph embedded.
        #[arg(long)]
        map: PathBuf,
        /// Converged map, with surface and graph embedded. Stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Iteration trace as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Minimize the harmonic energy over a one-parameter family of metrics.
    Optimize {
        #[arg(long, value_enum, default_value_t = FamilyName::HexagonGenus2)]
        family: FamilyName,
        #[arg(long, default_value_t = 1.0)]
        mc: f64,
        #[arg(long, default_value_t = 1.0)]
        md: f64,
        /// Genus for `hexagon-genus-g`.
        #[arg(long, default_value_t = 3)]
        genus: usize,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], default_values_t = [0.5, 3.0])]
        bracket: Vec<f64>,
        /// Width of the final bracket.
        #[arg(long = "param-tol", default_value_t = 1e-8)]
        param_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also sample E over a geometric grid; `.csv` or `.json`.
        #[arg(long)]
        curve: Option<PathBuf>,
        #[arg(long, default_value_t = 25)]
        curve_points: usize,
        /// Curve range; defaults to [s*/8, 8 s*].
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        curve_range: Option<Vec<f64>>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Run a packaged reproduction and print its checks.
    Example {
        #[arg(value_enum)]
        name: ExampleName,
        #[arg(long, default_value_t = 1.0)]
        mc: f64,
        #[arg(long, default_value_t = 1.0)]
        md: f64,
        #[arg(long, default_value_t = 2)]
        genus: usize,
        /// Hexagon side length for `genus-g`.
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        /// Edge weight for `regular-4g`, or all three weights for `klein`.
        #[arg(long, default_value_t = 1.0)]
        weight: f64,
        /// Write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Write the example's harmonic map, with surface and graph embedded.
        #[arg(long)]
        map_out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Run the full invariant and property suite.
    Check {
        #[arg(long)]
        json: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Draw a map in the Poincare disk.
    Render {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        surface: Option<PathBuf>,
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Translates up to this many generators deep.
        #[arg(long, default_value_t = 1)]
        depth: usize,
        #[arg(long, default_value_t = 800.0)]
        size: f64,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyName {
    HexagonGenus2,
    HexagonGenusG,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExampleName {
    #[value(name = "regular-4g")]
    Regular4g,
    HexagonGenus2,
    GenusG,
    Klein,
}

/// An error together with the exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    fn new(code: u8, error: impl Into<anyhow::Error>) -> Self {
        Failure { code, error: error.into() }
    }
}

/// Sorts an error into its exit class by looking through its causes.
fn classify(error: anyhow::Error) -> Failure {
    let mut code = exit::INTERNAL;
    for cause in error.chain() {
        if let Some(s) = cause.downcast_ref::<SchemaError>() {
            code = match s {
                SchemaError::Graph { source, .. } => exit::GRAPH_BASE + source.code(),
                _ => exit::SCHEMA,
            };
            break;
        }
        if let Some(e) = cause.downcast_ref::<gu_core::Error>() {
            code = match e {
                gu_core::Error::Graph(g) => exit::GRAPH_BASE + g.code(),
                gu_core::Error::NotConverged { .. } => exit::NOT_CONVERGED,
                _ => exit::MODEL,
            };
            break;
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            code = exit::IO;
            break;
        }
    }
    Failure { code, error }
}

fn write_file(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// Writes `value` to `out` with its manifest beside it, or prints it.
fn emit<T: Serialize>(value: &T, out: Option<&Path>, manifest: &RunManifest) -> anyhow::Result<()> {
    let text = schema::to_json(value);
    match out {
        Some(p) => {
            write_file(p, &text)?;
            write_file(&manifest_path(p), &schema::to_json(manifest))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct TraceLine {
    iteration: usize,
    energy: f64,
    residual: f64,
    step: f64,
}

pub fn trace_jsonl(trace: &SolveTrace) -> String {
    trace
        .records
        .iter()
        .map(|r| {
            let line = TraceLine { iteration: r.iteration, energy: r.energy, residual: r.max_residual, step: r.step };
            serde_json::to_string(&line).expect("plain data serializes") + "\n"
        })
        .collect()
}

#[derive(Serialize)]
struct SolveOutput {
    manifest: Option<String>,
    converged: bool,
    iterations: usize,
    energy: f64,
    max_residual: f64,
    map: MapFile,
}

#[derive(Serialize)]
struct LagrangeCheck {
    ratio: f64,
    s: f64,
    t: f64,
    constraint_residual: f64,
    lagrange_residual: f64,
    parameter_gap: f64,
}

#[derive(Serialize)]
struct OptimizeOutput {
    manifest: Option<String>,
    family: String,
    theta: f64,
    energy: f64,
    evaluations: usize,
    lagrange: Option<LagrangeCheck>,
}

fn manifest_name(out: Option<&Path>) -> Option<String> {
    out.map(|p| manifest_path(p).file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default())
}

fn load_map(map: &Path, surface: Option<&Path>, graph: Option<&Path>) -> anyhow::Result<gu_core::MarkedMap> {
    let mf = schema::read_map(map)?;
    let sf: Option<SurfaceFile> = surface.map(schema::read).transpose()?;
    let gf: Option<GraphFile> = graph.map(schema::read).transpose()?;
    mf.build(sf.as_ref(), gf.as_ref()).map_err(|e| anyhow::Error::new(e).context(format!("{} is not a valid map", map.display())))
}

fn curve_csv(c: &optimize::EnergyCurve) -> String {
    let mut s = String::from("parameter,energy,max_residual,iterations,converged\n");
    for p in &c.samples {
        s.push_str(&format!("{:?},{:?},{:?},{},{}\n", p.parameter, p.energy, p.max_residual, p.iterations, p.converged));
    }
    s
}

#[derive(Serialize)]
struct CurveOutput {
    family: String,
    unimodal: bool,
    samples: Vec<CurvePoint>,
}

#[derive(Serialize)]
struct CurvePoint {
    parameter: f64,
    energy: f64,
    max_residual: f64,
    iterations: usize,
    converged: bool,
}

fn print_reports(reports: &[Report], json: Option<&Path>) -> Result<u8, Failure> {
    let mut stdout = std::io::stdout().lock();
    for r in reports {
        let _ = writeln!(stdout, "{r}");
    }
    let passed = reports.iter().all(Report::passed);
    let total: usize = reports.iter().map(|r| r.checks.len()).sum();
    let failed: usize = reports.iter().map(|r| r.checks.iter().filter(|c| !c.passed).count()).sum();
    let _ = writeln!(stdout, "{} checks, {failed} failed", total);
    if let Some(p) = json {
        write_file(p, &schema::to_json(&reports)).map_err(classify)?;
    }
    Ok(if passed { exit::OK } else { exit::CHECK_FAILED })
}

pub fn run(cli: Cli, argv: Vec<String>) -> Result<u8, Failure> {
    match cli.command {
        Command::Solve { surface, graph, map, out, trace, solver: sa } => {
            let start = load_map(&map, surface.as_deref(), graph.as_deref()).map_err(classify)?;
            let cfg = sa.config();
            let result = solver::solve(&start, &cfg).map_err(|e| classify(e.into()))?;
            let mut manifest = RunManifest::new(argv).input(&map).seed(cfg.seed).tolerance("residual", cfg.residual_tol);
            for p in [&surface, &graph].into_iter().flatten() {
                manifest = manifest.input(p);
            }
            if let Some(t) = &trace {
                write_file(t, &trace_jsonl(&result)).map_err(classify)?;
            }
            let output = SolveOutput {
                manifest: manifest_name(out.as_deref()),
                converged: result.converged,
                iterations: result.iterations,
                energy: result.energy(),
                max_residual: result.residual(),
                map: MapFile::from_map(&result.map, true),
            };
            emit(&output, out.as_deref(), &manifest).map_err(classify)?;
            if !result.converged {
                eprintln!("not converged after {} iterations (residual {:e})", result.iterations, result.residual());
                return Ok(exit::NOT_CONVERGED);
            }
            Ok(exit::OK)
        }
        Command::Optimize { family, mc, md, genus, bracket, param_tol, out, curve, curve_points, curve_range, solver: sa } => {
            let kind = match family {
                FamilyName::HexagonGenus2 => FamilyKind::hexagon_genus2(mc, md),
                FamilyName::HexagonGenusG => FamilyKind::HexagonGenus { genus, m_c: mc, m_d: md },
            };
            let fam = MetricFamily::new(kind).map_err(|e| classify(e.into()))?;
            let cfg = sa.config();
            let mut oracle = EnergyOracle::new(fam.clone(), cfg.clone());
            let min = optimize::minimize_family(&mut oracle, (bracket[0], bracket[1]), param_tol).map_err(|e| classify(e.into()))?;
            let lagrange = optimize::hexagon_ratio(&fam).and_then(|m| optimize::lagrange_solve(m).ok()).map(|l| LagrangeCheck {
                ratio: l.ratio,
                s: l.s,
                t: l.t,
                constraint_residual: l.constraint_residual,
                lagrange_residual: l.lagrange_residual,
                parameter_gap: (l.s - min.theta).abs(),
            });
            eprintln!("s* = {:.9}, E* = {:.12}", min.theta, min.energy);
            let manifest = RunManifest::new(argv).seed(cfg.seed).tolerance("residual", cfg.residual_tol).tolerance("parameter", param_tol);
            let output = OptimizeOutput {
                manifest: manifest_name(out.as_deref()),
                family: fam.kind.name().to_string(),
                theta: min.theta,
                energy: min.energy,
                evaluations: min.evaluations,
                lagrange,
            };
            emit(&output, out.as_deref(), &manifest).map_err(classify)?;
            if let Some(path) = curve {
                let (lo, hi) = match curve_range {
                    Some(r) => (r[0], r[1]),
                    None => (min.theta / 8.0, 8.0 * min.theta),
                };
                let grid = optimize::geometric_grid(lo, hi, curve_points);
                let c = checks::sample_curve(&fam, &grid, &cfg).map_err(|e| classify(e.into()))?;
                let text = if path.extension().is_some_and(|e| e == "csv") {
                    curve_csv(&c)
                } else {
                    let samples = c
                        .samples
                        .iter()
                        .map(|s| CurvePoint {
                            parameter: s.parameter,
                            energy: s.energy,
                            max_residual: s.max_residual,
                            iterations: s.iterations,
                            converged: s.converged,
                        })
                        .collect();
                    schema::to_json(&CurveOutput { family: fam.kind.name().to_string(), unimodal: c.is_unimodal(), samples })
                };
                write_file(&path, &text).map_err(classify)?;
            }
            Ok(exit::OK)
        }
        Command::Example { name, mc, md, genus, s, weight, json, map_out, solver: sa } => {
            let cfg = sa.config();
            let (report, family, theta) = match name {
                ExampleName::Regular4g => (checks::regular_4g(genus, weight, &cfg), FamilyKind::Regular4g { genus, weight }, 0.0),
                ExampleName::HexagonGenus2 => {
                    let r = checks::hexagon_genus2(mc, md, (0.2, 6.0), 1e-8, &cfg);
                    let s_star = r.values.iter().find(|(k, _)| k == "s*").map_or(f64::NAN, |v| v.1);
                    (r, FamilyKind::hexagon_genus2(mc, md), s_star)
                }
                ExampleName::GenusG => (checks::genus_g(genus, s, mc, md, &cfg), FamilyKind::HexagonGenus { genus, m_c: mc, m_d: md }, s),
                ExampleName::Klein => {
                    (checks::klein([weight; 3], &cfg), FamilyKind::Triangle { p: 2, q: 3, r: 7, weights: [weight; 3] }, 0.0)
                }
            };
            if let Some(p) = &map_out {
                let m = MetricFamily::new(family)
                    .and_then(|f| f.member(theta))
                    .and_then(|m| m.reference_map())
                    .map_err(|e| classify(e.into()))?;
                write_file(p, &schema::to_json(&MapFile::from_map(&m, true))).map_err(classify)?;
            }
            print_reports(&[report], json.as_deref())
        }
        Command::Check { json, solver: sa } => print_reports(&checks::full_suite(&sa.config()), json.as_deref()),
        Command::Render { map, surface, graph, out, depth, size } => {
            let m = load_map(&map, surface.as_deref(), graph.as_deref()).map_err(classify)?;
            if !(size > 0.0 && size.is_finite()) {
                return Err(Failure::new(exit::USAGE, anyhow::anyhow!("--size must be positive")));
            }
            write_file(&out, &svg::render(&m, &RenderOptions { size, depth })).map_err(classify)?;
            Ok(exit::OK)
        }
    }
}
