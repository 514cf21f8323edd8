//! `qroute`: generate instances, run single solvers, run benchmark suites,
//! re-render reports and compute the fuel/CO₂ projection.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qroute::bench::{
    self, export_report, impact_projection, read_report, BenchmarkReport, ExportFormat, SuiteConfig,
};
use qroute::classical::{genetic_algorithm, hybrid_refine, simulated_annealing, GaConfig, SaConfig};
use qroute::exact::held_karp;
use qroute::graph::{gen_clustered, gen_uniform, parse_tsplib};
use qroute::qaoa::{run_qaoa, MixerKind, OptimizerMethod, QaoaConfig};
use qroute::qubo::{encode_tsp, Penalties};
use qroute::{Graph64, RunRecord64, Tour};

const OUT_DIR_ENV: &str = "QROUTE_OUT_DIR";

#[derive(Parser)]
#[command(name = "qroute", version, about = "TSP as QUBO, statevector QAOA and classical baselines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a TSP instance as graph JSON.
    Generate(GenerateArgs),
    /// Run one solver on one instance and print the result as JSON.
    Solve(SolveArgs),
    /// Run a benchmark suite and write CSV, JSON and SVG reports.
    Benchmark(BenchmarkArgs),
    /// Re-render a saved JSON report.
    Report(ReportArgs),
    /// Fuel and CO₂ savings from a fractional routing improvement.
    Impact(ImpactArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Uniform,
    Clustered,
    Tsplib,
}

fn at_least_three(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    if n < 3 {
        return Err(format!("a tour needs at least 3 cities, got {n}"));
    }
    Ok(n)
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !(v > 0.0) || !v.is_finite() {
        return Err(format!("must be positive, got {v}"));
    }
    Ok(v)
}

fn fraction(s: &str) -> Result<f64, String> {
    let v = positive(s)?;
    if v >= 1.0 {
        return Err(format!("must be below 1, got {v}"));
    }
    Ok(v)
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of cities (uniform and clustered).
    #[arg(long, value_parser = at_least_three, required_unless_present = "input")]
    n: Option<usize>,
    #[arg(long, value_enum, default_value = "uniform")]
    kind: Kind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Side of the square the cities are placed in.
    #[arg(long, default_value_t = 100.0, value_parser = positive)]
    bbox: f64,
    #[arg(long, default_value_t = 3)]
    clusters: usize,
    /// Standard deviation of points around their cluster centre.
    #[arg(long, default_value_t = 5.0, value_parser = positive)]
    spread: f64,
    /// TSPLIB file to convert (kind tsplib).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output file; defaults to `<name>.json` in the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = OUT_DIR_ENV, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverKind {
    Qaoa,
    Sa,
    Ga,
    Exact,
    Hybrid,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mixer {
    X,
    Xy,
    Swap,
}

#[derive(Clone, Copy, ValueEnum)]
enum Optimizer {
    Spsa,
    Coordinate,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum)]
    solver: SolverKind,
    /// Graph JSON, or a TSPLIB file when the extension is `.tsp`.
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON file with the solver's configuration; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// QAOA depth.
    #[arg(long)]
    p: Option<usize>,
    #[arg(long, value_enum)]
    mixer: Option<Mixer>,
    #[arg(long, value_enum)]
    optimizer: Option<Optimizer>,
    #[arg(long)]
    max_evals: Option<usize>,
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long)]
    qubit_cap: Option<usize>,
    /// Keep city 0's variables (needed only for the x mixer).
    #[arg(long)]
    full_encoding: bool,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Suite configuration (JSON).
    #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in suite: desk-n5 or scaling.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    master_seed: Option<u64>,
    /// Energy profile name: simulation or device.
    #[arg(long)]
    energy_profile: Option<String>,
    /// Where reports go; overrides the config file's `output_dir`.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Svg,
    All,
}

#[derive(Args)]
struct ReportArgs {
    /// A JSON report written by `benchmark`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    format: Format,
    #[arg(long, env = OUT_DIR_ENV, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ImpactArgs {
    /// Annual fuel use in EJ.
    #[arg(long, default_value_t = bench::DEFAULT_BASELINE_EJ, value_parser = positive, allow_hyphen_values = true)]
    baseline_ej: f64,
    /// Fractional improvement, in (0, 1).
    #[arg(long, default_value_t = bench::DEFAULT_IMPROVEMENT, value_parser = fraction, allow_hyphen_values = true)]
    improvement: f64,
    /// Emission factor in g CO₂ per MJ.
    #[arg(long, default_value_t = bench::DEFAULT_EMISSION_FACTOR_G_PER_MJ, value_parser = positive, allow_hyphen_values = true)]
    factor: f64,
}

/// `println!` that returns an error instead of panicking when stdout closes.
macro_rules! out {
    ($($arg:tt)*) => {
        writeln!(std::io::stdout(), $($arg)*)?
    };
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Benchmark(a) => cmd_benchmark(a),
        Command::Report(a) => cmd_report(a),
        Command::Impact(a) => cmd_impact(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.downcast_ref::<std::io::Error>()
        .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    bench::write_atomic(path, text.as_bytes()).with_context(|| format!("writing {}", path.display()))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Deserializes JSON, naming the offending key path on failure.
fn parse_json<T: serde::de::DeserializeOwned>(text: &str, path: &Path) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let at = e.path().to_string();
        anyhow::anyhow!("{}: at `{at}`: {}", path.display(), e.into_inner())
    })
}

fn load_graph(path: &Path) -> Result<Graph64> {
    let text = read_text(path)?;
    let is_tsplib = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("tsp"));
    let g: Graph64 = if is_tsplib {
        parse_tsplib(&text).with_context(|| format!("parsing {}", path.display()))?
    } else {
        parse_json(&text, path)?
    };
    g.validate().with_context(|| format!("validating {}", path.display()))?;
    Ok(g)
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    let g = match a.kind {
        Kind::Uniform => gen_uniform(a.n.context("--n is required")?, a.bbox, a.seed)?,
        Kind::Clustered => gen_clustered(a.n.context("--n is required")?, a.clusters, a.spread, a.bbox, a.seed)?,
        Kind::Tsplib => {
            let input = a.input.context("--kind tsplib needs --input <file.tsp>")?;
            let g: Graph64 = parse_tsplib(&read_text(&input)?)
                .with_context(|| format!("parsing {}", input.display()))?;
            if let Some(n) = a.n {
                if n != g.len() {
                    bail!("--n {n} disagrees with DIMENSION {} in {}", g.len(), input.display());
                }
            }
            g
        }
    };
    let out = a.out.unwrap_or_else(|| a.out_dir.join(format!("{}.json", g.name)));
    write_json(&out, &g)?;
    out!("wrote {} ({} cities) to {}", g.name, g.len(), out.display());
    Ok(())
}

/// Output of `solve`: the run record, plus QAOA diagnostics when relevant.
#[derive(Serialize)]
struct SolveOutput {
    solver: String,
    best_tour: Option<Tour>,
    best_length: Option<f64>,
    duration_s: f64,
    evals: u64,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    qaoa: Option<QaoaDiagnostics>,
}

#[derive(Serialize)]
struct QaoaDiagnostics {
    expectation: f64,
    feasible_fraction: f64,
    gammas: Vec<f64>,
    betas: Vec<f64>,
}

impl From<RunRecord64> for SolveOutput {
    fn from(r: RunRecord64) -> Self {
        SolveOutput {
            solver: r.solver,
            best_tour: Some(r.best_tour),
            best_length: Some(r.best_length),
            duration_s: r.duration_s,
            evals: r.evals,
            seed: r.seed,
            qaoa: None,
        }
    }
}

fn qaoa_config(a: &SolveArgs, text: Option<&str>) -> Result<QaoaConfig> {
    let mut cfg: QaoaConfig = match (text, &a.config) {
        (Some(t), Some(p)) => parse_json(t, p)?,
        _ => QaoaConfig::default(),
    };
    if let Some(p) = a.p {
        cfg.p = p;
    }
    if let Some(m) = a.mixer {
        cfg.mixer = match m {
            Mixer::X => MixerKind::TransverseX,
            Mixer::Xy => MixerKind::XyRing,
            Mixer::Swap => MixerKind::PermutationSwap,
        };
    }
    if let Some(o) = a.optimizer {
        cfg.optimizer.method = match o {
            Optimizer::Spsa => OptimizerMethod::Spsa,
            Optimizer::Coordinate => OptimizerMethod::CoordinateSearch,
        };
    }
    if let Some(e) = a.max_evals {
        cfg.optimizer.max_evals = e;
    }
    if let Some(s) = a.shots {
        cfg.shots = s;
    }
    if let Some(c) = a.qubit_cap {
        cfg.qubit_cap = c;
    }
    if cfg.p == 0 {
        bail!("QAOA depth p must be at least 1");
    }
    Ok(cfg.with_seed(a.seed))
}

fn cmd_solve(a: SolveArgs) -> Result<()> {
    let g = load_graph(&a.instance)?;
    let m = g.distance_matrix();
    let text = a.config.as_deref().map(read_text).transpose()?;
    let text = text.as_deref();
    let cfg_path = a.config.clone().unwrap_or_default();

    let out: SolveOutput = match a.solver {
        SolverKind::Sa => {
            let base: SaConfig = text.map(|t| parse_json(t, &cfg_path)).transpose()?.unwrap_or_default();
            simulated_annealing(&m, &SaConfig { seed: a.seed, ..base })?.into()
        }
        SolverKind::Ga => {
            let base: GaConfig = text.map(|t| parse_json(t, &cfg_path)).transpose()?.unwrap_or_default();
            genetic_algorithm(&m, &GaConfig { seed: a.seed, ..base })?.into()
        }
        SolverKind::Exact => {
            let start = std::time::Instant::now();
            let (tour, length) = held_karp(&m)?;
            SolveOutput {
                solver: "exact".into(),
                best_tour: Some(tour),
                best_length: Some(length),
                duration_s: start.elapsed().as_secs_f64(),
                evals: 1,
                seed: a.seed,
                qaoa: None,
            }
        }
        SolverKind::Qaoa | SolverKind::Hybrid => {
            let cfg = qaoa_config(&a, text)?;
            let reduced = !a.full_encoding;
            let q = encode_tsp(&m, Penalties::default_for(&m), reduced)?;
            let r = run_qaoa(&q, &cfg).with_context(|| {
                format!(
                    "QAOA on {} cities needs {} qubits; raise --qubit-cap or use a smaller instance",
                    m.n(),
                    q.n_vars()
                )
            })?;
            let diagnostics = QaoaDiagnostics {
                expectation: r.expectation,
                feasible_fraction: r.feasible_fraction,
                gammas: r.params.gammas.clone(),
                betas: r.params.betas.clone(),
            };
            if matches!(a.solver, SolverKind::Hybrid) {
                let start = r.best_tour.clone().unwrap_or_else(|| Tour::identity(m.n()));
                let refined = hybrid_refine(&m, &start)?;
                SolveOutput {
                    duration_s: r.duration_s + refined.duration_s,
                    evals: r.evals as u64 + refined.evals,
                    seed: a.seed,
                    qaoa: Some(diagnostics),
                    ..refined.into()
                }
            } else {
                SolveOutput {
                    solver: "qaoa".into(),
                    best_tour: r.best_tour,
                    best_length: r.best_length,
                    duration_s: r.duration_s,
                    evals: r.evals as u64,
                    seed: a.seed,
                    qaoa: Some(diagnostics),
                }
            }
        }
    };
    out!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("qroute-out"))
}

fn cmd_benchmark(a: BenchmarkArgs) -> Result<()> {
    let mut cfg = match (&a.config, &a.preset) {
        (Some(path), _) => {
            let mut cfg: SuiteConfig = parse_json(&read_text(path)?, path)?;
            if let Some(dir) = path.parent() {
                cfg.resolve_paths(dir);
            }
            cfg
        }
        (None, Some(name)) => SuiteConfig::preset(name)?,
        (None, None) => bail!("pass --config <file> or --preset <name>"),
    };
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(s) = a.master_seed {
        cfg.master_seed = s;
    }
    if let Some(p) = a.energy_profile {
        cfg.energy = bench::EnergySetting::Profile(p);
    }
    cfg.validate()?;
    let out_dir = a
        .out_dir
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(default_out_dir);

    let report = bench::run_benchmark(&cfg)?;
    let written = export_all(&report, &out_dir, Format::All)?;
    print_table(&report)?;
    for f in written {
        out!("wrote {}", f.display());
    }
    Ok(())
}

fn export_all(report: &BenchmarkReport, dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    let targets: &[(ExportFormat, &str)] = match format {
        Format::Csv => &[(ExportFormat::Csv, "results.csv")],
        Format::Json => &[(ExportFormat::Json, "report.json")],
        Format::Svg => &[(ExportFormat::Svg, "charts")],
        Format::All => &[
            (ExportFormat::Csv, "results.csv"),
            (ExportFormat::Json, "report.json"),
            (ExportFormat::Svg, "charts"),
        ],
    };
    let mut out = Vec::new();
    for (fmt, name) in targets {
        let path = dir.join(name);
        out.extend(export_report(report, *fmt, &path).with_context(|| format!("exporting {}", path.display()))?);
    }
    Ok(out)
}

fn fmt_opt(x: Option<f64>, prec: usize) -> String {
    x.map(|v| format!("{v:.prec$}")).unwrap_or_else(|| "-".into())
}

fn print_table(r: &BenchmarkReport) -> Result<()> {
    out!(
        "suite {} | master seed {} | {} trials | energy profile {} | config {}",
        r.metadata.suite,
        r.metadata.master_seed,
        r.metadata.trials,
        r.metadata.energy_profile,
        &r.metadata.config_hash[..12.min(r.metadata.config_hash.len())]
    );
    out!(
        "{:<24} {:>3} {:<14} {:>5} {:>9} {:>8} {:>8} {:>11} {:>11}",
        "instance", "n", "solver", "opt", "ratio", "std", "skip/inf", "runtime_s", "energy_J"
    );
    for a in &r.aggregates {
        let flag = if a.relative { "*" } else { "" };
        out!(
            "{:<24} {:>3} {:<14} {:>5} {:>9} {:>8} {:>8} {:>11.4} {:>11.3e}",
            a.instance_id,
            a.n,
            a.solver,
            format!("{}/{}", a.optimal_hits, a.trials),
            format!("{}{flag}", fmt_opt(a.mean_ratio, 4)),
            fmt_opt(a.std_ratio, 4),
            format!("{}/{}", a.skipped, a.infeasible),
            a.mean_duration_s,
            a.mean_energy_j
        );
    }
    if r.aggregates.iter().any(|a| a.relative) {
        out!("* ratio relative to the best length found in this suite (no exact optimum)");
    }
    for t in &r.pairwise {
        match &t.result {
            Some(w) => out!(
                "wilcoxon {} {} vs {}: W={} p={:.4} ({:?}, {} pairs)",
                t.instance_id, t.solver_a, t.solver_b, w.w, w.p_value, w.method, t.pairs
            ),
            None => out!(
                "wilcoxon {} {} vs {}: no paired results",
                t.instance_id, t.solver_a, t.solver_b
            ),
        }
    }
    Ok(())
}

fn cmd_report(a: ReportArgs) -> Result<()> {
    let report = read_report(&a.input).with_context(|| format!("loading {}", a.input.display()))?;
    if !report.aggregates_consistent() {
        bail!(
            "{}: stored aggregates do not match the per-trial records",
            a.input.display()
        );
    }
    let written = export_all(&report, &a.out_dir, a.format)?;
    print_table(&report)?;
    for f in written {
        out!("wrote {}", f.display());
    }
    Ok(())
}

fn cmd_impact(a: ImpactArgs) -> Result<()> {
    let p = impact_projection(a.baseline_ej, a.improvement, a.factor)?;
    out!("fuel_saved_ej: {}", p.fuel_saved_ej);
    out!("co2_avoided_t: {}", p.co2_avoided_t);
    Ok(())
}
