mod plot;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use isac_core::channel::binary_example;
use isac_core::estimator::{min_distortion, optimal_estimator};
use isac_core::gaussian::{GaussianIsacParams, GaussianModel, OutputBinning};
use isac_core::io::{curve_rows, read_channel_file, write_curve_csv};
use isac_core::oracles::{
    binary_curve, binary_curve_peak, gaussian_cmax_perfect_csir, gaussian_distortion_at_gaussian_input, gaussian_dmin,
    var_st,
};
use isac_core::solver::{default_mu_grid, sweep_mu};
use isac_core::{Csir, EstimatorTable, SolverConfig, TradeoffCurve, TradeoffProblem};

const EXIT_NOT_CONVERGED: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_IO: u8 = 74;

/// Capacity-distortion tradeoff of ISAC channels.
#[derive(Debug, Parser)]
#[command(name = "isac", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sweep the binary example with a binary sensing state.
    BinaryExample {
        #[arg(long, value_enum)]
        csir: CsirArg,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Discretize and sweep the real Gaussian example.
    GaussianExample(GaussianArgs),
    /// Sweep a channel read from a channel file.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Dump the optimal estimator, c(x) and D_min.
    Estimator {
        /// Channel file; omit to use --builtin.
        #[arg(required_unless_present = "builtin", conflicts_with = "builtin")]
        file: Option<PathBuf>,
        /// Built-in binary example with the given receiver CSI.
        #[arg(long, value_enum)]
        builtin: Option<CsirArg>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form reference values.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Debug, Subcommand)]
enum OracleCommand {
    /// Parametric frontier of the binary example, `P_X(0)` from 0 to the peak.
    Binary {
        #[arg(long, value_enum)]
        csir: CsirArg,
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
    /// Extreme points of the Gaussian example.
    Gaussian {
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[command(flatten)]
        power: PowerArgs,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CsirArg {
    None,
    Perfect,
}

impl From<CsirArg> for Csir {
    fn from(c: CsirArg) -> Self {
        match c {
            CsirArg::None => Csir::None,
            CsirArg::Perfect => Csir::Perfect,
        }
    }
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Comma-separated penalty weights; defaults to 0 and 25 log-spaced
    /// values from 1e-3 to 1e2.
    #[arg(long, value_delimiter = ',')]
    mu_grid: Option<Vec<f64>>,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// SVG plot destination.
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Worker threads for the sweep; defaults to available parallelism.
    #[arg(long)]
    jobs: Option<usize>,
    /// Outer iteration cap per point.
    #[arg(long)]
    max_outer: Option<usize>,
}

impl SweepArgs {
    fn config(&self) -> Result<SolverConfig> {
        let mut cfg = SolverConfig::default();
        if let Some(n) = self.max_outer {
            cfg.max_outer = n;
        }
        cfg.validate().map_err(|e| usage(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
struct PowerArgs {
    /// Power budget P.
    #[arg(long, conflicts_with = "power_db")]
    power: Option<f64>,
    /// Power budget in dB, P = 10^(dB/10).
    #[arg(long)]
    power_db: Option<f64>,
}

impl PowerArgs {
    fn value(&self) -> f64 {
        match (self.power, self.power_db) {
            (Some(p), _) => p,
            (None, Some(db)) => 10f64.powf(db / 10.0),
            (None, None) => 10.0,
        }
    }
}

#[derive(Debug, Args)]
struct GaussianArgs {
    /// Echo gain.
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[command(flatten)]
    power: PowerArgs,
    /// Quantization step; several comma-separated steps print a convergence
    /// table and write one CSV per step.
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    q: Vec<f64>,
    #[arg(long, value_enum)]
    csir: CsirArg,
    /// Merge this many adjacent Y bins.
    #[arg(long)]
    y_rebin: Option<u32>,
    /// Merge this many adjacent Z bins.
    #[arg(long)]
    z_rebin: Option<u32>,
    #[command(flatten)]
    sweep: SweepArgs,
}

/// A flag combination rejected before any computation.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<isac_core::Error>() {
            use isac_core::Error as E;
            return match e {
                E::OutOfRange { .. } | E::InvalidConfig(_) | E::MemoryCeiling { .. } => EXIT_USAGE,
                E::Io(_) | E::Csv(_) => EXIT_IO,
                _ => EXIT_DATA,
            };
        }
        if cause.is::<std::io::Error>() || cause.is::<csv::Error>() {
            return EXIT_IO;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::BinaryExample { csir, sweep } => {
            let grid = mu_grid(&sweep)?;
            let cfg = sweep.config()?;
            let pool = thread_pool(sweep.jobs)?;
            let ch = binary_example(csir.into());
            let est = optimal_estimator(&ch);
            let problem = TradeoffProblem::from_channel(&ch, &est)?;
            let curve = pool.install(|| sweep_mu(&problem, &grid, &cfg))?;
            let overlay = binary_overlay(csir.into());
            emit_curve(&curve, &sweep, Some(&overlay), &format!("binary example, CSIR {}", csir_name(csir)))
        }
        Command::GaussianExample(args) => gaussian_example(args),
        Command::Solve { file, sweep } => {
            let grid = mu_grid(&sweep)?;
            let cfg = sweep.config()?;
            let pool = thread_pool(sweep.jobs)?;
            let ch = read_channel_file(&file).with_context(|| format!("reading {}", file.display()))?;
            let est = optimal_estimator(&ch);
            let problem = TradeoffProblem::from_channel(&ch, &est)?;
            let curve = pool.install(|| sweep_mu(&problem, &grid, &cfg))?;
            emit_curve(&curve, &sweep, None, &file.display().to_string())
        }
        Command::Estimator { file, builtin, out } => {
            let ch = match (file, builtin) {
                (Some(f), _) => read_channel_file(&f).with_context(|| format!("reading {}", f.display()))?,
                (None, Some(c)) => binary_example(c.into()),
                (None, None) => unreachable!("clap requires one of them"),
            };
            let est = optimal_estimator(&ch);
            let cost = ch.parts().input_cost.as_ref().and_then(|c| c.budget.map(|b| (c.per_symbol.as_slice(), b)));
            let (d_min, _) = min_distortion(est.cost(), cost)?;
            write_output(out.as_deref(), &estimator_csv(&est, d_min)?)?;
            Ok(0)
        }
        Command::Oracle(OracleCommand::Binary { csir, points }) => {
            if points < 2 {
                return Err(usage("--points must be at least 2"));
            }
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["p", "capacity_bits", "distortion"])?;
            for (p, c, d) in binary_overlay_points(csir.into(), points) {
                w.write_record([num(p), num(c), num(d)])?;
            }
            write_output(None, &w.into_inner().context("flushing CSV")?)?;
            Ok(0)
        }
        Command::Oracle(OracleCommand::Gaussian { alpha, power }) => {
            let p = power.value();
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["quantity", "value"])?;
            for (k, v) in gaussian_extremes(alpha, p)? {
                w.write_record([k.to_string(), num(v)])?;
            }
            write_output(None, &w.into_inner().context("flushing CSV")?)?;
            Ok(0)
        }
    }
}

fn csir_name(c: CsirArg) -> &'static str {
    match c {
        CsirArg::None => "none",
        CsirArg::Perfect => "perfect",
    }
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn mu_grid(sweep: &SweepArgs) -> Result<Vec<f64>> {
    let grid = sweep.mu_grid.clone().unwrap_or_else(default_mu_grid);
    if grid.is_empty() {
        return Err(usage("--mu-grid is empty"));
    }
    if let Some(bad) = grid.iter().find(|m| !(**m >= 0.0 && m.is_finite())) {
        return Err(usage(format!("--mu-grid value {bad} must be finite and nonnegative")));
    }
    Ok(grid)
}

fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            return Err(usage("--jobs must be at least 1"));
        }
        b = b.num_threads(n);
    }
    b.build().context("starting worker threads")
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

/// Writes the CSV and optional plot; exit status 2 when some point did not
/// converge.
fn emit_curve(curve: &TradeoffCurve, sweep: &SweepArgs, overlay: Option<&[(f64, f64)]>, title: &str) -> Result<u8> {
    emit_curve_to(curve, sweep.out.as_deref(), sweep.plot.as_deref(), overlay, title)
}

fn emit_curve_to(
    curve: &TradeoffCurve,
    out: Option<&Path>,
    plot_path: Option<&Path>,
    overlay: Option<&[(f64, f64)]>,
    title: &str,
) -> Result<u8> {
    let mut csv = Vec::new();
    write_curve_csv(curve, &mut csv)?;
    write_output(out, &csv)?;
    if let Some(p) = plot_path {
        let svg = plot::render(&curve_rows(curve), overlay, title);
        std::fs::write(p, svg).with_context(|| format!("writing {}", p.display()))?;
    }
    let stuck: Vec<String> = curve.points.iter().filter(|p| !p.converged).map(|p| num(p.mu)).collect();
    if stuck.is_empty() {
        Ok(0)
    } else {
        eprintln!("warning: no convergence at mu = {}", stuck.join(", "));
        Ok(EXIT_NOT_CONVERGED)
    }
}

fn binary_overlay_points(csir: Csir, n: usize) -> Vec<(f64, f64, f64)> {
    let peak = binary_curve_peak(csir).p;
    (0..n)
        .map(|i| {
            let s = binary_curve(peak * i as f64 / (n - 1) as f64, csir).expect("p in [0, 1]");
            (s.p, s.capacity_bits, s.distortion)
        })
        .collect()
}

/// Closed-form frontier as `(D, C)` pairs.
fn binary_overlay(csir: Csir) -> Vec<(f64, f64)> {
    binary_overlay_points(csir, 101).into_iter().map(|(_, c, d)| (d, c)).collect()
}

fn gaussian_extremes(alpha: f64, power: f64) -> Result<Vec<(&'static str, f64)>> {
    Ok(vec![
        ("d_min", gaussian_dmin(alpha, power)?),
        ("c_max_perfect_csir", gaussian_cmax_perfect_csir(power)?),
        ("d_gaussian_input", gaussian_distortion_at_gaussian_input(alpha, power)?),
        ("var_st", var_st(alpha)?),
    ])
}

/// Rows `estimate,x,z,shat,value` for every `(x, z)`, then `cost,x,,,c(x)`
/// and a final `d_min,,,,value`.
fn estimator_csv(est: &EstimatorTable, d_min: f64) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["record", "x", "z", "shat", "value"])?;
    for x in 0..est.n_x() {
        for z in 0..est.n_z() {
            w.write_record([
                "estimate".to_string(),
                x.to_string(),
                z.to_string(),
                est.shat(x, z).to_string(),
                num(est.posterior_distortion(x, z)),
            ])?;
        }
    }
    for (x, c) in est.cost().iter().enumerate() {
        w.write_record(["cost".to_string(), x.to_string(), String::new(), String::new(), num(*c)])?;
    }
    w.write_record(["d_min".to_string(), String::new(), String::new(), String::new(), num(d_min)])?;
    w.into_inner().context("flushing CSV")
}

/// `out.csv` becomes `out_q0.25.csv`.
fn with_q_suffix(path: &Path, q: f64) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_q{q}.{}", ext.to_string_lossy()),
        None => format!("{stem}_q{q}"),
    };
    path.with_file_name(name)
}

fn gaussian_example(args: GaussianArgs) -> Result<u8> {
    let grid = mu_grid(&args.sweep)?;
    let cfg = args.sweep.config()?;
    let power = args.power.value();
    let binning = |flag: &str, v: Option<u32>| match v {
        None | Some(1) => Ok(OutputBinning::Exact),
        Some(0) => Err(usage(format!("--{flag} must be at least 1"))),
        Some(k) => Ok(OutputBinning::Rebin(k)),
    };
    let (y_binning, z_binning) = (binning("y-rebin", args.y_rebin)?, binning("z-rebin", args.z_rebin)?);
    if args.q.is_empty() {
        return Err(usage("--q is empty"));
    }
    let params: Vec<GaussianIsacParams> = args
        .q
        .iter()
        .map(|&q| GaussianIsacParams {
            y_binning,
            z_binning,
            ..GaussianIsacParams::new(args.alpha, power, q, args.csir.into())
        })
        .collect();
    for p in &params {
        p.validate().map_err(|e| usage(e.to_string()))?;
    }
    if params.len() > 1 && args.sweep.out.is_none() {
        return Err(usage("several --q values need --out"));
    }
    let pool = thread_pool(args.sweep.jobs)?;

    eprintln!("analytic extreme points (alpha = {}, P = {power}):", args.alpha);
    for (k, v) in gaussian_extremes(args.alpha, power)? {
        eprintln!("  {k:<20} {v:.6}");
    }

    let mut status = 0;
    let mut table: Vec<(f64, TradeoffCurve)> = Vec::new();
    for p in &params {
        let model = GaussianModel::build(p)?;
        let problem = model.problem()?;
        let curve = pool.install(|| sweep_mu(&problem, &grid, &cfg))?;
        let (out, plot_path) = if params.len() > 1 {
            (
                args.sweep.out.as_deref().map(|o| with_q_suffix(o, p.q)),
                args.sweep.plot.as_deref().map(|o| with_q_suffix(o, p.q)),
            )
        } else {
            (args.sweep.out.clone(), args.sweep.plot.clone())
        };
        let title = format!("Gaussian example, alpha {}, P {power}, q {}, CSIR {}", args.alpha, p.q, csir_name(args.csir));
        status = status.max(emit_curve_to(&curve, out.as_deref(), plot_path.as_deref(), None, &title)?);
        table.push((p.q, curve));
    }
    if table.len() > 1 {
        print_convergence_table(&table, &grid);
    }
    Ok(status)
}

/// For each `μ`, the `(C, D)` pair per step and the distance to the previous
/// step.
fn print_convergence_table(table: &[(f64, TradeoffCurve)], grid: &[f64]) {
    eprintln!("{:>10} {:>8} {:>12} {:>12} {:>12}", "mu", "q", "capacity", "distortion", "change");
    for &mu in grid {
        let mut prev: Option<(f64, f64)> = None;
        for (q, curve) in table {
            let Some(pt) = curve.points.iter().find(|p| p.mu == mu) else { continue };
            let cur = (pt.capacity_bits, pt.distortion);
            let change = prev.map(|p| format!("{:.6}", (cur.0 - p.0).hypot(cur.1 - p.1))).unwrap_or_default();
            eprintln!("{mu:>10} {q:>8} {:>12.6} {:>12.6} {change:>12}", cur.0, cur.1);
            prev = Some(cur);
        }
    }
}
