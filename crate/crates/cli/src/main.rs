//! `fracchem`: simulation runs, regime sweeps, inequality suites, the
//! representation oracle and plot data.
//!
//! Exit codes: 0 ok, 1 I/O failure, 2 usage or invalid input, 3 blow-up,
//! 4 inequality violation, 5 oracle tolerance exceeded.

mod ic;
mod lab;
mod output;
mod plot;
mod run;
mod svg;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use fracchem_core::functionals::GammaFunction;
use fracchem_core::kinetics::{power_law, KineticFunction};
use fracchem_core::solver::{Classification, SolverConfig};

use crate::ic::Expr;
use crate::lab::{Lemma, SuiteArgs};
use crate::output::{ensure_dir, resolve_out};
use crate::run::{execute, write_run_dir, RunManifest, RunSpec};
use crate::sweep::{run_sweep, SweepPlan};

const IC_HELP: &str = "Initial condition: an expression in x over numbers, + - * / ^, \
parentheses, sin, cos, exp and the constants pi and e (for example \"1+0.5*cos(x)\"), \
or `random` for a positive band-limited field drawn from --seed";

#[derive(Parser)]
#[command(name = "fracchem", version, about = "Fractional chemotaxis on the torus: simulation and inequality lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the solver once and write diagnostics, final state and manifest.
    Simulate(SimulateArgs),
    /// Classify runs over a grid of (alpha, r).
    Sweep(SweepArgs),
    /// Sample an inequality and estimate its constant.
    Inequalities(InequalityArgs),
    /// Compare the spectral and singular-integral fractional Laplacians.
    Oracle(OracleArgs),
    /// Turn a run or sweep directory into plot-ready CSV and SVG files.
    Plotdata(PlotArgs),
}

#[derive(Args, Clone)]
struct ModelArgs {
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    #[arg(long, default_value_t = 256)]
    n: usize,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, default_value_t = 1.0)]
    t_end: f64,
    /// Steps of size dt between diagnostics records.
    #[arg(long, default_value_t = 10)]
    record_every: usize,
    #[arg(long, default_value_t = 0.5)]
    cfl_safety: f64,
    /// Keep every mode in the nonlinear terms.
    #[arg(long)]
    no_dealias: bool,
    #[arg(long, default_value = "1+0.5*cos(x)", help = IC_HELP)]
    ic: String,
    /// Initial q, same grammar; must have zero mean.
    #[arg(long, default_value = "0")]
    q_ic: String,
    /// Start from the heat-kernel mollification of the data at --epsilon.
    #[arg(long)]
    mollify: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ModelArgs {
    fn spec(&self, alpha: f64, kinetic: KineticFunction) -> RunSpec {
        RunSpec {
            config: SolverConfig {
                alpha,
                mu: self.mu,
                epsilon: self.epsilon,
                n: self.n,
                dt: self.dt,
                t_end: self.t_end,
                dealias: !self.no_dealias,
                record_every: self.record_every,
                cfl_safety: self.cfl_safety,
            },
            kinetic,
            ic: self.ic.clone(),
            q_ic: self.q_ic.clone(),
            mollify: self.mollify,
            seed: self.seed,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, required_unless_present = "replay")]
    alpha: Option<f64>,
    /// Power-law exponent, f(y) = y^r / r.
    #[arg(long, conflicts_with = "kinetic")]
    r: Option<f64>,
    /// `power:r=<r>` or polynomial coefficients `f=<c0,c1,...>`.
    #[arg(long)]
    kinetic: Option<KineticFunction>,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Re-run the configuration stored in a manifest.
    #[arg(long, conflicts_with_all = ["alpha", "r", "kinetic"])]
    replay: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_value = "0.6,1.0,1.4,1.8")]
    alphas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1,1.5,2")]
    rs: Vec<f64>,
    #[command(flatten)]
    model: ModelArgs,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InequalityArgs {
    #[arg(long, value_enum)]
    lemma: Lemma,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Order loss; defaults to 0.2 for 1b and 0.1 for b2.
    #[arg(long)]
    delta: Option<f64>,
    /// `log`, `identity` or `power:s=<s>`.
    #[arg(long, default_value = "log")]
    gamma: GammaFunction,
    /// Exponent of Γ(u) = u^s for b2.
    #[arg(long, default_value_t = 0.5)]
    s: f64,
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 256)]
    n: usize,
    /// Lattice images summed exactly.
    #[arg(long, default_value_t = 50)]
    cutoff: usize,
    #[arg(long, default_value = "2+cos(x)+0.3*sin(3*x)", help = IC_HELP)]
    ic: Expr,
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    /// Directory written by simulate or sweep.
    #[arg(long)]
    run: PathBuf,
    /// Defaults to <run>/plots.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Usage(String);

impl std::fmt::Debug for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn simulate(args: SimulateArgs) -> Result<u8> {
    let spec = match &args.replay {
        Some(path) if !path.is_file() => {
            return Err(Usage(format!("no manifest at {}", path.display())).into());
        }
        Some(path) => RunManifest::read(path)?.spec,
        None => {
            let kinetic = match (args.kinetic, args.r) {
                (Some(k), _) => k,
                (None, Some(r)) => power_law(r)?,
                (None, None) => power_law(2.0)?,
            };
            args.model.spec(args.alpha.unwrap_or_default(), kinetic)
        }
    };
    let out = resolve_out(args.out.as_deref(), "simulate");
    let done = execute(&spec)?;
    write_run_dir(&out, &done)?;
    let m = &done.manifest;
    println!(
        "classification={} t_final={} steps={} out={}",
        m.classification.as_str(),
        m.t_final,
        m.steps,
        out.display()
    );
    Ok(if m.classification == Classification::Blowup { 3 } else { 0 })
}

fn sweep(args: SweepArgs) -> Result<u8> {
    let plan = SweepPlan {
        alphas: args.alphas,
        rs: args.rs,
        base: args.model.spec(1.0, power_law(2.0)?),
    };
    let jobs = args
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let out = resolve_out(args.out.as_deref(), "sweep");
    let cells = run_sweep(&plan, jobs, &out)?;
    for c in &cells {
        println!("alpha={} r={} {}", c.alpha, c.r, c.classification);
    }
    Ok(0)
}

fn inequalities(args: InequalityArgs) -> Result<u8> {
    let suite = SuiteArgs {
        lemma: args.lemma,
        alpha: args.alpha,
        delta: args.delta,
        gamma: args.gamma,
        s: args.s,
        samples: args.samples as usize,
        seed: args.seed,
    };
    let report = lab::run_suite(&suite)?;
    let out = resolve_out(args.out.as_deref(), &format!("inequalities/{}", report.inequality_id.as_str()));
    lab::write_report(&out, &report)?;
    let (stream, wseed) = report
        .min_rhs_witness
        .map_or((0, args.seed), |w| (w.stream, w.seed));
    println!(
        "{} estimated_constant={} witness_seed={wseed} witness_stream={stream} violations={} out={}",
        report.inequality_id.as_str(),
        report.max_ratio,
        report.violations,
        out.display()
    );
    Ok(if report.violations > 0 { 4 } else { 0 })
}

fn oracle(args: OracleArgs) -> Result<u8> {
    let res = lab::oracle(&args.ic, args.alpha, args.n, args.cutoff)?;
    let out = resolve_out(args.out.as_deref(), "oracle");
    ensure_dir(&out)?;
    lab::write_oracle(&out.join("oracle.csv"), &res)?;
    println!("max_rel_err={:e}", res.max_rel_err);
    Ok(if res.max_rel_err <= args.tol { 0 } else { 5 })
}

fn plotdata(args: PlotArgs) -> Result<u8> {
    let out = args.out.unwrap_or_else(|| args.run.join("plots"));
    if plot::plotdata(&args.run, &out)? == 0 {
        return Err(Usage(format!("no diagnostics or regimes data in {}", args.run.display())).into());
    }
    println!("out={}", out.display());
    Ok(0)
}

/// 2 for bad input, 1 for everything else.
fn failure_code(err: &anyhow::Error) -> u8 {
    use fracchem_core::Error as CoreError;
    for cause in err.chain() {
        if cause.is::<Usage>() || cause.is::<ic::ParseError>() || cause.is::<serde_json::Error>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<CoreError>() {
            return match e {
                CoreError::Io(_) => 1,
                _ => 2,
            };
        }
    }
    1
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
        Command::Inequalities(a) => inequalities(a),
        Command::Oracle(a) => oracle(a),
        Command::Plotdata(a) => plotdata(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(failure_code(&err))
        }
    }
}
