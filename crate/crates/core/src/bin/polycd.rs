use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;

use polycd::error::{Error, Result};
use polycd::harness::{run_experiment, solver_for, ExperimentConfig, Method, Preset, Summary};
use polycd::problems::{
    gen_kde, gen_lasso, gen_logistic, gen_quadratic, write_tsv, KdeSpec, LassoSpec, LogisticSpec, QuadraticSpec,
};
use polycd::step::StepRule;
use polycd::verify::run_suites;

#[derive(Parser)]
#[command(name = "polycd", version, about = "Coordinate descent over vertex-enumerated polytopes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, ValueEnum)]
enum PresetArg {
    Lasso,
    Logistic,
    Kde,
    CustomSimplexQuadratic,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Lasso => Preset::Lasso,
            PresetArg::Logistic => Preset::Logistic,
            PresetArg::Kde => Preset::Kde,
            PresetArg::CustomSimplexQuadratic => Preset::CustomSimplexQuadratic,
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum RuleArg {
    LineSearch,
    Gradient,
}

#[derive(clap::Args)]
struct ProblemArgs {
    #[arg(long, value_enum, default_value = "lasso")]
    preset: PresetArg,
    /// Samples (rows).
    #[arg(long)]
    n: Option<usize>,
    /// Features, or simplex dimension for the quadratic preset.
    #[arg(long)]
    d: Option<usize>,
    /// Support size of the planted coefficients.
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    snr: Option<f64>,
    /// ℓ1 radius; defaults to the planted vector's norm.
    #[arg(long)]
    c: Option<f64>,
    /// Kernel bandwidth (kde).
    #[arg(long)]
    sigma: Option<f64>,
    /// Huber threshold (kde).
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver on one generated problem.
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, default_value = "polycdwa")]
        solver: String,
        #[arg(long, value_enum, default_value = "line-search")]
        step_rule: RuleArg,
        /// Outer iterations (or iterations for the baselines).
        #[arg(long, default_value_t = 100)]
        max_outer: usize,
        /// Relative-improvement stopping tolerance.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Smoothness constant override.
        #[arg(long)]
        smoothness: Option<f64>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Run a full comparison described by a JSON config file.
    Bench { config: PathBuf },
    /// Run the verification suites.
    Verify {
        /// Smaller instances.
        #[arg(long)]
        quick: bool,
    },
    /// Write a generated dataset as TSV (features, then target) to stdout or a file.
    Gen {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn experiment(p: &ProblemArgs) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(p.preset.into(), Vec::new());
    cfg.radius = p.c;
    match cfg.preset {
        Preset::Lasso => {
            let mut s = LassoSpec { seed: p.seed, ..Default::default() };
            s.n = p.n.unwrap_or(s.n);
            s.d = p.d.unwrap_or(s.d);
            s.r = p.r.unwrap_or(s.r);
            s.snr = p.snr.unwrap_or(s.snr);
            cfg.lasso = Some(s);
        }
        Preset::Logistic => {
            let mut s = LogisticSpec { seed: p.seed, ..Default::default() };
            s.n = p.n.unwrap_or(s.n);
            s.d = p.d.unwrap_or(s.d);
            s.r = p.r.unwrap_or(s.r);
            cfg.logistic = Some(s);
        }
        Preset::Kde => {
            let mut s = KdeSpec { seed: p.seed, ..Default::default() };
            s.n = p.n.unwrap_or(s.n);
            s.d = p.d.unwrap_or(s.d);
            s.sigma_kernel = p.sigma.unwrap_or(s.sigma_kernel);
            s.mu_huber = p.mu.unwrap_or(s.mu_huber);
            cfg.kde = Some(s);
        }
        Preset::CustomSimplexQuadratic => {
            let mut s = QuadraticSpec { seed: p.seed, ..Default::default() };
            s.dim = p.d.unwrap_or(s.dim);
            s.rows = p.n.unwrap_or(s.dim);
            cfg.quadratic = Some(s);
        }
    }
    cfg
}

fn print_summary(s: &Summary) {
    println!("{:<12} {:>5} {:>12} {:>14} {:>10}", "solver", "runs", "seconds", "gap", "nnz");
    for r in &s.solvers {
        println!("{:<12} {:>5} {:>12.4} {:>14.4e} {:>10.1}", r.label, r.runs, r.mean_seconds, r.mean_gap, r.mean_nnz);
    }
}

fn gen(p: &ProblemArgs, out: Option<PathBuf>) -> Result<()> {
    let cfg = experiment(p);
    let (a, last) = match cfg.preset {
        Preset::Lasso => {
            let d = gen_lasso(cfg.lasso.as_ref().unwrap())?;
            (d.a, Some(d.b))
        }
        Preset::Logistic => {
            let d = gen_logistic(cfg.logistic.as_ref().unwrap())?;
            (d.a, Some(d.labels))
        }
        Preset::Kde => (gen_kde(cfg.kde.as_ref().unwrap())?.points, None),
        Preset::CustomSimplexQuadratic => {
            let d = gen_quadratic(cfg.quadratic.as_ref().unwrap())?;
            (d.a, Some(d.b))
        }
    };
    match out {
        Some(path) => {
            let file = std::fs::File::create(&path).map_err(|e| Error::Io { path: path.clone(), source: e })?;
            let mut w = std::io::BufWriter::new(file);
            write_tsv(&mut w, &a, last.as_ref()).and_then(|_| w.flush()).map_err(|e| Error::Io { path, source: e })
        }
        None => {
            let mut w = std::io::BufWriter::new(std::io::stdout().lock());
            write_tsv(&mut w, &a, last.as_ref())
                .and_then(|_| w.flush())
                .map_err(|e| Error::Io { path: "<stdout>".into(), source: e })
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Solve { problem, solver, step_rule, max_outer, tol, smoothness, out } => {
            let method: Method = solver.parse()?;
            let rule = match step_rule {
                RuleArg::LineSearch => StepRule::LineSearch,
                RuleArg::Gradient => StepRule::Gradient,
            };
            let mut cfg = experiment(&problem);
            cfg.solvers = vec![solver_for(method, rule, max_outer, tol)];
            cfg.repetitions = 1;
            cfg.smoothness = smoothness;
            cfg.output_dir = out;
            let summary = run_experiment(&cfg)?;
            println!("f* = {:.16e}", summary.f_star[0]);
            print_summary(&summary);
            info!("traces written to {}", cfg.output_dir.display());
            Ok(summary.solvers.iter().all(|s| s.failures == 0))
        }
        Command::Bench { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let summary = run_experiment(&cfg)?;
            print_summary(&summary);
            info!("results written to {}", cfg.output_dir.display());
            Ok(summary.solvers.iter().all(|s| s.failures == 0))
        }
        Command::Verify { quick } => {
            let outcomes = run_suites(quick);
            for o in &outcomes {
                println!("{} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
            }
            Ok(outcomes.iter().all(|o| o.passed))
        }
        Command::Gen { problem, out } => gen(&problem, out).map(|_| true),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
