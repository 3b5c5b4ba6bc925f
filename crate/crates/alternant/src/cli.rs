//! Command line front end.
//!
//! Exit codes: 0 when a fit is certified (or exact) and for completed
//! free-knot analyses, 2 when an iteration cap was hit first, 1 on usage or
//! input errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use alternant_core::spline_free::{check_w_minimality, descend, FreeKnotConfig, FreeKnotParams, Verdict};
use alternant_core::{
    fixed_knot_fit, remez_fit, EvaluableFunction, FitParams, FitStatus, Function, Interval, KnotVector, Sampling,
};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::io::{load_tabulated, write_plot_csv};
use crate::oracle::{grid_minimax_poly, grid_minimax_spline, ORACLE_GRID};
use crate::report::{DescentDto, FreeCheckDto, OracleDto, PolyFitDto, SplineFitDto, CheckDto};

#[derive(Debug, Parser)]
#[command(name = "alternant", version, about = "Best uniform approximation by polynomials and splines")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Best polynomial approximation of a given degree.
    FitPoly {
        #[command(flatten)]
        target: TargetArgs,
        #[arg(long)]
        degree: usize,
        #[command(flatten)]
        fit: FitArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Best spline approximation on fixed knots.
    FitSpline {
        #[command(flatten)]
        target: TargetArgs,
        #[command(flatten)]
        knots: KnotArgs,
        #[command(flatten)]
        fit: FitArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Free-knot analysis.
    FreeKnots {
        #[command(subcommand)]
        mode: FreeMode,
    },
}

#[derive(Debug, Subcommand)]
enum FreeMode {
    /// Test the necessary condition for local optimality of the knots.
    Check(FreeArgs),
    /// Move knots while the condition fails.
    Descend {
        #[command(flatten)]
        args: FreeArgs,
        #[arg(long, default_value_t = 30)]
        max_moves: usize,
    },
}

#[derive(Debug, Args)]
struct FreeArgs {
    #[command(flatten)]
    target: TargetArgs,
    #[command(flatten)]
    knots: KnotArgs,
    #[command(flatten)]
    fit: FitArgs,
    /// Sampled knot vectors used to test the barrier property.
    #[arg(long, default_value_t = 4)]
    barrier_samples: usize,
    /// Seed for sampling; defaults to ALTERNANT_SEED or 0.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct TargetArgs {
    /// abs, runge[:c], sin[:w], cos[:w], exp[:w] or poly:c0,c1,...
    #[arg(long, conflicts_with = "data", required_unless_present = "data")]
    func: Option<String>,
    /// CSV file of t,value rows, interpolated linearly.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Interval as `a,b`.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "data")]
    interval: Option<String>,
}

#[derive(Debug, Args)]
struct KnotArgs {
    /// Interior knots, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    knots: Vec<f64>,
    /// Piece degrees, one more than the number of knots.
    #[arg(long, value_delimiter = ',', required = true)]
    degrees: Vec<usize>,
}

#[derive(Debug, Args)]
struct FitArgs {
    /// Scan grid size [default: 4097]
    #[arg(long)]
    grid: Option<usize>,
    /// Lower bound of the beta schedule
    #[arg(long)]
    beta_min: Option<f64>,
    /// Target beta; the fit stops once it is certified
    #[arg(long)]
    beta_max: Option<f64>,
    /// Factor applied to beta after a descent step
    #[arg(long)]
    gamma_down: Option<f64>,
    /// Factor applied to beta while the alternation is long enough
    #[arg(long)]
    gamma_up: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Relative norm below which the target counts as exactly representable
    #[arg(long)]
    tol: Option<f64>,
    /// Also solve the problem on a fixed grid and report its value.
    #[arg(long)]
    oracle: bool,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// JSON report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Plot data path.
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// Resolved settings of a run, stored in every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub func: Option<String>,
    pub data: Option<String>,
    pub interval: [f64; 2],
    pub degree: Option<usize>,
    pub knots: Vec<f64>,
    pub degrees: Vec<usize>,
    pub grid: usize,
    pub beta_min: f64,
    pub beta_max: f64,
    pub gamma_down: f64,
    pub gamma_up: f64,
    pub max_iter: usize,
    pub tol: f64,
    pub oracle: bool,
    pub seed: Option<u64>,
    pub barrier_samples: Option<usize>,
    pub max_moves: Option<usize>,
}

fn parse_interval(s: &str) -> Result<Interval> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [a, b] = parts[..] else { bail!("interval must be `a,b`, got `{s}`") };
    let a: f64 = a.parse().with_context(|| format!("bad interval bound `{a}`"))?;
    let b: f64 = b.parse().with_context(|| format!("bad interval bound `{b}`"))?;
    Ok(Interval::new(a, b)?)
}

impl TargetArgs {
    fn load(&self) -> Result<EvaluableFunction> {
        match (&self.func, &self.data) {
            (Some(spec), None) => {
                let d = parse_interval(self.interval.as_deref().unwrap_or("-1,1"))?;
                Ok(EvaluableFunction::parse(spec, d)?)
            }
            (None, Some(path)) => load_tabulated(path),
            _ => bail!("give exactly one of --func and --data"),
        }
    }
}

impl FitArgs {
    fn params(&self, base: FitParams) -> Result<FitParams> {
        let p = FitParams {
            beta_minus: self.beta_min.unwrap_or(base.beta_minus),
            beta_plus: self.beta_max.unwrap_or(base.beta_plus),
            gamma_minus: self.gamma_down.unwrap_or(base.gamma_minus),
            gamma_plus: self.gamma_up.unwrap_or(base.gamma_plus),
            max_iter: self.max_iter.unwrap_or(base.max_iter),
            tol: self.tol.unwrap_or(base.tol),
            sampling: Sampling { grid_size: self.grid.unwrap_or(base.sampling.grid_size), ..base.sampling },
        };
        p.validate()?;
        Ok(p)
    }
}

fn config(command: &str, target: &TargetArgs, f: &EvaluableFunction, p: &FitParams, oracle: bool) -> RunConfig {
    let d = f.domain();
    RunConfig {
        command: command.into(),
        func: target.func.clone(),
        data: target.data.as_ref().map(|p| p.display().to_string()),
        interval: [d.lo(), d.hi()],
        degree: None,
        knots: Vec::new(),
        degrees: Vec::new(),
        grid: p.sampling.grid_size,
        beta_min: p.beta_minus,
        beta_max: p.beta_plus,
        gamma_down: p.gamma_minus,
        gamma_up: p.gamma_plus,
        max_iter: p.max_iter,
        tol: p.tol,
        oracle,
        seed: None,
        barrier_samples: None,
        max_moves: None,
    }
}

fn emit<T: Serialize>(report: &T, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn fit_exit(status: FitStatus) -> i32 {
    match status {
        FitStatus::BetaPlusOptimal | FitStatus::Degenerate => 0,
        FitStatus::MaxIterations | FitStatus::Stalled => 2,
    }
}

fn seed_from_env() -> Result<u64> {
    match std::env::var("ALTERNANT_SEED") {
        Ok(s) => s.trim().parse().with_context(|| format!("ALTERNANT_SEED `{s}` is not an integer")),
        Err(_) => Ok(0),
    }
}

/// Parses `args` (program name first) and runs the command, returning the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::FitPoly { target, degree, fit, output } => {
            let f = target.load()?;
            let params = fit.params(FitParams::default())?;
            let report = remez_fit(&f, degree, &params)?;
            let oracle = if fit.oracle {
                Some(OracleDto { value: grid_minimax_poly(&f, degree, ORACLE_GRID)?.value, grid_size: ORACLE_GRID })
            } else {
                None
            };
            let mut cfg = config("fit-poly", &target, &f, &params, fit.oracle);
            cfg.degree = Some(degree);
            emit(&PolyFitDto::new(cfg, &report, oracle), output.out.as_deref())?;
            if let Some(path) = &output.csv {
                let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
                write_plot_csv(file, &f, &report.polynomial, report.alternation.as_ref(), params.sampling.grid_size)?;
            }
            Ok(fit_exit(report.status))
        }
        Command::FitSpline { target, knots, fit, output } => {
            let f = target.load()?;
            let params = fit.params(FitParams::default())?;
            let kv = KnotVector::from_interior(f.domain(), &knots.knots, knots.degrees.clone())?;
            let report = fixed_knot_fit(&f, &kv, &params)?;
            let oracle = if fit.oracle {
                Some(OracleDto { value: grid_minimax_spline(&f, &kv, ORACLE_GRID)?.value, grid_size: ORACLE_GRID })
            } else {
                None
            };
            let mut cfg = config("fit-spline", &target, &f, &params, fit.oracle);
            cfg.knots = knots.knots.clone();
            cfg.degrees = knots.degrees.clone();
            emit(&SplineFitDto::new(cfg, &report, oracle), output.out.as_deref())?;
            if let Some(path) = &output.csv {
                let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
                write_plot_csv(file, &f, &report.spline, report.alternation.as_ref(), params.sampling.grid_size)?;
            }
            Ok(fit_exit(report.status))
        }
        Command::FreeKnots { mode } => {
            let (args, max_moves) = match mode {
                FreeMode::Check(a) => (a, None),
                FreeMode::Descend { args, max_moves } => (args, Some(max_moves)),
            };
            let f = args.target.load()?;
            let defaults = FreeKnotParams::default();
            let fitp = args.fit.params(defaults.fit)?;
            let seed = match args.seed {
                Some(s) => s,
                None => seed_from_env()?,
            };
            let params = FreeKnotParams { fit: fitp, barrier_samples: args.barrier_samples, seed, ..defaults };
            let cfg_knots = FreeKnotConfig::new(f.domain(), &args.knots.knots, args.knots.degrees.clone())?;
            let command = if max_moves.is_some() { "free-knots descend" } else { "free-knots check" };
            let mut cfg = config(command, &args.target, &f, &fitp, false);
            cfg.knots = args.knots.knots.clone();
            cfg.degrees = args.knots.degrees.clone();
            cfg.seed = Some(seed);
            cfg.barrier_samples = Some(args.barrier_samples);
            cfg.max_moves = max_moves;
            let (final_sigma, final_alt, code) = match max_moves {
                None => {
                    let r = check_w_minimality(&f, &cfg_knots, &params)?;
                    emit(&FreeCheckDto { config: cfg, check: CheckDto::from(&r) }, args.output.out.as_deref())?;
                    (r.sigma, r.alternation, 0)
                }
                Some(m) => {
                    let d = descend(&f, &cfg_knots, &params, m)?;
                    emit(&DescentDto::new(cfg, &d), args.output.out.as_deref())?;
                    let code = if matches!(d.final_report.verdict, Verdict::ViolatedAt { .. }) { 2 } else { 0 };
                    (d.final_report.sigma, d.final_report.alternation, code)
                }
            };
            if let Some(path) = &args.output.csv {
                let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
                write_plot_csv(file, &f, &final_sigma, final_alt.as_ref(), fitp.sampling.grid_size)?;
            }
            Ok(code)
        }
    }
}
