//! Batch command-line front end over the stopping-law solvers.
//!
//! Subcommands: `describe`, `naive`, `iterate`, `check-equilibrium`,
//! `evaluate`, `case-study`, `simulate`, `compare`.  Results go to stdout or
//! `--out`; every output embeds a run manifest (JSON field `manifest`, or a
//! leading `# manifest:` comment in CSV) so runs can be replayed.
//!
//! Exit codes: 0 success, 1 usage error, 2 domain or configuration error,
//! 3 non-convergence of the fixed-point iteration.

// `!(hi >= lo)` also rejects NaN bounds, unlike `hi < lo`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use distorted_stopping::case_study::CaseStudyParams;
use distorted_stopping::equilibrium::{is_equilibrium, iterate_to_equilibrium, EngineConfig};
use distorted_stopping::mc::{
    distorted_expectation, estimate_hit_prob, simulate_stopped_values, BootstrapConfig, SimConfig,
};
use distorted_stopping::naive::{classify_beta, naive_law, solve_precommitted, PrecommitDecision};
use distorted_stopping::{
    continuation_value, parse_problem_json, IntervalKernel, StoppingLaw, StoppingProblem,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

#[derive(Parser)]
#[command(
    name = "dstop",
    version,
    about = "Naive and equilibrium stopping laws for GBM under probability distortion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ProblemArg {
    /// Path to the problem JSON document.
    #[arg(long)]
    problem: PathBuf,
}

#[derive(Args, Clone)]
struct EngineArgs {
    /// Computational domain as `lo,hi` (transformed coordinates).
    #[arg(long)]
    domain: Option<String>,
    /// Kernel comparison tolerance for fixed-point checks.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Clone)]
struct SimArgs {
    /// Number of simulated paths.
    #[arg(long, default_value_t = 100_000)]
    paths: usize,
    /// Base seed; all randomness in the run derives from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Time step.
    #[arg(long)]
    dt: Option<f64>,
    /// Censoring horizon.
    #[arg(long)]
    horizon: Option<f64>,
    /// Lower absorption cutoff.
    #[arg(long)]
    cutoff: Option<f64>,
    /// Enable Brownian-bridge sub-step crossing checks.
    #[arg(long)]
    bridge: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Print problem parameters, the beta regime, and shape classification.
    Describe {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the naive stopping law (and optionally a per-state table).
    Naive {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write a per-state CSV table over `lo,hi,n` (log-spaced).
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, default_value = "0.1,10,50")]
        grid: String,
    },
    /// Run the fixed-point iteration from an initial law.
    Iterate {
        #[command(flatten)]
        problem: ProblemArg,
        /// Initial law: a kernel like "[3,inf)", or naive | never | all.
        #[arg(long)]
        init: String,
        #[arg(long)]
        max_iter: Option<usize>,
        #[command(flatten)]
        engine: EngineArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Test whether a law is a fixed point of the operator.
    CheckEquilibrium {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long)]
        law: String,
        #[command(flatten)]
        engine: EngineArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate continuation values J, payoffs u, and regions as CSV.
    Evaluate {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long)]
        law: String,
        /// Single state to evaluate.
        #[arg(long)]
        x: Option<f64>,
        /// Log-spaced grid `lo,hi,n` (used when --x is absent).
        #[arg(long, default_value = "0.1,10,50")]
        grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form quadratic case-study analytics.
    CaseStudy {
        #[command(subcommand)]
        action: CaseStudyAction,
    },
    /// Monte-Carlo estimate of the distorted value of a law.
    Simulate {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long)]
        law: String,
        #[arg(long)]
        x0: f64,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo estimate side by side with the closed form (z-scored).
    Compare {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long)]
        law: String,
        #[arg(long, alias = "x")]
        x0: f64,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo hitting-probability check against x/b.
    HitProb {
        #[arg(long)]
        x0: f64,
        #[arg(long)]
        b: f64,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct CaseArgs {
    #[arg(long)]
    strike: f64,
    #[arg(long)]
    eta: f64,
}

#[derive(Subcommand)]
enum CaseStudyAction {
    /// One-step threshold map b -> b' for b above the equilibrium family.
    Map {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long)]
        b: f64,
    },
    /// Time-0 value of the threshold law 1_{(0,b)} at state x.
    Value {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        b: f64,
    },
    /// The value-dominating equilibrium threshold.
    Optimal {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long)]
        x: f64,
    },
    /// Cash compensation for following an inferior equilibrium.
    Cost {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        b: f64,
    },
    /// Whether threshold b1 value-dominates b2.
    Pareto {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long)]
        b1: f64,
        #[arg(long)]
        b2: f64,
    },
    /// CSV surface of (x, b, value) over the given grids.
    ValueSurface {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long, default_value = "0.1,3,30")]
        x_grid: String,
        #[arg(long, default_value = "0,3,30")]
        b_grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CSV surface of (x, b, cost) over the given grids.
    CostSurface {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long, default_value = "0.1,3,30")]
        x_grid: String,
        #[arg(long, default_value = "0,2.9,30")]
        b_grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Runs the CLI on the given argv (including the program name) and returns
/// the process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own usage/help text; help and version requests
            // are successes.
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let manifest = Manifest::new(&argv);
    match dispatch(cli.command, &manifest) {
        Ok(code) => code,
        Err(CliError::Domain(message)) => {
            eprintln!("error: {message}");
            EXIT_DOMAIN
        }
    }
}

enum CliError {
    Domain(String),
}

impl<E: std::fmt::Display> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Domain(e.to_string())
    }
}

struct Manifest {
    command: String,
    args: Vec<String>,
}

impl Manifest {
    fn new(argv: &[String]) -> Self {
        Self {
            command: argv.get(1).cloned().unwrap_or_default(),
            args: argv.iter().skip(2).cloned().collect(),
        }
    }

    fn json(&self, seed: Option<u64>) -> serde_json::Value {
        json!({
            "tool": "dstop",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "args": self.args,
            "seed": seed,
        })
    }
}

fn dispatch(command: Command, manifest: &Manifest) -> Result<i32, CliError> {
    match command {
        Command::Describe { problem, out } => {
            describe(&load_problem(&problem.problem)?, manifest, out)
        }
        Command::Naive {
            problem,
            out,
            table,
            grid,
        } => naive_cmd(
            &load_problem(&problem.problem)?,
            manifest,
            out,
            table,
            &grid,
        ),
        Command::Iterate {
            problem,
            init,
            max_iter,
            engine,
            out,
        } => iterate_cmd(
            &load_problem(&problem.problem)?,
            manifest,
            &init,
            max_iter,
            engine,
            out,
        ),
        Command::CheckEquilibrium {
            problem,
            law,
            engine,
            out,
        } => check_cmd(
            &load_problem(&problem.problem)?,
            manifest,
            &law,
            engine,
            out,
        ),
        Command::Evaluate {
            problem,
            law,
            x,
            grid,
            out,
        } => evaluate_cmd(
            &load_problem(&problem.problem)?,
            manifest,
            &law,
            x,
            &grid,
            out,
        ),
        Command::CaseStudy { action } => case_study_cmd(action, manifest),
        Command::Simulate {
            problem,
            law,
            x0,
            sim,
            out,
        } => simulate_cmd(
            &load_problem(&problem.problem)?,
            manifest,
            &law,
            x0,
            &sim,
            out,
            false,
        ),
        Command::Compare {
            problem,
            law,
            x0,
            sim,
            out,
        } => simulate_cmd(
            &load_problem(&problem.problem)?,
            manifest,
            &law,
            x0,
            &sim,
            out,
            true,
        ),
        Command::HitProb { x0, b, sim, out } => hit_prob_cmd(manifest, x0, b, &sim, out),
    }
}

fn load_problem(path: &PathBuf) -> Result<StoppingProblem, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Domain(format!("cannot read {}: {e}", path.display())))?;
    Ok(parse_problem_json(&text)?)
}

fn parse_law(text: &str, p: &StoppingProblem) -> Result<StoppingLaw, CliError> {
    match text {
        "naive" => Ok(naive_law(p)?),
        "never" => Ok(StoppingLaw::never()),
        "all" => Ok(StoppingLaw::everywhere()),
        _ => Ok(StoppingLaw::from_kernel(text.parse::<IntervalKernel>()?)),
    }
}

fn parse_pair(text: &str, what: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::Domain(format!(
            "{what} must be `lo,hi`, got {text:?}"
        )));
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad_num(what))?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad_num(what))?;
    Ok((lo, hi))
}

fn parse_grid(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::Domain(format!(
            "{what} must be `lo,hi,n`, got {text:?}"
        )));
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad_num(what))?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad_num(what))?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad_num(what))?;
    if !(hi >= lo) || n == 0 {
        return Err(CliError::Domain(format!("{what}: need lo <= hi and n > 0")));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    // Log spacing when the grid is positive, linear otherwise.
    if lo > 0.0 {
        let (a, b) = (lo.ln(), hi.ln());
        Ok((0..n)
            .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
            .collect())
    } else {
        Ok((0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect())
    }
}

fn bad_num(what: &str) -> CliError {
    CliError::Domain(format!("{what}: not a number"))
}

fn engine_config(p: &StoppingProblem, engine: &EngineArgs) -> Result<EngineConfig, CliError> {
    let mut cfg = EngineConfig::for_problem(p);
    if let Some(domain) = &engine.domain {
        cfg.domain = parse_pair(domain, "--domain")?;
    }
    if let Some(tol) = engine.tol {
        cfg.kernel_tol = tol;
    }
    Ok(cfg)
}

fn sim_config(p: &StoppingProblem, sim: &SimArgs) -> SimConfig {
    let mut cfg = SimConfig::for_scale(p.scale(), sim.seed);
    cfg.n_paths = sim.paths;
    if let Some(dt) = sim.dt {
        cfg.dt = dt;
    }
    if let Some(h) = sim.horizon {
        cfg.horizon = h;
    }
    if let Some(c) = sim.cutoff {
        cfg.lower_cutoff = c;
    }
    cfg.bridge_correction = sim.bridge;
    cfg
}

fn emit(out: Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(&path, content)
            .map_err(|e| CliError::Domain(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{content}");
            Ok(())
        }
    }
}

fn emit_json(out: Option<PathBuf>, value: &serde_json::Value) -> Result<(), CliError> {
    emit(
        out,
        &serde_json::to_string_pretty(value).expect("serializable"),
    )
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn describe(
    p: &StoppingProblem,
    manifest: &Manifest,
    out: Option<PathBuf>,
) -> Result<i32, CliError> {
    let regime = format!("{:?}", classify_beta(p));
    let shape = p
        .shape()
        .map(|s| {
            json!({
                "payoff": s.payoff,
                "distortion": s.distortion,
                "slope_at_zero": s.slope_at_zero,
            })
        })
        .unwrap_or(serde_json::Value::Null);
    let doc = json!({
        "manifest": manifest.json(None),
        "beta": p.beta(),
        "scale": p.scale(),
        "regime": regime,
        "shape": shape,
    });
    emit_json(out, &doc)?;
    Ok(EXIT_OK)
}

fn naive_cmd(
    p: &StoppingProblem,
    manifest: &Manifest,
    out: Option<PathBuf>,
    table: Option<PathBuf>,
    grid: &str,
) -> Result<i32, CliError> {
    let law = naive_law(p)?;
    let doc = json!({
        "manifest": manifest.json(None),
        "regime": format!("{:?}", classify_beta(p)),
        "kernel": law.kernel().to_string(),
        "kernel_pieces": law.kernel(),
    });
    emit_json(out, &doc)?;

    if let Some(path) = table {
        let mut csv = String::new();
        writeln!(csv, "# manifest: {}", manifest.json(None)).unwrap();
        writeln!(csv, "x,decision,level,value").unwrap();
        for x in parse_grid(grid, "--grid")? {
            let r = solve_precommitted(p, x)?;
            let (decision, level) = match r.decision {
                PrecommitDecision::StopNow => ("stop_now", x),
                PrecommitDecision::Threshold { level } => ("threshold", level),
                PrecommitDecision::NoOptimum => ("no_optimum", f64::NAN),
            };
            let value = r.value.map_or(String::new(), |v| v.to_string());
            writeln!(csv, "{x},{decision},{level},{value}").unwrap();
        }
        emit(Some(path), &csv)?;
    }
    Ok(EXIT_OK)
}

fn iterate_cmd(
    p: &StoppingProblem,
    manifest: &Manifest,
    init: &str,
    max_iter: Option<usize>,
    engine: EngineArgs,
    out: Option<PathBuf>,
) -> Result<i32, CliError> {
    let init_law = parse_law(init, p)?;
    let mut cfg = engine_config(p, &engine)?;
    if let Some(m) = max_iter {
        cfg.max_iter = m;
    }
    let (law, trace) = iterate_to_equilibrium(p, &init_law, &cfg)?;
    let doc = json!({
        "manifest": manifest.json(None),
        "init": init_law.kernel().to_string(),
        "converged": trace.converged,
        "steps": trace.steps,
        "final": law.kernel().to_string(),
        "final_pieces": law.kernel(),
        "trace": trace.kernels.iter().map(|k| k.to_string()).collect::<Vec<_>>(),
    });
    emit_json(out, &doc)?;
    if !trace.converged {
        eprintln!(
            "warning: not converged after {} operator applications",
            trace.steps
        );
        return Ok(EXIT_NOT_CONVERGED);
    }
    Ok(EXIT_OK)
}

fn check_cmd(
    p: &StoppingProblem,
    manifest: &Manifest,
    law: &str,
    engine: EngineArgs,
    out: Option<PathBuf>,
) -> Result<i32, CliError> {
    let law = parse_law(law, p)?;
    let cfg = engine_config(p, &engine)?;
    let fixed = is_equilibrium(p, &law, &cfg)?;
    let doc = json!({
        "manifest": manifest.json(None),
        "law": law.kernel().to_string(),
        "is_equilibrium": fixed,
    });
    emit_json(out, &doc)?;
    Ok(EXIT_OK)
}

fn evaluate_cmd(
    p: &StoppingProblem,
    manifest: &Manifest,
    law: &str,
    x: Option<f64>,
    grid: &str,
    out: Option<PathBuf>,
) -> Result<i32, CliError> {
    let law = parse_law(law, p)?;
    let cfg = EngineConfig::for_problem(p);
    let xs = match x {
        Some(x) => vec![x],
        None => parse_grid(grid, "--grid")?,
    };
    let mut csv = String::new();
    writeln!(csv, "# manifest: {}", manifest.json(None)).unwrap();
    writeln!(csv, "x,J,u,J-u,region").unwrap();
    for x in xs {
        let j = continuation_value(p, &law, x)?;
        let u = p.transformed_payoff_checked(x)?;
        let diff = j - u;
        let region = if diff < -cfg.indifference_tol {
            "stop"
        } else if diff > cfg.indifference_tol {
            "continue"
        } else {
            "indifferent"
        };
        writeln!(csv, "{x},{j},{u},{diff},{region}").unwrap();
    }
    emit(out, &csv)?;
    Ok(EXIT_OK)
}

fn case_study_cmd(action: CaseStudyAction, manifest: &Manifest) -> Result<i32, CliError> {
    fn params(case: &CaseArgs) -> Result<CaseStudyParams, CliError> {
        Ok(CaseStudyParams::new(case.strike, case.eta)?)
    }
    match action {
        CaseStudyAction::Map { case, b } => {
            let c = params(&case)?;
            let doc = json!({
                "manifest": manifest.json(None),
                "b": b,
                "b_prime": c.theta_threshold_map(b)?,
            });
            emit_json(None, &doc)?;
        }
        CaseStudyAction::Value { case, x, b } => {
            let c = params(&case)?;
            if b > c.optimal_threshold() {
                eprintln!(
                    "warning: b = {b} lies outside the equilibrium family (b* = {})",
                    c.optimal_threshold()
                );
            }
            let doc = json!({
                "manifest": manifest.json(None),
                "x": x,
                "b": b,
                "value": c.value_of_threshold(x, b)?,
            });
            emit_json(None, &doc)?;
        }
        CaseStudyAction::Optimal { case, x } => {
            let c = params(&case)?;
            let b = c.optimal_equilibrium(x);
            let doc = json!({
                "manifest": manifest.json(None),
                "x": x,
                "optimal_threshold": b,
                "value": c.value_of_threshold(x, b)?,
            });
            emit_json(None, &doc)?;
        }
        CaseStudyAction::Cost { case, x, b } => {
            let c = params(&case)?;
            let doc = json!({
                "manifest": manifest.json(None),
                "x": x,
                "b": b,
                "cost": c.cost_of_equilibrium(x, b)?,
            });
            emit_json(None, &doc)?;
        }
        CaseStudyAction::Pareto { case, b1, b2 } => {
            let c = params(&case)?;
            let doc = json!({
                "manifest": manifest.json(None),
                "b1": b1,
                "b2": b2,
                "dominates": c.pareto_dominates(b1, b2)?,
            });
            emit_json(None, &doc)?;
        }
        CaseStudyAction::ValueSurface {
            case,
            x_grid,
            b_grid,
            out,
        } => {
            let c = params(&case)?;
            let mut csv = String::new();
            writeln!(csv, "# manifest: {}", manifest.json(None)).unwrap();
            writeln!(csv, "x,b,value").unwrap();
            for x in parse_grid(&x_grid, "--x-grid")? {
                for b in parse_grid(&b_grid, "--b-grid")? {
                    writeln!(csv, "{x},{b},{}", c.value_of_threshold(x, b)?).unwrap();
                }
            }
            emit(out, &csv)?;
        }
        CaseStudyAction::CostSurface {
            case,
            x_grid,
            b_grid,
            out,
        } => {
            let c = params(&case)?;
            let mut csv = String::new();
            writeln!(csv, "# manifest: {}", manifest.json(None)).unwrap();
            writeln!(csv, "x,b,cost").unwrap();
            for x in parse_grid(&x_grid, "--x-grid")? {
                for b in parse_grid(&b_grid, "--b-grid")? {
                    writeln!(csv, "{x},{b},{}", c.cost_of_equilibrium(x, b)?).unwrap();
                }
            }
            emit(out, &csv)?;
        }
    }
    Ok(EXIT_OK)
}

fn simulate_cmd(
    p: &StoppingProblem,
    manifest: &Manifest,
    law: &str,
    x0: f64,
    sim: &SimArgs,
    out: Option<PathBuf>,
    compare: bool,
) -> Result<i32, CliError> {
    let law = parse_law(law, p)?;
    let cfg = sim_config(p, sim);
    let sample = simulate_stopped_values(p, x0, &law, &cfg)?;
    if sample.censoring_warning() {
        eprintln!(
            "warning: {:.3}% of paths were censored at the horizon; \
             increase --horizon or lower --cutoff",
            100.0 * sample.censored_fraction()
        );
    }
    let boot = BootstrapConfig {
        resamples: 200,
        seed: sim.seed.wrapping_add(0xB005_757A),
    };
    let est = distorted_expectation(p, &sample, &boot);

    let mut csv = String::new();
    writeln!(csv, "# manifest: {}", manifest.json(Some(sim.seed))).unwrap();
    if compare {
        let closed = continuation_value(p, &law, x0)?;
        let z = (est.value - closed) / est.std_error;
        writeln!(csv, "estimate,std_error,closed_form,z_score").unwrap();
        writeln!(csv, "{},{},{},{}", est.value, est.std_error, closed, z).unwrap();
    } else {
        writeln!(csv, "estimate,std_error,censored_fraction").unwrap();
        writeln!(
            csv,
            "{},{},{}",
            est.value,
            est.std_error,
            sample.censored_fraction()
        )
        .unwrap();
    }
    emit(out, &csv)?;
    Ok(EXIT_OK)
}

fn hit_prob_cmd(
    manifest: &Manifest,
    x0: f64,
    b: f64,
    sim: &SimArgs,
    out: Option<PathBuf>,
) -> Result<i32, CliError> {
    let cfg = {
        let mut cfg = SimConfig::for_scale(b, sim.seed);
        cfg.n_paths = sim.paths;
        if let Some(dt) = sim.dt {
            cfg.dt = dt;
        }
        if let Some(h) = sim.horizon {
            cfg.horizon = h;
        }
        if let Some(c) = sim.cutoff {
            cfg.lower_cutoff = c;
        }
        cfg.bridge_correction = sim.bridge;
        cfg
    };
    let est = estimate_hit_prob(x0, b, &cfg)?;
    let exact = x0 / b;
    let mut csv = String::new();
    writeln!(csv, "# manifest: {}", manifest.json(Some(sim.seed))).unwrap();
    writeln!(csv, "estimate,std_error,closed_form,z_score").unwrap();
    writeln!(
        csv,
        "{},{},{},{}",
        est.value,
        est.std_error,
        exact,
        (est.value - exact) / est.std_error
    )
    .unwrap();
    emit(out, &csv)?;
    Ok(EXIT_OK)
}
