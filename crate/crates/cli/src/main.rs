use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use contactbench_bench::{csv::trajectory_csv, run_bench, run_solver, BenchOptions, SCENARIOS};
use contactbench_core::{ContactProblem, ProblemFile, SolverConfig, SolverKind, WarmStart};
use contactbench_sim::Scene;
use nalgebra::DVector;
use serde_json::json;

const EXIT_BUDGET: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "contactbench", version, about = "Frictional contact solvers and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one contact problem file and print the result as JSON.
    Solve {
        /// Problem JSON file.
        problem: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        /// JSON array with the initial impulses.
        #[arg(long, value_name = "FILE")]
        warm_start: Option<PathBuf>,
        /// Report zero solve time.
        #[arg(long)]
        deterministic_timing: bool,
    },
    /// Step a scene and write its trajectory as a v1 CSV table.
    Simulate {
        /// Scene JSON file.
        scene: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        /// Time step in seconds; defaults to the scene's.
        #[arg(long)]
        dt: Option<f64>,
        /// Simulated time in seconds.
        #[arg(long, default_value_t = 1.0)]
        duration: f64,
        /// Output CSV path.
        #[arg(long, default_value = "trajectory.csv")]
        out: PathBuf,
        /// Warm-start each step from the previous impulses.
        #[arg(long)]
        warm: bool,
        /// Write zeros in the solve-time column.
        #[arg(long)]
        deterministic_timing: bool,
    },
    /// Run catalog scenarios and write CSV tables and summaries.
    Bench {
        /// Scenario names, or `all`.
        #[arg(default_value = "all")]
        scenarios: Vec<String>,
        /// Output directory.
        #[arg(long, default_value = "bench-out")]
        out: PathBuf,
        /// Zero every wall-time field so that outputs are reproducible.
        #[arg(long)]
        deterministic_timing: bool,
    },
    /// Print the catalog scenario names.
    ListScenarios,
}

#[derive(Debug, Args)]
struct SolverArgs {
    #[arg(long, default_value = "ncp-pgs", value_parser = parse_solver)]
    solver: SolverKind,
    /// Absolute tolerance of the stopping criterion.
    #[arg(long, default_value_t = 1e-8)]
    eps: f64,
    /// Iteration budget.
    #[arg(long, default_value_t = 1000)]
    max_iters: usize,
    /// ADMM proximal parameter.
    #[arg(long)]
    rho: Option<f64>,
    /// Adapt the ADMM proximal parameter.
    #[arg(long)]
    adaptive_rho: bool,
    /// Relaxation weight in (0, 2).
    #[arg(long)]
    over_relax: Option<f64>,
}

fn parse_solver(s: &str) -> std::result::Result<SolverKind, String> {
    s.parse().map_err(|e: contactbench_core::ContactError| e.to_string())
}

impl SolverArgs {
    fn config(&self) -> Result<SolverConfig> {
        let config = SolverConfig {
            admm_rho: self.rho,
            adaptive_rho: self.adaptive_rho,
            over_relaxation: self.over_relax,
            ..SolverConfig::with_tolerance(self.eps, self.max_iters)
        };
        config.validate()?;
        Ok(config)
    }
}

/// Writes `text` and a newline to stdout; a closed pipe is not an error.
fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_problem(path: &Path) -> Result<ContactProblem> {
    let text = read(path)?;
    let file = ProblemFile::from_json(&text).with_context(|| format!("{}", path.display()))?;
    file.into_problem().with_context(|| format!("{}", path.display()))
}

fn solve(problem: &Path, args: &SolverArgs, warm_start: Option<&Path>, deterministic: bool) -> Result<u8> {
    let problem = load_problem(problem)?;
    let mut config = args.config()?;
    if let Some(path) = warm_start {
        let values: Vec<f64> = serde_json::from_str(&read(path)?).with_context(|| format!("{}", path.display()))?;
        config.warm_start = Some(WarmStart::from_lambda(DVector::from_vec(values)));
    }
    let s = args.solver.solve(&problem, &config)?;
    let out = json!({
        "solver": args.solver,
        "lambda": s.lambda.as_slice(),
        "contact_velocity": s.contact_velocity.as_slice(),
        "residuals": s.residuals,
        "stop_criterion": s.stop_criterion,
        "iterations": s.iterations,
        "converged": s.converged,
        "solve_time": if deterministic { 0.0 } else { s.solve_time },
    });
    emit(&serde_json::to_string_pretty(&out)?)?;
    Ok(if s.converged { 0 } else { EXIT_BUDGET })
}

#[allow(clippy::too_many_arguments)]
fn simulate(scene: &Path, args: &SolverArgs, dt: Option<f64>, duration: f64, out: &Path, warm: bool, deterministic: bool) -> Result<u8> {
    let mut scene = Scene::from_json(&read(scene)?).with_context(|| format!("{}", scene.display()))?;
    if let Some(dt) = dt {
        scene.dt = dt;
    }
    if !(duration > 0.0 && scene.dt > 0.0 && scene.dt <= duration) {
        bail!("need duration > 0 and 0 < dt <= duration, got duration {duration} and dt {}", scene.dt);
    }
    let steps = (duration / scene.dt).round() as usize;
    let mut record = run_solver(&scene, args.solver, &args.config()?, steps, warm)?;
    if deterministic {
        record.clear_timings();
    }
    let name = out.file_stem().map_or("simulate".into(), |s| s.to_string_lossy().into_owned());
    std::fs::write(out, trajectory_csv(&record, &name)?).with_context(|| format!("cannot write {}", out.display()))?;
    let unconverged = record.steps.iter().filter(|s| !s.converged).count();
    emit(&format!(
        "steps {}, mean iterations {:.3}, final energy {:.9e}, unconverged steps {unconverged}",
        record.steps.len(),
        record.mean_iterations(),
        record.final_energy()
    ))?;
    Ok(if unconverged == 0 { 0 } else { EXIT_BUDGET })
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Solve { problem, solver, warm_start, deterministic_timing } => {
            solve(&problem, &solver, warm_start.as_deref(), deterministic_timing)
        }
        Command::Simulate { scene, solver, dt, duration, out, warm, deterministic_timing } => {
            simulate(&scene, &solver, dt, duration, &out, warm, deterministic_timing)
        }
        Command::Bench { scenarios, out, deterministic_timing } => {
            let summary = run_bench(&scenarios, &out, BenchOptions { deterministic_timing })?;
            let count = summary["scenarios"].as_object().map_or(0, |m| m.len());
            emit(&format!("{count} scenarios written to {}", out.display()))?;
            Ok(0)
        }
        Command::ListScenarios => {
            emit(&SCENARIOS.join("\n"))?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
