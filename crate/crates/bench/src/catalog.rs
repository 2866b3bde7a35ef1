use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use contactbench_core::{SolverConfig, SolverKind};
use nalgebra::Vector3;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::csv::{timing_csv, trajectory_csv, CONSISTENCY_INTEGRAND};
use crate::error::{BenchError, Result};
use crate::metrics::{
    conditioning_sweep, energy_vs_analytic, integral_consistency_error, internal_force_spread, timing_report,
};
use crate::record::{run_scenario, run_solver, ScenarioRun, TrajectoryRecord};
use crate::scenario::{Builtin, ScenarioSpec, CUBE_HALF, GROWING_FORCE_RATE, GROWING_MU, SLIDING_MU, SLIDING_V0};
use crate::suite::{
    frictionless_agreement, mdp_diagnostics, oracle_agreement, random_frictionless_problems,
    random_single_contact_problems,
};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "CONTACTBENCH_THREADS";

/// Every scenario of the catalog, in run order.
pub const SCENARIOS: [&str; 10] = [
    "single_contact",
    "sliding_cube",
    "sliding_cube_rotated45",
    "growing_force_cube",
    "stacked_cubes",
    "dropped_cube",
    "compliant_rest",
    "dt_consistency",
    "eps_consistency",
    "warm_start_timing",
];

/// Scenarios whose results are wall times; they run alone.
const TIMING_SCENARIOS: [&str; 1] = ["warm_start_timing"];

pub const BASE_DT: f64 = 1e-3;
pub const REFERENCE_DT: f64 = 1e-4;
pub const REFERENCE_EPS: f64 = 1e-9;
pub const CONDITIONING_RATIOS: [f64; 4] = [1.0, 1e2, 1e4, 1e6];
/// Off-diagonal basis angle reported next to the 45 degree case.
pub const OFF_DIAGONAL_DEG: f64 = 22.5;
/// Stiction phase of the growing-force cube in which equal corner forces are admissible.
pub const SYMMETRIC_STICTION_WINDOW: f64 = 0.15;
pub const TIMING_REPEATS: usize = 5;

/// Options of a benchmark run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BenchOptions {
    /// Zero every wall-time field so that outputs are reproducible.
    pub deterministic_timing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvFile {
    pub name: String,
    pub contents: String,
}

/// Tables and metrics of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutput {
    pub name: String,
    pub tables: Vec<CsvFile>,
    pub summary: Value,
}

/// Solver settings used throughout the catalog.
pub fn bench_config(eps: f64, max_iterations: usize) -> SolverConfig {
    SolverConfig { adaptive_rho: true, ..SolverConfig::with_tolerance(eps, max_iterations) }
}

/// Expands `all` and checks every name against the catalog.
pub fn resolve_names<S: AsRef<str>>(names: &[S]) -> Result<Vec<String>> {
    if names.is_empty() || names.iter().any(|n| n.as_ref() == "all") {
        return Ok(SCENARIOS.iter().map(|s| s.to_string()).collect());
    }
    names
        .iter()
        .map(|n| {
            let n = n.as_ref();
            if SCENARIOS.contains(&n) {
                Ok(n.to_string())
            } else {
                Err(BenchError::UnknownScenario { name: n.to_string(), valid: SCENARIOS.iter().map(|s| s.to_string()).collect() })
            }
        })
        .collect()
}

/// Runs one catalog scenario.
pub fn run_named(name: &str, options: BenchOptions) -> Result<ScenarioOutput> {
    let start = Instant::now();
    let mut out = match name {
        "single_contact" => single_contact()?,
        "sliding_cube" => sliding_cube()?,
        "sliding_cube_rotated45" => sliding_cube_rotated()?,
        "growing_force_cube" => growing_force_cube()?,
        "stacked_cubes" => stacked_cubes()?,
        "dropped_cube" => dropped_cube()?,
        "compliant_rest" => compliant_rest()?,
        "dt_consistency" => dt_consistency()?,
        "eps_consistency" => eps_consistency()?,
        "warm_start_timing" => warm_start_timing(options)?,
        _ => {
            return Err(BenchError::UnknownScenario {
                name: name.to_string(),
                valid: SCENARIOS.iter().map(|s| s.to_string()).collect(),
            })
        }
    };
    let runtime = if options.deterministic_timing { 0.0 } else { start.elapsed().as_secs_f64() };
    out.summary["runtime_s"] = json!(runtime);
    if options.deterministic_timing {
        for table in &mut out.tables {
            table.contents = zero_time_column(&table.contents);
        }
    }
    Ok(out)
}

/// Number of worker threads: `CONTACTBENCH_THREADS` when set, else the rayon default.
pub fn thread_count() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| BenchError::InvalidArgument(format!("{THREADS_ENV} must be a positive integer, got '{v}'"))),
        Err(_) => Ok(rayon::current_num_threads()),
    }
}

/// Runs `names` and writes one directory per scenario under `out_dir`,
/// plus an index `summary.json`. Non-timing scenarios run concurrently;
/// timing scenarios run afterwards, one at a time.
pub fn run_bench<S: AsRef<str>>(names: &[S], out_dir: &Path, options: BenchOptions) -> Result<Value> {
    let names = resolve_names(names)?;
    let start = Instant::now();
    let (timing, parallel): (Vec<_>, Vec<_>) = names.iter().partition(|n| TIMING_SCENARIOS.contains(&n.as_str()));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count()?)
        .build()
        .map_err(|e| BenchError::InvalidArgument(format!("thread pool: {e}")))?;
    let mut outputs: Vec<ScenarioOutput> =
        pool.install(|| parallel.par_iter().map(|n| run_named(n, options)).collect::<Result<Vec<_>>>())?;
    for n in timing {
        outputs.push(run_named(n, options)?);
    }
    let mut index = BTreeMap::new();
    for out in &outputs {
        write_output(out_dir, out)?;
        let files: Vec<_> = out.tables.iter().map(|t| t.name.clone()).collect();
        index.insert(out.name.clone(), json!({ "files": files, "runtime_s": out.summary["runtime_s"] }));
    }
    let total = if options.deterministic_timing { 0.0 } else { start.elapsed().as_secs_f64() };
    let summary = json!({
        "format": "contactbench-summary v1",
        "scenarios": index,
        "runtime_s": total,
    });
    write_file(&out_dir.join("summary.json"), &pretty(&summary))?;
    Ok(summary)
}

/// Writes `<dir>/<scenario>/summary.json` and the scenario tables.
pub fn write_output(dir: &Path, out: &ScenarioOutput) -> Result<()> {
    let sub = dir.join(&out.name);
    std::fs::create_dir_all(&sub).map_err(|e| BenchError::Io { path: sub.clone(), source: e })?;
    for table in &out.tables {
        write_file(&sub.join(&table.name), &table.contents)?;
    }
    write_file(&sub.join("summary.json"), &pretty(&out.summary))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| BenchError::Io { path: path.to_path_buf(), source: e })
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("summary serializes");
    s.push('\n');
    s
}

/// Replaces the last column of every data row by 0.
fn zero_time_column(table: &str) -> String {
    let mut out = String::with_capacity(table.len());
    let mut header_seen = false;
    for line in table.lines() {
        if line.starts_with('#') || !header_seen {
            header_seen |= !line.starts_with('#');
            out.push_str(line);
        } else {
            let cut = line.rfind(',').map_or(0, |i| i + 1);
            out.push_str(&line[..cut]);
            out.push('0');
        }
        out.push('\n');
    }
    out
}

fn table(scenario: &str, name: String, record: &TrajectoryRecord) -> Result<CsvFile> {
    Ok(CsvFile { name, contents: trajectory_csv(record, scenario)? })
}

fn run_tables(scenario: &str, run: &ScenarioRun) -> Result<Vec<CsvFile>> {
    run.records.iter().map(|(k, r)| table(scenario, format!("{k}.csv"), r)).collect()
}

fn errors_json(run: &ScenarioRun) -> Value {
    json!(run.errors.iter().map(|(k, e)| (k.to_string(), e.clone())).collect::<BTreeMap<_, _>>())
}

fn vec_json(v: &Vector3<f64>) -> Value {
    json!([v.x, v.y, v.z])
}

/// Statistics shared by every trajectory summary.
fn trajectory_summary(r: &TrajectoryRecord) -> Value {
    let last = r.steps.last().map_or(&r.initial_states, |s| &s.states);
    json!({
        "steps": r.steps.len(),
        "mean_iterations": r.mean_iterations(),
        "unconverged_steps": r.steps.iter().filter(|s| !s.converged).count(),
        "max_ncp_criterion": r.steps.iter().map(|s| s.ncp_criterion).fold(0.0, f64::max),
        "initial_energy": r.initial_energy,
        "final_energy": r.final_energy(),
        "final_positions": last.iter().map(|s| vec_json(&s.position)).collect::<Vec<_>>(),
        "branches": r.branch_totals(),
    })
}

fn merge(mut base: Value, extra: Value) -> Value {
    if let (Some(b), Value::Object(e)) = (base.as_object_mut(), extra) {
        b.extend(e);
    }
    base
}

fn single_contact() -> Result<ScenarioOutput> {
    let config = bench_config(1e-12, 100_000);
    let coupled = random_single_contact_problems(200, 11, false)?;
    let uncoupled = random_single_contact_problems(200, 12, true)?;
    let mut oracle = BTreeMap::new();
    for kind in [SolverKind::NcpPgs, SolverKind::Staggered, SolverKind::Raisim] {
        oracle.insert(kind.to_string(), json!({
            "coupled": oracle_agreement(&coupled, kind, &config)?,
            "uncoupled": oracle_agreement(&uncoupled, kind, &config)?,
        }));
    }
    let frictionless = random_frictionless_problems(50, 3, 5)?;
    let summary = json!({
        "scenario": "single_contact",
        "solver_eps": config.eps_abs,
        "oracle": oracle,
        "frictionless": frictionless_agreement(&frictionless, &SolverKind::ALL, &config)?,
        "mdp": mdp_diagnostics(&config)?,
    });
    Ok(ScenarioOutput { name: "single_contact".into(), tables: Vec::new(), summary })
}

fn sliding_parameters(scene: &contactbench_sim::Scene, duration: f64) -> Value {
    json!({
        "mass": scene.bodies[0].mass,
        "mu": SLIDING_MU,
        "v0": SLIDING_V0,
        "gravity": scene.gravity.norm(),
        "dt": scene.dt,
        "duration": duration,
        "tangent_rotation_deg": scene.tangent_rotation.to_degrees(),
    })
}

fn sliding_cube() -> Result<ScenarioOutput> {
    let name = "sliding_cube";
    let duration = 1.0;
    let scene = Builtin::sliding_cube().scene(BASE_DT)?;
    let config = bench_config(1e-10, 1000);
    let spec = ScenarioSpec::new(name, scene.clone(), duration, SolverKind::ALL.to_vec(), config.clone())?;
    let run = run_scenario(&spec)?;
    let t_stop = SLIDING_V0 / (SLIDING_MU * scene.gravity.norm());
    let mut solvers = BTreeMap::new();
    for (kind, r) in &run.records {
        let sliding = r.steps.iter().filter(|s| s.time <= t_stop - 2.0 * r.dt);
        let (mut eps_c, mut ccp_comp, mut active_cn) = (0.0_f64, 0.0_f64, 0.0_f64);
        for s in sliding {
            for c in &s.contacts {
                eps_c = eps_c.max(c.complementarity);
                ccp_comp = ccp_comp.max(c.lambda.dot(&c.velocity).abs());
                if c.lambda.x > 0.0 {
                    active_cn = active_cn.max(c.velocity.x.abs());
                }
            }
        }
        let z0 = r.initial_states[0].position.z;
        let rise = r.steps.iter().map(|s| s.states[0].position.z - z0).fold(0.0, f64::max);
        let last = r.steps.last().map_or(&r.initial_states, |s| &s.states);
        solvers.insert(kind.to_string(), merge(trajectory_summary(r), json!({
            "lateral_drift": last[0].position.x.abs(),
            "energy_error": energy_vs_analytic(r, &scene, SLIDING_V0, SLIDING_MU),
            "max_eps_c_sliding": eps_c,
            "max_ccp_complementarity_sliding": ccp_comp,
            "max_active_normal_velocity_sliding": active_cn,
            "max_height_rise": rise,
        })));
    }
    let summary = json!({
        "scenario": name,
        "parameters": merge(sliding_parameters(&scene, duration), json!({ "eps": config.eps_abs, "stop_time": t_stop })),
        "solvers": solvers,
        "errors": errors_json(&run),
    });
    Ok(ScenarioOutput { name: name.into(), tables: run_tables(name, &run)?, summary })
}

fn lateral_drift(kind: SolverKind, deg: f64, config: &SolverConfig, duration: f64) -> Result<(f64, TrajectoryRecord)> {
    let scene = Builtin::SlidingCube { mu: SLIDING_MU, v0: SLIDING_V0, tangent_rotation_deg: deg }.scene(BASE_DT)?;
    let r = run_solver(&scene, kind, config, (duration / BASE_DT).round() as usize, true)?;
    let x = r.steps.last().map_or(0.0, |s| s.states[0].position.x.abs());
    Ok((x, r))
}

fn sliding_cube_rotated() -> Result<ScenarioOutput> {
    let name = "sliding_cube_rotated45";
    let duration = 1.0;
    let config = bench_config(1e-10, 1000);
    let mut solvers = BTreeMap::new();
    let mut tables = Vec::new();
    let mut drift = BTreeMap::new();
    for kind in SolverKind::ALL {
        let (x, r) = lateral_drift(kind, 45.0, &config, duration)?;
        drift.insert(kind, x);
        solvers.insert(kind.to_string(), merge(trajectory_summary(&r), json!({ "lateral_drift": x })));
        tables.push(table(name, format!("{kind}.csv"), &r)?);
    }
    let (lcp_off, _) = lateral_drift(SolverKind::LcpPgs, OFF_DIAGONAL_DEG, &config, duration)?;
    let (ncp_off, _) = lateral_drift(SolverKind::NcpPgs, OFF_DIAGONAL_DEG, &config, duration)?;
    let scene = Builtin::SlidingCube { mu: SLIDING_MU, v0: SLIDING_V0, tangent_rotation_deg: 45.0 }.scene(BASE_DT)?;
    let summary = json!({
        "scenario": name,
        "parameters": merge(sliding_parameters(&scene, duration), json!({ "eps": config.eps_abs })),
        "solvers": solvers,
        "lcp_to_ncp_drift_ratio": drift[&SolverKind::LcpPgs] / drift[&SolverKind::NcpPgs],
        "off_diagonal": {
            "tangent_rotation_deg": OFF_DIAGONAL_DEG,
            "lcp_lateral_drift": lcp_off,
            "ncp_lateral_drift": ncp_off,
        },
    });
    Ok(ScenarioOutput { name: name.into(), tables, summary })
}

fn growing_force_cube() -> Result<ScenarioOutput> {
    let name = "growing_force_cube";
    let duration = 0.4;
    let scene = Builtin::GrowingForceCube { mu: GROWING_MU, rate: GROWING_FORCE_RATE }.scene(BASE_DT)?;
    let config = bench_config(1e-10, 1000);
    let run = run_scenario(&ScenarioSpec::new(name, scene.clone(), duration, SolverKind::ALL.to_vec(), config.clone())?)?;
    let mass = scene.bodies[0].mass;
    let g = scene.gravity.norm();
    let mut solvers = BTreeMap::new();
    for (kind, r) in &run.records {
        let spread = internal_force_spread(r, &Vector3::y());
        let onset = r.steps.iter().find(|s| s.states[0].linear_velocity.y > 1e-6).map(|s| s.time);
        let max_in = |limit: f64| {
            spread.iter().zip(&r.steps).filter(|(_, s)| s.time <= limit).filter_map(|(v, _)| *v).fold(0.0, f64::max)
        };
        solvers.insert(kind.to_string(), merge(trajectory_summary(r), json!({
            "max_spread_symmetric_window": max_in(SYMMETRIC_STICTION_WINDOW),
            "max_spread_before_sliding": max_in(onset.unwrap_or(duration)),
            "sliding_onset": onset,
            "skipped_steps": spread.iter().filter(|v| v.is_none()).count(),
        })));
    }
    let summary = json!({
        "scenario": name,
        "parameters": {
            "mass": mass,
            "mu": GROWING_MU,
            "force_rate": GROWING_FORCE_RATE,
            "dt": scene.dt,
            "duration": duration,
            "eps": config.eps_abs,
            "pull_direction": [0.0, 1.0, 0.0],
            "symmetric_window": SYMMETRIC_STICTION_WINDOW,
            "analytic_sliding_onset": GROWING_MU * mass * g / GROWING_FORCE_RATE,
        },
        "solvers": solvers,
        "errors": errors_json(&run),
    });
    Ok(ScenarioOutput { name: name.into(), tables: run_tables(name, &run)?, summary })
}

fn stacked_cubes() -> Result<ScenarioOutput> {
    let name = "stacked_cubes";
    let config = bench_config(1e-10, 1000);
    let rows = conditioning_sweep(&CONDITIONING_RATIOS, &SolverKind::ALL, &config, BASE_DT)?;
    let residual = |ratio: f64, kind: SolverKind| {
        rows.iter().find(|r| r.mass_ratio == ratio && r.solver == kind).map_or(f64::NAN, |r| r.ccp_stationarity)
    };
    let admm_below = CONDITIONING_RATIOS
        .iter()
        .all(|&q| residual(q, SolverKind::CcpAdmm) < residual(q, SolverKind::CcpPgs));
    let admm_max = CONDITIONING_RATIOS.iter().map(|&q| residual(q, SolverKind::CcpAdmm)).fold(0.0, f64::max);
    let heaviest = *CONDITIONING_RATIOS.last().expect("ratios");
    let scene = Builtin::StackedCubes { mass_ratio: heaviest }.scene(BASE_DT)?;
    let run = run_scenario(&ScenarioSpec::new(name, scene, BASE_DT, SolverKind::ALL.to_vec(), config.clone())?)?;
    let summary = json!({
        "scenario": name,
        "parameters": { "mass_ratios": CONDITIONING_RATIOS, "max_iterations": config.max_iterations, "eps": config.eps_abs, "dt": BASE_DT, "table_mass_ratio": heaviest },
        "rows": rows,
        "admm_max_ccp_stationarity": admm_max,
        "admm_below_ccp_pgs_at_every_ratio": admm_below,
        "errors": errors_json(&run),
    });
    Ok(ScenarioOutput { name: name.into(), tables: run_tables(name, &run)?, summary })
}

fn dropped_cube() -> Result<ScenarioOutput> {
    let name = "dropped_cube";
    let (height, restitution, duration) = (0.1, 0.5, 1.0);
    let scene = Builtin::DroppedCube { height, restitution }.scene(BASE_DT)?;
    let config = bench_config(1e-8, 1000);
    let run = run_scenario(&ScenarioSpec::new(name, scene.clone(), duration, SolverKind::ALL.to_vec(), config.clone())?)?;
    let mut solvers = BTreeMap::new();
    for (kind, r) in &run.records {
        let impact = r.steps.iter().position(|s| !s.contacts.is_empty());
        let after = impact.map_or(&r.steps[..0], |k| &r.steps[k..]);
        let bounce = after.iter().map(|s| s.states[0].position.z - CUBE_HALF).fold(0.0, f64::max);
        solvers.insert(kind.to_string(), merge(trajectory_summary(r), json!({
            "first_contact_time": impact.map(|k| r.steps[k].time),
            "rebound_height": bounce,
        })));
    }
    let summary = json!({
        "scenario": name,
        "parameters": { "height": height, "restitution": restitution, "dt": BASE_DT, "duration": duration, "eps": config.eps_abs,
            "analytic_rebound_height": restitution * restitution * height },
        "solvers": solvers,
        "errors": errors_json(&run),
    });
    Ok(ScenarioOutput { name: name.into(), tables: run_tables(name, &run)?, summary })
}

fn compliant_rest() -> Result<ScenarioOutput> {
    let name = "compliant_rest";
    let (compliance, baumgarte, duration) = (1e-2, 10.0, 2.0);
    let scene = Builtin::CompliantRest { compliance, baumgarte }.scene(BASE_DT)?;
    let config = bench_config(1e-10, 1000);
    let run = run_scenario(&ScenarioSpec::new(name, scene.clone(), duration, SolverKind::ALL.to_vec(), config.clone())?)?;
    let weight_impulse = scene.bodies[0].mass * scene.gravity.norm() * BASE_DT;
    let predicted = compliance * weight_impulse / 4.0 / baumgarte;
    let mut solvers = BTreeMap::new();
    for (kind, r) in &run.records {
        let last = r.steps.last().map_or(&r.initial_states, |s| &s.states);
        let normal_sum: f64 = r.steps.last().map_or(0.0, |s| s.contacts.iter().map(|c| c.lambda.x).sum());
        solvers.insert(kind.to_string(), merge(trajectory_summary(r), json!({
            "final_penetration": CUBE_HALF - last[0].position.z,
            "final_normal_impulse": normal_sum,
        })));
    }
    let summary = json!({
        "scenario": name,
        "parameters": { "compliance": compliance, "baumgarte": baumgarte, "dt": BASE_DT, "duration": duration, "eps": config.eps_abs,
            "predicted_penetration": predicted, "weight_impulse": weight_impulse },
        "solvers": solvers,
        "errors": errors_json(&run),
    });
    Ok(ScenarioOutput { name: name.into(), tables: run_tables(name, &run)?, summary })
}

const CONSISTENCY_SOLVERS: [SolverKind; 4] = [SolverKind::NcpPgs, SolverKind::CcpPgs, SolverKind::Raisim, SolverKind::CcpAdmm];

fn sliding_run(kind: SolverKind, dt: f64, eps: f64, duration: f64) -> Result<TrajectoryRecord> {
    let scene = Builtin::sliding_cube().scene(dt)?;
    run_solver(&scene, kind, &bench_config(eps, 1000), (duration / dt).round() as usize, true)
}

fn dt_consistency() -> Result<ScenarioOutput> {
    let name = "dt_consistency";
    let duration = 1.0;
    let dts = [1e-3, 1e-2];
    let mut solvers = BTreeMap::new();
    let mut tables = Vec::new();
    for kind in CONSISTENCY_SOLVERS {
        let reference = sliding_run(kind, REFERENCE_DT, REFERENCE_EPS, duration)?;
        let mut errors = Vec::new();
        for dt in dts {
            let r = sliding_run(kind, dt, REFERENCE_EPS, duration)?;
            errors.push(integral_consistency_error(&r, &reference)?);
            tables.push(table(name, format!("{kind}_dt{dt:e}.csv"), &r)?);
        }
        solvers.insert(kind.to_string(), json!({
            "error_dt_1ms": errors[0],
            "error_dt_10ms": errors[1],
            "ratio_10ms_to_1ms": errors[1] / errors[0],
        }));
    }
    let summary = json!({
        "scenario": name,
        "parameters": { "dts": dts, "reference_dt": REFERENCE_DT, "eps": REFERENCE_EPS, "duration": duration,
            "integrand": CONSISTENCY_INTEGRAND },
        "solvers": solvers,
    });
    Ok(ScenarioOutput { name: name.into(), tables, summary })
}

fn eps_consistency() -> Result<ScenarioOutput> {
    let name = "eps_consistency";
    let duration = 1.0;
    let eps_values = [1e-2, 1e-4, 1e-6];
    let mut solvers = BTreeMap::new();
    let mut tables = Vec::new();
    let mut at_loosest = BTreeMap::new();
    for kind in CONSISTENCY_SOLVERS {
        let reference = sliding_run(kind, BASE_DT, REFERENCE_EPS, duration)?;
        let mut errors = BTreeMap::new();
        for eps in eps_values {
            let r = sliding_run(kind, BASE_DT, eps, duration)?;
            let e = integral_consistency_error(&r, &reference)?;
            errors.insert(format!("{eps:e}"), e);
            if eps == eps_values[0] {
                at_loosest.insert(kind, e);
                tables.push(table(name, format!("{kind}_eps{eps:e}.csv"), &r)?);
            }
        }
        solvers.insert(kind.to_string(), json!({ "errors": errors }));
    }
    let summary = json!({
        "scenario": name,
        "parameters": { "eps_values": eps_values, "reference_eps": REFERENCE_EPS, "dt": BASE_DT, "duration": duration,
            "integrand": CONSISTENCY_INTEGRAND },
        "solvers": solvers,
        "ncp_to_ccp_pgs_ratio_at_loosest": at_loosest[&SolverKind::NcpPgs] / at_loosest[&SolverKind::CcpPgs],
    });
    Ok(ScenarioOutput { name: name.into(), tables, summary })
}

fn warm_start_timing(options: BenchOptions) -> Result<ScenarioOutput> {
    let name = "warm_start_timing";
    let duration = 1.0;
    let scene = Builtin::sliding_cube().scene(BASE_DT)?;
    let config = bench_config(1e-8, 1000);
    let steps = (duration / BASE_DT).round() as usize;
    let mut solvers = BTreeMap::new();
    let mut tables = Vec::new();
    for kind in SolverKind::ALL {
        let mut report = timing_report(&scene, kind, &config, steps, TIMING_REPEATS)?;
        if options.deterministic_timing {
            report.clear_timings();
        }
        tables.push(CsvFile { name: format!("{kind}.csv"), contents: timing_csv(&report, name, BASE_DT)? });
        let ratio = report.warm_mean_iterations / report.cold_mean_iterations;
        solvers.insert(kind.to_string(), merge(json!(report), json!({ "warm_to_cold_iterations": ratio })));
    }
    let summary = json!({
        "scenario": name,
        "parameters": merge(sliding_parameters(&scene, duration), json!({ "eps": config.eps_abs, "repeats": TIMING_REPEATS })),
        "solvers": solvers,
    });
    Ok(ScenarioOutput { name: name.into(), tables, summary })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_expands_to_the_catalog() {
        assert_eq!(resolve_names(&["all"]).unwrap().len(), SCENARIOS.len());
        assert_eq!(resolve_names::<&str>(&[]).unwrap().len(), SCENARIOS.len());
    }

    #[test]
    fn unknown_names_list_the_valid_ones() {
        let err = resolve_names(&["nonexistent"]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("nonexistent") && msg.contains("sliding_cube"), "{msg}");
    }

    #[test]
    fn time_column_is_zeroed() {
        let t = "# h\nt,solve_time_ns\n0.1,123\n0.2,456\n";
        assert_eq!(zero_time_column(t), "# h\nt,solve_time_ns\n0.1,0\n0.2,0\n");
    }
}
