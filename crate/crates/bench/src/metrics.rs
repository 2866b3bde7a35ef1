use std::time::Instant;

use contactbench_core::{ccp_stationarity, ContactSolution, SolverConfig, SolverKind};
use contactbench_sim::{advance, assemble_problem, detect_contacts, Scene, WarmCache};
use nalgebra::Vector3;
use serde::Serialize;

use crate::error::{BenchError, Result};
use crate::record::TrajectoryRecord;
use crate::scenario::Builtin;

/// Trapezoidal time integral of the COM distance to a finer reference.
///
/// Positions of all bodies are stacked; the reference is linearly
/// interpolated onto the grid of `record`.
pub fn integral_consistency_error(record: &TrajectoryRecord, reference: &TrajectoryRecord) -> Result<f64> {
    if record.initial_states.len() != reference.initial_states.len() {
        return Err(BenchError::InvalidArgument("records hold different bodies".into()));
    }
    let (h, h_ref) = (record.horizon(), reference.horizon());
    if (h - h_ref).abs() > 1e-9 * h.max(1.0) + 0.5 * reference.dt {
        return Err(BenchError::InvalidArgument(format!("horizon mismatch: {h} vs reference {h_ref}")));
    }
    if reference.dt > record.dt * (1.0 + 1e-12) {
        return Err(BenchError::InvalidArgument(format!(
            "reference grid {} is coarser than {}",
            reference.dt, record.dt
        )));
    }
    let times = record.times();
    let ref_times = reference.times();
    let positions = record.positions();
    let ref_positions = reference.positions();
    let reference_at = |t: f64| -> Vec<Vector3<f64>> {
        let k = ref_times.partition_point(|&s| s <= t).clamp(1, ref_times.len() - 1);
        let (t0, t1) = (ref_times[k - 1], ref_times[k]);
        let w = if t1 > t0 { ((t - t0) / (t1 - t0)).clamp(0.0, 1.0) } else { 0.0 };
        ref_positions[k - 1].iter().zip(&ref_positions[k]).map(|(a, b)| a * (1.0 - w) + b * w).collect()
    };
    let distance: Vec<f64> = times
        .iter()
        .zip(&positions)
        .map(|(&t, p)| {
            if ref_times.len() < 2 {
                return 0.0;
            }
            let r = reference_at(t);
            p.iter().zip(&r).map(|(a, b)| (a - b).norm_squared()).sum::<f64>().sqrt()
        })
        .collect();
    Ok(times.windows(2).zip(distance.windows(2)).map(|(t, d)| 0.5 * (t[1] - t[0]) * (d[0] + d[1])).sum())
}

/// Per-step spread of the tangential impulses along `direction` over the
/// four contacts of a cube; `None` where the step does not have 4 contacts.
pub fn internal_force_spread(record: &TrajectoryRecord, direction: &Vector3<f64>) -> Vec<Option<f64>> {
    let (t1, t2) = record.tangents;
    let (a1, a2) = (t1.dot(direction), t2.dot(direction));
    record
        .steps
        .iter()
        .map(|s| {
            if s.contacts.len() != 4 {
                return None;
            }
            let along = s.contacts.iter().map(|c| c.lambda.y * a1 + c.lambda.z * a2);
            let (lo, hi) = along.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            Some(hi - lo)
        })
        .collect()
}

/// Kinetic energy of the closed-form Coulomb deceleration of a sliding body.
pub fn analytic_sliding_energy(mass: f64, v0: f64, mu: f64, gravity: f64, t: f64) -> f64 {
    0.5 * mass * (v0 - mu * gravity * t).max(0.0).powi(2)
}

/// Largest relative error of the kinetic energy against the closed-form
/// sliding solution, over grid times up to the stop time minus `2 dt`.
pub fn energy_vs_analytic(record: &TrajectoryRecord, scene: &Scene, v0: f64, mu: f64) -> f64 {
    let gravity = scene.gravity.norm();
    let t_stop = if mu > 0.0 { v0 / (mu * gravity) } else { f64::INFINITY };
    let states = std::iter::once(&record.initial_states).chain(record.steps.iter().map(|s| &s.states));
    let mut worst = 0.0_f64;
    for (t, states) in record.times().into_iter().zip(states) {
        if t > t_stop - 2.0 * record.dt {
            break;
        }
        let mass: f64 = scene.bodies.iter().map(|b| b.mass).sum();
        let kinetic: f64 = scene
            .bodies
            .iter()
            .zip(states)
            .map(|(m, s)| {
                let w = s.angular_velocity;
                0.5 * m.mass * s.linear_velocity.norm_squared() + 0.5 * w.dot(&m.inertia.component_mul(&w))
            })
            .sum();
        let exact = analytic_sliding_energy(mass, v0, mu, gravity, t);
        worst = worst.max((kinetic - exact).abs() / exact);
    }
    worst
}

/// Residuals of one solver on one stacked-cubes configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditioningRow {
    pub mass_ratio: f64,
    pub solver: SolverKind,
    pub ncp_criterion: f64,
    pub ccp_stationarity: f64,
    pub stop_criterion: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// One step of each stacked-cubes configuration with each solver under `config`.
pub fn conditioning_sweep(mass_ratios: &[f64], solvers: &[SolverKind], config: &SolverConfig, dt: f64) -> Result<Vec<ConditioningRow>> {
    let mut rows = Vec::new();
    for &ratio in mass_ratios {
        let scene = Builtin::StackedCubes { mass_ratio: ratio }.scene(dt)?;
        let patches = detect_contacts(&scene, &scene.initial_states)?;
        let (problem, _, _) = assemble_problem(&scene, &scene.initial_states, &patches, 0.0)?;
        for &kind in solvers {
            let s = kind.solve(&problem, config)?;
            rows.push(ConditioningRow {
                mass_ratio: ratio,
                solver: kind,
                ncp_criterion: s.residuals.ncp_criterion,
                ccp_stationarity: ccp_stationarity(&problem, &s.lambda)?,
                stop_criterion: s.stop_criterion,
                iterations: s.iterations,
                converged: s.converged,
            });
        }
    }
    Ok(rows)
}

/// Cold and warm statistics of one step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingStep {
    pub time: f64,
    pub contacts: usize,
    pub cold_iterations: usize,
    pub warm_iterations: usize,
    pub cold_time_ns: u64,
    pub warm_time_ns: u64,
}

/// Cold and warm solver statistics along one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingReport {
    pub solver: SolverKind,
    pub steps: usize,
    pub contact_steps: usize,
    pub cold_mean_iterations: f64,
    pub warm_mean_iterations: f64,
    pub cold_mean_time_ns: f64,
    pub warm_mean_time_ns: f64,
    pub cold_all_converged: bool,
    pub warm_all_converged: bool,
    #[serde(skip)]
    pub per_step: Vec<TimingStep>,
}

impl TimingReport {
    /// Zeroes every wall-time field.
    pub fn clear_timings(&mut self) {
        self.cold_mean_time_ns = 0.0;
        self.warm_mean_time_ns = 0.0;
        for s in &mut self.per_step {
            s.cold_time_ns = 0;
            s.warm_time_ns = 0;
        }
    }
}

fn timed_solve(kind: SolverKind, problem: &contactbench_core::ContactProblem, config: &SolverConfig, repeats: usize) -> Result<(ContactSolution, u64)> {
    let mut times = Vec::with_capacity(repeats);
    let mut last = None;
    for _ in 0..repeats.max(1) {
        let start = Instant::now();
        let s = kind.solve(problem, config)?;
        times.push(start.elapsed().as_nanos() as u64);
        last = Some(s);
    }
    times.sort_unstable();
    Ok((last.expect("at least one repetition"), times[times.len() / 2]))
}

/// Runs `scene` with warm starts and re-solves every step's problem cold.
///
/// The warm impulses drive the trajectory, so both modes see the same
/// problems. Each solve is repeated `repeats` times and the median wall
/// time is kept. Steps without contacts count as zero time.
pub fn timing_report(scene: &Scene, kind: SolverKind, config: &SolverConfig, steps: usize, repeats: usize) -> Result<TimingReport> {
    scene.validate()?;
    let mut states = scene.initial_states.clone();
    let mut cache = WarmCache::default();
    let mut report = TimingReport {
        solver: kind,
        steps,
        contact_steps: 0,
        cold_mean_iterations: 0.0,
        warm_mean_iterations: 0.0,
        cold_mean_time_ns: 0.0,
        warm_mean_time_ns: 0.0,
        cold_all_converged: true,
        warm_all_converged: true,
        per_step: Vec::with_capacity(steps),
    };
    let mut cold_config = config.clone();
    cold_config.warm_start = None;
    for k in 0..steps {
        let time = k as f64 * scene.dt;
        let patches = detect_contacts(scene, &states)?;
        let (problem, j, v_free) = assemble_problem(scene, &states, &patches, time)?;
        let mut warm_config = config.clone();
        warm_config.warm_start = Some(cache.warm_start(&patches).0);
        let (warm, warm_ns) = timed_solve(kind, &problem, &warm_config, repeats)?;
        let mut row = TimingStep { time, contacts: patches.len(), cold_iterations: 0, warm_iterations: 0, cold_time_ns: 0, warm_time_ns: 0 };
        if !patches.is_empty() {
            let (cold, cold_ns) = timed_solve(kind, &problem, &cold_config, repeats)?;
            row = TimingStep { cold_iterations: cold.iterations, warm_iterations: warm.iterations, cold_time_ns: cold_ns, warm_time_ns: warm_ns, ..row };
            report.contact_steps += 1;
            report.cold_mean_iterations += cold.iterations as f64;
            report.warm_mean_iterations += warm.iterations as f64;
            report.cold_mean_time_ns += cold_ns as f64;
            report.warm_mean_time_ns += warm_ns as f64;
            report.cold_all_converged &= cold.converged;
            report.warm_all_converged &= warm.converged;
        }
        report.per_step.push(row);
        states = advance(scene, &states, &j, v_free, &warm.lambda);
        cache = WarmCache::from_solution(&patches, &warm);
    }
    let n = report.contact_steps.max(1) as f64;
    report.cold_mean_iterations /= n;
    report.warm_mean_iterations /= n;
    report.cold_mean_time_ns /= n;
    report.warm_mean_time_ns /= n;
    Ok(report)
}
