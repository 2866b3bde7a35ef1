use contactbench_bench::{
    integral_consistency_error, run_bench, run_scenario, run_solver, BenchOptions, Builtin, ScenarioSpec,
};
use contactbench_core::{compute_residuals, SolverConfig, SolverKind};
use contactbench_sim::{assemble_problem, detect_contacts};
use nalgebra::DVector;

fn without_timings(mut r: contactbench_bench::TrajectoryRecord) -> contactbench_bench::TrajectoryRecord {
    r.clear_timings();
    r
}

#[test]
fn stored_residuals_match_an_offline_recomputation() {
    let scene = Builtin::GrowingForceCube { mu: 0.5, rate: 20.0 }.scene(0.01).unwrap();
    for kind in SolverKind::ALL {
        let r = run_solver(&scene, kind, &SolverConfig::default(), 30, true).unwrap();
        let mut prev = r.initial_states.clone();
        for (k, step) in r.steps.iter().enumerate() {
            let patches = detect_contacts(&scene, &prev).unwrap();
            let (problem, _, _) = assemble_problem(&scene, &prev, &patches, k as f64 * scene.dt).unwrap();
            let lambda = DVector::from_iterator(3 * step.contacts.len(), step.contacts.iter().flat_map(|c| c.lambda.iter().copied().collect::<Vec<_>>()));
            let res = compute_residuals(&problem, &lambda).unwrap();
            assert!((res.ncp_criterion - step.ncp_criterion).abs() <= 1e-12, "{kind} step {k}");
            for (i, c) in step.contacts.iter().enumerate() {
                assert!((res.primal[i] - c.primal).abs() <= 1e-12);
                assert!((res.dual[i] - c.dual).abs() <= 1e-12);
                assert!((res.complementarity[i] - c.complementarity).abs() <= 1e-12);
            }
            prev = step.states.clone();
        }
    }
}

#[test]
fn scenarios_are_deterministic_apart_from_wall_time() {
    let scene = Builtin::sliding_cube().scene(0.005).unwrap();
    let spec = ScenarioSpec::new("s", scene, 0.5, SolverKind::ALL.to_vec(), SolverConfig::default()).unwrap();
    let a = run_scenario(&spec).unwrap();
    let b = run_scenario(&spec).unwrap();
    assert!(a.errors.is_empty());
    for (kind, ra) in a.records {
        assert_eq!(without_timings(ra), without_timings(b.records[&kind].clone()), "{kind}");
    }
}

#[test]
fn consistency_error_shrinks_with_the_step() {
    let reference = run_solver(&Builtin::sliding_cube().scene(1e-4).unwrap(), SolverKind::NcpPgs, &SolverConfig::default(), 5000, true).unwrap();
    let coarse = run_solver(&Builtin::sliding_cube().scene(1e-2).unwrap(), SolverKind::NcpPgs, &SolverConfig::default(), 50, true).unwrap();
    let fine = run_solver(&Builtin::sliding_cube().scene(1e-3).unwrap(), SolverKind::NcpPgs, &SolverConfig::default(), 500, true).unwrap();
    let ec = integral_consistency_error(&coarse, &reference).unwrap();
    let ef = integral_consistency_error(&fine, &reference).unwrap();
    assert!(ef < ec && ef > 0.0, "{ef} {ec}");
}

#[test]
fn bench_writes_one_directory_per_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let summary = run_bench(&["stacked_cubes", "single_contact"], dir.path(), BenchOptions { deterministic_timing: true }).unwrap();
    assert_eq!(summary["scenarios"].as_object().unwrap().len(), 2);
    assert!(dir.path().join("summary.json").is_file());
    for kind in SolverKind::ALL {
        let csv = std::fs::read_to_string(dir.path().join("stacked_cubes").join(format!("{kind}.csv"))).unwrap();
        assert!(csv.starts_with("# contactbench-csv v1\n"));
    }
    let s: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("stacked_cubes/summary.json")).unwrap()).unwrap();
    assert_eq!(s["runtime_s"], 0.0);
    assert!(s["rows"].as_array().unwrap().len() == 24);
}

#[test]
fn unknown_scenarios_are_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let err = run_bench(&["sliding_cube", "nope"], dir.path(), BenchOptions::default()).unwrap_err();
    assert!(err.to_string().contains("nope"));
    assert!(std::fs::read_dir(dir.path()).unwrap().next().is_none());
}
