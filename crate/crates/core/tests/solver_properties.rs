use contactbench_core::solvers::single_contact_problem;
use contactbench_core::{compute_residuals, ContactProblem, SolverConfig, SolverKind, WarmStart};
use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use proptest::prelude::*;

fn sliding_example() -> ContactProblem {
    single_contact_problem(Matrix3::identity(), Vector3::new(-1.0, -2.0, 0.0), 0.5).unwrap()
}

fn random_problem(contacts: usize, seed: &[f64], mu: f64) -> ContactProblem {
    let n = 3 * contacts;
    let a = DMatrix::from_fn(n, n, |i, j| seed[(i * n + j) % seed.len()]);
    let g = DVector::from_fn(n, |i, _| seed[(7 * i + 3) % seed.len()] * 2.0);
    ContactProblem::new(a.transpose() * a + DMatrix::identity(n, n) * 0.5, g, &vec![mu; contacts]).unwrap()
}

fn problem_strategy() -> impl Strategy<Value = ContactProblem> {
    (1usize..4, prop::collection::vec(-1.0..1.0f64, 64), prop_oneof![Just(0.0), 0.1..1.0f64])
        .prop_map(|(nc, seed, mu)| random_problem(nc, &seed, mu))
}

#[test]
fn ccp_solvers_violate_signorini_on_the_sliding_example() {
    let problem = sliding_example();
    let config = SolverConfig::with_tolerance(1e-12, 100_000);
    let pgs = SolverKind::CcpPgs.solve(&problem, &config).unwrap();
    let admm = SolverKind::CcpAdmm.solve(&problem, &config).unwrap();
    assert!((&pgs.lambda - &admm.lambda).amax() <= 1e-6, "{} vs {}", pgs.lambda, admm.lambda);
    for s in [&pgs, &admm] {
        assert!((s.residuals.complementarity[0] - 0.96).abs() <= 1e-4, "{:?}", s.residuals);
        assert!(s.lambda.dot(&s.contact_velocity).abs() <= 1e-8);
    }
}

#[test]
fn admm_primal_gap_shrinks_on_strictly_convex_problems() {
    let seeds: Vec<f64> = (0..64).map(|k| ((k * 37 % 64) as f64 / 32.0) - 1.0).collect();
    for nc in 1..4 {
        let problem = random_problem(nc, &seeds, 0.6);
        let config = SolverConfig::with_tolerance(1e-300, 100);
        let s = SolverKind::CcpAdmm.solve(&problem, &config).unwrap();
        let gap = &s.trace.primal_gap;
        assert_eq!(gap.len(), 100);
        for k in [1usize, 5, 10] {
            assert!(gap[10 * k - 1] <= gap[k - 1], "{nc} contacts, k={k}: {} > {}", gap[10 * k - 1], gap[k - 1]);
        }
    }
}

#[test]
fn empty_problem_is_solved_by_every_solver() {
    for kind in SolverKind::ALL {
        let s = kind.solve(&ContactProblem::empty(), &SolverConfig::default()).unwrap();
        assert!(s.converged && s.iterations == 0 && s.lambda.is_empty(), "{kind}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn raisim_restores_signorini_on_active_contacts(problem in problem_strategy()) {
        let eps = 1e-9;
        let s = SolverKind::Raisim.solve(&problem, &SolverConfig::with_tolerance(eps, 100_000)).unwrap();
        prop_assume!(s.converged);
        for i in 0..problem.num_contacts() {
            if s.lambda[3 * i] > eps {
                prop_assert!(s.contact_velocity[3 * i].abs() <= 10.0 * eps, "contact {}: {}", i, s.contact_velocity[3 * i]);
            }
        }
    }

    #[test]
    fn solvers_are_deterministic(problem in problem_strategy()) {
        let config = SolverConfig { adaptive_rho: true, ..SolverConfig::with_tolerance(1e-9, 2000) };
        for kind in SolverKind::ALL {
            let a = kind.solve(&problem, &config).unwrap();
            let b = kind.solve(&problem, &config).unwrap();
            prop_assert_eq!(a.lambda.as_slice(), b.lambda.as_slice(), "{}", kind);
            prop_assert_eq!(a.iterations, b.iterations);
        }
    }

    #[test]
    fn warm_start_at_the_solution_stops_at_once(problem in problem_strategy()) {
        for kind in SolverKind::ALL {
            let tight = SolverConfig::with_tolerance(1e-12, 100_000);
            let exact = kind.solve(&problem, &tight).unwrap();
            prop_assume!(exact.converged);
            let warm = SolverConfig {
                warm_start: Some(WarmStart { lambda: exact.lambda.clone(), rho: exact.admm.as_ref().map(|a| a.rho), dual: exact.admm.as_ref().map(|a| a.dual.clone()) }),
                ..SolverConfig::with_tolerance(1e-9, 100_000)
            };
            let s = kind.solve(&problem, &warm).unwrap();
            prop_assert!(s.converged, "{}", kind);
            prop_assert!(s.iterations <= 2, "{}: {} iterations", kind, s.iterations);
            prop_assert!((&s.lambda - &exact.lambda).amax() <= 1e-9, "{}", kind);
        }
    }

    #[test]
    fn residuals_are_nonnegative_and_bounded_by_the_criterion(problem in problem_strategy(), lam in prop::collection::vec(-2.0..2.0f64, 9)) {
        let n = problem.dim();
        let lambda = DVector::from_fn(n, |i, _| lam[i % lam.len()]);
        let r = compute_residuals(&problem, &lambda).unwrap();
        for i in 0..problem.num_contacts() {
            for v in [r.primal[i], r.dual[i], r.complementarity[i]] {
                prop_assert!(v >= 0.0 && v <= r.ncp_criterion);
            }
        }
    }
}
