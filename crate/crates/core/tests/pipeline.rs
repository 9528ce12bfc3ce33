use liouville_core::applications::onsager_temperature_scan;
use liouville_core::applications::Concentration;
use liouville_core::variational::solve_variational;
use liouville_core::{
    check_identities, compare_solutions, solve_app, solve_for_beta, AppSpec, CompareMode, Error, NormalizedSolution,
    Potential, ShootControls, VariationalControls, Verdict,
};

#[test]
fn written_solution_reads_back_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let v = Potential::PowerGauss { n_pow: 1.0, gamma: 0.5, alpha_exp: 2.0 };
    let root = solve_for_beta(&v, 1.0, 2.2, None, &ShootControls::default()).unwrap();
    let csv = root.solution.write(dir.path().join("sol.json")).unwrap();
    assert!(csv.ends_with("sol.csv"));
    let back = NormalizedSolution::read(dir.path().join("sol.json")).unwrap();
    assert_eq!(back.psi, root.solution.psi);
    assert_eq!(back.potential, v);
    let fresh = check_identities(&root.solution, &v).unwrap();
    let stored = check_identities(&back, &back.potential).unwrap();
    assert_eq!(fresh, stored);
    assert!(stored.max_residual() < 1e-4, "{stored:?}");
}

#[test]
fn weighted_problem_agrees_across_methods() {
    let v = Potential::gaussian();
    let shoot = solve_for_beta(&v, 1.0, 2.0, None, &ShootControls::default()).unwrap().solution;
    let (var, m) = solve_variational(&v, 1.0, 2.0, 12.0, 2048, &VariationalControls::default()).unwrap();
    assert!(m.converged(), "{:?}", m.status);
    let c = compare_solutions(&var, &shoot, CompareMode::SupDiff).unwrap();
    assert!(c.value < 1e-3, "{c:?}");
}

#[test]
fn beyond_threshold_is_reported_as_outside_bracket() {
    let err = solve_for_beta(&Potential::gaussian(), 1.0, 3.2, None, &ShootControls::default()).unwrap_err();
    match err {
        Error::TargetOutsideBracket { beta_max, .. } => assert!(beta_max < 3.0 + 1e-6),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn onsager_scan_classifies_each_temperature() {
    let rows = onsager_temperature_scan(
        0.0,
        1.0,
        2.0,
        &[-4.0, -20.0, -8.0 * std::f64::consts::PI, -40.0],
        &ShootControls::default(),
        &Concentration::default(),
    )
    .unwrap();
    let verdicts: Vec<Verdict> = rows.iter().map(|r| r.verdict).collect();
    assert_eq!(verdicts, [Verdict::Inside, Verdict::Inside, Verdict::Boundary, Verdict::Outside]);
    assert!(rows[0].psi0.is_some() && rows[1].psi0.is_some());
    assert!(rows[2].psi0.is_none() && rows[2].error.is_some());
    assert!(rows[3].psi0.is_none() && rows[3].error.is_none());
}

#[test]
fn sphere_inside_window_solves() {
    let spec = AppSpec::SphericalOnsager { n: 0.0, l: -1.0, gamma: 0.0, beta: 1.0 };
    let rep = solve_app(&spec, &ShootControls::default()).unwrap();
    assert_eq!(rep.window.verdict, Verdict::Inside);
    let ids = rep.identities.unwrap();
    assert!(ids.mass_residual < 1e-6 && ids.pokhozhaev_residual < 1e-4, "{ids:?}");
}
