use std::f64::consts::PI;

use liouville_core::grid::integrate_radial;
use liouville_core::oracles::conformal_bubble;
use liouville_core::{
    build_gauge, check_identities, compare_solutions, make_grid, solve_for_beta, AppSpec, CompareMode, Grading,
    Potential, ShootControls, VariationalProblem, Verdict,
};
use proptest::prelude::*;

fn expected(gap: f64) -> Verdict {
    if gap.abs() <= 1e-12 {
        Verdict::Boundary
    } else if gap > 0.0 {
        Verdict::Inside
    } else {
        Verdict::Outside
    }
}

fn potentials() -> impl Strategy<Value = Potential> {
    prop_oneof![
        (0.1f64..5.0).prop_map(|c| Potential::Constant { c }),
        (0.0f64..3.0, 0.1f64..3.0, 0.5f64..4.0)
            .prop_map(|(n_pow, gamma, alpha_exp)| Potential::PowerGauss { n_pow, gamma, alpha_exp }),
        (-3.0f64..-0.1, 0.0f64..2.0).prop_map(|(l, gamma)| Potential::Sphere { l, gamma }),
    ]
}

proptest! {
    #[test]
    fn onsager_window_is_the_inequality(n in 0.0f64..4.0, gamma in 0.1f64..3.0, beta_stat in -80.0f64..-0.1) {
        let spec = AppSpec::Onsager { n, gamma, alpha_exp: 2.0, beta_stat };
        // n > β − 2 with β = −β_stat/(4π).
        prop_assert_eq!(spec.window().verdict, expected(n - (-beta_stat / (4.0 * PI) - 2.0)));
    }

    #[test]
    fn css_window_is_the_inequality(n_int in 0u32..6, beta in -5.0f64..16.0, b in 0.01f64..100.0, on_edge: bool) {
        let beta = if on_edge { 2.0 * n_int as f64 + 2.0 } else { beta };
        prop_assume!(beta != 0.0);
        let spec = AppSpec::Css { n_int, beta, b };
        prop_assert_eq!(spec.window().verdict, expected(2.0 * n_int as f64 - (beta - 2.0)));
    }

    #[test]
    fn sphere_inside_iff_strict_window(n in 0.0f64..3.0, l in -3.0f64..-0.05, gamma in 0.0f64..2.0, beta in 0.01f64..6.0) {
        let spec = AppSpec::SphericalOnsager { n, l, gamma, beta };
        let inside = n + 2.0 + 2.0 * l < beta - 1e-12 && beta < n + 2.0 - 1e-12;
        prop_assert_eq!(spec.window().verdict == Verdict::Inside, inside);
        if beta > n + 2.0 + 1e-12 {
            prop_assert_eq!(spec.window().verdict, Verdict::Outside);
        }
    }

    #[test]
    fn potential_derivative_matches_difference_quotient(v in potentials(), r in 0.05f64..6.0) {
        let h = 1e-6 * r;
        let (_, dv) = v.evaluate(r).unwrap();
        let fd = (v.value(r + h).unwrap() - v.value(r - h).unwrap()) / (2.0 * h);
        prop_assert!((fd - dv).abs() <= 1e-6 * (1.0 + dv.abs()), "fd {} vs {}", fd, dv);
    }

    #[test]
    fn grids_are_increasing_and_end_at_r_max(
        r_max in 0.1f64..1e4,
        n in 16usize..600,
        which in 0usize..3,
        p in 1.0f64..4.0,
    ) {
        let grading = [Grading::Uniform, Grading::Log, Grading::Power(p)][which];
        let g = make_grid(r_max, n, grading).unwrap();
        prop_assert_eq!(g.len(), n);
        prop_assert!(g.nodes()[0] > 0.0);
        prop_assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
        prop_assert!(((g.r_max() - r_max) / r_max).abs() < 1e-12);
        prop_assert!(g.weights().iter().all(|w| *w > 0.0));
        // Disk area is exact for a constant integrand.
        let area = integrate_radial(&g, &vec![1.0; n]).unwrap();
        prop_assert!((area / (PI * r_max * r_max) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bubble_profiles_decrease_with_monotone_mass(n_fam in 0.5f64..3.0, lambda in 0.05f64..5.0) {
        let g = make_grid(1e3, 256, Grading::Log).unwrap();
        let b = conformal_bubble(n_fam, lambda, &g).unwrap();
        prop_assert!(b.psi.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(b.psi[b.len() - 1] < b.psi[0]);
        prop_assert!(b.mass.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(b.total_mass() <= 1.0 + 1e-12);
    }

    #[test]
    fn gauged_energy_is_translation_invariant(beta in 0.2f64..1.8, c in -20.0f64..20.0, amp in -1.0f64..1.0) {
        let g = make_grid(8.0, 128, Grading::Log).unwrap();
        let problem = VariationalProblem::new(build_gauge(beta, &g).unwrap(), Potential::gaussian(), 0.0).unwrap();
        let phi: Vec<f64> = problem.mesh().iter().map(|r| amp * (-r * r).exp()).collect();
        let moved: Vec<f64> = phi.iter().map(|p| p + c).collect();
        let (e0, _) = problem.energy(&phi).unwrap();
        let (e1, _) = problem.energy(&moved).unwrap();
        prop_assert!((e0 - e1).abs() < 1e-9 * (1.0 + e0.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn shooting_solutions_satisfy_the_identities(beta in -2.0f64..1.9) {
        prop_assume!(beta.abs() > 0.05);
        let v = Potential::gaussian();
        let sol = solve_for_beta(&v, 0.0, beta, None, &ShootControls::default()).unwrap().solution;
        let r = check_identities(&sol, &v).unwrap();
        prop_assert!(r.mass_residual < 1e-6, "{:?}", r);
        prop_assert!(r.flux_residual < 1e-6 * (1.0 + beta.abs()), "{:?}", r);
        prop_assert!(r.pokhozhaev_residual < 1e-4, "{:?}", r);
        prop_assert!(r.grad_bound_ok && r.log_lip_ok);
        if beta > 0.0 {
            prop_assert!(r.p_min >= -1e-6, "{:?}", r);
        }
    }

    #[test]
    fn negative_beta_profiles_are_ordered(b1 in -3.0f64..-0.2, frac in 0.1f64..0.9) {
        let b2 = b1 * frac;
        let v = Potential::gaussian();
        let s1 = solve_for_beta(&v, 0.0, b1, None, &ShootControls::default()).unwrap().solution;
        let s2 = solve_for_beta(&v, 0.0, b2, None, &ShootControls::default()).unwrap().solution;
        let c = compare_solutions(&s1, &s2, CompareMode::BetaMonotone).unwrap();
        prop_assert!(c.value < 1e-6, "violation {} at r = {}", c.value, c.at_r);
    }
}
