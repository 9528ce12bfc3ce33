//! Acceptance suite: twelve end-to-end checks, one PASS/FAIL line each.
//! Runs without the libtest harness so the lines always reach the console.

use std::process::Command;
use std::time::Instant;

use liouville_cli::commands::css_window_sweep;
use liouville_core::applications::css_scaling_check;
use liouville_core::oracles::{bubble_lambda_for_origin_value, conformal_bubble, sharp_regularity_example};
use liouville_core::shooting::pokhozhaev_P;
use liouville_core::variational::solve_variational;
use liouville_core::{
    build_gauge, check_identities, compare_solutions, integrate_ivp, make_grid, mass_map, solve_app, solve_for_beta,
    AppSpec, CompareMode, Grading, NormalizedSolution, Potential, Result, ShootControls, VariationalControls,
    VariationalProblem,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String)>;
type Check = fn() -> Outcome;

fn gaussian_root(beta: f64) -> Result<NormalizedSolution> {
    Ok(solve_for_beta(&Potential::gaussian(), 0.0, beta, None, &ShootControls::default())?.solution)
}

fn bubble_flatness() -> Outcome {
    let v = Potential::Constant { c: 1.0 };
    let mut worst = (0.0f64, 0.0f64);
    for s in [-2.0, 0.0, 3.0] {
        let r = integrate_ivp(&v, 0.0, s, &ShootControls::default())?;
        worst.0 = worst.0.max((r.beta_s - 2.0).abs());
        worst.1 = worst.1.max(r.beta_prime_s.abs());
    }
    Ok((worst.0 < 1e-6 && worst.1 < 1e-5, format!("max |beta-2| = {:.3e}, max |beta'| = {:.3e}", worst.0, worst.1)))
}

fn conformal_family() -> Outcome {
    let v = Potential::Constant { c: 1.0 };
    let root = solve_for_beta(&v, 2.0, 4.0, None, &ShootControls::default())?;
    let sol = root.solution;
    let lambda = bubble_lambda_for_origin_value(2.0, sol.psi[0]);
    let exact = conformal_bubble(2.0, lambda, &sol.grid)?;
    let sup = sol
        .nodes()
        .iter()
        .zip(sol.psi.iter().zip(&exact.psi))
        .filter(|(r, _)| **r <= 10.0)
        .map(|(_, (a, b))| (a - b).abs())
        .fold(0.0, f64::max);
    Ok((sup < 1e-6, format!("sup |psi - bubble| on [0, 10] = {sup:.3e} (lambda* = {lambda:.6})")))
}

fn gaussian_threshold() -> Outcome {
    let s: Vec<f64> = (0..=60).map(|i| -5.0 + 0.5 * i as f64).collect();
    let entries = mass_map(&Potential::gaussian(), 0.0, &s, &ShootControls::default())?;
    let betas: Vec<f64> = entries.into_iter().collect::<Result<Vec<_>>>()?.iter().map(|e| e.beta).collect();
    let max = betas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let below = betas.iter().all(|&b| b < 2.0);
    let status = Command::new(env!("CARGO_BIN_EXE_liouville"))
        .args(["find", "--beta", "2.0", "--n", "0", "--potential", "gauss:gamma=1,alpha=2"])
        .output()
        .expect("running the binary");
    let code = status.status.code();
    let cites = String::from_utf8_lossy(&status.stderr).contains("n > beta - 2");
    Ok((
        below && max > 1.9 && code == Some(2) && cites,
        format!("max beta(s) = {max:.10}, all < 2: {below}; find --beta 2.0 exit {code:?}, cites threshold: {cites}"),
    ))
}

fn pokhozhaev_identity() -> Outcome {
    let sol = gaussian_root(1.0)?;
    let r = check_identities(&sol, &Potential::gaussian())?;
    Ok((r.pokhozhaev_residual < 1e-4, format!("residual = {:.3e}", r.pokhozhaev_residual)))
}

fn flux_and_asymptotics() -> Outcome {
    let mut sols = Vec::new();
    for beta in [-1.0, -0.5, 0.5, 1.0, 1.5, 1.9] {
        sols.push((format!("gauss beta={beta}"), gaussian_root(beta)?));
    }
    let bubble = solve_for_beta(&Potential::Constant { c: 1.0 }, 2.0, 4.0, None, &ShootControls::default())?;
    sols.push(("bubble n=2 beta=4".into(), bubble.solution));
    let specs = [
        AppSpec::Css { n_int: 1, beta: 2.0, b: 1.0 },
        AppSpec::SphericalOnsager { n: 0.0, l: -0.5, gamma: 1.0, beta: 1.5 },
        AppSpec::Onsager { n: 1.0, gamma: 1.0, alpha_exp: 2.0, beta_stat: -12.0 },
    ];
    for spec in specs {
        let rep = solve_app(&spec, &ShootControls::default())?;
        sols.push((format!("{spec:?}"), rep.solution.expect("inside the window")));
    }
    let mut worst_flux: f64 = 0.0;
    let mut worst_slope: f64 = 0.0;
    let mut ok = true;
    for (_, sol) in &sols {
        let r = check_identities(sol, &sol.potential)?;
        let flux = r.flux_residual / (1.0 + sol.beta.abs());
        worst_flux = worst_flux.max(flux);
        worst_slope = worst_slope.max(r.slope_at_infinity);
        ok &= flux < 1e-6 && r.slope_at_infinity < 1e-3;
    }
    Ok((
        ok,
        format!(
            "{} solutions, max flux/(1+|beta|) = {worst_flux:.3e}, max |r psi'(r_max) + 2 beta| = {worst_slope:.3e}",
            sols.len()
        ),
    ))
}

fn cross_backend() -> Outcome {
    let shoot = gaussian_root(1.0)?;
    let (var, m) = solve_variational(&Potential::gaussian(), 0.0, 1.0, 12.0, 2048, &VariationalControls::default())?;
    let c = compare_solutions(&var, &shoot, CompareMode::SupDiff)?;
    Ok((
        c.value < 1e-3 && m.converged(),
        format!("sup diff = {:.3e} at r = {:.3}, minimizer {:?}", c.value, c.at_r, m.status),
    ))
}

fn negative_monotonicity() -> Outcome {
    let (a, b) = (gaussian_root(-1.0)?, gaussian_root(-0.5)?);
    let c = compare_solutions(&a, &b, CompareMode::BetaMonotone)?;
    // The margin itself: how far below the bound the shifted beta2 profile stays.
    let margin = a
        .nodes()
        .iter()
        .map(|&r| (a.psi_at(r) + 1f64.ln()) - (b.psi_at(r) + 0.5f64.ln()))
        .fold(f64::INFINITY, f64::min);
    Ok((c.value < 1e-6, format!("max violation = {:.3e}, smallest margin = {margin:.3e}", c.value)))
}

fn sharp_oracle() -> Outcome {
    let grid = make_grid((-1.0f64).exp(), 4096, Grading::Log)?;
    let (v, sol) = sharp_regularity_example((-1.0f64).exp(), &grid)?;
    let r = check_identities(&sol, &v)?;
    Ok((
        r.mass_residual < 1e-6,
        format!("mass residual = {:.3e}, {} origin node(s) excluded", r.mass_residual, r.excluded_origin_nodes),
    ))
}

fn energy_gradient() -> Outcome {
    let grid = make_grid(12.0, 512, Grading::Log)?;
    let problem = VariationalProblem::new(build_gauge(1.0, &grid)?, Potential::gaussian(), 0.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let phi: Vec<f64> = problem.mesh().iter().map(|r| 0.3 * (-r).exp() + rng.gen_range(-0.1..0.1)).collect();
    let (_, grad) = problem.energy(&phi)?;
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let d: Vec<f64> = phi.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
        let at = |t: f64| -> Vec<f64> { phi.iter().zip(&d).map(|(p, di)| p + t * di).collect() };
        let fd = (problem.energy(&at(h))?.0 - problem.energy(&at(-h))?.0) / (2.0 * h);
        let an: f64 = grad.iter().zip(&d).map(|(g, di)| g * di).sum();
        worst = worst.max((fd - an).abs() / an.abs().max(1.0));
    }
    let m = problem.minimize(None, &VariationalControls::default())?;
    let monotone = m.energy_trace.windows(2).all(|w| w[1] <= w[0]);
    Ok((
        worst < 1e-5 && monotone,
        format!("max rel err = {worst:.3e}, trace monotone over {} steps: {monotone}", m.energy_trace.len()),
    ))
}

fn pokhozhaev_positivity() -> Outcome {
    let sol = gaussian_root(1.0)?;
    let p = pokhozhaev_P(&sol, &Potential::gaussian())?;
    Ok((p.min >= -1e-6 && p.at_r_max < 1e-4, format!("min P = {:.3e}, P(r_max) = {:.3e}", p.min, p.at_r_max)))
}

fn css_scaling() -> Outcome {
    let s = css_scaling_check(1, 2.0, 1.0, 4.0, &ShootControls::default())?;
    let cases = css_window_sweep(20, 20261016);
    let matched = cases.iter().filter(|c| c.verdict == c.expected).count();
    Ok((
        s.deviation < 1e-4 && matched == cases.len(),
        format!("scaling deviation = {:.3e}; window sweep {matched}/{} match", s.deviation, cases.len()),
    ))
}

fn variation_consistency() -> Outcome {
    let v = Potential::gaussian();
    let s_star = solve_for_beta(&v, 0.0, 1.0, None, &ShootControls::default())?.s_star;
    // A fixed radius keeps the three trajectories on one grid.
    let controls = ShootControls { r_max: Some(8.0), ..ShootControls::default() };
    let h = 1e-4;
    let mid = integrate_ivp(&v, 0.0, s_star, &controls)?;
    let up = integrate_ivp(&v, 0.0, s_star + h, &controls)?;
    let down = integrate_ivp(&v, 0.0, s_star - h, &controls)?;
    let half = 0.5 * mid.r_max;
    let worst = mid
        .grid
        .nodes()
        .iter()
        .enumerate()
        .filter(|(_, r)| **r <= half)
        .map(|(i, _)| ((up.psi[i] - down.psi[i]) / (2.0 * h) - mid.phi[i]).abs())
        .fold(0.0, f64::max);
    let tol = 1e-5 + 10.0 * h * h;
    Ok((worst < tol, format!("max |centered diff - phi| on r <= {half} = {worst:.3e} (tol {tol:.1e})")))
}

fn main() {
    let criteria: [(&str, Check); 12] = [
        ("bubble flatness", bubble_flatness),
        ("conformal family reproduction", conformal_family),
        ("gaussian threshold", gaussian_threshold),
        ("pokhozhaev identity", pokhozhaev_identity),
        ("flux and asymptotic slope", flux_and_asymptotics),
        ("cross-backend agreement", cross_backend),
        ("negative-beta monotonicity", negative_monotonicity),
        ("sharp regularity oracle", sharp_oracle),
        ("energy gradient and trace", energy_gradient),
        ("P positivity", pokhozhaev_positivity),
        ("css scaling and window sweep", css_scaling),
        ("phi = d psi / ds", variation_consistency),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        println!(
            "{} criterion {:>2} {name}: {detail} [{:.2}s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
