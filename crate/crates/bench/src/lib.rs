//! Shared fixtures for the solver benchmarks under `benches/`.

use liouville_core::{solve_for_beta, NormalizedSolution, Potential, ShootControls};

/// Gaussian weight, `n = 0`, the workhorse problem of the benchmarks.
pub fn gaussian() -> Potential {
    Potential::gaussian()
}

/// Shooting solution at `β`, for benchmarks of the post-processing steps.
pub fn gaussian_solution(beta: f64) -> NormalizedSolution {
    solve_for_beta(&gaussian(), 0.0, beta, None, &ShootControls::default())
        .expect("gaussian problem is solvable below the threshold")
        .solution
}
