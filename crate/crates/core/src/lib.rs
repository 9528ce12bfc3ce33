//! Radially symmetric solutions of the Liouville equation
//! `−Δψ = 4πβ rⁿ V e^ψ` on the plane with `∫ rⁿ V e^ψ = 1`.
//!
//! Two independent backends produce [`NormalizedSolution`]s: ODE shooting
//! on the mass map `β(s)` and minimization of the gauged Moser energy.
//! [`verify`] checks the identities any solution must satisfy and
//! [`oracles`] supplies closed-form ground truth.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod applications;
pub mod error;
pub mod grid;
pub mod lbfgs;
pub mod ode;
pub mod oracles;
pub mod potential;
pub mod shooting;
pub mod solution;
pub mod variational;
pub mod verify;

pub use applications::{solve_app, AppReport, AppSpec, Verdict, WindowVerdict};
pub use error::{Error, Result};
pub use grid::{make_grid, Grading, Grid};
pub use oracles::OracleFamily;
pub use potential::Potential;
pub use shooting::{integrate_ivp, mass_map, solve_for_beta, Branch, ShootControls, ShootResult};
pub use solution::{NormalizedSolution, ResidualSummary, Tolerances};
pub use variational::{build_gauge, Gauge, MinimizeResult, VariationalControls, VariationalProblem};
pub use verify::{check_identities, compare_solutions, CompareMode, IdentityReport};
