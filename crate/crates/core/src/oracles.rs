//! Closed-form solutions used as ground truth.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::potential::Potential;
use crate::solution::{NormalizedSolution, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OracleFamily {
    /// `β = 2 n_fam`, weight `r^{2(n_fam − 1)}`, `V ≡ 1`.
    ConformalBubble { n_fam: f64, lambda: f64 },
    /// `β = 1/(4 ln α_cut) < 0` with the log-singular weight.
    SharpRegularity { alpha_cut: f64 },
}

impl OracleFamily {
    pub fn beta(&self) -> f64 {
        match *self {
            OracleFamily::ConformalBubble { n_fam, .. } => 2.0 * n_fam,
            OracleFamily::SharpRegularity { alpha_cut } => Potential::log_singular_beta(alpha_cut),
        }
    }

    /// Exponent `n` of the weight `rⁿ V`.
    pub fn weight_exponent(&self) -> f64 {
        match *self {
            OracleFamily::ConformalBubble { n_fam, .. } => 2.0 * (n_fam - 1.0),
            OracleFamily::SharpRegularity { .. } => 0.0,
        }
    }

    pub fn build(&self, grid: &Grid) -> Result<NormalizedSolution> {
        match *self {
            OracleFamily::ConformalBubble { n_fam, lambda } => conformal_bubble(n_fam, lambda, grid),
            OracleFamily::SharpRegularity { alpha_cut } => {
                sharp_regularity_example(alpha_cut, grid).map(|(_, s)| s)
            }
        }
    }
}

fn oracle_solution(
    beta: f64,
    n: f64,
    potential: Potential,
    grid: &Grid,
    rows: impl Fn(f64) -> (f64, f64, f64),
) -> NormalizedSolution {
    let (mut psi, mut dpsi, mut mass) = (Vec::new(), Vec::new(), Vec::new());
    for &r in grid.nodes() {
        let (p, d, m) = rows(r);
        psi.push(p);
        dpsi.push(d);
        mass.push(m);
    }
    let tail_mass = 1.0 - mass.last().copied().unwrap_or(0.0);
    NormalizedSolution {
        beta,
        n,
        potential,
        grid: grid.clone(),
        psi,
        dpsi,
        mass,
        tail_mass,
        tolerances: Tolerances { abs_tol: 0.0, rel_tol: 0.0, root_tol: 0.0 },
        method: "oracle".into(),
    }
}

/// `ψ = ln(1/(λ^{2n} r^{2n} + 1)²) + ln(n/π) + 2n ln λ`, the family on which
/// uniqueness fails through conformal invariance.
pub fn conformal_bubble(n_fam: f64, lambda: f64, grid: &Grid) -> Result<NormalizedSolution> {
    if !(n_fam > 0.0 && lambda > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "conformal bubble needs n > 0 and lambda > 0, got n = {n_fam}, lambda = {lambda}"
        )));
    }
    let shift = (n_fam / PI).ln() + 2.0 * n_fam * lambda.ln();
    let rows = |r: f64| {
        let lx = 2.0 * n_fam * (lambda * r).ln();
        // x = (λr)^{2n}; x/(1+x) = 1/(1+e^{-ln x}) stays accurate both ways.
        let frac = 1.0 / (1.0 + (-lx).exp());
        let log1p_x = if lx < 0.0 { lx.exp().ln_1p() } else { lx + (-lx).exp().ln_1p() };
        (-2.0 * log1p_x + shift, -4.0 * n_fam * frac, frac)
    };
    let beta = 2.0 * n_fam;
    Ok(oracle_solution(beta, 2.0 * (n_fam - 1.0), Potential::Constant { c: 1.0 }, grid, rows))
}

/// `λ` with `ψ_{λ,n}(0) = ψ0`.
pub fn bubble_lambda_for_origin_value(n_fam: f64, psi0: f64) -> f64 {
    ((psi0 - (n_fam / PI).ln()) / (2.0 * n_fam)).exp()
}

/// `ψ(r) = -½ ln(-ln r)` on `[0, α]`, continued as `-2β ln r + const`, with
/// `V = -1/(8πβ) r^{-2} (-ln r)^{-3/2}` on `[0, α]` and `β = 1/(4 ln α)`.
pub fn sharp_regularity_example(alpha_cut: f64, grid: &Grid) -> Result<(Potential, NormalizedSolution)> {
    if !(alpha_cut > 0.0 && alpha_cut < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha_cut must lie in (0,1), got {alpha_cut}")));
    }
    let beta = Potential::log_singular_beta(alpha_cut);
    let la = alpha_cut.ln();
    let potential = Potential::LogSingular { alpha_cut };
    let rows = |r: f64| {
        let lr = r.ln();
        if r <= alpha_cut {
            (-0.5 * (-lr).ln(), -0.5 / lr, la / lr)
        } else {
            (-lr / (2.0 * la) + 0.5 - 0.5 * (-la).ln(), -0.5 / la, 1.0)
        }
    };
    let sol = oracle_solution(beta, 0.0, potential.clone(), grid, rows);
    Ok((potential, sol))
}
