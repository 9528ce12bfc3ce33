//! Identities and inequalities satisfied by every solution, and comparisons
//! between solutions.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{cumulative_1d, cumulative_radial, OriginModel};
use crate::potential::Potential;
use crate::shooting::pokhozhaev_P;
use crate::solution::NormalizedSolution;

/// Radii sampled for the log-Lipschitz check.
pub const LOG_LIP_SAMPLES: usize = 32;
/// Smallest solution accepted by [`check_identities`].
pub const MIN_IDENTITY_NODES: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    /// `|M(r_max) − 1|`, with `M` integrated from `ψ`.
    pub mass_residual: f64,
    /// `max |rψ' + 2βM(r)|`, same `M`.
    pub flux_residual: f64,
    /// `max |M(r) − stored mass column|`.
    pub mass_column_gap: f64,
    /// `|rψ'(r_max) + 2β|`.
    pub slope_at_infinity: f64,
    /// `|β − 2 − n − ∫|x|ⁿ e^ψ x·∇V|`.
    pub pokhozhaev_residual: f64,
    /// `|ψ(r) − ψ(s)|² ≤ ln(r/s)/(2π) ∫|∇ψ|²` on all sampled pairs.
    pub log_lip_ok: bool,
    /// `|rψ'| ≤ 2|β| M(r_max)` at all nodes.
    pub grad_bound_ok: bool,
    #[serde(rename = "P_min")]
    pub p_min: f64,
    /// Smallest `C₂` with `ψ ≤ -2β ln(r + 1) + ln|β| + C₂` at the nodes.
    pub c2_upper_bound: f64,
    /// `x·∇V` came from a difference quotient.
    pub pokhozhaev_approximate: bool,
    /// Leading nodes left out because the weight is singular there.
    pub excluded_origin_nodes: usize,
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        self.mass_residual
            .max(self.flux_residual)
            .max(self.slope_at_infinity)
            .max(self.pokhozhaev_residual)
    }
}

/// Evaluates every identity on `sol`. For weights singular at the origin the
/// first node is excluded from the node-wise checks.
pub fn check_identities(sol: &NormalizedSolution, v: &Potential) -> Result<IdentityReport> {
    let m = sol.len();
    if m < MIN_IDENTITY_NODES {
        return Err(Error::InvalidArgument(format!(
            "identity checks need at least {MIN_IDENTITY_NODES} nodes, got {m}"
        )));
    }
    let skip = usize::from(v.origin_exponent(sol.n).is_none());
    let nodes = sol.grid.nodes();
    let beta = sol.beta;
    let total = sol.total_mass();

    let mass = recomputed_mass(sol, v)?;
    let mass_residual = (mass[m - 1] - 1.0).abs();
    let flux_residual = (skip..m)
        .map(|i| (sol.dpsi[i] + 2.0 * beta * mass[i]).abs())
        .fold(0.0, f64::max);
    let mass_column_gap = (skip..m).map(|i| (mass[i] - sol.mass[i]).abs()).fold(0.0, f64::max);
    let slope_at_infinity = (sol.dpsi[m - 1] + 2.0 * beta).abs();
    let pokhozhaev_residual = (beta - 2.0 - sol.n - pokhozhaev_integral(sol, v)?).abs();

    let ts: Vec<f64> = nodes.iter().map(|r| r.ln()).collect();
    let dirichlet_density: Vec<f64> = sol.dpsi.iter().map(|w| 2.0 * PI * w * w).collect();
    let dirichlet = cumulative_1d(&ts, &dirichlet_density);
    let picks: Vec<usize> = (0..LOG_LIP_SAMPLES)
        .map(|k| skip + k * (m - 1 - skip) / (LOG_LIP_SAMPLES - 1))
        .collect();
    let mut log_lip_ok = true;
    for (a, &i) in picks.iter().enumerate() {
        for &j in &picks[a + 1..] {
            if j == i {
                continue;
            }
            let lhs = (sol.psi[j] - sol.psi[i]).powi(2);
            let rhs = (ts[j] - ts[i]) / (2.0 * PI) * (dirichlet[j] - dirichlet[i]);
            if lhs > rhs * (1.0 + 1e-6) + 1e-12 {
                log_lip_ok = false;
            }
        }
    }
    let bound = 2.0 * beta.abs() * total;
    let grad_bound_ok = sol.dpsi[skip..].iter().all(|w| w.abs() <= bound * (1.0 + 1e-9) + 1e-12);
    let p_min = pokhozhaev_P(sol, v)?.values[skip..].iter().copied().fold(f64::INFINITY, f64::min);
    let c2_upper_bound = (skip..m)
        .map(|i| sol.psi[i] + 2.0 * beta * (nodes[i] + 1.0).ln() - beta.abs().ln())
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(IdentityReport {
        mass_residual,
        flux_residual,
        mass_column_gap,
        slope_at_infinity,
        pokhozhaev_residual,
        log_lip_ok,
        grad_bound_ok,
        p_min,
        c2_upper_bound,
        pokhozhaev_approximate: v.derivative_is_approximate(),
        excluded_origin_nodes: skip,
    })
}

/// `M(r) = ∫_{D(0,r)} |x|ⁿ V e^ψ` by quadrature of the stored profile, so
/// the check does not trust the mass column.
fn recomputed_mass(sol: &NormalizedSolution, v: &Potential) -> Result<Vec<f64>> {
    let nodes = sol.grid.nodes();
    let origin = match v.origin_exponent(sol.n) {
        Some(k) => OriginModel::Power(k),
        None if nodes[0] < 1.0 => OriginModel::InverseLogSquared,
        None => OriginModel::Skip,
    };
    let density = nodes
        .iter()
        .zip(&sol.psi)
        .map(|(&r, &psi)| Ok(v.value(r)? * r.powf(sol.n) * psi.exp()))
        .collect::<Result<Vec<f64>>>()?;
    // Only the origin cell is taken from the shared rule.
    let origin_cell = cumulative_radial(&sol.grid, &density, origin)?[0];
    // dM = 2π r² g d(ln r), integrated with the cubic through four nodes.
    let ts: Vec<f64> = nodes.iter().map(|r| r.ln()).collect();
    let fs: Vec<f64> = nodes.iter().zip(&density).map(|(r, g)| 2.0 * PI * r * r * g).collect();
    let m = nodes.len();
    let mut out = Vec::with_capacity(m);
    let mut acc = origin_cell;
    out.push(acc);
    for i in 0..m - 1 {
        let first = i.saturating_sub(1).min(m - 4);
        let (x, y) = (&ts[first..first + 4], &fs[first..first + 4]);
        let (a, b) = (ts[i], ts[i + 1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let g = half / 3f64.sqrt();
        acc += half * (lagrange(x, y, mid - g) + lagrange(x, y, mid + g));
        out.push(acc);
    }
    Ok(out)
}

fn lagrange(x: &[f64], y: &[f64], t: f64) -> f64 {
    (0..x.len())
        .map(|j| {
            let basis: f64 =
                (0..x.len()).filter(|&k| k != j).map(|k| (t - x[k]) / (x[j] - x[k])).product();
            y[j] * basis
        })
        .sum()
}

/// `∫ |x|ⁿ e^ψ x·∇V dx = 2π ∫ r^{n+2} V' e^ψ dr`, integrated in `ln r`
/// piecewise between the jumps of `V`, whose singular parts are added
/// explicitly.
pub fn pokhozhaev_integral(sol: &NormalizedSolution, v: &Potential) -> Result<f64> {
    let nodes = sol.grid.nodes();
    let integrand = |r: f64, side: f64| -> Result<f64> {
        let r_eval = r * (1.0 + side * 1e-13);
        let (value, dv) = v.evaluate(r_eval)?;
        if value <= 0.0 {
            return Ok(0.0);
        }
        let psi = sol.psi_at(r);
        Ok(2.0 * PI * (r_eval * dv / value) * (value.ln() + (sol.n + 2.0) * r.ln() + psi).exp())
    };
    let jumps: Vec<(f64, f64)> =
        v.jumps().into_iter().filter(|(r, _)| *r > nodes[0] && *r < sol.r_max()).collect();
    let mut breaks: Vec<f64> = vec![nodes[0]];
    breaks.extend(jumps.iter().map(|j| j.0));
    breaks.push(sol.r_max());
    let mut total = 0.0;
    for seg in breaks.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let mut xs = vec![a.ln()];
        let mut fs = vec![integrand(a, 1.0)?];
        for &r in nodes.iter().filter(|&&r| r > a && r < b) {
            xs.push(r.ln());
            fs.push(integrand(r, 0.0)?);
        }
        xs.push(b.ln());
        fs.push(integrand(b, -1.0)?);
        total += *cumulative_1d(&xs, &fs).last().unwrap_or(&0.0);
    }
    for (rj, jump) in jumps {
        total += 2.0 * PI * rj.powf(sol.n + 2.0) * jump * sol.psi_at(rj).exp();
    }
    total += origin_cell(sol, v)?;
    Ok(total)
}

/// `∫₀^{r₀} (rV'/V) dM`. Power-like weights freeze `rV'/V` at `r₀`. For the
/// `r^{-2}(-ln r)^{-3/2}` class the mass behaves like `M₀ L₀ / L` with
/// `L = -ln r`, and `rV'/V = a + c/L` is fitted on the first two nodes.
fn origin_cell(sol: &NormalizedSolution, v: &Potential) -> Result<f64> {
    let nodes = sol.grid.nodes();
    let m0 = sol.mass[0];
    let q0 = v.log_slope(nodes[0])?.unwrap_or(0.0);
    if v.origin_exponent(sol.n).is_some() || nodes[1] >= 1.0 {
        return Ok(q0 * m0);
    }
    let q1 = v.log_slope(nodes[1])?.unwrap_or(q0);
    let (l0, l1) = (-nodes[0].ln(), -nodes[1].ln());
    let c = (q1 - q0) / (1.0 / l1 - 1.0 / l0);
    let a = q0 - c / l0;
    Ok(a * m0 + c * m0 / (2.0 * l0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompareMode {
    SupDiff,
    BetaMonotone,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub mode: CompareMode,
    /// `max |ψ_a − ψ_b|`, or the largest violation of the shifted ordering.
    pub value: f64,
    /// Radius where `value` is attained.
    pub at_r: f64,
}

/// Compares two solutions on the nodes of the shorter-range one (profiles are
/// interpolated in `ln r`). `BetaMonotone` checks
/// `ψ_{β₂} + ln|β₂| ≤ ψ_{β₁} + ln|β₁|` for `β₁ ≤ β₂ < 0`.
pub fn compare_solutions(
    a: &NormalizedSolution,
    b: &NormalizedSolution,
    mode: CompareMode,
) -> Result<CompareReport> {
    if (a.n - b.n).abs() > 1e-12 {
        return Err(Error::Incompatible(format!("weight exponents differ: {} vs {}", a.n, b.n)));
    }
    if a.potential != b.potential {
        return Err(Error::Incompatible(format!(
            "potentials differ: {} vs {}",
            a.potential.descriptor(),
            b.potential.descriptor()
        )));
    }
    let base = if a.r_max() <= b.r_max() { a } else { b };
    let diff = |f: &dyn Fn(f64) -> f64| -> (f64, f64) {
        base.grid.nodes().iter().fold((0.0, base.grid.nodes()[0]), |(best, at), &r| {
            let d = f(r);
            if d > best {
                (d, r)
            } else {
                (best, at)
            }
        })
    };
    let (value, at_r) = match mode {
        CompareMode::SupDiff => diff(&|r| (a.psi_at(r) - b.psi_at(r)).abs()),
        CompareMode::BetaMonotone => {
            if !(a.beta < 0.0 && b.beta < 0.0) {
                return Err(Error::Incompatible(format!(
                    "monotonicity in beta holds for negative beta, got {} and {}",
                    a.beta, b.beta
                )));
            }
            let (lo, hi) = if a.beta <= b.beta { (a, b) } else { (b, a) };
            diff(&|r| {
                (hi.psi_at(r) + hi.beta.abs().ln()) - (lo.psi_at(r) + lo.beta.abs().ln())
            })
        }
    };
    Ok(CompareReport { mode, value, at_r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, Grading};
    use crate::oracles::conformal_bubble;

    #[test]
    fn bubble_identities() {
        let g = make_grid(1e5, 2048, Grading::Log).unwrap();
        let b = conformal_bubble(1.0, 1.0, &g).unwrap();
        let rep = check_identities(&b, &b.potential).unwrap();
        assert!(rep.pokhozhaev_residual < 1e-8, "{rep:?}");
        assert!(rep.flux_residual < 1e-7 && rep.mass_column_gap < 1e-7, "{rep:?}");
        assert!(rep.log_lip_ok && rep.grad_bound_ok);
        assert!(rep.p_min.abs() < 1e-8);
    }

    #[test]
    fn corrupted_profile_is_detected() {
        let g = make_grid(50.0, 512, Grading::Log).unwrap();
        let mut b = conformal_bubble(1.0, 1.0, &g).unwrap();
        for i in 0..b.len() / 2 {
            b.psi[i] += 0.1;
        }
        // Rebuild the slope column from the corrupted profile.
        let ts: Vec<f64> = g.nodes().iter().map(|r| r.ln()).collect();
        let n = b.len();
        let mut slope = vec![0.0; n];
        for (i, w) in slope.iter_mut().enumerate() {
            let (l, r) = (i.saturating_sub(1), (i + 1).min(n - 1));
            *w = (b.psi[r] - b.psi[l]) / (ts[r] - ts[l]);
        }
        b.dpsi = slope;
        let rep = check_identities(&b, &b.potential).unwrap();
        assert!(rep.flux_residual > 1e-2);
    }

    #[test]
    fn sup_diff_of_identical_is_zero() {
        let g = make_grid(10.0, 128, Grading::Log).unwrap();
        let b = conformal_bubble(1.0, 2.0, &g).unwrap();
        assert_eq!(compare_solutions(&b, &b, CompareMode::SupDiff).unwrap().value, 0.0);
        assert!(compare_solutions(&b, &b, CompareMode::BetaMonotone).is_err());
        let c = conformal_bubble(2.0, 2.0, &g).unwrap();
        assert!(matches!(compare_solutions(&b, &c, CompareMode::SupDiff), Err(Error::Incompatible(_))));
    }

    #[test]
    fn too_few_nodes_rejected() {
        let g = make_grid(10.0, 32, Grading::Log).unwrap();
        let b = conformal_bubble(1.0, 1.0, &g).unwrap();
        assert!(check_identities(&b, &b.potential).is_err());
    }
}
