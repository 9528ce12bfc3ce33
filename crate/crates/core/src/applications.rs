//! Physical presets reduced to `(β, n, V)` problems, with their existence
//! windows.
//!
//! * Onsager vortices: weight `rⁿ e^{−γ r^α}`, `β = −β_stat / 4π`.
//! * Spherical Onsager: weight `rⁿ (1+r²)^l e^{2γ/(1+r²)}`.
//! * Chern–Simons–Schrödinger Landau levels: weight `r^{2n} e^{−B r²/2}`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::shooting::{solve_for_beta, ShootControls};
use crate::solution::NormalizedSolution;
use crate::verify::{check_identities, IdentityReport};

/// Equality tolerance for window boundaries.
pub const WINDOW_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AppSpec {
    Onsager { n: f64, gamma: f64, alpha_exp: f64, beta_stat: f64 },
    SphericalOnsager { n: f64, l: f64, gamma: f64, beta: f64 },
    Css { n_int: u32, beta: f64, b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Inside,
    Boundary,
    Outside,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Inside => "inside",
            Verdict::Boundary => "boundary",
            Verdict::Outside => "outside",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowVerdict {
    pub verdict: Verdict,
    /// The defining inequality with the numbers substituted.
    pub inequality: String,
    pub note: Option<String>,
}

/// `lhs > rhs` with a `WINDOW_EPS` band counted as equality.
fn compare(lhs: f64, rhs: f64) -> Verdict {
    if (lhs - rhs).abs() <= WINDOW_EPS {
        Verdict::Boundary
    } else if lhs > rhs {
        Verdict::Inside
    } else {
        Verdict::Outside
    }
}

impl AppSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        match *self {
            AppSpec::Onsager { n, gamma, alpha_exp, beta_stat } => {
                if !(n >= 0.0 && gamma > 0.0 && alpha_exp > 0.0 && beta_stat.is_finite() && beta_stat != 0.0) {
                    return bad(format!(
                        "onsager needs n >= 0, gamma > 0, alpha > 0, beta_stat != 0; got n={n}, gamma={gamma}, \
                         alpha={alpha_exp}, beta_stat={beta_stat}"
                    ));
                }
            }
            AppSpec::SphericalOnsager { n, l, gamma, beta } => {
                if !(n >= 0.0 && l < 0.0 && gamma >= 0.0 && beta > 0.0 && beta.is_finite()) {
                    return bad(format!(
                        "sphere needs n >= 0, l < 0, gamma >= 0, beta > 0; got n={n}, l={l}, gamma={gamma}, beta={beta}"
                    ));
                }
            }
            AppSpec::Css { beta, b, .. } => {
                if !(b > 0.0 && b.is_finite() && beta.is_finite() && beta != 0.0) {
                    return bad(format!("css needs B > 0 and beta != 0; got B={b}, beta={beta}"));
                }
            }
        }
        Ok(())
    }

    /// `β` of the normalized Liouville problem.
    pub fn beta_eq(&self) -> f64 {
        match *self {
            AppSpec::Onsager { beta_stat, .. } => -beta_stat / (4.0 * PI),
            AppSpec::SphericalOnsager { beta, .. } | AppSpec::Css { beta, .. } => beta,
        }
    }

    /// Weight exponent `n` of the normalized problem.
    pub fn n_eq(&self) -> f64 {
        match *self {
            AppSpec::Onsager { n, .. } | AppSpec::SphericalOnsager { n, .. } => n,
            AppSpec::Css { n_int, .. } => 2.0 * n_int as f64,
        }
    }

    pub fn potential(&self) -> Potential {
        match *self {
            AppSpec::Onsager { gamma, alpha_exp, .. } => Potential::PowerGauss { n_pow: 0.0, gamma, alpha_exp },
            AppSpec::SphericalOnsager { l, gamma, .. } => Potential::Sphere { l, gamma },
            AppSpec::Css { b, .. } => Potential::PowerGauss { n_pow: 0.0, gamma: 0.5 * b, alpha_exp: 2.0 },
        }
    }

    pub fn window(&self) -> WindowVerdict {
        let (beta, n) = (self.beta_eq(), self.n_eq());
        match *self {
            AppSpec::Onsager { n, beta_stat, .. } => {
                let rhs = (-beta_stat - 8.0 * PI) / (4.0 * PI);
                let verdict = compare(n, rhs);
                let note = (verdict == Verdict::Boundary)
                    .then(|| "boundary: the threshold is sharp, a solution is not expected".to_string());
                WindowVerdict { verdict, inequality: format!("n > (-beta_stat - 8π)/(4π): {n} > {rhs}"), note }
            }
            AppSpec::SphericalOnsager { l, gamma, .. } => {
                let (lo, hi) = (n + 2.0 + 2.0 * l, n + 2.0);
                let inequality = format!("n + 2 + 2l < beta < n + 2: {lo} < {beta} < {hi}");
                let upper = compare(hi, beta);
                let lower = compare(beta, lo);
                let (verdict, note) = match (lower, upper) {
                    (Verdict::Inside, Verdict::Inside) => (Verdict::Inside, None),
                    (_, Verdict::Outside) => {
                        (Verdict::Outside, Some("beta < n + 2 is necessary for a decreasing weight".into()))
                    }
                    (_, Verdict::Boundary) => (Verdict::Boundary, Some("beta = n + 2: theory silent or sharp".into())),
                    (Verdict::Boundary, _) => {
                        (Verdict::Boundary, Some("beta = n + 2 + 2l: theory silent or sharp".into()))
                    }
                    _ => match compare(2.0 * beta, lo) {
                        Verdict::Outside => (Verdict::Outside, Some("unit mass needs 2 beta >= n + 2 + 2l".into())),
                        Verdict::Boundary => (
                            Verdict::Boundary,
                            Some("2 beta = n + 2 + 2l: necessity of beta > n + 2 + 2l is open".into()),
                        ),
                        _ if gamma <= -0.5 * l => (
                            Verdict::Outside,
                            Some("beta > n + 2 + 2l is necessary when gamma <= -l/2".into()),
                        ),
                        _ => (
                            Verdict::Boundary,
                            Some("gamma > -l/2: necessity of beta > n + 2 + 2l is open".into()),
                        ),
                    },
                };
                WindowVerdict { verdict, inequality, note }
            }
            AppSpec::Css { n_int, .. } => {
                let lhs = 2.0 * n_int as f64;
                let verdict = compare(lhs, beta - 2.0);
                let note = (verdict == Verdict::Boundary)
                    .then(|| "boundary: 2 n_int = beta - 2, theory silent or sharp".to_string());
                WindowVerdict { verdict, inequality: format!("2 n_int > beta - 2: {lhs} > {}", beta - 2.0), note }
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct AppReport {
    pub spec: AppSpec,
    pub beta_eq: f64,
    pub n_eq: f64,
    pub potential: Potential,
    pub window: WindowVerdict,
    pub solution: Option<NormalizedSolution>,
    pub identities: Option<IdentityReport>,
    /// Why no solution was produced on the boundary.
    pub failure: Option<String>,
}

impl AppReport {
    /// No solution, either by verdict or by a failed boundary attempt.
    pub fn nonexistence(&self) -> bool {
        self.solution.is_none()
    }
}

fn solve_reduced(spec: &AppSpec, controls: &ShootControls) -> Result<(NormalizedSolution, IdentityReport)> {
    let v = spec.potential();
    let root = solve_for_beta(&v, spec.n_eq(), spec.beta_eq(), None, controls)?;
    let report = check_identities(&root.solution, &v)?;
    Ok((root.solution, report))
}

/// Inside: solve with the shooting backend and report identities. Outside:
/// verdict only. Boundary: attempt, recording a failure instead of erroring.
pub fn solve_app(spec: &AppSpec, controls: &ShootControls) -> Result<AppReport> {
    spec.validate()?;
    let window = spec.window();
    let mut report = AppReport {
        spec: *spec,
        beta_eq: spec.beta_eq(),
        n_eq: spec.n_eq(),
        potential: spec.potential(),
        window: window.clone(),
        solution: None,
        identities: None,
        failure: None,
    };
    match window.verdict {
        Verdict::Outside => {}
        Verdict::Inside => {
            let (sol, ids) = solve_reduced(spec, controls)?;
            report.solution = Some(sol);
            report.identities = Some(ids);
        }
        Verdict::Boundary => match solve_reduced(spec, controls) {
            Ok((sol, ids)) => {
                report.solution = Some(sol);
                report.identities = Some(ids);
            }
            Err(e) => report.failure = Some(e.to_string()),
        },
    }
    Ok(report)
}

/// Limit of the CSS profiles as `B → ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrongFieldLimit {
    /// `n + 1 > β`: `ψ_B → +∞` everywhere.
    Divergent,
    /// `n + 1 = β`: `ψ_B → −2β ln|x|` away from 0.
    Critical,
    /// `n + 1 < β`: `ψ_B → −∞` away from 0.
    Vanishing,
}

pub fn css_strong_field_limit(n_int: u32, beta: f64) -> StrongFieldLimit {
    match compare(n_int as f64 + 1.0, beta) {
        Verdict::Inside => StrongFieldLimit::Divergent,
        Verdict::Boundary => StrongFieldLimit::Critical,
        Verdict::Outside => StrongFieldLimit::Vanishing,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CssScaling {
    /// `max |ψ_{B₂}(r) − ψ_{B₁}(√(B₂/B₁) r) − (n+1) ln(B₂/B₁)|` over nodes.
    pub deviation: f64,
    pub at_r: f64,
    pub limit: StrongFieldLimit,
}

/// Solves at `B₁` and `B₂` independently and checks the scaling law
/// `ψ_{B₂}(x) = ψ_{B₁}(√(B₂/B₁) x) + (n+1) ln(B₂/B₁)`.
pub fn css_scaling_check(n_int: u32, beta: f64, b1: f64, b2: f64, controls: &ShootControls) -> Result<CssScaling> {
    let specs = [AppSpec::Css { n_int, beta, b: b1 }, AppSpec::Css { n_int, beta, b: b2 }];
    for s in &specs {
        s.validate()?;
        let w = s.window();
        if w.verdict != Verdict::Inside {
            return Err(Error::InvalidArgument(format!("outside the existence window: {}", w.inequality)));
        }
    }
    let sols: Vec<NormalizedSolution> = specs
        .par_iter()
        .map(|s| solve_reduced(s, controls).map(|(sol, _)| sol))
        .collect::<Result<_>>()?;
    let (s1, s2) = (&sols[0], &sols[1]);
    let stretch = (b2 / b1).sqrt();
    let shift = (n_int as f64 + 1.0) * (b2 / b1).ln();
    let mut deviation: f64 = 0.0;
    let mut at_r = 0.0;
    for (&r, &psi) in s2.nodes().iter().zip(&s2.psi) {
        if stretch * r > s1.r_max() {
            break;
        }
        let d = (psi - s1.psi_at(stretch * r) - shift).abs();
        if d > deviation {
            deviation = d;
            at_r = r;
        }
    }
    Ok(CssScaling { deviation, at_r, limit: css_strong_field_limit(n_int, beta) })
}

/// Dirac-limit proxy: large `ψ(0)` with nearly all mass near the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Concentration {
    pub psi0: f64,
    pub mass_inner: f64,
    pub r_inner: f64,
}

impl Default for Concentration {
    fn default() -> Self {
        Concentration { psi0: 20.0, mass_inner: 0.99, r_inner: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub param: f64,
    pub verdict: Verdict,
    pub psi0: Option<f64>,
    pub mass_inner: Option<f64>,
    pub beta_eq: f64,
    pub concentrated: bool,
    pub error: Option<String>,
}

/// Mass `M(r)` by linear interpolation of the mass column.
fn mass_within(sol: &NormalizedSolution, r: f64) -> f64 {
    let nodes = sol.nodes();
    let i = nodes.partition_point(|&x| x <= r);
    if i == 0 {
        return sol.mass[0] * (r / nodes[0]).powi(2);
    }
    if i >= nodes.len() {
        return sol.total_mass();
    }
    let u = (r - nodes[i - 1]) / (nodes[i] - nodes[i - 1]);
    sol.mass[i - 1] + u * (sol.mass[i] - sol.mass[i - 1])
}

/// Solves or classifies each `β_stat`, in parallel. Entries never abort the
/// scan; their errors are recorded per row.
pub fn onsager_temperature_scan(
    n: f64,
    gamma: f64,
    alpha_exp: f64,
    beta_stat_list: &[f64],
    controls: &ShootControls,
    thresholds: &Concentration,
) -> Result<Vec<ScanRow>> {
    if beta_stat_list.is_empty() {
        return Err(Error::InvalidArgument("temperature list is empty".into()));
    }
    let rows = beta_stat_list
        .par_iter()
        .map(|&beta_stat| {
            let spec = AppSpec::Onsager { n, gamma, alpha_exp, beta_stat };
            let mut row = ScanRow {
                param: beta_stat,
                verdict: Verdict::Outside,
                psi0: None,
                mass_inner: None,
                beta_eq: spec.beta_eq(),
                concentrated: false,
                error: None,
            };
            match solve_app(&spec, controls) {
                Ok(rep) => {
                    row.verdict = rep.window.verdict;
                    row.error = rep.failure;
                    if let Some(sol) = rep.solution {
                        let m = mass_within(&sol, thresholds.r_inner);
                        row.psi0 = Some(sol.psi[0]);
                        row.mass_inner = Some(m);
                        row.concentrated = sol.psi[0] > thresholds.psi0 && m > thresholds.mass_inner;
                    }
                }
                Err(e) => {
                    row.verdict = spec.window().verdict;
                    row.error = Some(e.to_string());
                }
            }
            row
        })
        .collect();
    Ok(rows)
}

/// Header of scan tables.
pub const SCAN_HEADER: [&str; 5] = ["param", "verdict", "psi0", "mass_inner", "beta_eq"];

/// Writes scan rows; a concentrated solution is marked `inside-concentrated`
/// and missing values are left empty.
pub fn write_scan_csv(rows: &[ScanRow], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SCAN_HEADER)?;
    let opt = |x: Option<f64>| x.map(|v| format!("{v:?}")).unwrap_or_default();
    for row in rows {
        let verdict = if row.concentrated { format!("{}-concentrated", row.verdict) } else { row.verdict.to_string() };
        w.write_record([format!("{:?}", row.param), verdict, opt(row.psi0), opt(row.mass_inner), format!("{:?}", row.beta_eq)])?;
    }
    w.flush()?;
    Ok(())
}
