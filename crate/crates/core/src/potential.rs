//! Radial weights `V(r)`, their derivatives, the integrability exponent
//! `α(V)` and the structural conditions required by the existence theory.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

/// Annulus `R₁ < r < R₂` on which `V ≥ C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Annulus {
    pub c: f64,
    pub r1: f64,
    pub r2: f64,
}

/// Catalog of non-negative radial weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Potential {
    /// `V ≡ c`.
    Constant { c: f64 },
    /// `V = r^{n_pow} e^{-γ r^{α}}`.
    PowerGauss { n_pow: f64, gamma: f64, alpha_exp: f64 },
    /// `V = (1 + r²)^l e^{2γ/(1 + r²)}`, the stereographic pull-back of a sphere weight.
    Sphere { l: f64, gamma: f64 },
    /// `V = -1/(8πβ) · 1_{[0, α]} · r^{-2} (-ln r)^{-3/2}` with `β = 1/(4 ln α)`.
    LogSingular { alpha_cut: f64 },
    /// Piecewise linear in `ln r`, power-law extrapolation outside the table.
    Tabulated { r: Vec<f64>, v: Vec<f64> },
}

/// Extended real used for `α(V)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(v) => v,
            Exponent::Infinite => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaEstimate {
    pub alpha: Exponent,
    /// Set for tabulated data, where the tail exponent is a probe.
    pub approximate: bool,
}

/// Outcome of one structural check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub pass: bool,
    pub approximate: bool,
}

impl Check {
    fn exact(pass: bool) -> Self {
        Check { pass, approximate: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub beta: f64,
    pub delta: f64,
    /// Weight exponent folded into the checked weight `rⁿ V`.
    pub n: f64,
    pub alpha_v: f64,
    /// `β ≥ -α(rⁿV)`.
    pub beta_above_minus_alpha: Check,
    /// `∫_{D(0,1)} V⁺ |x|^{-β-δ} < ∞`.
    pub origin_integral: Check,
    /// `∫_{|x|>1} V⁺ |x|^{-β+δ} < ∞`.
    pub infinity_integral: Check,
    /// `∫_{|x|>1} V⁻ |x|^{-2β} < ∞` (`V⁻ ≡ 0` across the catalog).
    pub negative_part: Check,
    pub annulus: Option<Annulus>,
}

impl ConditionReport {
    /// Hypotheses of the existence theorem for the sign of `β`.
    pub fn all_pass(&self) -> bool {
        let common = self.beta_above_minus_alpha.pass && self.annulus.is_some();
        if self.beta > 0.0 {
            common
                && self.origin_integral.pass
                && self.infinity_integral.pass
                && self.negative_part.pass
        } else {
            common
        }
    }

    pub fn approximate(&self) -> bool {
        self.beta_above_minus_alpha.approximate
            || self.origin_integral.approximate
            || self.infinity_integral.approximate
    }
}

/// Behaviour of `V` near an end point: `V ≈ C r^k (ln-corrections allowed)`.
#[derive(Debug, Clone, Copy, PartialEq)]
enum EndBehaviour {
    /// `V ~ r^k`.
    Power(f64),
    /// `V ~ r^{-2} (-ln r)^{-3/2}` at the origin.
    InverseSquareLog,
    /// Faster than any power (exponential decay or compact support).
    Vanishing,
}

impl Potential {
    pub fn gaussian() -> Self {
        Potential::PowerGauss { n_pow: 0.0, gamma: 1.0, alpha_exp: 2.0 }
    }

    /// `β` paired with a `LogSingular` weight.
    pub fn log_singular_beta(alpha_cut: f64) -> f64 {
        1.0 / (4.0 * alpha_cut.ln())
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Potential::Constant { c } if !(*c >= 0.0) => {
                Err(Error::InvalidArgument(format!("constant weight must be >= 0, got {c}")))
            }
            Potential::PowerGauss { gamma, alpha_exp, .. } if !(*gamma >= 0.0) || !(*alpha_exp > 0.0) => {
                Err(Error::InvalidArgument("power-gauss needs gamma >= 0 and alpha > 0".into()))
            }
            Potential::Sphere { gamma, .. } if !(*gamma >= 0.0) => {
                Err(Error::InvalidArgument("sphere weight needs gamma >= 0".into()))
            }
            Potential::LogSingular { alpha_cut } if !(*alpha_cut > 0.0 && *alpha_cut < 1.0) => {
                Err(Error::InvalidArgument(format!("alpha_cut must lie in (0,1), got {alpha_cut}")))
            }
            Potential::Tabulated { r, v } => {
                if r.len() < 2 || r.len() != v.len() {
                    return Err(Error::InvalidArgument("table needs >= 2 matching rows".into()));
                }
                if r[0] <= 0.0 || r.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::InvalidArgument("table radii must be positive and increasing".into()));
                }
                if v.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
                    return Err(Error::InvalidArgument("table values must be finite and >= 0".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Checked constructor for table data.
    pub fn tabulated(r: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        let p = Potential::Tabulated { r, v };
        p.validate()?;
        Ok(p)
    }

    /// Loads a two-column `r,V` CSV with a header row.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path.as_ref())?;
        let headers = reader.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "r" || &headers[1] != "V" {
            return Err(Error::Parse(format!("expected header `r,V`, got `{}`", headers.iter().collect::<Vec<_>>().join(","))));
        }
        let mut r = Vec::new();
        let mut v = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record?;
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("row {}: `{s}` is not a number", line + 2)))
            };
            r.push(parse(&record[0])?);
            v.push(parse(&record[1])?);
        }
        Potential::tabulated(r, v)
    }

    /// `(V(r), V'(r))`.
    pub fn evaluate(&self, r: f64) -> Result<(f64, f64)> {
        if !(r >= 0.0) {
            return Err(Error::Domain { r, reason: "negative radius".into() });
        }
        match *self {
            Potential::Constant { c } => Ok((c, 0.0)),
            Potential::PowerGauss { n_pow, gamma, alpha_exp } => {
                if r == 0.0 {
                    return power_gauss_at_origin(n_pow, gamma, alpha_exp);
                }
                let decay = gamma * r.powf(alpha_exp);
                let v = r.powf(n_pow) * (-decay).exp();
                let log_slope = n_pow - alpha_exp * decay;
                Ok((v, v * log_slope / r))
            }
            Potential::Sphere { l, gamma } => {
                let q = 1.0 + r * r;
                let v = q.powf(l) * (2.0 * gamma / q).exp();
                let dv = v * (2.0 * l * r / q - 4.0 * gamma * r / (q * q));
                Ok((v, dv))
            }
            Potential::LogSingular { alpha_cut } => {
                if r == 0.0 {
                    return Err(Error::Domain { r, reason: "log-singular weight is infinite at 0".into() });
                }
                if r > alpha_cut {
                    return Ok((0.0, 0.0));
                }
                let beta = Self::log_singular_beta(alpha_cut);
                let big_l = -r.ln();
                let v = -1.0 / (8.0 * PI * beta) / (r * r * big_l.powf(1.5));
                let dv = v * (-2.0 / r + 1.5 / (r * big_l));
                Ok((v, dv))
            }
            Potential::Tabulated { r: ref rs, ref v } => Ok(tabulated_eval(rs, v, r)),
        }
    }

    pub fn value(&self, r: f64) -> Result<f64> {
        self.evaluate(r).map(|(v, _)| v)
    }

    /// `r V'(r) / V(r)`, or `None` where `V` vanishes.
    pub fn log_slope(&self, r: f64) -> Result<Option<f64>> {
        let (v, dv) = self.evaluate(r)?;
        Ok(if v > 0.0 { Some(r * dv / v) } else { None })
    }

    /// Jump discontinuities `(r_j, V(r_j⁺) - V(r_j⁻))`, the singular part of `V'`.
    pub fn jumps(&self) -> Vec<(f64, f64)> {
        match *self {
            Potential::LogSingular { alpha_cut } => {
                let beta = Self::log_singular_beta(alpha_cut);
                let inside = -1.0 / (8.0 * PI * beta) / (alpha_cut * alpha_cut * (-alpha_cut.ln()).powf(1.5));
                vec![(alpha_cut, -inside)]
            }
            _ => Vec::new(),
        }
    }

    /// True where `V'` comes from a difference quotient.
    pub fn derivative_is_approximate(&self) -> bool {
        matches!(self, Potential::Tabulated { .. })
    }

    fn origin_behaviour(&self) -> EndBehaviour {
        match *self {
            Potential::Constant { c: 0.0 } => EndBehaviour::Vanishing,
            Potential::Constant { .. } => EndBehaviour::Power(0.0),
            Potential::PowerGauss { n_pow, .. } => EndBehaviour::Power(n_pow),
            Potential::Sphere { .. } => EndBehaviour::Power(0.0),
            Potential::LogSingular { .. } => EndBehaviour::InverseSquareLog,
            Potential::Tabulated { ref r, ref v } => end_power(r[0], v[0], r[1], v[1]),
        }
    }

    fn infinity_behaviour(&self) -> EndBehaviour {
        match *self {
            Potential::Constant { c: 0.0 } => EndBehaviour::Vanishing,
            Potential::Constant { .. } => EndBehaviour::Power(0.0),
            Potential::PowerGauss { n_pow, gamma, .. } => {
                if gamma > 0.0 {
                    EndBehaviour::Vanishing
                } else {
                    EndBehaviour::Power(n_pow)
                }
            }
            Potential::Sphere { l, .. } => EndBehaviour::Power(2.0 * l),
            Potential::LogSingular { .. } => EndBehaviour::Vanishing,
            Potential::Tabulated { ref r, ref v } => {
                let m = r.len();
                end_power(r[m - 2], v[m - 2], r[m - 1], v[m - 1])
            }
        }
    }

    /// `α(V) = sup{α : ∫_{|x|>1} |V| |x|^{2α} dx < ∞}`.
    pub fn alpha_of_v(&self) -> AlphaEstimate {
        self.alpha_of_weight(0.0)
    }

    /// `α(rⁿ V)`.
    pub fn alpha_of_weight(&self, n: f64) -> AlphaEstimate {
        let approximate = matches!(self, Potential::Tabulated { .. });
        let alpha = match self.infinity_behaviour() {
            EndBehaviour::Vanishing => Exponent::Infinite,
            // ∫ r^{k+n} r^{2α} r dr < ∞  ⟺  α < -(k+n)/2 - 1
            EndBehaviour::Power(k) => Exponent::Finite(-(k + n) / 2.0 - 1.0),
            EndBehaviour::InverseSquareLog => unreachable!("only an origin behaviour"),
        };
        AlphaEstimate { alpha, approximate }
    }

    /// Local exponent `k` with `rⁿ V(r) ≈ C r^k` on the origin cell, or `None`
    /// when the weight is not a power there.
    pub fn origin_exponent(&self, n: f64) -> Option<f64> {
        match self.origin_behaviour() {
            EndBehaviour::Power(k) => Some(k + n),
            EndBehaviour::Vanishing => Some(n),
            EndBehaviour::InverseSquareLog => None,
        }
    }

    /// A positivity annulus `V ≥ C` on `R₁ < r < R₂`, found by sampling.
    pub fn positivity_annulus(&self) -> Option<Annulus> {
        let candidates: &[(f64, f64)] = match self {
            Potential::LogSingular { alpha_cut } => {
                return self.annulus_on(alpha_cut / 4.0, alpha_cut / 2.0);
            }
            Potential::Tabulated { r, .. } => {
                let (lo, hi) = (r[0], r[r.len() - 1]);
                return self.annulus_on(lo + 0.25 * (hi - lo), lo + 0.5 * (hi - lo));
            }
            _ => &[(0.5, 1.0), (1.0, 2.0), (0.1, 0.5), (2.0, 4.0)],
        };
        candidates.iter().find_map(|&(a, b)| self.annulus_on(a, b))
    }

    fn annulus_on(&self, r1: f64, r2: f64) -> Option<Annulus> {
        let samples = 65;
        let mut c = f64::INFINITY;
        for i in 0..samples {
            let r = r1 + (r2 - r1) * i as f64 / (samples - 1) as f64;
            c = c.min(self.value(r).ok()?);
        }
        (c > 0.0).then_some(Annulus { c, r1, r2 })
    }

    /// Conditions of the existence theorem for `V` alone.
    pub fn check_conditions(&self, beta: f64, delta: f64) -> Result<ConditionReport> {
        self.check_weighted_conditions(0.0, beta, delta)
    }

    /// Conditions for the weight `rⁿ V`, decided analytically from the end
    /// behaviour of the catalog variant (tabulated tails are probes).
    pub fn check_weighted_conditions(&self, n: f64, beta: f64, delta: f64) -> Result<ConditionReport> {
        if !(delta > 0.0) {
            return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
        }
        self.validate()?;
        let approximate = matches!(self, Potential::Tabulated { .. });
        let alpha = self.alpha_of_weight(n);
        let alpha_v = alpha.alpha.value();
        let beta_above_minus_alpha = Check { pass: beta >= -alpha_v, approximate };

        // ∫₀¹ r^{k} r^{-β-δ} r dr
        let origin_integral = match self.origin_behaviour() {
            EndBehaviour::Vanishing => Check::exact(true),
            EndBehaviour::Power(k) => Check { pass: k + n - beta - delta + 2.0 > 0.0, approximate },
            // r^{-2} (-ln r)^{-3/2} r^{n-β-δ} r: finite iff n-β-δ ≥ 0
            EndBehaviour::InverseSquareLog => Check::exact(n - beta - delta >= 0.0),
        };
        // ∫₁^∞ r^{k} r^{-β+δ} r dr
        let infinity_integral = match self.infinity_behaviour() {
            EndBehaviour::Vanishing => Check::exact(true),
            EndBehaviour::Power(k) => Check { pass: k + n - beta + delta + 2.0 < 0.0, approximate },
            EndBehaviour::InverseSquareLog => unreachable!(),
        };
        Ok(ConditionReport {
            beta,
            delta,
            n,
            alpha_v,
            beta_above_minus_alpha,
            origin_integral,
            infinity_integral,
            negative_part: Check::exact(true),
            annulus: self.positivity_annulus(),
        })
    }

    /// Largest admissible `δ` gap for `β > 0`: distance of `β` to the
    /// thresholds imposed by the origin and infinity integrals.
    pub fn beta_gap(&self, n: f64, beta: f64) -> f64 {
        let origin = match self.origin_behaviour() {
            EndBehaviour::Vanishing => f64::INFINITY,
            EndBehaviour::Power(k) => k + n + 2.0 - beta,
            EndBehaviour::InverseSquareLog => n - beta,
        };
        let infinity = match self.infinity_behaviour() {
            EndBehaviour::Vanishing => f64::INFINITY,
            EndBehaviour::Power(k) => beta - (k + n + 2.0),
            EndBehaviour::InverseSquareLog => f64::INFINITY,
        };
        origin.min(infinity)
    }

    /// Mini-grammar descriptor, e.g. `gauss:gamma=1,alpha=2`.
    pub fn descriptor(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Constant { c } => write!(f, "const:c={c}"),
            Potential::PowerGauss { n_pow, gamma, alpha_exp } => {
                write!(f, "gauss:gamma={gamma},alpha={alpha_exp},npow={n_pow}")
            }
            Potential::Sphere { l, gamma } => write!(f, "sphere:l={l},gamma={gamma}"),
            Potential::LogSingular { alpha_cut } => write!(f, "logsing:alpha={alpha_cut}"),
            Potential::Tabulated { r, .. } => write!(f, "table:rows={}", r.len()),
        }
    }
}

fn power_gauss_at_origin(n_pow: f64, gamma: f64, alpha_exp: f64) -> Result<(f64, f64)> {
    if n_pow < 0.0 {
        return Err(Error::Domain { r: 0.0, reason: "negative power is infinite at 0".into() });
    }
    let v = if n_pow == 0.0 { 1.0 } else { 0.0 };
    // d/dr [r^p e^{-γ r^a}] at 0: only the lowest power survives.
    let dv = if n_pow == 0.0 {
        if gamma == 0.0 || alpha_exp > 1.0 {
            0.0
        } else if alpha_exp == 1.0 {
            -gamma
        } else {
            f64::NEG_INFINITY
        }
    } else if n_pow == 1.0 {
        1.0
    } else if n_pow > 1.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok((v, dv))
}

fn end_power(r0: f64, v0: f64, r1: f64, v1: f64) -> EndBehaviour {
    if v0 > 0.0 && v1 > 0.0 {
        EndBehaviour::Power((v1 / v0).ln() / (r1 / r0).ln())
    } else {
        EndBehaviour::Vanishing
    }
}

fn tabulated_eval(rs: &[f64], vs: &[f64], r: f64) -> (f64, f64) {
    let m = rs.len();
    let extrapolate = |i: usize, j: usize| -> (f64, f64) {
        match end_power(rs[i], vs[i], rs[j], vs[j]) {
            EndBehaviour::Power(k) if r > 0.0 => {
                let anchor = if r < rs[0] { 0 } else { m - 1 };
                let v = vs[anchor] * (r / rs[anchor]).powf(k);
                (v, k * v / r)
            }
            _ => (if r < rs[0] { vs[0] } else { 0.0 }, 0.0),
        }
    };
    if r < rs[0] {
        return extrapolate(0, 1);
    }
    if r > rs[m - 1] {
        return extrapolate(m - 2, m - 1);
    }
    let i = rs.partition_point(|&x| x <= r).clamp(1, m - 1);
    let (a, b) = (rs[i - 1], rs[i]);
    let (la, lb) = (a.ln(), b.ln());
    let slope = (vs[i] - vs[i - 1]) / (lb - la);
    let v = vs[i - 1] + slope * (r.ln() - la);
    (v, slope / r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn catalog() -> Vec<Potential> {
        vec![
            Potential::Constant { c: 1.0 },
            Potential::Constant { c: 2.5 },
            Potential::gaussian(),
            Potential::PowerGauss { n_pow: 5.0, gamma: 1.0, alpha_exp: 1.0 },
            Potential::PowerGauss { n_pow: 1.5, gamma: 0.5, alpha_exp: 2.0 },
            Potential::PowerGauss { n_pow: -1.0, gamma: 0.0, alpha_exp: 1.0 },
            Potential::Sphere { l: -1.0, gamma: 0.0 },
            Potential::Sphere { l: -2.0, gamma: 0.7 },
            Potential::LogSingular { alpha_cut: (-1.0f64).exp() },
        ]
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(Potential::Constant { c: 1.0 }.evaluate(3.0).unwrap(), (1.0, 0.0));
        let (v, dv) = Potential::gaussian().evaluate(1.0).unwrap();
        assert_relative_eq!(v, (-1.0f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(dv, -2.0 * (-1.0f64).exp(), max_relative = 1e-15);
        let (v, dv) = Potential::Sphere { l: -1.0, gamma: 0.0 }.evaluate(1.0).unwrap();
        assert_relative_eq!(v, 0.5, max_relative = 1e-15);
        assert_relative_eq!(dv, -0.5, max_relative = 1e-15);
    }

    #[test]
    fn origin_domain_errors() {
        assert!(Potential::LogSingular { alpha_cut: 0.5 }.evaluate(0.0).is_err());
        let neg = Potential::PowerGauss { n_pow: -0.5, gamma: 1.0, alpha_exp: 2.0 };
        assert!(neg.evaluate(0.0).is_err());
        assert_eq!(Potential::gaussian().evaluate(0.0).unwrap(), (1.0, 0.0));
    }

    #[test]
    fn derivative_matches_central_difference() {
        for p in catalog() {
            let mut r: f64 = 1e-6;
            while r <= 1e3 {
                if let Potential::LogSingular { alpha_cut } = p {
                    if (r - alpha_cut).abs() < 1e-3 * alpha_cut {
                        r *= 1.37;
                        continue;
                    }
                }
                let (v, dv) = p.evaluate(r).unwrap();
                if v > 1e-12 {
                    let h = 1e-5 * r;
                    let fd = (p.value(r + h).unwrap() - p.value(r - h).unwrap()) / (2.0 * h);
                    let scale = dv.abs().max(v / r);
                    assert!(
                        (fd - dv).abs() <= 1e-6 * scale,
                        "{p} at r={r}: fd={fd} analytic={dv}"
                    );
                }
                r *= 1.37;
            }
        }
    }

    #[test]
    fn alpha_table() {
        let inf = Exponent::Infinite;
        assert_eq!(
            Potential::PowerGauss { n_pow: 5.0, gamma: 1.0, alpha_exp: 1.0 }.alpha_of_v().alpha,
            inf
        );
        assert_eq!(Potential::Sphere { l: -2.0, gamma: 0.0 }.alpha_of_v().alpha, Exponent::Finite(1.0));
        assert_eq!(Potential::Constant { c: 1.0 }.alpha_of_v().alpha, Exponent::Finite(-1.0));
        assert_eq!(Potential::Sphere { l: -1.0, gamma: 3.0 }.alpha_of_v().alpha, Exponent::Finite(0.0));
        assert_eq!(Potential::LogSingular { alpha_cut: 0.3 }.alpha_of_v().alpha, inf);
        assert!(!Potential::gaussian().alpha_of_v().approximate);
    }

    #[test]
    fn gaussian_conditions() {
        let g = Potential::gaussian();
        let ok = g.check_conditions(1.0, 0.5).unwrap();
        assert!(ok.all_pass(), "{ok:?}");
        let bad = g.check_conditions(2.0, 0.5).unwrap();
        assert!(!bad.origin_integral.pass);
        assert!(!bad.all_pass());
    }

    #[test]
    fn constant_fails_minus_alpha_bound_for_negative_beta() {
        let rep = Potential::Constant { c: 1.0 }.check_conditions(-0.5, 0.1).unwrap();
        assert!(!rep.beta_above_minus_alpha.pass);
        assert!(!rep.all_pass());
        assert!(Potential::Constant { c: 1.0 }.check_conditions(1.0, 0.0).is_err());
    }

    #[test]
    fn weighted_conditions_shift_the_origin_threshold() {
        // r² e^{-r²}: origin integral finite iff 2 + 2 - β - δ > 0.
        let g = Potential::gaussian();
        assert!(g.check_weighted_conditions(2.0, 3.5, 0.25).unwrap().origin_integral.pass);
        assert!(!g.check_weighted_conditions(2.0, 4.0, 0.25).unwrap().origin_integral.pass);
    }

    #[test]
    fn log_singular_pairs_with_negative_beta() {
        let a = (-1.0f64).exp();
        assert_relative_eq!(Potential::log_singular_beta(a), -0.25, max_relative = 1e-15);
        let p = Potential::LogSingular { alpha_cut: a };
        assert_eq!(p.value(0.9).unwrap(), 0.0);
        assert!(p.value(0.1).unwrap() > 0.0);
        let jumps = p.jumps();
        assert_eq!(jumps.len(), 1);
        assert!(jumps[0].1 < 0.0);
    }

    #[test]
    fn tabulated_interpolates_in_log_r() {
        let p = Potential::tabulated(vec![0.1, 1.0, 10.0], vec![1.0, 0.5, 0.01]).unwrap();
        // midpoint in ln r between 0.1 and 1.0
        assert_relative_eq!(p.value(0.1f64.sqrt()).unwrap(), 0.75, max_relative = 1e-12);
        assert!(p.derivative_is_approximate());
        assert!(p.alpha_of_v().approximate);
        // tail exponent ln(0.02)/ln(10)
        let k = (0.01f64 / 0.5).ln() / 10f64.ln();
        assert_relative_eq!(p.alpha_of_v().alpha.value(), -k / 2.0 - 1.0, max_relative = 1e-12);
        assert!(Potential::tabulated(vec![1.0, 0.5], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn csv_round_trip_and_header_check() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("v.csv");
        std::fs::write(&good, "r,V\n0.5,1\n1,0.25\n2,0.0625\n").unwrap();
        let p = Potential::load_csv(&good).unwrap();
        assert_relative_eq!(p.value(1.0).unwrap(), 0.25);
        let bad = dir.path().join("w.csv");
        std::fs::write(&bad, "x,y\n1,2\n2,3\n").unwrap();
        assert!(matches!(Potential::load_csv(&bad), Err(Error::Parse(_))));
    }

    #[test]
    fn catalog_is_non_negative() {
        for p in catalog() {
            for i in 1..200 {
                let r = 0.05 * i as f64;
                assert!(p.value(r).unwrap() >= 0.0);
            }
        }
    }

    #[test]
    fn annulus_found_for_catalog() {
        for p in catalog() {
            let a = p.positivity_annulus().expect("annulus");
            assert!(a.c > 0.0 && a.r2 > a.r1);
        }
        assert!(Potential::Constant { c: 0.0 }.positivity_annulus().is_none());
    }
}
