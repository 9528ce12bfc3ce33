//! Shooting from the origin: the radial IVP, the mass map `s ↦ β(s)`, its
//! derivative through the linearized equation, and root finding in `s`.
//!
//! The ODE `ψ'' + ψ'/r + σ rⁿ V e^ψ = 0` is integrated in `t = ln r` with
//! state `(ψ, w, φ, v, m)`, where `w = rψ'`, `φ = ∂ₛψ`, `v = rφ'` and
//! `m(r) = ∫₀^r ρ^{n+1} V e^ψ dρ`. With `E = r^{n+2} V e^ψ`:
//!
//! ```text
//! ψ_t = w,  w_t = -σE,  φ_t = v,  v_t = -σEφ,  m_t = E.
//! ```
//!
//! `σ = +1` gives `β > 0`; `σ = -1` gives the `β < 0` branch. Since `w + σm`
//! is a linear invariant, the Runge–Kutta scheme preserves the flux identity
//! to rounding.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{cumulative_1d, make_grid, Grading, Grid};
use crate::ode::{Dopri5, StepControl};
use crate::potential::Potential;
use crate::solution::{NormalizedSolution, Tolerances};

/// `ψ` above this value is reported as blow-up.
pub const BLOW_UP_PSI: f64 = 700.0;
/// Largest truncation radius tried by the automatic `r_max` search.
pub const R_CAP: f64 = 1e6;

/// Sign of `β` sought by the shooting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Positive,
    Negative,
}

impl Branch {
    pub fn sigma(self) -> f64 {
        match self {
            Branch::Positive => 1.0,
            Branch::Negative => -1.0,
        }
    }

    pub fn of(beta: f64) -> Branch {
        if beta < 0.0 {
            Branch::Negative
        } else {
            Branch::Positive
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootControls {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Fixed truncation radius; `None` selects it automatically.
    pub r_max: Option<f64>,
    /// Smallest radius the automatic search may settle on.
    pub r_floor: f64,
    pub n_nodes: usize,
    /// Accepted tail mass relative to the accumulated mass.
    pub mass_tol: f64,
    pub root_tol: f64,
    pub max_iter: usize,
    pub branch: Branch,
}

impl Default for ShootControls {
    fn default() -> Self {
        ShootControls {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            r_max: None,
            r_floor: 1.0,
            n_nodes: 2048,
            mass_tol: 1e-8,
            root_tol: 1e-8,
            max_iter: 80,
            branch: Branch::Positive,
        }
    }
}

impl ShootControls {
    pub fn tolerances(&self) -> Tolerances {
        Tolerances { abs_tol: self.abs_tol, rel_tol: self.rel_tol, root_tol: self.root_tol }
    }

    fn step_control(&self) -> StepControl {
        StepControl { abs_tol: self.abs_tol, rel_tol: self.rel_tol, ..StepControl::default() }
    }

    fn validate(&self) -> Result<()> {
        let positive = [self.abs_tol, self.rel_tol, self.mass_tol, self.root_tol, self.r_floor];
        if positive.iter().any(|x| !(*x > 0.0)) || self.r_max.is_some_and(|r| !(r > 0.0)) {
            return Err(Error::InvalidArgument("controls must be positive".into()));
        }
        Ok(())
    }
}

/// Raw trajectory `ψ(·, s)` with its variation `φ = ∂ₛψ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShootResult {
    pub s: f64,
    pub n: f64,
    pub branch: Branch,
    pub potential: Potential,
    pub grid: Grid,
    pub psi: Vec<f64>,
    /// `r ψ'`.
    pub dpsi: Vec<f64>,
    pub phi: Vec<f64>,
    /// `r φ'`.
    pub dphi: Vec<f64>,
    /// `∫₀^r ρ^{n+1} V e^ψ dρ`.
    pub mass: Vec<f64>,
    /// `r^{n+2} V e^ψ`.
    pub forcing: Vec<f64>,
    /// `β(s) = ±½ ∫₀^∞ r^{n+1} V e^ψ dr`, tail included.
    pub beta_s: f64,
    /// From `-2β'(s) = lim r φ'(r)`.
    pub beta_prime_s: f64,
    pub r_max: f64,
    /// Estimated `∫_{r_max}^∞ r^{n+1} V e^ψ dr`.
    pub tail_mass: f64,
    /// Smallest `C` with `|φ(rᵢ)| ≤ C ln(rᵢ + 2)`.
    pub phi_log_bound: f64,
    /// `max |r φ'|` over the nodes.
    pub rphi_sup: f64,
    pub controls: ShootControls,
}

type State = [f64; 5];

struct Rhs<'a> {
    v: &'a Potential,
    n: f64,
    sigma: f64,
}

impl Rhs<'_> {
    /// `ln(r^{n+2} V(r))`, or `None` where `V` vanishes.
    fn log_weight(&self, t: f64) -> Result<Option<f64>> {
        let value = self.v.value(t.exp())?;
        Ok((value > 0.0).then(|| (self.n + 2.0) * t + value.ln()))
    }

    /// `E`; overflow shows up as `∞`, which makes the integrator reject the
    /// trial step instead of aborting.
    fn forcing(&self, t: f64, psi: f64) -> Result<f64> {
        match self.log_weight(t)? {
            None => Ok(0.0),
            Some(lw) => {
                let x = lw + psi;
                Ok(if x > BLOW_UP_PSI { f64::INFINITY } else { x.exp() })
            }
        }
    }

    fn guard(t: f64, y: &State) -> Result<()> {
        if y[0] > BLOW_UP_PSI || !y.iter().all(|x| x.is_finite()) {
            return Err(Error::BlowUp { r: t.exp(), psi: y[0] });
        }
        Ok(())
    }

    fn eval(&self, t: f64, y: &State) -> Result<State> {
        let e = self.forcing(t, y[0])?;
        Ok([y[1], -self.sigma * e, y[3], -self.sigma * e * y[2], e])
    }

    /// `d ln E / dt` without the `w` contribution.
    fn log_rate(&self, t: f64) -> Result<Option<f64>> {
        let r = t.exp();
        Ok(self.v.log_slope(r)?.map(|q| self.n + 2.0 + q))
    }

    /// Tail beyond `t` from `E ∝ e^{κ t}`: `(∫E, ∫Eφ)` to infinity.
    fn tail(&self, t: f64, y: &State) -> Result<(f64, f64)> {
        let e = self.forcing(t, y[0])?;
        if e == 0.0 {
            return Ok((0.0, 0.0));
        }
        let kappa = match self.log_rate(t)? {
            Some(rate) => rate + y[1],
            None => return Ok((0.0, 0.0)),
        };
        if kappa >= 0.0 {
            return Ok((f64::INFINITY, f64::INFINITY));
        }
        Ok((e / -kappa, e * (y[2] / -kappa + y[3] / (kappa * kappa))))
    }
}

/// Series start on `[0, r₀]` with `rⁿV ≈ W₀ (r/r₀)^q`.
fn series_start(rhs: &Rhs, s: f64, r_first: f64) -> Result<(f64, State)> {
    let mut r0 = r_first;
    for _ in 0..40 {
        let t0 = r0.ln();
        let q = rhs.log_rate(t0)?.map(|rate| rate - 2.0);
        let weight = rhs.log_weight(t0)?.map(|lw| (lw - 2.0 * t0).exp()).unwrap_or(0.0);
        let q = q.unwrap_or(rhs.n);
        if q + 2.0 <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "weight r^n V behaves like r^{q} at the origin, not integrable"
            )));
        }
        let m0 = weight * s.exp() * r0 * r0 / (q + 2.0);
        let shift = m0 / (q + 2.0);
        if shift <= 1e-9 {
            let sigma = rhs.sigma;
            return Ok((t0, [s - sigma * shift, -sigma * m0, 1.0 - sigma * shift, -sigma * m0, m0]));
        }
        r0 *= 0.1;
    }
    Err(Error::StepUnderflow { r: r0 })
}

/// Trajectory of the positive branch unless `controls.branch` says otherwise.
pub fn integrate_ivp(v: &Potential, n: f64, s: f64, controls: &ShootControls) -> Result<ShootResult> {
    controls.validate()?;
    if !(n >= 0.0) {
        return Err(Error::InvalidArgument(format!("weight exponent must be >= 0, got {n}")));
    }
    if !s.is_finite() {
        return Err(Error::InvalidArgument(format!("initial value must be finite, got {s}")));
    }
    let rhs = Rhs { v, n, sigma: controls.branch.sigma() };
    let solver = Dopri5::new(controls.step_control());
    let r_max = match controls.r_max {
        Some(r) => r,
        None => find_r_max(&rhs, &solver, s, controls)?,
    };
    let grid = make_grid(r_max, controls.n_nodes, Grading::Log)?;
    let (t0, y0) = series_start(&rhs, s, grid.r_min())?;
    let ts: Vec<f64> = grid.nodes().iter().map(|r| r.ln()).collect();
    let m = grid.len();
    let mut states = Vec::with_capacity(m);
    solver.integrate(|t, y| rhs.eval(t, y), t0, y0, &ts, |_, t, y| {
        Rhs::guard(t, y)?;
        states.push(*y);
        Ok(())
    })?;
    let last = states[m - 1];
    let (tail, tail_phi) = rhs.tail(ts[m - 1], &last)?;
    let sigma = rhs.sigma;
    let beta_s = sigma * (last[4] + tail) / 2.0;
    let v_inf = last[3] - sigma * tail_phi;
    let forcing = ts
        .iter()
        .zip(&states)
        .map(|(&t, y)| rhs.forcing(t, y[0]))
        .collect::<Result<Vec<_>>>()?;
    let phi: Vec<f64> = states.iter().map(|y| y[2]).collect();
    let dphi: Vec<f64> = states.iter().map(|y| y[3]).collect();
    let phi_log_bound = grid
        .nodes()
        .iter()
        .zip(&phi)
        .map(|(r, p)| p.abs() / (r + 2.0).ln())
        .fold(0.0, f64::max);
    let rphi_sup = dphi.iter().map(|x| x.abs()).fold(0.0, f64::max);
    Ok(ShootResult {
        s,
        n,
        branch: controls.branch,
        potential: v.clone(),
        psi: states.iter().map(|y| y[0]).collect(),
        dpsi: states.iter().map(|y| y[1]).collect(),
        phi,
        dphi,
        mass: states.iter().map(|y| y[4]).collect(),
        forcing,
        beta_s,
        beta_prime_s: -v_inf / 2.0,
        r_max,
        tail_mass: tail,
        phi_log_bound,
        rphi_sup,
        grid,
        controls: *controls,
    })
}

/// Doubles the radius until the tail is negligible or `rψ'` has plateaued.
fn find_r_max(rhs: &Rhs, solver: &Dopri5, s: f64, controls: &ShootControls) -> Result<f64> {
    let mut radius = controls.r_floor;
    let (mut t, mut y) = series_start(rhs, s, (radius * crate::grid::LOG_FLOOR).min(1e-8))?;
    let mut slopes: Vec<f64> = Vec::new();
    loop {
        let target = radius.ln();
        y = solver.integrate(|t, y| rhs.eval(t, y), t, y, &[target], |_, t, y| Rhs::guard(t, y))?;
        t = target;
        let (tail, _) = rhs.tail(t, &y)?;
        slopes.push(y[1]);
        if tail <= controls.mass_tol * y[4] {
            return Ok(radius);
        }
        // Four doublings span more than a decade.
        if slopes.len() > 4 {
            let drift = (slopes[slopes.len() - 1] - slopes[slopes.len() - 5]).abs();
            let e = rhs.forcing(t, y[0])?;
            if drift < 1e-10 && e <= controls.mass_tol * y[4] {
                return Ok(radius);
            }
        }
        if radius >= R_CAP {
            return Err(Error::MassNotConverged { r_max: radius, tail });
        }
        radius = (radius * 2.0).min(R_CAP);
    }
}

impl ShootResult {
    /// Shifts to `ψ̃ = ψ − ln(4π|β|)` so that `∫ rⁿ V e^ψ̃ = 1` and
    /// `-Δψ̃ = 4πβ rⁿ V e^ψ̃`.
    pub fn normalize(&self, beta: f64) -> Result<NormalizedSolution> {
        if beta == 0.0 || Branch::of(beta) != self.branch {
            return Err(Error::InvalidArgument(format!(
                "beta = {beta} does not match the {:?} shooting branch",
                self.branch
            )));
        }
        let shift = (4.0 * PI * beta.abs()).ln();
        let scale = 1.0 / (2.0 * beta.abs());
        Ok(NormalizedSolution {
            beta,
            n: self.n,
            potential: self.potential.clone(),
            grid: self.grid.clone(),
            psi: self.psi.iter().map(|p| p - shift).collect(),
            dpsi: self.dpsi.clone(),
            mass: self.mass.iter().map(|m| m * scale).collect(),
            tail_mass: self.tail_mass * scale,
            tolerances: self.controls.tolerances(),
            method: "shooting".into(),
        })
    }
}

/// One entry of a mass-map scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassMapEntry {
    pub s: f64,
    pub beta: f64,
    pub beta_prime: f64,
    /// Centered difference of `β` over the neighbouring entries, when both exist.
    pub beta_prime_fd: Option<f64>,
    pub r_max: f64,
}

/// Evaluates `β(s)` and `β'(s)` over `s_list` in parallel; failures stay per entry.
pub fn mass_map(
    v: &Potential,
    n: f64,
    s_list: &[f64],
    controls: &ShootControls,
) -> Result<Vec<Result<MassMapEntry>>> {
    if s_list.is_empty() {
        return Err(Error::InvalidArgument("mass map needs at least one s value".into()));
    }
    let mut entries: Vec<Result<MassMapEntry>> = s_list
        .par_iter()
        .map(|&s| {
            integrate_ivp(v, n, s, controls).map(|r| MassMapEntry {
                s,
                beta: r.beta_s,
                beta_prime: r.beta_prime_s,
                beta_prime_fd: None,
                r_max: r.r_max,
            })
        })
        .collect();
    for i in 1..entries.len().saturating_sub(1) {
        let (lo, hi) = match (&entries[i - 1], &entries[i + 1]) {
            (Ok(a), Ok(b)) if (b.s - a.s).abs() > 0.0 => (*a, *b),
            _ => continue,
        };
        if let Ok(mid) = &mut entries[i] {
            if (lo.s - mid.s) * (hi.s - mid.s) < 0.0 {
                mid.beta_prime_fd = Some((hi.beta - lo.beta) / (hi.s - lo.s));
            }
        }
    }
    Ok(entries)
}

/// Root of `β(s) = β_target` with its normalized profile.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaRoot {
    pub solution: NormalizedSolution,
    pub shoot: ShootResult,
    pub s_star: f64,
    pub iterations: usize,
    /// `β(s)` was seen to be non-monotone inside the bracket, so the root
    /// found need not be the only one.
    pub multiple_roots_possible: bool,
}

/// Scan used when no bracket is given for the positive branch.
pub const AUTO_SCAN: (f64, f64, f64) = (-10.0, 40.0, 2.5);

/// Finds `s*` with `|β(s*) − β_target| < root_tol` by a bracketed secant
/// iteration with bisection fallback. Without a bracket, one is located by
/// scanning `s`.
pub fn solve_for_beta(
    v: &Potential,
    n: f64,
    beta_target: f64,
    bracket: Option<(f64, f64)>,
    controls: &ShootControls,
) -> Result<BetaRoot> {
    if !(beta_target != 0.0 && beta_target.is_finite()) {
        return Err(Error::InvalidArgument(format!("beta must be finite and nonzero, got {beta_target}")));
    }
    let controls = ShootControls { branch: Branch::of(beta_target), ..*controls };
    let eval = |s: f64| integrate_ivp(v, n, s, &controls);
    let tol = controls.root_tol;
    let Bracket { lo, hi, flat, beta_range } = match bracket {
        Some((a, b)) => {
            if !(a < b) {
                return Err(Error::InvalidArgument(format!("bracket ({a}, {b}) is not increasing")));
            }
            let (lo, hi) = (eval(a)?, eval(b)?);
            let beta_range = (lo.beta_s.min(hi.beta_s), lo.beta_s.max(hi.beta_s));
            Bracket { flat: beta_range.1 - beta_range.0 < 10.0 * tol, lo, hi, beta_range }
        }
        None => auto_bracket(v, n, beta_target, &controls)?,
    };
    let outside = |lo: &ShootResult, hi: &ShootResult| Error::TargetOutsideBracket {
        target: beta_target,
        beta_min: beta_range.0,
        beta_max: beta_range.1,
        s_lo: lo.s.min(hi.s),
        s_hi: lo.s.max(hi.s),
    };
    for end in [&lo, &hi] {
        if accept_hit(end, beta_target, tol, flat) {
            return finish(end.clone(), beta_target, 0, false);
        }
    }
    let (fa, fb) = (lo.beta_s - beta_target, hi.beta_s - beta_target);
    if fa * fb >= 0.0 {
        return Err(outside(&lo, &hi));
    }
    let increasing = fb > fa;
    let mut seen: Vec<(f64, f64)> = vec![(lo.s, lo.beta_s), (hi.s, hi.beta_s)];
    let mut non_monotone = false;
    let (mut a, mut b) = (lo, hi);
    let mut best_residual = f64::INFINITY;
    for iteration in 1..=controls.max_iter {
        let (fa, fb) = (a.beta_s - beta_target, b.beta_s - beta_target);
        let secant = a.s - fa * (b.s - a.s) / (fb - fa);
        let width = b.s - a.s;
        let inside = secant > a.s + 0.01 * width && secant < b.s - 0.01 * width;
        let s = if non_monotone || !inside || iteration % 4 == 0 { 0.5 * (a.s + b.s) } else { secant };
        let mid = eval(s)?;
        let f = mid.beta_s - beta_target;
        best_residual = best_residual.min(f.abs());
        seen.push((s, mid.beta_s));
        if !non_monotone && !is_monotone(&mut seen, increasing) {
            non_monotone = true;
        }
        if f.abs() < tol {
            if accept_hit(&mid, beta_target, tol, flat) {
                return finish(mid, beta_target, iteration, non_monotone);
            }
            // Within tolerance only because β(s) flattens towards a
            // supremum: the target is not attained.
            return Err(outside(&a, &b));
        }
        if (f < 0.0) == (fa < 0.0) {
            a = mid;
        } else {
            b = mid;
        }
        if b.s - a.s < 1e-15 * (1.0 + a.s.abs()) {
            break;
        }
    }
    Err(Error::RootNotConverged { iterations: controls.max_iter, residual: best_residual })
}

/// A point within tolerance counts as a root when the map is flat (the
/// conformal family) or crosses the target transversally. A map creeping up
/// to a supremum it never attains is neither.
fn accept_hit(r: &ShootResult, target: f64, tol: f64, flat: bool) -> bool {
    (r.beta_s - target).abs() < tol && (flat || r.beta_prime_s.abs() > 1e-6)
}

fn is_monotone(seen: &mut [(f64, f64)], increasing: bool) -> bool {
    seen.sort_by(|x, y| x.0.total_cmp(&y.0));
    seen.windows(2).all(|w| if increasing { w[1].1 >= w[0].1 } else { w[1].1 <= w[0].1 })
}

fn finish(shoot: ShootResult, beta: f64, iterations: usize, multiple: bool) -> Result<BetaRoot> {
    Ok(BetaRoot {
        solution: shoot.normalize(beta)?,
        s_star: shoot.s,
        shoot,
        iterations,
        multiple_roots_possible: multiple,
    })
}

struct Bracket {
    lo: ShootResult,
    hi: ShootResult,
    /// `β` constant over everything scanned.
    flat: bool,
    beta_range: (f64, f64),
}

/// Locates consecutive scan points whose `β` values straddle the target.
fn auto_bracket(v: &Potential, n: f64, target: f64, controls: &ShootControls) -> Result<Bracket> {
    let run = |s: f64| integrate_ivp(v, n, s, controls);
    match controls.branch {
        Branch::Positive => {
            let (start, stop, step) = AUTO_SCAN;
            let count = ((stop - start) / step).round() as usize + 1;
            let ss: Vec<f64> = (0..count).map(|i| start + step * i as f64).collect();
            let results: Vec<Result<ShootResult>> = ss.par_iter().map(|&s| run(s)).collect();
            let mut ok: Vec<ShootResult> = results.into_iter().filter_map(|r| r.ok()).collect();
            if ok.is_empty() {
                return Err(Error::InvalidArgument("every scan point failed to integrate".into()));
            }
            extend_below(&mut ok, target, start, step, &run);
            pick_bracket(ok, target)
        }
        Branch::Negative => {
            // β(s) = -m(s)/2 decreases as s grows; march until it passes the
            // target or the profile blows up.
            let mut s = -10.0;
            let mut prev = run(s)?;
            while prev.beta_s < target {
                s -= 10.0;
                if s < -200.0 {
                    break;
                }
                prev = run(s)?;
            }
            let mut scanned = vec![prev.clone()];
            let mut step = 1.0;
            while step > 1e-6 {
                match run(prev.s + step) {
                    Ok(next) => {
                        let crossed = (next.beta_s - target) * (prev.beta_s - target) <= 0.0;
                        scanned.push(next.clone());
                        if crossed {
                            break;
                        }
                        prev = next;
                    }
                    Err(Error::BlowUp { .. } | Error::StepUnderflow { .. } | Error::MassNotConverged { .. }) => {
                        step *= 0.5
                    }
                    Err(e) => return Err(e),
                }
            }
            pick_bracket(scanned, target)
        }
    }
}

/// Weights decaying like `r⁻²` make low-`s` profiles converge too slowly to
/// integrate, which can leave the target below every scanned `β`. Walk down
/// from the lowest successful `s`, halving the step on failures, until some
/// `β(s)` falls under the target.
fn extend_below<F>(ok: &mut Vec<ShootResult>, target: f64, s_min: f64, step: f64, run: &F)
where
    F: Fn(f64) -> Result<ShootResult>,
{
    let Some(lowest) = ok.iter().min_by(|a, b| a.s.total_cmp(&b.s)).cloned() else {
        return;
    };
    if ok.iter().any(|r| r.beta_s <= target) || lowest.s <= s_min {
        return;
    }
    let (mut s, mut h) = (lowest.s, 0.5 * step);
    while h > 1e-3 {
        match run(s - h) {
            Ok(r) => {
                let below = r.beta_s <= target;
                s = r.s;
                ok.push(r);
                if below {
                    return;
                }
            }
            Err(_) => h *= 0.5,
        }
    }
}

fn pick_bracket(mut ok: Vec<ShootResult>, target: f64) -> Result<Bracket> {
    ok.sort_by(|a, b| a.s.total_cmp(&b.s));
    let betas = ok.iter().map(|r| r.beta_s);
    let beta_range = (
        betas.clone().fold(f64::INFINITY, f64::min),
        betas.fold(f64::NEG_INFINITY, f64::max),
    );
    let tol = ok[0].controls.root_tol;
    let flat = beta_range.1 - beta_range.0 < 10.0 * tol;
    let plateau = |r: &ShootResult| (r.beta_s - target).abs() < tol && !accept_hit(r, target, tol, flat);
    for pair in ok.windows(2) {
        let crosses = (pair[0].beta_s - target) * (pair[1].beta_s - target) < 0.0;
        // A crossing between two plateau points is rounding noise.
        if crosses && !(plateau(&pair[0]) && plateau(&pair[1])) {
            let (lo, hi) = (pair[0].clone(), pair[1].clone());
            return Ok(Bracket { lo, hi, flat, beta_range });
        }
    }
    if let Some(hit) = ok.iter().find(|r| accept_hit(r, target, tol, flat)) {
        return Ok(Bracket { lo: hit.clone(), hi: hit.clone(), flat, beta_range });
    }
    Err(Error::TargetOutsideBracket {
        target,
        beta_min: beta_range.0,
        beta_max: beta_range.1,
        s_lo: ok[0].s,
        s_hi: ok[ok.len() - 1].s,
    })
}

/// `P(r) = rψ'(½rψ' + β) + r^{n+2} V e^ψ` along a trajectory, with the
/// integral form `∫₀^r (ρV' + (n+2−β)V) ρ^{n+1} e^ψ dρ` as a cross-check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PokhozhaevProfile {
    pub values: Vec<f64>,
    pub integral_form: Vec<f64>,
    pub min: f64,
    pub at_r_max: f64,
    /// `max |P − integral form|` over the nodes.
    pub mismatch: f64,
}

fn pokhozhaev_from(
    nodes: &[f64],
    beta: f64,
    n: f64,
    v: &Potential,
    w: &[f64],
    signed_forcing: &[f64],
) -> Result<PokhozhaevProfile> {
    let values: Vec<f64> =
        w.iter().zip(signed_forcing).map(|(w, e)| w * (0.5 * w + beta) + e).collect();
    let ts: Vec<f64> = nodes.iter().map(|r| r.ln()).collect();
    let mut rate = Vec::with_capacity(nodes.len());
    for (&r, &e) in nodes.iter().zip(signed_forcing) {
        let q = if e == 0.0 { 0.0 } else { v.log_slope(r)?.unwrap_or(0.0) };
        rate.push(e * (q + n + 2.0 - beta));
    }
    let mut integral_form = cumulative_1d(&ts, &rate);
    // Origin cell: P(r₀) itself, which the series start makes O(r₀^{n+2}).
    let p0 = values[0];
    for x in integral_form.iter_mut() {
        *x += p0;
    }
    for (rj, jump) in v.jumps() {
        let k = nodes.partition_point(|&x| x <= rj);
        if k == 0 || k >= nodes.len() {
            continue;
        }
        // Jump of V times r^{n+2} e^ψ at rj, using the node at or left of rj.
        let left = k - 1;
        let value_left = v.value(nodes[left])?;
        if value_left > 0.0 {
            let contrib = signed_forcing[left] / value_left * jump * (rj / nodes[left]).powf(n + 2.0);
            for x in integral_form[k..].iter_mut() {
                *x += contrib;
            }
        }
    }
    let mismatch = values
        .iter()
        .zip(&integral_form)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(PokhozhaevProfile {
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        at_r_max: *values.last().unwrap_or(&0.0),
        values,
        integral_form,
        mismatch,
    })
}

/// Pokhozhaev function of a normalized solution.
#[allow(non_snake_case)]
pub fn pokhozhaev_P(sol: &NormalizedSolution, v: &Potential) -> Result<PokhozhaevProfile> {
    let nodes = sol.grid.nodes();
    let mut forcing = Vec::with_capacity(nodes.len());
    for (&r, &p) in nodes.iter().zip(&sol.psi) {
        let value = v.value(r)?;
        forcing.push(if value > 0.0 {
            4.0 * PI * sol.beta * (value.ln() + (sol.n + 2.0) * r.ln() + p).exp()
        } else {
            0.0
        });
    }
    pokhozhaev_from(nodes, sol.beta, sol.n, v, &sol.dpsi, &forcing)
}

/// Pokhozhaev function along a raw trajectory with `β = β(s)`.
pub fn pokhozhaev_shoot(res: &ShootResult) -> Result<PokhozhaevProfile> {
    let sigma = res.branch.sigma();
    let forcing: Vec<f64> = res.forcing.iter().map(|e| sigma * e).collect();
    pokhozhaev_from(res.grid.nodes(), res.beta_s, res.n, &res.potential, &res.dpsi, &forcing)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones() -> Potential {
        Potential::Constant { c: 1.0 }
    }

    #[test]
    fn bubble_mass_is_two_for_any_start() {
        let c = ShootControls::default();
        for s in [-2.0, 0.0, 3.0] {
            let r = integrate_ivp(&ones(), 0.0, s, &c).unwrap();
            assert!((r.beta_s - 2.0).abs() < 1e-6, "s={s}: beta={}", r.beta_s);
            assert!(r.beta_prime_s.abs() < 1e-5, "s={s}: beta'={}", r.beta_prime_s);
        }
    }

    #[test]
    fn trajectory_invariants() {
        let r = integrate_ivp(&Potential::gaussian(), 0.0, 1.0, &ShootControls::default()).unwrap();
        assert!(r.psi.windows(2).all(|w| w[1] <= w[0]));
        assert!((r.phi[0] - 1.0).abs() < 1e-8);
        assert!(r.phi_log_bound.is_finite() && r.rphi_sup.is_finite());
        assert!(r.tail_mass / (2.0 * r.beta_s) < 1e-8);
        for (w, m) in r.dpsi.iter().zip(&r.mass) {
            assert!((w + m).abs() < 1e-12 * (1.0 + m));
        }
    }

    #[test]
    fn negative_branch_grows() {
        let c = ShootControls { branch: Branch::Negative, ..Default::default() };
        let r = integrate_ivp(&Potential::gaussian(), 0.0, 0.0, &c).unwrap();
        assert!(r.beta_s < 0.0);
        assert!(r.psi.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn empty_mass_map_rejected() {
        assert!(mass_map(&ones(), 0.0, &[], &ShootControls::default()).is_err());
    }

    #[test]
    fn gaussian_root_and_overshoot() {
        let g = Potential::gaussian();
        let c = ShootControls::default();
        let root = solve_for_beta(&g, 0.0, 1.0, None, &c).unwrap();
        assert!((root.shoot.beta_s - 1.0).abs() < 1e-8);
        assert!((root.solution.total_mass() - 1.0).abs() < 1e-6);
        assert!(matches!(
            solve_for_beta(&g, 0.0, 2.5, None, &c),
            Err(Error::TargetOutsideBracket { .. })
        ));
    }

    #[test]
    fn zero_weight_has_zero_pokhozhaev() {
        let c = ShootControls { r_max: Some(10.0), n_nodes: 64, ..Default::default() };
        let r = integrate_ivp(&Potential::Constant { c: 0.0 }, 0.0, 0.0, &c).unwrap();
        let p = pokhozhaev_shoot(&r).unwrap();
        assert!(p.values.iter().all(|x| *x == 0.0));
    }
}
