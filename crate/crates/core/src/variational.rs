//! Existence backend: minimization of the gauged Moser energy
//!
//! `E[φ] = ½∫|∇φ|² − 4πβ ln ∫V₁e^φ − ∫fφ`,  `V₁ = rⁿ V e^{−ψ₀}`,
//!
//! over radial piecewise-linear profiles on `D(0,R)` with `φ(R) = 0`.
//! The mesh is `{0} ∪ grid nodes`; the exponential integral is mass-lumped,
//! so the gradient is exactly the residual of the discrete Euler–Lagrange
//! equation `Kφ = 4πβ c∘e^φ / Z + F`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{cumulative_radial, make_grid, Grading, Grid, OriginModel};
use crate::lbfgs::{self, LbfgsOptions, Stop};
use crate::potential::Potential;
use crate::solution::{NormalizedSolution, Tolerances};

const GL_X: [f64; 5] = [0.0, -0.538_469_310_105_683_1, 0.538_469_310_105_683_1, -0.906_179_845_938_664, 0.906_179_845_938_664];
const GL_W: [f64; 5] = [0.568_888_888_888_888_9, 0.478_628_670_499_366_5, 0.478_628_670_499_366_5, 0.236_926_885_056_189_1, 0.236_926_885_056_189_1];

/// `∫_a^b g`, 5-point Gauss–Legendre.
fn gauss<G: FnMut(f64) -> Result<f64>>(a: f64, b: f64, mut g: G) -> Result<f64> {
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mut s = 0.0;
    for (x, w) in GL_X.iter().zip(GL_W) {
        s += w * g(m + h * x)?;
    }
    Ok(s * h)
}

/// `∫_0^b g` through `r = b u²`, which tames power singularities at 0.
fn gauss_origin<G: FnMut(f64) -> Result<f64>>(b: f64, mut g: G) -> Result<f64> {
    gauss(0.0, 1.0, |u| Ok(g(b * u * u)? * 2.0 * b * u))
}

/// `∫_a^b g`, split at the given breakpoints.
fn piecewise<G: FnMut(f64) -> Result<f64>>(a: f64, b: f64, breaks: &[f64], mut g: G) -> Result<f64> {
    let mut cuts = vec![a];
    cuts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    cuts.push(b);
    let mut s = 0.0;
    for w in cuts.windows(2) {
        s += if w[0] == 0.0 { gauss_origin(w[1], &mut g)? } else { gauss(w[0], w[1], &mut g)? };
    }
    Ok(s)
}

/// Fixed radial gauge `ψ₀` with `ψ₀ = 2β ln r` for `r ≥ 1`, and `f = −Δψ₀`.
///
/// Inside the unit disk `ψ₀ = β(2r² − r⁴/2 − 3/2)`, which matches value,
/// slope and curvature at `r = 1`; then `f = −8β(1 − r²)` there.
#[derive(Debug, Clone, PartialEq)]
pub struct Gauge {
    pub beta: f64,
    pub r_smooth: f64,
    grid: Grid,
    /// `{0} ∪ grid nodes`.
    pub mesh: Vec<f64>,
    pub psi0: Vec<f64>,
    pub f: Vec<f64>,
    /// `∫f`, equal to `−4πβ`.
    pub f_total: f64,
}

impl Gauge {
    pub fn psi0_at(&self, r: f64) -> f64 {
        let b = self.beta;
        if r < 1.0 {
            let r2 = r * r;
            b * (2.0 * r2 - 0.5 * r2 * r2 - 1.5)
        } else {
            2.0 * b * r.ln()
        }
    }

    /// `r ψ₀'(r)`.
    pub fn r_dpsi0_at(&self, r: f64) -> f64 {
        let b = self.beta;
        if r < 1.0 {
            let r2 = r * r;
            b * (4.0 * r2 - 2.0 * r2 * r2)
        } else {
            2.0 * b
        }
    }

    pub fn f_at(&self, r: f64) -> f64 {
        if r < 1.0 {
            -8.0 * self.beta * (1.0 - r * r)
        } else {
            0.0
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn r_max(&self) -> f64 {
        self.grid.r_max()
    }
}

/// Gauge sampled on `{0} ∪ grid`. The grid must reach beyond `r = 1` so that
/// the disk contains the support of `f`.
pub fn build_gauge(beta: f64, grid: &Grid) -> Result<Gauge> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidArgument(format!("the variational backend needs beta > 0, got {beta}")));
    }
    if !(grid.r_max() > 1.0) {
        return Err(Error::InvalidArgument(format!("disk radius must exceed 1, got {}", grid.r_max())));
    }
    let mut mesh = vec![0.0];
    mesh.extend_from_slice(grid.nodes());
    let mut g = Gauge { beta, r_smooth: 1.0, grid: grid.clone(), mesh, psi0: vec![], f: vec![], f_total: 0.0 };
    g.psi0 = g.mesh.iter().map(|&r| g.psi0_at(r)).collect();
    g.f = g.mesh.iter().map(|&r| g.f_at(r)).collect();
    g.f_total = gauss(0.0, 1.0, |r| Ok(2.0 * PI * g.f_at(r) * r))?;
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationalControls {
    pub max_iter: usize,
    /// Threshold on `sqrt(gᵀK⁻¹g)`.
    pub grad_tol: f64,
    pub memory: usize,
    /// Energy drop that, with a non-shrinking gradient, is read as `inf E = −∞`.
    pub unbounded_drop: f64,
    /// `δ` of the coercivity certificate; `None` picks `min(1, gap/2)`.
    pub delta: Option<f64>,
}

impl Default for VariationalControls {
    fn default() -> Self {
        VariationalControls { max_iter: 4000, grad_tol: 1e-7, memory: 12, unbounded_drop: 1e6, delta: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinimizeStatus {
    /// `grad_norm < grad_tol`, or the line search hit energy roundoff
    /// within a factor 10 of it.
    Converged,
    /// A discrete minimizer was found but `β` is at or beyond the origin
    /// threshold: no coercivity, and its scale drifts under mesh refinement.
    Degenerate,
    MaxIter,
    /// The line search could not lower the energy before reaching `grad_tol`.
    Stalled,
    /// Most of the mass sits in the innermost cells: the minimizing sequence
    /// concentrates and the problem likely has no minimizer.
    Concentrated,
}

/// Terms of the lower bound `E[φ] ≥ (ε/2)∫|∇φ|² + t1 + t2` valid for radial
/// `φ` with `φ(R) = 0`, where `ε = δ/(2(β+δ))`,
/// `t1 = −4πβ ln ∫V₁⁺ (R/r)^{β+δ}` and `t2 = −(∫|f| √ln(R/r))² / (4πε)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coercivity {
    pub delta: f64,
    pub epsilon: f64,
    pub log_integral_v: f64,
    pub log_integral_f: f64,
    pub t1: f64,
    pub t2: f64,
    /// `energy − (ε/2)·dirichlet − t1 − t2`; non-negative when the bound holds.
    pub margin: f64,
}

impl Coercivity {
    pub fn holds(&self) -> bool {
        self.margin >= 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeResult {
    pub beta: f64,
    pub n: f64,
    /// Values on `{0} ∪ grid nodes`; the last one is the boundary zero.
    pub phi: Vec<f64>,
    pub energy: f64,
    pub energy_trace: Vec<f64>,
    pub grad_norm: f64,
    pub log_mass: f64,
    pub dirichlet: f64,
    pub iterations: usize,
    pub status: MinimizeStatus,
    /// Lumped mass fraction on `r < 1e-4 R`.
    pub inner_mass: f64,
    pub certificate: Option<Coercivity>,
    pub warnings: Vec<String>,
}

impl MinimizeResult {
    pub fn converged(&self) -> bool {
        self.status == MinimizeStatus::Converged
    }
}

/// Assembled discrete problem for a weight `rⁿ V`.
#[derive(Debug, Clone)]
pub struct VariationalProblem {
    gauge: Gauge,
    potential: Potential,
    n: f64,
    /// Element stiffness `2π r_mid / h`.
    stiff: Vec<f64>,
    /// Lumped `cᵢ = ∫ Nᵢ V₁`.
    lumped: Vec<f64>,
    /// `Fᵢ = ∫ f Nᵢ`.
    load: Vec<f64>,
}

impl VariationalProblem {
    pub fn new(gauge: Gauge, potential: Potential, n: f64) -> Result<Self> {
        let x = &gauge.mesh;
        let ne = x.len() - 1;
        let mut breaks: Vec<f64> = potential.jumps().into_iter().map(|(r, _)| r).collect();
        breaks.push(1.0);
        let v1 = |r: f64| -> Result<f64> { Ok(r.powf(n) * potential.value(r)? * (-gauge.psi0_at(r)).exp()) };
        let mut stiff = Vec::with_capacity(ne);
        let mut lumped = vec![0.0; x.len()];
        let mut load = vec![0.0; x.len()];
        for e in 0..ne {
            let (a, b) = (x[e], x[e + 1]);
            let h = b - a;
            stiff.push(PI * (a + b) / h);
            let left = |r: f64| (b - r) / h;
            let right = |r: f64| (r - a) / h;
            lumped[e] += piecewise(a, b, &breaks, |r| Ok(2.0 * PI * r * left(r) * v1(r)?))?;
            lumped[e + 1] += piecewise(a, b, &breaks, |r| Ok(2.0 * PI * r * right(r) * v1(r)?))?;
            if a < 1.0 {
                let top = b.min(1.0);
                load[e] += piecewise(a, top, &[], |r| Ok(2.0 * PI * r * left(r) * gauge.f_at(r)))?;
                load[e + 1] += piecewise(a, top, &[], |r| Ok(2.0 * PI * r * right(r) * gauge.f_at(r)))?;
            }
        }
        if let Some(i) = lumped.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFiniteSample { index: i, r: x[i] });
        }
        Ok(VariationalProblem { gauge, potential, n, stiff, lumped, load })
    }

    pub fn gauge(&self) -> &Gauge {
        &self.gauge
    }

    pub fn mesh(&self) -> &[f64] {
        &self.gauge.mesh
    }

    fn stiffness_times(&self, phi: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; phi.len()];
        for (e, k) in self.stiff.iter().enumerate() {
            let d = k * (phi[e] - phi[e + 1]);
            out[e] += d;
            out[e + 1] -= d;
        }
        out
    }

    /// `ln Σ cᵢ e^{φᵢ}`.
    fn log_mass(&self, phi: &[f64]) -> Result<f64> {
        let top = phi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = self.lumped.iter().zip(phi).map(|(c, p)| c * (p - top).exp()).sum();
        if !(z > 0.0) || !top.is_finite() {
            return Err(Error::OutsideAdmissibleSet(format!("∫V₁e^φ = {z:e} is not positive")));
        }
        Ok(top + z.ln())
    }

    /// Energy and its gradient with respect to every mesh value, the boundary
    /// one included (the Dirichlet row is not dropped here).
    pub fn energy(&self, phi: &[f64]) -> Result<(f64, Vec<f64>)> {
        if phi.len() != self.gauge.mesh.len() {
            return Err(Error::InvalidArgument(format!(
                "profile has {} values, mesh has {}",
                phi.len(),
                self.gauge.mesh.len()
            )));
        }
        let kphi = self.stiffness_times(phi);
        let lz = self.log_mass(phi)?;
        let fb = 4.0 * PI * self.gauge.beta;
        let mut value = -fb * lz;
        let mut grad = Vec::with_capacity(phi.len());
        for i in 0..phi.len() {
            value += 0.5 * phi[i] * kphi[i] - self.load[i] * phi[i];
            grad.push(kphi[i] - fb * self.lumped[i] * (phi[i] - lz).exp() - self.load[i]);
        }
        Ok((value, grad))
    }

    /// `∫|∇φ|²`.
    pub fn dirichlet(&self, phi: &[f64]) -> f64 {
        self.stiff.iter().enumerate().map(|(e, k)| k * (phi[e + 1] - phi[e]).powi(2)).sum()
    }

    /// Solves the Dirichlet stiffness system (boundary row removed) by the
    /// Thomas algorithm.
    fn stiffness_solve(&self, rhs: &[f64]) -> Vec<f64> {
        let m = rhs.len();
        let diag = |i: usize| self.stiff[i] + if i > 0 { self.stiff[i - 1] } else { 0.0 };
        let mut c = vec![0.0; m];
        let mut d = vec![0.0; m];
        let mut denom = diag(0);
        c[0] = -self.stiff[0] / denom;
        d[0] = rhs[0] / denom;
        for i in 1..m {
            let sub = -self.stiff[i - 1];
            denom = diag(i) - sub * c[i - 1];
            c[i] = if i + 1 < m { -self.stiff[i] / denom } else { 0.0 };
            d[i] = (rhs[i] - sub * d[i - 1]) / denom;
        }
        for i in (0..m - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        d
    }

    fn default_delta(&self) -> Option<f64> {
        let k = self.potential.origin_exponent(self.n)?;
        let gap = k + 2.0 - self.gauge.beta;
        (gap > 0.0).then(|| (0.5 * gap).min(1.0))
    }

    /// Coercivity terms evaluated at `phi`.
    pub fn certificate(&self, phi: &[f64], delta: f64) -> Result<Coercivity> {
        let beta = self.gauge.beta;
        let r_big = self.gauge.r_max();
        let p = beta + delta;
        let x = &self.gauge.mesh;
        let k = self.potential.origin_exponent(self.n).ok_or_else(|| {
            Error::InvalidArgument("coercivity certificate needs a power-like weight at the origin".into())
        })?;
        if !(k + 2.0 - p > 0.0) {
            return Err(Error::InvalidArgument(format!("delta = {delta} too large for the origin behaviour")));
        }
        let mut breaks: Vec<f64> = self.potential.jumps().into_iter().map(|(r, _)| r).collect();
        breaks.push(1.0);
        let v1p = |r: f64| -> Result<f64> {
            Ok((r.powf(self.n) * self.potential.value(r)?).max(0.0) * (-self.gauge.psi0_at(r)).exp())
        };
        // Origin cell with the local model V₁ ∝ r^k.
        let r0 = x[1];
        let mut i1 = 2.0 * PI * v1p(r0)? * (r_big / r0).powf(p) * r0 * r0 / (k + 2.0 - p);
        for e in 1..x.len() - 1 {
            i1 += piecewise(x[e], x[e + 1], &breaks, |r| Ok(2.0 * PI * r * v1p(r)? * (r_big / r).powf(p)))?;
        }
        let i2 = piecewise(0.0, 1.0, &[], |r| Ok(2.0 * PI * r * self.gauge.f_at(r).abs() * (r_big / r).ln().sqrt()))?;
        let epsilon = delta / (2.0 * p);
        let t1 = -4.0 * PI * beta * i1.ln();
        let t2 = -i2 * i2 / (4.0 * PI * epsilon);
        let (energy, _) = self.energy(phi)?;
        let margin = energy - 0.5 * epsilon * self.dirichlet(phi) - t1 - t2;
        Ok(Coercivity { delta, epsilon, log_integral_v: i1.ln(), log_integral_f: i2, t1, t2, margin })
    }

    /// Preconditioned L-BFGS from `init` (zero when `None`).
    pub fn minimize(&self, init: Option<&[f64]>, controls: &VariationalControls) -> Result<MinimizeResult> {
        let beta = self.gauge.beta;
        let m = self.gauge.mesh.len();
        let mut warnings = Vec::new();
        let delta = controls.delta.or_else(|| self.default_delta());
        match delta {
            Some(d) => {
                let report = self.potential.check_weighted_conditions(self.n, beta, d)?;
                if !report.origin_integral.pass {
                    warnings.push(format!("origin integrability fails for beta = {beta}, delta = {d}"));
                }
                if report.annulus.is_none() {
                    warnings.push("no positivity annulus found".into());
                }
                if report.approximate() {
                    warnings.push("condition checks on tabulated data are approximate".into());
                }
            }
            None => warnings.push(format!(
                "beta = {beta} is not below the origin threshold; no coercivity certificate"
            )),
        }
        let x0: Vec<f64> = match init {
            Some(p) if p.len() == m => p[..m - 1].to_vec(),
            Some(p) => {
                return Err(Error::InvalidArgument(format!("initial profile has {} values, mesh has {m}", p.len())))
            }
            None => vec![0.0; m - 1],
        };
        let full = |x: &[f64]| {
            let mut v = x.to_vec();
            v.push(0.0);
            v
        };
        let objective = |x: &[f64]| -> Result<(f64, Vec<f64>)> {
            let (val, mut g) = self.energy(&full(x))?;
            g.pop();
            Ok((val, g))
        };
        let opts = LbfgsOptions {
            memory: controls.memory,
            max_iter: controls.max_iter,
            grad_tol: controls.grad_tol,
            ..LbfgsOptions::default()
        };
        let mut first: Option<(f64, f64)> = None;
        let monitor = |_: usize, value: f64, gnorm: f64| -> Result<bool> {
            let (start, gstart) = *first.get_or_insert((value, gnorm));
            let drop = start - value;
            if drop > controls.unbounded_drop && gnorm >= 0.5 * gstart {
                return Err(Error::UnboundedEnergy { drop });
            }
            Ok(true)
        };
        let out = lbfgs::minimize(objective, |g| self.stiffness_solve(g), x0, &opts, monitor)?;
        let phi = full(&out.x);
        let log_mass = self.log_mass(&phi)?;
        let r_inner = 1e-4 * self.gauge.r_max();
        let inner_mass: f64 = self
            .gauge
            .mesh
            .iter()
            .zip(&self.lumped)
            .zip(&phi)
            .filter(|((r, _), _)| **r < r_inner)
            .map(|((_, c), p)| c * (p - log_mass).exp())
            .sum();
        let status = if inner_mass > 0.5 {
            MinimizeStatus::Concentrated
        } else {
            match out.stop {
                Stop::Converged => MinimizeStatus::Converged,
                Stop::LineSearchStalled if out.grad_norm < 10.0 * controls.grad_tol => MinimizeStatus::Converged,
                Stop::MaxIter | Stop::Aborted => MinimizeStatus::MaxIter,
                Stop::LineSearchStalled => MinimizeStatus::Stalled,
            }
        };
        let status = match status {
            MinimizeStatus::Converged if self.default_delta().is_none() => MinimizeStatus::Degenerate,
            other => other,
        };
        let certificate = match delta {
            Some(d) if status == MinimizeStatus::Converged => self.certificate(&phi, d).ok(),
            _ => None,
        };
        Ok(MinimizeResult {
            beta,
            n: self.n,
            dirichlet: self.dirichlet(&phi),
            energy: out.value,
            phi,
            energy_trace: out.trace,
            grad_norm: out.grad_norm,
            log_mass,
            iterations: out.iterations,
            status,
            inner_mass,
            certificate,
            warnings,
        })
    }

    /// `ψ = φ − ln∫V₁e^φ − ψ₀` on the grid nodes, renormalized to unit
    /// quadrature mass on the disk.
    pub fn to_solution(&self, m: &MinimizeResult) -> Result<NormalizedSolution> {
        let x = &self.gauge.mesh;
        if m.phi.len() != x.len() {
            return Err(Error::Incompatible("minimizer does not live on this mesh".into()));
        }
        let grid = self.gauge.grid.clone();
        let log_mass = self.log_mass(&m.phi)?;
        // Element fluxes r_mid φ'; interior nodes average the two neighbours.
        // At R the discrete Gauss law gives zero flux, since K has zero row sums.
        let flux: Vec<f64> = (0..x.len() - 1)
            .map(|e| 0.5 * (x[e] + x[e + 1]) * (m.phi[e + 1] - m.phi[e]) / (x[e + 1] - x[e]))
            .collect();
        let nodes = grid.nodes();
        let mut psi = Vec::with_capacity(nodes.len());
        let mut dpsi = Vec::with_capacity(nodes.len());
        for (j, &r) in nodes.iter().enumerate() {
            let i = j + 1;
            psi.push(m.phi[i] - log_mass - self.gauge.psi0_at(r));
            let r_dphi = if i + 1 < x.len() { 0.5 * (flux[i - 1] + flux[i]) } else { 0.0 };
            dpsi.push(r_dphi - self.gauge.r_dpsi0_at(r));
        }
        let density: Vec<f64> = nodes
            .iter()
            .zip(&psi)
            .map(|(&r, p)| Ok(r.powf(self.n) * self.potential.value(r)? * p.exp()))
            .collect::<Result<_>>()?;
        let origin = match self.potential.origin_exponent(self.n) {
            Some(k) => OriginModel::Power(k),
            None => OriginModel::Skip,
        };
        let mut mass = cumulative_radial(&grid, &density, origin)?;
        let total = *mass.last().unwrap();
        if !(total > 0.0) {
            return Err(Error::OutsideAdmissibleSet(format!("quadrature mass {total:e} is not positive")));
        }
        let shift = total.ln();
        psi.iter_mut().for_each(|p| *p -= shift);
        mass.iter_mut().for_each(|v| *v /= total);
        Ok(NormalizedSolution {
            beta: self.gauge.beta,
            n: self.n,
            potential: self.potential.clone(),
            grid,
            psi,
            dpsi,
            mass,
            tail_mass: 0.0,
            tolerances: Tolerances { abs_tol: 0.0, rel_tol: 0.0, root_tol: m.grad_norm },
            method: "variational".into(),
        })
    }
}

/// Energy for the unweighted problem (`n = 0`).
pub fn energy(gauge: &Gauge, v: &Potential, phi: &[f64]) -> Result<(f64, Vec<f64>)> {
    VariationalProblem::new(gauge.clone(), v.clone(), 0.0)?.energy(phi)
}

/// Minimizes the unweighted problem on the gauge's disk.
pub fn minimize(
    gauge: &Gauge,
    v: &Potential,
    init: Option<&[f64]>,
    controls: &VariationalControls,
) -> Result<MinimizeResult> {
    VariationalProblem::new(gauge.clone(), v.clone(), 0.0)?.minimize(init, controls)
}

pub fn to_solution(m: &MinimizeResult, gauge: &Gauge, v: &Potential) -> Result<NormalizedSolution> {
    VariationalProblem::new(gauge.clone(), v.clone(), m.n)?.to_solution(m)
}

/// Builds the disk mesh, minimizes and assembles the normalized solution.
pub fn solve_variational(
    v: &Potential,
    n: f64,
    beta: f64,
    r_max: f64,
    n_nodes: usize,
    controls: &VariationalControls,
) -> Result<(NormalizedSolution, MinimizeResult)> {
    let grid = make_grid(r_max, n_nodes, Grading::Log)?;
    let problem = VariationalProblem::new(build_gauge(beta, &grid)?, v.clone(), n)?;
    let m = problem.minimize(None, controls)?;
    let sol = problem.to_solution(&m)?;
    Ok((sol, m))
}

#[derive(Debug, Clone)]
pub struct RadiusRefinement {
    pub r_max: f64,
    /// `|ψ(0)|` change over the last doubling.
    pub psi0_change: f64,
    pub accepted: bool,
    pub solution: NormalizedSolution,
    pub result: MinimizeResult,
}

/// Doubles `R` from `r_start` until `ψ` at the first node moves by less
/// than `tol`, at most `max_doublings` times.
#[allow(clippy::too_many_arguments)]
pub fn refine_radius(
    v: &Potential,
    n: f64,
    beta: f64,
    r_start: f64,
    n_nodes: usize,
    tol: f64,
    max_doublings: usize,
    controls: &VariationalControls,
) -> Result<RadiusRefinement> {
    let mut r = r_start;
    let (mut sol, mut res) = solve_variational(v, n, beta, r, n_nodes, controls)?;
    let mut change = f64::INFINITY;
    for _ in 0..max_doublings {
        let (next, next_res) = solve_variational(v, n, beta, 2.0 * r, n_nodes, controls)?;
        change = (next.psi_at(0.0) - sol.psi_at(0.0)).abs();
        r *= 2.0;
        sol = next;
        res = next_res;
        if change < tol {
            break;
        }
    }
    Ok(RadiusRefinement { r_max: r, psi0_change: change, accepted: change < tol, solution: sol, result: res })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shooting::{solve_for_beta, ShootControls};
    use rand::{Rng, SeedableRng};

    fn disk(r: f64, nodes: usize) -> Grid {
        make_grid(r, nodes, Grading::Log).unwrap()
    }

    #[test]
    fn gauge_matches_log_outside_unit_disk() {
        let g = build_gauge(1.0, &disk(4.0, 64)).unwrap();
        assert_eq!(g.psi0_at(1.0), 0.0);
        assert_eq!(g.r_dpsi0_at(1.0), 2.0);
        assert!((g.f_total + 4.0 * PI).abs() < 1e-8);
        let g2 = build_gauge(2.0, &disk(4.0, 64)).unwrap();
        assert!((g2.psi0_at(std::f64::consts::E) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn gauge_is_c1_across_the_seam() {
        let g = build_gauge(1.7, &disk(4.0, 64)).unwrap();
        let (below, above) = (1.0 - 1e-12, 1.0);
        assert!((g.psi0_at(below) - g.psi0_at(above)).abs() < 1e-8);
        assert!((g.r_dpsi0_at(below) - g.r_dpsi0_at(above)).abs() < 1e-8);
        assert!(g.f.iter().zip(&g.mesh).all(|(f, &r)| r < 1.0 || *f == 0.0));
    }

    #[test]
    fn gauge_rejects_bad_input() {
        assert!(build_gauge(0.0, &disk(4.0, 64)).is_err());
        assert!(build_gauge(-1.0, &disk(4.0, 64)).is_err());
        assert!(build_gauge(1.0, &disk(0.9, 64)).is_err());
    }

    #[test]
    fn energy_at_zero_is_log_of_gauge_integral() {
        let gauge = build_gauge(1.0, &disk(2.0, 400)).unwrap();
        let phi = vec![0.0; gauge.mesh.len()];
        let (value, _) = energy(&gauge, &Potential::Constant { c: 1.0 }, &phi).unwrap();
        // Composite Simpson on a uniform mesh, split at r = 1.
        let simpson = |a: f64, b: f64| {
            let m = 2000;
            let h = (b - a) / m as f64;
            let g = |r: f64| 2.0 * PI * r * (-gauge.psi0_at(r)).exp();
            (0..=m)
                .map(|i| {
                    let w = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                    w * g(a + i as f64 * h)
                })
                .sum::<f64>()
                * h
                / 3.0
        };
        let expected = -4.0 * PI * (simpson(0.0, 1.0) + simpson(1.0, 2.0)).ln();
        assert!((value - expected).abs() < 1e-9, "{value} vs {expected}");
    }

    fn fd_check(problem: &VariationalProblem, phi: &[f64], seed: u64) {
        let (_, grad) = problem.energy(phi).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let h = 1e-5;
        for _ in 0..5 {
            let d: Vec<f64> = (0..phi.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let shifted = |t: f64| -> Vec<f64> { phi.iter().zip(&d).map(|(p, di)| p + t * di).collect() };
            let fd = (problem.energy(&shifted(h)).unwrap().0 - problem.energy(&shifted(-h)).unwrap().0) / (2.0 * h);
            let an: f64 = grad.iter().zip(&d).map(|(g, di)| g * di).sum();
            assert!((fd - an).abs() <= 1e-5 * an.abs().max(1.0), "fd {fd} vs {an}");
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let gauge = build_gauge(1.0, &disk(12.0, 256)).unwrap();
        let problem = VariationalProblem::new(gauge, Potential::gaussian(), 0.0).unwrap();
        let m = problem.mesh().len();
        fd_check(&problem, &vec![0.0; m], 1);
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let phi: Vec<f64> = (0..m).map(|_| rng.gen_range(-0.5..0.5)).collect();
        fd_check(&problem, &phi, 2);
    }

    #[test]
    fn energy_is_translation_invariant() {
        let gauge = build_gauge(1.3, &disk(6.0, 200)).unwrap();
        let problem = VariationalProblem::new(gauge, Potential::gaussian(), 0.0).unwrap();
        let phi: Vec<f64> = problem.mesh().iter().map(|r| (-r).exp()).collect();
        let e0 = problem.energy(&phi).unwrap().0;
        for c in [-3.0, 0.5, 10.0] {
            let moved: Vec<f64> = phi.iter().map(|p| p + c).collect();
            assert!((problem.energy(&moved).unwrap().0 - e0).abs() < 1e-9);
        }
    }

    #[test]
    fn negative_weight_is_outside_admissible_set() {
        let gauge = build_gauge(1.0, &disk(4.0, 64)).unwrap();
        let phi = vec![0.0; gauge.mesh.len()];
        let err = energy(&gauge, &Potential::Constant { c: -1.0 }, &phi).unwrap_err();
        assert!(matches!(err, Error::OutsideAdmissibleSet(_)));
    }

    #[test]
    fn gaussian_matches_shooting() {
        let (sol, m) = solve_variational(&Potential::gaussian(), 0.0, 1.0, 12.0, 1024, &Default::default()).unwrap();
        assert!(m.converged());
        assert!(m.energy_trace.windows(2).all(|w| w[1] <= w[0]));
        let cert = m.certificate.unwrap();
        assert!(cert.holds(), "{cert:?}");
        assert!((cert.epsilon - 0.5 / 3.0).abs() < 1e-15);
        let shot = solve_for_beta(&Potential::gaussian(), 0.0, 1.0, None, &ShootControls::default()).unwrap();
        let sup = sol.nodes().iter().map(|&r| (sol.psi_at(r) - shot.solution.psi_at(r)).abs()).fold(0.0, f64::max);
        assert!(sup < 1e-3, "sup {sup}");
        let s = sol.summary();
        assert!(s.mass_residual < 1e-4 && s.flux_residual < 1e-3, "{s:?}");
    }

    #[test]
    fn borderline_gaussian_is_flagged() {
        let (_, m) = solve_variational(&Potential::gaussian(), 0.0, 2.0, 12.0, 1024, &Default::default()).unwrap();
        assert!(matches!(m.status, MinimizeStatus::Concentrated | MinimizeStatus::Degenerate));
        assert!(m.certificate.is_none());
        let (_, m) = solve_variational(&Potential::gaussian(), 0.0, 2.5, 12.0, 512, &Default::default()).unwrap();
        assert_eq!(m.status, MinimizeStatus::Concentrated);
    }

    #[test]
    fn constant_weight_trace_strictly_decreases() {
        let (sol, m) =
            solve_variational(&Potential::Constant { c: 1.0 }, 0.0, 1.0, 8.0, 512, &Default::default()).unwrap();
        assert!(m.converged());
        assert!(m.energy_trace.len() > 2);
        assert!(m.energy_trace.windows(2).all(|w| w[1] < w[0]));
        let last = sol.len() - 1;
        assert!((sol.dpsi[last] + 2.0 * sol.beta * sol.mass[last]).abs() < 1e-3);
    }

    #[test]
    fn weighted_problem_reproduces_a_bubble() {
        let (sol, m) =
            solve_variational(&Potential::Constant { c: 1.0 }, 2.0, 4.0, 30.0, 1024, &Default::default()).unwrap();
        // β = n + 2 is the conformal threshold: any bubble scale is admissible.
        assert_eq!(m.status, MinimizeStatus::Degenerate);
        let lambda = crate::oracles::bubble_lambda_for_origin_value(2.0, sol.psi[0]);
        let bubble = crate::oracles::conformal_bubble(2.0, lambda, &sol.grid).unwrap();
        let sup = sol.psi.iter().zip(&bubble.psi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(sup < 5e-3, "sup {sup}");
    }

    #[test]
    fn radius_refinement_settles() {
        let r = refine_radius(&Potential::gaussian(), 0.0, 1.0, 4.0, 512, 1e-4, 4, &Default::default()).unwrap();
        assert!(r.accepted && r.r_max <= 16.0, "{} {}", r.r_max, r.psi0_change);
    }
}
