//! Limited-memory BFGS with a user-supplied initial inverse Hessian and
//! Armijo backtracking.

use std::collections::VecDeque;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsOptions {
    pub memory: usize,
    pub max_iter: usize,
    /// Stop once `sqrt(gᵀ H₀ g)` falls below this.
    pub grad_tol: f64,
    pub armijo: f64,
    pub max_backtracks: usize,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        LbfgsOptions { memory: 12, max_iter: 2000, grad_tol: 1e-9, armijo: 1e-4, max_backtracks: 60 }
    }
}

/// Why the iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stop {
    Converged,
    MaxIter,
    /// No step along the search direction lowers the objective any more.
    LineSearchStalled,
    /// The caller's monitor asked to stop.
    Aborted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LbfgsOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad: Vec<f64>,
    /// `sqrt(gᵀ H₀ g)` at `x`.
    pub grad_norm: f64,
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub stop: Stop,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes `f` from `x0`. `f` returns `(value, gradient)` and may fail
/// (the failure is treated as an infinite value during line search, and
/// propagated at the starting point). `precond` applies `H₀ ≈ ∇²f⁻¹`.
/// `monitor(iteration, value, grad_norm)` returns `false` to stop early.
pub fn minimize<F, P, M>(
    mut f: F,
    precond: P,
    x0: Vec<f64>,
    opts: &LbfgsOptions,
    mut monitor: M,
) -> Result<LbfgsOutcome>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
    P: Fn(&[f64]) -> Vec<f64>,
    M: FnMut(usize, f64, f64) -> Result<bool>,
{
    let mut x = x0;
    let (mut fx, mut g) = f(&x)?;
    let mut hg = precond(&g);
    let mut gnorm = dot(&g, &hg).max(0.0).sqrt();
    let mut trace = vec![fx];
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut gamma = 1.0;
    let mut stop = Stop::MaxIter;
    let mut iterations = 0;
    for it in 0..opts.max_iter {
        if gnorm < opts.grad_tol {
            stop = Stop::Converged;
            break;
        }
        if !monitor(it, fx, gnorm)? {
            stop = Stop::Aborted;
            break;
        }
        // Two-loop recursion.
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(pairs.len());
        for (s, y, rho) in pairs.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        let mut r: Vec<f64> = precond(&q).into_iter().map(|v| gamma * v).collect();
        for ((s, y, rho), a) in pairs.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &r);
            r.iter_mut().zip(s).for_each(|(ri, si)| *ri += (a - b) * si);
        }
        let mut d: Vec<f64> = r.into_iter().map(|v| -v).collect();
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            // Not a descent direction: restart from the preconditioned gradient.
            pairs.clear();
            gamma = 1.0;
            d = hg.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..opts.max_backtracks {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + step * di).collect();
            if let Ok((ft, gt)) = f(&trial) {
                if ft.is_finite() && ft <= fx + opts.armijo * step * slope && ft < fx {
                    accepted = Some((trial, ft, gt));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((x_new, f_new, g_new)) = accepted else {
            stop = Stop::LineSearchStalled;
            break;
        };
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-14 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            let hy = precond(&y);
            gamma = sy / dot(&y, &hy);
            pairs.push_back((s, y, 1.0 / sy));
            if pairs.len() > opts.memory {
                pairs.pop_front();
            }
        }
        x = x_new;
        fx = f_new;
        g = g_new;
        hg = precond(&g);
        gnorm = dot(&g, &hg).max(0.0).sqrt();
        trace.push(fx);
        iterations = it + 1;
    }
    if stop == Stop::MaxIter && gnorm < opts.grad_tol {
        stop = Stop::Converged;
    }
    Ok(LbfgsOutcome { x, value: fx, grad: g, grad_norm: gnorm, trace, iterations, stop })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| -> Result<(f64, Vec<f64>)> {
            let (a, b) = (x[0], x[1]);
            let v = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            Ok((v, vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)]))
        };
        let out = minimize(f, |g| g.to_vec(), vec![-1.2, 1.0], &LbfgsOptions::default(), |_, _, _| Ok(true))
            .unwrap();
        assert_eq!(out.stop, Stop::Converged);
        assert!((out.x[0] - 1.0).abs() < 1e-6 && (out.x[1] - 1.0).abs() < 1e-6);
        assert!(out.trace.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn preconditioned_quadratic_converges_fast() {
        // f = ½ xᵀ A x − bᵀx with A diagonal; exact preconditioner.
        let a: Vec<f64> = (1..=50).map(|i| i as f64 * 100.0).collect();
        let f = |x: &[f64]| -> Result<(f64, Vec<f64>)> {
            let v = x.iter().zip(&a).map(|(xi, ai)| 0.5 * ai * xi * xi - xi).sum();
            Ok((v, x.iter().zip(&a).map(|(xi, ai)| ai * xi - 1.0).collect()))
        };
        let pre = |g: &[f64]| g.iter().zip(&a).map(|(gi, ai)| gi / ai).collect();
        let out = minimize(f, pre, vec![0.0; 50], &LbfgsOptions::default(), |_, _, _| Ok(true)).unwrap();
        assert_eq!(out.stop, Stop::Converged);
        assert!(out.iterations <= 3);
    }
}
