//! Dormand–Prince 5(4) with PI step control and exact landing on output points.

use crate::error::{Error, Result};

/// Tolerances and step limits for [`Dopri5`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl { abs_tol: 1e-10, rel_tol: 1e-8, h_min: 1e-14, max_steps: 2_000_000 }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Adaptive explicit integrator for `y' = f(t, y)`.
#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub control: StepControl,
}

impl Dopri5 {
    pub fn new(control: StepControl) -> Self {
        Dopri5 { control }
    }

    /// Integrates from `(t0, y0)` through every point of `outputs` (increasing,
    /// all `≥ t0`), calling `observe(k, t, y)` on arrival at `outputs[k]`.
    /// `f` may fail (domain errors, blow-up guards); the error aborts the run.
    pub fn integrate<const N: usize, F, O>(
        &self,
        mut f: F,
        t0: f64,
        y0: [f64; N],
        outputs: &[f64],
        mut observe: O,
    ) -> Result<[f64; N]>
    where
        F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
        O: FnMut(usize, f64, &[f64; N]) -> Result<()>,
    {
        let ctl = self.control;
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, &y)?;
        let t_end = match outputs.last() {
            Some(&t_end) => t_end,
            None => return Ok(y),
        };
        let mut h = initial_step(&y, &k1, ctl, (t_end - t0).abs());
        let mut err_prev: f64 = 1e-4;
        let mut steps = 0usize;
        for (k, &target) in outputs.iter().enumerate() {
            if target < t {
                return Err(Error::InvalidArgument(format!(
                    "output point {target} precedes current time {t}"
                )));
            }
            while t < target {
                steps += 1;
                if steps > ctl.max_steps {
                    return Err(Error::StepUnderflow { r: t.exp() });
                }
                let landing = t + h >= target - 1e-14 * target.abs().max(1.0);
                let step = if landing { target - t } else { h };
                let k2 = f(t + C2 * step, &axpy(&y, step, &[(A21, &k1)]))?;
                let k3 = f(t + C3 * step, &axpy(&y, step, &[(A31, &k1), (A32, &k2)]))?;
                let k4 = f(t + C4 * step, &axpy(&y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
                let k5 = f(
                    t + C5 * step,
                    &axpy(&y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
                )?;
                let k6 = f(
                    t + step,
                    &axpy(&y, step, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
                )?;
                let y_new =
                    axpy(&y, step, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
                let t_new = if landing { target } else { t + step };
                let k7 = f(t_new, &y_new)?;
                let mut err = 0.0;
                for i in 0..N {
                    let e = step
                        * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                    let sc = ctl.abs_tol + ctl.rel_tol * y[i].abs().max(y_new[i].abs());
                    err += (e / sc) * (e / sc);
                }
                let err = (err / N as f64).sqrt();
                if !err.is_finite() {
                    h = step * 0.1;
                } else if err <= 1.0 {
                    t = t_new;
                    y = y_new;
                    k1 = k7;
                    // PI controller (Hairer, Nørsett & Wanner II.4).
                    let fac = 0.9 * err.max(1e-10).powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
                    let grown = step * fac.clamp(0.2, 10.0);
                    h = if landing { grown.max(h) } else { grown };
                    err_prev = err.max(1e-4);
                } else {
                    h = step * (0.9 * err.powf(-0.2)).max(0.2);
                }
                if h < ctl.h_min * t.abs().max(1.0) {
                    return Err(Error::StepUnderflow { r: t.exp() });
                }
            }
            observe(k, t, &y)?;
        }
        Ok(y)
    }
}

fn initial_step<const N: usize>(y: &[f64; N], dy: &[f64; N], ctl: StepControl, span: f64) -> f64 {
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..N {
        let sc = ctl.abs_tol + ctl.rel_tol * y[i].abs();
        d0 += (y[i] / sc).powi(2);
        d1 += (dy[i] / sc).powi(2);
    }
    let (d0, d1) = ((d0 / N as f64).sqrt(), (d1 / N as f64).sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(span.max(1e-12))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let solver = Dopri5::new(StepControl { abs_tol: 1e-12, rel_tol: 1e-12, ..Default::default() });
        let outs: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let mut seen = Vec::new();
        solver
            .integrate(|_, y: &[f64; 1]| Ok([-y[0]]), 0.0, [1.0], &outs, |_, t, y| {
                seen.push((t, y[0]));
                Ok(())
            })
            .unwrap();
        assert_eq!(seen.len(), 10);
        for (t, y) in seen {
            assert!((y - (-t).exp()).abs() < 1e-11, "t={t}");
        }
    }

    #[test]
    fn harmonic_oscillator_lands_on_outputs() {
        let solver = Dopri5::new(StepControl { abs_tol: 1e-11, rel_tol: 1e-11, ..Default::default() });
        let outs = [0.1, 0.1, 1.0, 3.0, 2.0 * std::f64::consts::PI];
        let mut ts = Vec::new();
        let y = solver
            .integrate(|_, y: &[f64; 2]| Ok([y[1], -y[0]]), 0.0, [1.0, 0.0], &outs, |_, t, _| {
                ts.push(t);
                Ok(())
            })
            .unwrap();
        assert_eq!(ts, outs.to_vec());
        assert!((y[0] - 1.0).abs() < 1e-9 && y[1].abs() < 1e-9);
    }

    #[test]
    fn rhs_errors_propagate() {
        let solver = Dopri5::new(StepControl::default());
        let r = solver.integrate(
            |t, _: &[f64; 1]| if t > 0.5 { Err(Error::BlowUp { r: t, psi: 0.0 }) } else { Ok([1.0]) },
            0.0,
            [0.0],
            &[1.0],
            |_, _, _| Ok(()),
        );
        assert!(matches!(r, Err(Error::BlowUp { .. })));
    }

    #[test]
    fn decreasing_outputs_rejected() {
        let solver = Dopri5::new(StepControl::default());
        let r = solver.integrate(|_, _: &[f64; 1]| Ok([0.0]), 0.0, [0.0], &[1.0, 0.5], |_, _, _| Ok(()));
        assert!(r.is_err());
    }
}
