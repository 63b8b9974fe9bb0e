//! Explicit Runge–Kutta integration for small ODE systems.
//!
//! The adaptive method is the Dormand–Prince 5(4) pair with a standard
//! PI-free step controller. A fixed-step classical RK4 is available for
//! reproducibility runs. Integration proceeds in either direction of `x`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OdeMethod {
    DormandPrince,
    /// Classical RK4 with `steps_per_unit` steps per unit length.
    FixedRk4 { steps_per_unit: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Largest step allowed; also caps the first trial step.
    pub h_max: f64,
    pub max_steps: usize,
    pub method: OdeMethod,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            h_max: 0.05,
            max_steps: 1_000_000,
            method: OdeMethod::DormandPrince,
        }
    }
}

/// The state left the admissible region before reaching the target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Escape<const N: usize> {
    pub at: f64,
    pub state: [f64; N],
}

// Dormand–Prince tableau.
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
// b - b_hat
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn axpy<const N: usize>(y: &[f64; N], terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += c * k[i];
        }
    }
    out
}

/// Stateful integrator that can be advanced through a sequence of targets,
/// reusing its step size between them.
pub struct Integrator<const N: usize, F>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    rhs: F,
    opts: OdeOptions,
    x: f64,
    y: [f64; N],
    h: Option<f64>,
    steps: usize,
}

impl<const N: usize, F> Integrator<N, F>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    pub fn new(rhs: F, x0: f64, y0: [f64; N], opts: OdeOptions) -> Self {
        Self {
            rhs,
            opts,
            x: x0,
            y: y0,
            h: None,
            steps: 0,
        }
    }

    pub fn position(&self) -> f64 {
        self.x
    }

    pub fn state(&self) -> [f64; N] {
        self.y
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Advance to `target`. `escaped` is checked after each accepted step;
    /// when it returns true the integration stops and reports the escape.
    pub fn advance_to(
        &mut self,
        target: f64,
        escaped: &mut dyn FnMut(&[f64; N]) -> bool,
    ) -> Result<std::result::Result<[f64; N], Escape<N>>> {
        match self.opts.method {
            OdeMethod::DormandPrince => self.advance_dp(target, escaped),
            OdeMethod::FixedRk4 { steps_per_unit } => self.advance_rk4(target, steps_per_unit, escaped),
        }
    }

    fn advance_rk4(
        &mut self,
        target: f64,
        steps_per_unit: usize,
        escaped: &mut dyn FnMut(&[f64; N]) -> bool,
    ) -> Result<std::result::Result<[f64; N], Escape<N>>> {
        let span = target - self.x;
        if span == 0.0 {
            return Ok(Ok(self.y));
        }
        let n = ((span.abs() * steps_per_unit.max(1) as f64).ceil() as usize).max(1);
        let h = span / n as f64;
        for _ in 0..n {
            let x = self.x;
            let y = self.y;
            let k1 = (self.rhs)(x, &y);
            let k2 = (self.rhs)(x + 0.5 * h, &axpy(&y, &[(0.5 * h, &k1)]));
            let k3 = (self.rhs)(x + 0.5 * h, &axpy(&y, &[(0.5 * h, &k2)]));
            let k4 = (self.rhs)(x + h, &axpy(&y, &[(h, &k3)]));
            self.y = axpy(&y, &[(h / 6.0, &k1), (h / 3.0, &k2), (h / 3.0, &k3), (h / 6.0, &k4)]);
            self.x = x + h;
            self.steps += 1;
            if self.y.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonconvergedOde {
                    at: self.x,
                    reason: "non-finite state".into(),
                });
            }
            if escaped(&self.y) {
                return Ok(Err(Escape {
                    at: self.x,
                    state: self.y,
                }));
            }
        }
        self.x = target;
        Ok(Ok(self.y))
    }

    fn advance_dp(
        &mut self,
        target: f64,
        escaped: &mut dyn FnMut(&[f64; N]) -> bool,
    ) -> Result<std::result::Result<[f64; N], Escape<N>>> {
        let span = target - self.x;
        if span == 0.0 {
            return Ok(Ok(self.y));
        }
        let dir = span.signum();
        let h_max = self.opts.h_max.min(span.abs()).max(f64::MIN_POSITIVE);
        let mut h = self.h.unwrap_or(h_max.min(1e-2)).min(h_max);
        let mut k1 = (self.rhs)(self.x, &self.y);
        loop {
            let remaining = (target - self.x) * dir;
            if remaining <= 0.0 {
                break;
            }
            let last = h >= remaining;
            let hs = if last { remaining } else { h };
            let step = hs * dir;
            let x = self.x;
            let y = self.y;
            let k2 = (self.rhs)(x + C2 * step, &axpy(&y, &[(A21 * step, &k1)]));
            let k3 = (self.rhs)(x + C3 * step, &axpy(&y, &[(A31 * step, &k1), (A32 * step, &k2)]));
            let k4 = (self.rhs)(
                x + C4 * step,
                &axpy(&y, &[(A41 * step, &k1), (A42 * step, &k2), (A43 * step, &k3)]),
            );
            let k5 = (self.rhs)(
                x + C5 * step,
                &axpy(
                    &y,
                    &[(A51 * step, &k1), (A52 * step, &k2), (A53 * step, &k3), (A54 * step, &k4)],
                ),
            );
            let k6 = (self.rhs)(
                x + step,
                &axpy(
                    &y,
                    &[
                        (A61 * step, &k1),
                        (A62 * step, &k2),
                        (A63 * step, &k3),
                        (A64 * step, &k4),
                        (A65 * step, &k5),
                    ],
                ),
            );
            let y_new = axpy(
                &y,
                &[(B1 * step, &k1), (B3 * step, &k3), (B4 * step, &k4), (B5 * step, &k5), (B6 * step, &k6)],
            );
            let x_new = if last { target } else { x + step };
            let k7 = (self.rhs)(x_new, &y_new);

            let mut err = 0.0f64;
            for i in 0..N {
                let e = step
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.opts.atol + self.opts.rtol * y[i].abs().max(y_new[i].abs());
                err = err.max((e / sc).abs());
            }
            if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                h *= 0.25;
                if h < 1e-14 * (1.0 + x.abs()) {
                    return Err(Error::NonconvergedOde {
                        at: x,
                        reason: "non-finite state".into(),
                    });
                }
                continue;
            }
            self.steps += 1;
            if self.steps > self.opts.max_steps {
                return Err(Error::NonconvergedOde {
                    at: x,
                    reason: format!("exceeded {} steps", self.opts.max_steps),
                });
            }
            if err <= 1.0 {
                self.x = x_new;
                self.y = y_new;
                k1 = k7;
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last {
                    h = (hs * fac).min(h_max);
                }
                if escaped(&self.y) {
                    self.h = Some(h);
                    return Ok(Err(Escape {
                        at: self.x,
                        state: self.y,
                    }));
                }
            } else {
                h = hs * (0.9 * err.powf(-0.2)).max(0.1);
                if h < 1e-14 * (1.0 + x.abs()) {
                    return Err(Error::NonconvergedOde {
                        at: x,
                        reason: "step size underflow".into(),
                    });
                }
            }
        }
        self.h = Some(h);
        self.x = target;
        Ok(Ok(self.y))
    }
}

/// Integrate from `x0` to `x1` without an escape check.
pub fn integrate<const N: usize, F>(rhs: F, x0: f64, y0: [f64; N], x1: f64, opts: &OdeOptions) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let mut it = Integrator::new(rhs, x0, y0, *opts);
    match it.advance_to(x1, &mut |_| false)? {
        Ok(y) => Ok(y),
        Err(e) => Err(Error::NonconvergedOde {
            at: e.at,
            reason: "escaped".into(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth_and_decay() {
        let opts = OdeOptions::default();
        let y = integrate(|_, y: &[f64; 1]| [y[0]], 0.0, [1.0], 1.0, &opts).unwrap();
        assert!((y[0] - 1f64.exp()).abs() < 1e-9);
        let y = integrate(|_, y: &[f64; 1]| [y[0]], 1.0, [1.0], 0.0, &opts).unwrap();
        assert!((y[0] - (-1f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn rk4_fourth_order() {
        let err = |n: usize| {
            let opts = OdeOptions {
                method: OdeMethod::FixedRk4 { steps_per_unit: n },
                ..Default::default()
            };
            let y = integrate(|x, y: &[f64; 2]| [y[1], -y[0] + 0.0 * x], 0.0, [0.0, 1.0], 2.0, &opts).unwrap();
            (y[0] - 2f64.sin()).abs()
        };
        let order = (err(20) / err(40)).log2();
        assert!(order > 3.8, "order {order}");
    }

    #[test]
    fn escape_is_reported() {
        let opts = OdeOptions::default();
        // u' = u², u(0) = 1 blows up at x = 1.
        let mut it = Integrator::new(|_, y: &[f64; 1]| [y[0] * y[0]], 0.0, [1.0], opts);
        let out = it.advance_to(2.0, &mut |y| y[0] > 1e6).unwrap();
        let esc = out.unwrap_err();
        assert!(esc.at < 1.0 && esc.at > 0.99);
    }
}
