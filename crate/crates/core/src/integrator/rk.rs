//! Explicit Runge-Kutta steppers on fixed-size real state vectors.

/// One classical 4th-order step of `y' = f(t, y)`.
pub fn rk4_step<const N: usize>(f: &impl Fn(f64, &[f64; N]) -> [f64; N], t: f64, y: &[f64; N], h: f64) -> [f64; N] {
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k1));
    let k3 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k2));
    let k4 = f(t + h, &axpy(y, h, &k3));
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], a: f64, k: &[f64; N]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] += a * k[i];
    }
    out
}

// Dormand-Prince 5(4) tableau.
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
// 5th minus embedded 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveControl {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AdaptiveFailure {
    StepUnderflow { t: f64 },
    TooManySteps { t: f64 },
    NonFinite { t: f64 },
}

/// Adaptive Dormand-Prince integrator that lands exactly on requested
/// output times. The step size carries over between calls.
pub struct Dopri5<const N: usize> {
    pub control: AdaptiveControl,
    h: f64,
    pub accepted: usize,
    pub rejected: usize,
}

impl<const N: usize> Dopri5<N> {
    pub fn new(control: AdaptiveControl, initial_step: f64) -> Self {
        Self { control, h: initial_step, accepted: 0, rejected: 0 }
    }

    /// Advance `y` from `t` to `t_target`.
    pub fn advance(
        &mut self,
        f: &impl Fn(f64, &[f64; N]) -> [f64; N],
        t: &mut f64,
        y: &mut [f64; N],
        t_target: f64,
    ) -> Result<(), AdaptiveFailure> {
        let mut steps = 0usize;
        while *t < t_target {
            if steps >= self.control.max_steps {
                return Err(AdaptiveFailure::TooManySteps { t: *t });
            }
            steps += 1;
            let remaining = t_target - *t;
            let last = self.h >= remaining;
            let h = if last { remaining } else { self.h };
            if h <= f64::EPSILON * t.abs().max(1e-300) {
                return Err(AdaptiveFailure::StepUnderflow { t: *t });
            }
            let (y_new, err) = self.trial(f, *t, y, h);
            if !err.is_finite() {
                self.h = 0.1 * h;
                self.rejected += 1;
                if !y.iter().all(|v| v.is_finite()) {
                    return Err(AdaptiveFailure::NonFinite { t: *t });
                }
                continue;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                *t = if last { t_target } else { *t + h };
                *y = y_new;
                self.accepted += 1;
                // Do not let a short final hop shrink the carried step.
                if !last || factor < 1.0 {
                    self.h = h * factor;
                }
            } else {
                self.rejected += 1;
                self.h = h * factor.min(1.0);
            }
        }
        Ok(())
    }

    fn trial(&self, f: &impl Fn(f64, &[f64; N]) -> [f64; N], t: f64, y: &[f64; N], h: f64) -> ([f64; N], f64) {
        let k1 = f(t, y);
        let mut s = *y;
        for i in 0..N {
            s[i] = y[i] + h * A21 * k1[i];
        }
        let k2 = f(t + C2 * h, &s);
        for i in 0..N {
            s[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        let k3 = f(t + C3 * h, &s);
        for i in 0..N {
            s[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        let k4 = f(t + C4 * h, &s);
        for i in 0..N {
            s[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        let k5 = f(t + C5 * h, &s);
        for i in 0..N {
            s[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let k6 = f(t + h, &s);
        let mut y_new = *y;
        for i in 0..N {
            y_new[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        let k7 = f(t + h, &y_new);
        let mut acc = 0.0;
        for i in 0..N {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = self.control.atol + self.control.rtol * y[i].abs().max(y_new[i].abs());
            acc += (e / sc).powi(2);
        }
        (y_new, (acc / N as f64).sqrt())
    }
}
