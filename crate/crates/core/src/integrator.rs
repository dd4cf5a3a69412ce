//! Embedded Dormand–Prince 5(4) stepper with PI step-size control.
//!
//! The stepper works on fixed-size arrays so the base flow (6 components)
//! and the flow augmented with its tangent (12 components) share one
//! implementation. Dense output between accepted steps is cubic Hermite.

use crate::error::{Error, Result};

// Butcher tableau. The system is autonomous, so the nodes c_i are not needed.
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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// Difference between the 5th- and 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;

/// Any component beyond this magnitude is treated as a blow-up.
pub const DIVERGENCE_BOUND: f64 = 1e150;

/// Autonomous right-hand side.
pub trait Rhs<const N: usize> {
    fn eval(&self, y: &[f64; N]) -> [f64; N];
}

impl<const N: usize, F: Fn(&[f64; N]) -> [f64; N]> Rhs<N> for F {
    fn eval(&self, y: &[f64; N]) -> [f64; N] {
        self(y)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
    pub max_step: f64,
}

/// Counters accumulated over a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
    pub evaluations: u64,
}

/// One accepted step, enough to interpolate anywhere inside it.
pub struct Segment<'a, const N: usize> {
    pub t0: f64,
    pub t1: f64,
    pub y0: &'a [f64; N],
    pub f0: &'a [f64; N],
    pub y1: &'a [f64; N],
    pub f1: &'a [f64; N],
}

impl<const N: usize> Segment<'_, N> {
    /// Cubic Hermite interpolant at `t` in `[t0, t1]`.
    pub fn eval(&self, t: f64) -> [f64; N] {
        if t == self.t1 {
            return *self.y1;
        }
        if t == self.t0 {
            return *self.y0;
        }
        let h = self.t1 - self.t0;
        let s = (t - self.t0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = h00 * self.y0[i] + h * h10 * self.f0[i] + h01 * self.y1[i] + h * h11 * self.f1[i];
        }
        out
    }
}

/// Adaptive stepper state carried across calls to [`Stepper::advance`].
pub struct Stepper<const N: usize, F: Rhs<N>> {
    f: F,
    tol: Tolerances,
    pub t: f64,
    pub y: [f64; N],
    k1: [f64; N],
    h: f64,
    err_old: f64,
    pub stats: StepStats,
}

impl<const N: usize, F: Rhs<N>> Stepper<N, F> {
    pub fn new(f: F, t0: f64, y0: [f64; N], tol: Tolerances) -> Result<Self> {
        if !(tol.rel > 0.0 && tol.abs > 0.0) {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        if !(tol.max_step > 0.0) {
            return Err(Error::InvalidConfig("max_step must be positive".into()));
        }
        if !y0.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("initial state must be finite".into()));
        }
        let k1 = f.eval(&y0);
        let mut st = Stepper {
            f,
            tol,
            t: t0,
            y: y0,
            k1,
            h: 0.0,
            err_old: 1e-4,
            stats: StepStats { evaluations: 1, ..StepStats::default() },
        };
        st.h = st.initial_step();
        Ok(st)
    }

    /// Replace the current state (e.g. after renormalizing part of it).
    pub fn reset_state(&mut self, y: [f64; N]) {
        self.y = y;
        self.k1 = self.f.eval(&y);
        self.stats.evaluations += 1;
    }

    fn scale(&self, a: f64, b: f64) -> f64 {
        self.tol.abs + self.tol.rel * a.abs().max(b.abs())
    }

    fn initial_step(&mut self) -> f64 {
        // Starting-step heuristic from Hairer, Nørsett & Wanner (II.4).
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for i in 0..N {
            let sk = self.tol.abs + self.tol.rel * self.y[i].abs();
            d0 += (self.y[i] / sk).powi(2);
            d1 += (self.k1[i] / sk).powi(2);
        }
        d0 = (d0 / N as f64).sqrt();
        d1 = (d1 / N as f64).sqrt();
        let mut h0 = if d0 < 1e-10 || d1 < 1e-10 { 1e-6 } else { 0.01 * d0 / d1 };
        h0 = h0.min(self.tol.max_step);
        let mut y1 = [0.0; N];
        for i in 0..N {
            y1[i] = self.y[i] + h0 * self.k1[i];
        }
        let f1 = self.f.eval(&y1);
        self.stats.evaluations += 1;
        let mut d2 = 0.0;
        for i in 0..N {
            let sk = self.tol.abs + self.tol.rel * self.y[i].abs();
            d2 += ((f1[i] - self.k1[i]) / sk).powi(2);
        }
        d2 = (d2 / N as f64).sqrt() / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(self.tol.max_step)
    }

    /// Advance to exactly `t_stop`, calling `on_step` for every accepted step.
    pub fn advance<G>(&mut self, t_stop: f64, mut on_step: G) -> Result<()>
    where
        G: FnMut(&Segment<'_, N>) -> Result<()>,
    {
        while self.t < t_stop {
            let mut h = self.h.min(self.tol.max_step);
            if !(h > 16.0 * f64::EPSILON * self.t.abs().max(1.0)) {
                return Err(Error::StepSizeUnderflow { t: self.t, h });
            }
            let remaining = t_stop - self.t;
            let last = h >= remaining * (1.0 - 1e-12);
            if last {
                h = remaining;
            }
            let (y_new, k7, err) = self.trial(h);
            self.stats.evaluations += 6;

            let finite = err.is_finite() && y_new.iter().all(|v| v.is_finite());
            if !finite || err > 1.0 {
                self.stats.rejected += 1;
                if !finite && !self.k1.iter().all(|v| v.is_finite()) {
                    return Err(Error::Divergence { t: self.t });
                }
                let fac = if finite {
                    (err.powf(EXPO1) / SAFETY).min(1.0 / FAC_MIN)
                } else {
                    1.0 / FAC_MIN
                };
                self.h = h / fac;
                if self.h.abs() <= 16.0 * f64::EPSILON * self.t.abs().max(1.0) {
                    return Err(Error::StepSizeUnderflow { t: self.t, h: self.h });
                }
                continue;
            }

            let err = err.max(1e-16);
            let fac11 = err.powf(EXPO1);
            let fac = (fac11 / self.err_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            self.err_old = err;

            let t_new = if last { t_stop } else { self.t + h };
            {
                let seg = Segment { t0: self.t, t1: t_new, y0: &self.y, f0: &self.k1, y1: &y_new, f1: &k7 };
                on_step(&seg)?;
            }
            self.stats.accepted += 1;
            self.t = t_new;
            self.y = y_new;
            self.k1 = k7;
            // A short step that only closes the gap to `t_stop` should not
            // shrink the step used afterwards.
            let h_next = h / fac;
            self.h = if last { self.h.max(h_next) } else { h_next };

            if self.y.iter().any(|v| v.abs() > DIVERGENCE_BOUND) {
                return Err(Error::Divergence { t: self.t });
            }
        }
        Ok(())
    }

    fn trial(&self, h: f64) -> ([f64; N], [f64; N], f64) {
        let y = &self.y;
        let k1 = &self.k1;
        let mut tmp = [0.0; N];

        for i in 0..N {
            tmp[i] = y[i] + h * A21 * k1[i];
        }
        let k2 = self.f.eval(&tmp);
        for i in 0..N {
            tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        let k3 = self.f.eval(&tmp);
        for i in 0..N {
            tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        let k4 = self.f.eval(&tmp);
        for i in 0..N {
            tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        let k5 = self.f.eval(&tmp);
        for i in 0..N {
            tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let k6 = self.f.eval(&tmp);
        let mut y_new = [0.0; N];
        for i in 0..N {
            y_new[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        let k7 = self.f.eval(&y_new);

        let mut acc = 0.0;
        for i in 0..N {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sk = self.scale(y[i], y_new[i]);
            acc += (e / sk).powi(2);
        }
        (y_new, k7, (acc / N as f64).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol(rel: f64) -> Tolerances {
        Tolerances { rel, abs: rel, max_step: f64::INFINITY }
    }

    #[test]
    fn exponential_decay() {
        let f = |y: &[f64; 1]| [-y[0]];
        let mut s = Stepper::new(f, 0.0, [1.0], tol(1e-10)).unwrap();
        s.advance(5.0, |_| Ok(())).unwrap();
        assert_eq!(s.t, 5.0);
        assert!((s.y[0] - (-5.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn harmonic_oscillator_dense_output() {
        let f = |y: &[f64; 2]| [y[1], -y[0]];
        let mut s = Stepper::new(f, 0.0, [1.0, 0.0], tol(1e-11)).unwrap();
        let mut worst: f64 = 0.0;
        s.advance(10.0, |seg| {
            let tm = 0.5 * (seg.t0 + seg.t1);
            let y = seg.eval(tm);
            worst = worst.max((y[0] - tm.cos()).abs());
            Ok(())
        })
        .unwrap();
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn blow_up_is_reported() {
        // y' = y^2 reaches infinity at t = 1.
        let f = |y: &[f64; 1]| [y[0] * y[0]];
        let mut s = Stepper::new(f, 0.0, [1.0], tol(1e-8)).unwrap();
        let err = s.advance(2.0, |_| Ok(())).unwrap_err();
        match err {
            Error::Divergence { t } | Error::StepSizeUnderflow { t, .. } => assert!(t < 1.0 + 1e-6 && t > 0.9),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_tolerances() {
        let f = |y: &[f64; 1]| [-y[0]];
        assert!(Stepper::new(f, 0.0, [1.0], Tolerances { rel: 0.0, abs: 1e-9, max_step: 1.0 }).is_err());
    }
}
