//! Dormand-Prince 5(4) with FSAL and a PI step-size controller on real
//! state vectors.

use crate::error::{Error, Result};

/// Right-hand side of y′ = f(t, y).
pub trait OdeSystem {
    fn rhs(&mut self, t: f64, y: &[f64], dy: &mut [f64]);

    /// Weighted RMS error over the entries that carry state. The default
    /// counts every entry.
    fn error_norm(&self, err: &[f64], y0: &[f64], y1: &[f64], rel_tol: f64, abs_tol: f64) -> f64 {
        rms_error(err.iter().zip(y0).zip(y1).map(|((e, a), b)| (*e, *a, *b)), rel_tol, abs_tol)
    }
}

/// RMS of |eᵢ| / (abs_tol + rel_tol · max(|y0ᵢ|, |y1ᵢ|)).
pub fn rms_error(items: impl Iterator<Item = (f64, f64, f64)>, rel_tol: f64, abs_tol: f64) -> f64 {
    let mut acc = 0.0;
    let mut count = 0usize;
    for (e, a, b) in items {
        let scale = abs_tol + rel_tol * a.abs().max(b.abs());
        acc += e * e / (scale * scale);
        count += 1;
    }
    (acc / count.max(1) as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: Option<f64>,
    pub initial_step: f64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-7, abs_tol: 1e-9, max_step: None, initial_step: 1e-11 }
    }
}

impl IntegratorOptions {
    pub fn validate(&self) -> Result<()> {
        let range = 1e-12..=1e-4;
        if !range.contains(&self.rel_tol) || !range.contains(&self.abs_tol) {
            return Err(Error::InvalidParameter(format!(
                "tolerances ({}, {}) outside [1e-12, 1e-4]",
                self.rel_tol, self.abs_tol
            )));
        }
        if !(self.initial_step > 0.0) || self.max_step.is_some_and(|h| !(h > 0.0)) {
            return Err(Error::InvalidParameter("step sizes must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
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

/// out = y + h Σ cⱼ kⱼ in one pass.
fn combine<const K: usize>(out: &mut [f64], y: &[f64], h: f64, coef: [f64; K], ks: [&[f64]; K]) {
    let n = out.len();
    let y = &y[..n];
    let ks = ks.map(|k| &k[..n]);
    let c = coef.map(|c| c * h);
    for i in 0..n {
        let mut acc = y[i];
        for j in 0..K {
            acc += ks[j][i] * c[j];
        }
        out[i] = acc;
    }
}

/// out = h Σ cⱼ kⱼ.
fn weighted_sum<const K: usize>(out: &mut [f64], h: f64, coef: [f64; K], ks: [&[f64]; K]) {
    let n = out.len();
    let ks = ks.map(|k| &k[..n]);
    let c = coef.map(|c| c * h);
    for i in 0..n {
        let mut acc = 0.0;
        for j in 0..K {
            acc += ks[j][i] * c[j];
        }
        out[i] = acc;
    }
}

/// Reusable integrator workspace.
pub struct Dopri5 {
    opts: IntegratorOptions,
    k: [Vec<f64>; 7],
    stage: Vec<f64>,
    next: Vec<f64>,
    err: Vec<f64>,
    h: f64,
    fac_old: f64,
    fsal_valid: bool,
    stats: StepStats,
}

impl Dopri5 {
    pub fn new(opts: IntegratorOptions, len: usize) -> Self {
        let z = || vec![0.0; len];
        Self {
            opts,
            k: [z(), z(), z(), z(), z(), z(), z()],
            stage: z(),
            next: z(),
            err: z(),
            h: opts.initial_step,
            fac_old: 1e-4,
            fsal_valid: false,
            stats: StepStats::default(),
        }
    }

    pub fn stats(&self) -> StepStats {
        self.stats
    }

    /// Current step-size proposal.
    pub fn step_size(&self) -> f64 {
        self.h
    }

    /// Integrates from `t0` through each stop in order, landing exactly on
    /// every stop. `on_stop(index, t, y)` runs after each stop is reached.
    pub fn integrate<S, F>(&mut self, sys: &mut S, t0: f64, y: &mut Vec<f64>, stops: &[f64], mut on_stop: F) -> Result<f64>
    where
        S: OdeSystem,
        F: FnMut(usize, f64, &[f64]) -> Result<()>,
    {
        let mut t = t0;
        self.fsal_valid = false;
        for (idx, &stop) in stops.iter().enumerate() {
            if stop < t {
                return Err(Error::InvalidParameter(format!("stop {stop:e} precedes t = {t:e}")));
            }
            while t < stop {
                let remaining = stop - t;
                let mut h = self.h.min(self.opts.max_step.unwrap_or(f64::INFINITY));
                let last = h >= remaining * (1.0 - 1e-12);
                if last {
                    h = remaining;
                }
                if h < 1e-18 || h <= 8.0 * f64::EPSILON * t.abs() {
                    return Err(Error::StepSizeUnderflow { time: t, step: h });
                }
                if self.try_step(sys, t, y, h) {
                    t = if last { stop } else { t + h };
                }
            }
            on_stop(idx, t, y)?;
        }
        Ok(t)
    }

    /// Attempts one step of size h; on acceptance `y` is advanced. The next
    /// step proposal is stored either way.
    fn try_step<S: OdeSystem>(&mut self, sys: &mut S, t: f64, y: &mut Vec<f64>, h: f64) -> bool {
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        if !self.fsal_valid {
            sys.rhs(t, y, k1);
            self.stats.rhs_evals += 1;
            self.fsal_valid = true;
        }
        combine(&mut self.stage, y, h, [A21], [k1]);
        sys.rhs(t + C2 * h, &self.stage, k2);
        combine(&mut self.stage, y, h, [A31, A32], [k1, k2]);
        sys.rhs(t + C3 * h, &self.stage, k3);
        combine(&mut self.stage, y, h, [A41, A42, A43], [k1, k2, k3]);
        sys.rhs(t + C4 * h, &self.stage, k4);
        combine(&mut self.stage, y, h, [A51, A52, A53, A54], [k1, k2, k3, k4]);
        sys.rhs(t + C5 * h, &self.stage, k5);
        combine(&mut self.stage, y, h, [A61, A62, A63, A64, A65], [k1, k2, k3, k4, k5]);
        sys.rhs(t + h, &self.stage, k6);
        combine(&mut self.next, y, h, [A71, A73, A74, A75, A76], [k1, k3, k4, k5, k6]);
        sys.rhs(t + h, &self.next, k7);
        self.stats.rhs_evals += 6;

        weighted_sum(&mut self.err, h, [E1, E3, E4, E5, E6, E7], [k1, k3, k4, k5, k6, k7]);
        let err = sys.error_norm(&self.err, y, &self.next, self.opts.rel_tol, self.opts.abs_tol);

        let expo = 0.2 - BETA * 0.75;
        let fac11 = err.powf(expo);
        if err <= 1.0 {
            let fac = (fac11 / self.fac_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            self.fac_old = err.max(1e-4);
            self.h = h / fac;
            std::mem::swap(y, &mut self.next);
            std::mem::swap(k1, k7);
            self.stats.accepted += 1;
            true
        } else {
            self.h = h / (fac11 / SAFETY).min(1.0 / FAC_MIN);
            self.stats.rejected += 1;
            false
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C64;

    /// y′ = λy for complex y stored as [re, im].
    struct Decay(C64);

    impl OdeSystem for Decay {
        fn rhs(&mut self, _t: f64, y: &[f64], dy: &mut [f64]) {
            let v = self.0 * C64::new(y[0], y[1]);
            dy[0] = v.re;
            dy[1] = v.im;
        }
    }

    struct Forced;

    impl OdeSystem for Forced {
        fn rhs(&mut self, t: f64, _y: &[f64], dy: &mut [f64]) {
            dy[0] = t.cos();
        }
    }

    #[test]
    fn damped_rotation() {
        let lam = C64::new(-0.5, 3.0);
        let mut sys = Decay(lam);
        let opts = IntegratorOptions { initial_step: 1e-3, ..Default::default() };
        let mut dp = Dopri5::new(opts, 2);
        let mut y = vec![1.0, 0.0];
        let mut seen = Vec::new();
        let end = dp
            .integrate(&mut sys, 0.0, &mut y, &[0.5, 1.0, 4.0], |i, t, v| {
                seen.push((i, t, C64::new(v[0], v[1])));
                Ok(())
            })
            .unwrap();
        assert_eq!(end, 4.0);
        for (_, t, v) in seen {
            assert!((v - (lam * t).exp()).norm() < 1e-6);
        }
        assert!(dp.stats().accepted > 10);
    }

    #[test]
    fn lands_on_stops() {
        let mut dp = Dopri5::new(IntegratorOptions { initial_step: 0.3, ..Default::default() }, 1);
        let mut y = vec![0.0];
        let stops = [0.1, 0.25, 2.0];
        let mut times = Vec::new();
        dp.integrate(&mut Forced, 0.0, &mut y, &stops, |_, t, _| {
            times.push(t);
            Ok(())
        })
        .unwrap();
        assert_eq!(times, stops);
        assert!((y[0] - 2f64.sin()).abs() < 1e-7);
    }

    #[test]
    fn tolerance_validation() {
        let bad = IntegratorOptions { rel_tol: 1e-2, ..Default::default() };
        assert!(bad.validate().is_err());
        assert!(IntegratorOptions::default().validate().is_ok());
    }
}
