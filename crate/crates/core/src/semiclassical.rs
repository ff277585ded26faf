//! Mean-field steady states of the driven Kerr resonator conditioned on a
//! qubit level, and the bifurcation thresholds of the bistable window.
//!
//! With δ = ω_r − ω_d + 𝕊ᵢ, K_eff = K + (4/3!)𝕂ᵢ and c = κ/2 the amplitude
//! equation reduces to the real cubic ε² = n[(δ + K_eff n)² + c²] in n = |α|²,
//! with α = −ε/(δ + K_eff n − ic).

use num_complex::Complex64 as C64;

use crate::dispersive::{coefficients, DispersiveCoefficients, DriveContext, ResonanceGuard};
use crate::error::{Error, Result};
use crate::qubit::QubitSpec;

/// Critical reduced detuning √3.
pub const CRITICAL_REDUCED_DETUNING: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Low,
    High,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateSolution {
    pub level: usize,
    pub branch: Branch,
    pub alpha: C64,
    pub n: f64,
    pub eps_d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BifurcationThresholds {
    pub level: usize,
    /// Lower threshold (H branch fold).
    pub eps_l: f64,
    /// Upper threshold (L branch fold).
    pub eps_h: f64,
    /// Ω_eff = 2δ/κ.
    pub reduced_detuning: f64,
    pub bistable: bool,
    /// Photon numbers at the L and H folds.
    pub n_fold_l: f64,
    pub n_fold_h: f64,
}

/// Effective single-mode Kerr resonator seen with the qubit in one level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KerrCavity {
    pub level: usize,
    /// δ = ω_r − ω_d + 𝕊ᵢ.
    pub detuning: f64,
    /// K_eff = K + (4/3!)𝕂ᵢ.
    pub kerr: f64,
    pub kappa: f64,
}

impl KerrCavity {
    /// Resonator without qubit-induced shifts.
    pub fn bare(ctx: &DriveContext) -> Self {
        Self { level: 0, detuning: ctx.omega_r - ctx.omega_d, kerr: ctx.kerr, kappa: ctx.kappa }
    }

    pub fn conditioned(ctx: &DriveContext, coeffs: &DispersiveCoefficients, level: usize) -> Self {
        Self {
            level,
            detuning: ctx.omega_r - ctx.omega_d + coeffs.stark[level],
            kerr: ctx.kerr + 4.0 / 6.0 * coeffs.kerr[level],
            kappa: ctx.kappa,
        }
    }

    fn half_width(&self) -> f64 {
        0.5 * self.kappa
    }

    pub fn reduced_detuning(&self) -> f64 {
        self.detuning / self.half_width()
    }

    /// ε²(n) = n[(δ + K n)² + c²].
    pub fn eps_sq(&self, n: f64) -> f64 {
        let c = self.half_width();
        n * ((self.detuning + self.kerr * n).powi(2) + c * c)
    }

    fn eps_sq_slope(&self, n: f64) -> f64 {
        let (d, k, c) = (self.detuning, self.kerr, self.half_width());
        3.0 * k * k * n * n + 4.0 * d * k * n + d * d + c * c
    }

    /// Photon numbers (n_L, n_H) of the two folds, when the response bends back.
    pub fn fold_points(&self) -> Option<(f64, f64)> {
        let (d, k, c) = (self.detuning, self.kerr, self.half_width());
        let disc = d * d - 3.0 * c * c;
        if k == 0.0 || d * k >= 0.0 || disc < -1e-12 * d * d {
            return None;
        }
        let root = k.abs() * disc.max(0.0).sqrt();
        let n_l = (-2.0 * d * k - root) / (3.0 * k * k);
        let n_h = (-2.0 * d * k + root) / (3.0 * k * k);
        Some((n_l, n_h))
    }

    pub fn is_bistable(&self) -> bool {
        matches!(self.fold_points(), Some((a, b)) if b > a)
    }

    /// α for a photon number on the response curve.
    pub fn amplitude(&self, eps: f64, n: f64) -> C64 {
        -eps / C64::new(self.detuning + self.kerr * n, -self.half_width())
    }

    /// |(δ + K|α|² − ic)α + ε|.
    pub fn residual(&self, eps: f64, alpha: C64) -> f64 {
        (C64::new(self.detuning + self.kerr * alpha.norm_sqr(), -self.half_width()) * alpha + eps).norm()
    }

    /// Root of ε²(n) = target on a monotone interval.
    fn solve_on(&self, target: f64, mut lo: f64, mut hi: f64) -> Option<f64> {
        let f = |n: f64| self.eps_sq(n) - target;
        let (flo, fhi) = (f(lo), f(hi));
        if flo == 0.0 {
            return Some(lo);
        }
        if fhi == 0.0 {
            return Some(hi);
        }
        if flo.signum() == fhi.signum() {
            return None;
        }
        let rising = fhi > flo;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (f(mid) < 0.0) == rising {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut n = 0.5 * (lo + hi);
        // One Newton polish step, kept only if it stays inside the bracket.
        let slope = self.eps_sq_slope(n);
        if slope != 0.0 {
            let next = n - f(n) / slope;
            if next >= lo && next <= hi && f(next).abs() <= f(n).abs() {
                n = next;
            }
        }
        Some(n)
    }

    /// All steady states at drive amplitude `eps`, ordered by photon number.
    pub fn steady_states(&self, eps: f64) -> Vec<SteadyStateSolution> {
        let target = eps * eps;
        let c = self.half_width();
        let upper = (target / (c * c)).max(1e-300);
        let mut roots: Vec<(f64, Branch)> = Vec::new();
        match self.fold_points() {
            Some((n_l, n_h)) if n_h > n_l => {
                let upper = upper.max(n_h);
                if let Some(n) = self.solve_on(target, 0.0, n_l) {
                    roots.push((n, Branch::Low));
                }
                if let Some(n) = self.solve_on(target, n_l, n_h) {
                    if roots.last().is_none_or(|r| r.0 != n) {
                        roots.push((n, Branch::Unstable));
                    }
                }
                if let Some(n) = self.solve_on(target, n_h, upper) {
                    if roots.last().is_none_or(|r| r.0 != n) {
                        roots.push((n, Branch::High));
                    }
                }
            }
            _ => {
                if let Some(n) = self.solve_on(target, 0.0, upper) {
                    roots.push((n, Branch::Low));
                }
            }
        }
        roots
            .into_iter()
            .map(|(n, branch)| SteadyStateSolution {
                level: self.level,
                branch,
                alpha: self.amplitude(eps, n),
                n,
                eps_d: eps,
            })
            .collect()
    }

    /// Bifurcation thresholds ε_L < ε_H from the fold points of the cubic.
    pub fn thresholds(&self) -> Result<BifurcationThresholds> {
        let omega = self.reduced_detuning();
        let (n_l, n_h) = self.fold_points().ok_or(Error::NotBistable { reduced_detuning: omega })?;
        Ok(BifurcationThresholds {
            level: self.level,
            eps_l: self.eps_sq(n_h).sqrt(),
            eps_h: self.eps_sq(n_l).sqrt(),
            reduced_detuning: omega,
            bistable: n_h > n_l,
            n_fold_l: n_l,
            n_fold_h: n_h,
        })
    }
}

/// Qubit-conditioned cavities for every level at the drive frequency of `ctx`.
pub fn conditioned_cavities(spec: &QubitSpec, ctx: &DriveContext, guard: &ResonanceGuard) -> Result<Vec<KerrCavity>> {
    ctx.validate()?;
    let coeffs = coefficients(spec, ctx.omega_d, guard)?;
    Ok((0..spec.levels()).map(|i| KerrCavity::conditioned(ctx, &coeffs, i)).collect())
}

/// Steady states with the qubit in level `level`.
pub fn steady_amplitudes(
    spec: &QubitSpec,
    ctx: &DriveContext,
    level: usize,
    guard: &ResonanceGuard,
) -> Result<Vec<SteadyStateSolution>> {
    let cav = cavity_for(spec, ctx, level, guard)?;
    Ok(cav.steady_states(ctx.eps_d))
}

/// Bifurcation thresholds with the qubit in level `level`.
pub fn thresholds(
    spec: &QubitSpec,
    ctx: &DriveContext,
    level: usize,
    guard: &ResonanceGuard,
) -> Result<BifurcationThresholds> {
    cavity_for(spec, ctx, level, guard)?.thresholds()
}

fn cavity_for(spec: &QubitSpec, ctx: &DriveContext, level: usize, guard: &ResonanceGuard) -> Result<KerrCavity> {
    if level >= spec.levels() {
        return Err(Error::IndexOutOfRange { index: level, limit: spec.levels() });
    }
    Ok(conditioned_cavities(spec, ctx, guard)?[level])
}

/// |α| against reduced detuning for one drive amplitude, all branches.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseCurve {
    pub eps_d: f64,
    /// (Ω, branch, |α|) triples in grid order.
    pub points: Vec<(f64, Branch, f64)>,
}

/// Response curves of a Kerr resonator with nonlinearity `kerr` and width
/// `kappa` over a grid of reduced detunings Ω = 2δ/κ.
pub fn response_curve(kerr: f64, kappa: f64, omegas: &[f64], eps_list: &[f64]) -> Vec<ResponseCurve> {
    eps_list
        .iter()
        .map(|&eps| {
            let points = omegas
                .iter()
                .flat_map(|&om| {
                    let cav = KerrCavity { level: 0, detuning: 0.5 * kappa * om, kerr, kappa };
                    cav.steady_states(eps).into_iter().map(move |s| (om, s.branch, s.n.sqrt()))
                })
                .collect();
            ResponseCurve { eps_d: eps, points }
        })
        .collect()
}
