//! Closed-form dispersive quantities of a qubit ladder coupled to a driven
//! Kerr resonator: detunings, ac-Stark and quadratic coefficients, two-photon
//! corrections, Lamb shifts, pulls, Purcell rates, Landau-Zener probabilities
//! and frame-validity diagnostics.
//!
//! Index conventions: quantities attached to a transition (Δ_{i,d}, Λᵢ, Xᵢ, gᵢ)
//! use the lower level index i. Out-of-ladder values (Λ₋₁, Λ_{M−1}, two-photon
//! terms with i > M−3) are zero.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::qubit::QubitSpec;
use crate::units::{mhz, to_mhz};

/// Minimum |detuning| below which closed forms refuse to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonanceGuard {
    pub single_photon: f64,
    pub two_photon: f64,
}

impl Default for ResonanceGuard {
    fn default() -> Self {
        Self { single_photon: mhz(1.0), two_photon: mhz(1.0) }
    }
}

impl ResonanceGuard {
    pub fn uniform(width: f64) -> Self {
        Self { single_photon: width, two_photon: width }
    }

    fn check(&self, level: usize, detuning: f64) -> Result<()> {
        if detuning.abs() < self.single_photon {
            Err(Error::ResonanceGuard { level, detuning_mhz: to_mhz(detuning) })
        } else {
            Ok(())
        }
    }

    fn check_two_photon(&self, level: usize, detuning: f64) -> Result<()> {
        if detuning.abs() < self.two_photon {
            Err(Error::TwoPhotonResonanceGuard { level, detuning_mhz: to_mhz(detuning) })
        } else {
            Ok(())
        }
    }
}

/// Drive and resonator parameters, all angular frequencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveContext {
    pub omega_d: f64,
    pub omega_r: f64,
    pub kappa: f64,
    pub kerr: f64,
    pub eps_d: f64,
}

impl DriveContext {
    pub fn validate(&self) -> Result<()> {
        let all = [self.omega_d, self.omega_r, self.kappa, self.kerr, self.eps_d];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite drive context".into()));
        }
        if self.kappa <= 0.0 {
            return Err(Error::InvalidParameter("κ must be positive".into()));
        }
        if self.eps_d < 0.0 {
            return Err(Error::InvalidParameter("ε_d must be non-negative".into()));
        }
        Ok(())
    }

    /// Ω = 2(ω_r − ω_d)/κ.
    pub fn reduced_detuning(&self) -> f64 {
        2.0 * (self.omega_r - self.omega_d) / self.kappa
    }

    pub fn with_drive(mut self, eps_d: f64) -> Self {
        self.eps_d = eps_d;
        self
    }
}

/// Per-level dispersive coefficients at one drive frequency. Every vector has
/// one entry per qubit level.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersiveCoefficients {
    pub omega_d: f64,
    /// Δ_{i,d} = ω_{i+1} − ωᵢ − ω_d (zero for the top level).
    pub delta_d: Vec<f64>,
    /// Λᵢ = −gᵢ/Δ_{i,d}.
    pub lambda: Vec<f64>,
    /// Xᵢ = −gᵢΛᵢ.
    pub x: Vec<f64>,
    /// 𝕊ᵢ = −(Xᵢ − X_{i−1}).
    pub stark: Vec<f64>,
    /// 𝕂ᵢ without two-photon terms.
    pub kerr1: Vec<f64>,
    /// 𝕂ᵢ = 𝕂ᵢ⁽¹⁾ − Xᵢ⁽²⁾ + X_{i−2}⁽²⁾.
    pub kerr: Vec<f64>,
    /// gᵢ⁽²⁾ = ΛᵢΛ_{i+1}(Δ_{i+1,d} − Δ_{i,d}).
    pub g2: Vec<f64>,
    /// Λᵢ⁽²⁾ = −gᵢ⁽²⁾/(Δ_{i+1,d} + Δ_{i,d}).
    pub lambda2: Vec<f64>,
    /// Xᵢ⁽²⁾ = −gᵢ⁽²⁾Λᵢ⁽²⁾.
    pub x2: Vec<f64>,
}

impl DispersiveCoefficients {
    pub fn levels(&self) -> usize {
        self.stark.len()
    }

    /// χ = 𝕊₁ − 𝕊₀.
    pub fn chi(&self) -> f64 {
        self.stark[1] - self.stark[0]
    }
}

/// Value at a signed index, zero outside `0..len`.
#[inline]
fn at(v: &[f64], i: isize) -> f64 {
    if i >= 0 && (i as usize) < v.len() {
        v[i as usize]
    } else {
        0.0
    }
}

fn single_photon_terms(
    spec: &QubitSpec,
    omega_d: f64,
    guard: &ResonanceGuard,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let m = spec.levels();
    let mut delta = vec![0.0; m];
    let mut lambda = vec![0.0; m];
    let mut x = vec![0.0; m];
    for i in 0..m - 1 {
        let d = spec.transition(i) - omega_d;
        guard.check(i, d)?;
        let g = spec.couplings()[i];
        delta[i] = d;
        lambda[i] = -g / d;
        x[i] = -g * lambda[i];
    }
    Ok((delta, lambda, x))
}

fn stark_from_x(x: &[f64]) -> Vec<f64> {
    (0..x.len() as isize).map(|i| -(at(x, i) - at(x, i - 1))).collect()
}

fn g2_from(delta: &[f64], lambda: &[f64]) -> Vec<f64> {
    let m = lambda.len();
    (0..m)
        .map(|i| if i + 2 < m { lambda[i] * lambda[i + 1] * (delta[i + 1] - delta[i]) } else { 0.0 })
        .collect()
}

/// Linear ac-Stark coefficients 𝕊ᵢ.
pub fn stark_linear(spec: &QubitSpec, omega_d: f64, guard: &ResonanceGuard) -> Result<Vec<f64>> {
    let (_, _, x) = single_photon_terms(spec, omega_d, guard)?;
    Ok(stark_from_x(&x))
}

/// Effective two-photon couplings gᵢ⁽²⁾ (zero for i ≥ M−2).
pub fn two_photon_coupling(spec: &QubitSpec, omega_d: f64, guard: &ResonanceGuard) -> Result<Vec<f64>> {
    let (delta, lambda, _) = single_photon_terms(spec, omega_d, guard)?;
    Ok(g2_from(&delta, &lambda))
}

/// Every closed-form coefficient at drive frequency `omega_d`.
pub fn coefficients(spec: &QubitSpec, omega_d: f64, guard: &ResonanceGuard) -> Result<DispersiveCoefficients> {
    let m = spec.levels();
    let (delta, lambda, x) = single_photon_terms(spec, omega_d, guard)?;
    let stark = stark_from_x(&x);
    let g2 = g2_from(&delta, &lambda);
    let mut lambda2 = vec![0.0; m];
    let mut x2 = vec![0.0; m];
    for i in 0..m.saturating_sub(2) {
        let denom = delta[i + 1] + delta[i];
        guard.check_two_photon(i, denom)?;
        lambda2[i] = -g2[i] / denom;
        x2[i] = -g2[i] * lambda2[i];
    }

    let (l, xx) = (&lambda[..], &x[..]);
    let kerr1: Vec<f64> = (0..m as isize)
        .map(|i| {
            let s = stark[i as usize];
            -s * (at(l, i).powi(2) + at(l, i - 1).powi(2))
                - 0.25 * (3.0 * at(xx, i + 1) * at(l, i).powi(2) - at(xx, i) * at(l, i + 1).powi(2))
                + 0.25 * (3.0 * at(xx, i - 2) * at(l, i - 1).powi(2) - at(xx, i - 1) * at(l, i - 2).powi(2))
        })
        .collect();
    let kerr = (0..m as isize)
        .map(|i| kerr1[i as usize] - at(&x2, i) + at(&x2, i - 2))
        .collect();

    Ok(DispersiveCoefficients { omega_d, delta_d: delta, lambda, x, stark, kerr1, kerr, g2, lambda2, x2 })
}

/// (𝕂ᵢ⁽¹⁾, 𝕂ᵢ).
pub fn kerr_quadratic(spec: &QubitSpec, omega_d: f64, guard: &ResonanceGuard) -> Result<(Vec<f64>, Vec<f64>)> {
    let c = coefficients(spec, omega_d, guard)?;
    Ok((c.kerr1, c.kerr))
}

/// Lamb shifts, fluctuation pulls and renormalized qubit frequencies at a
/// mean-field photon number |ᾱ|².
#[derive(Debug, Clone, PartialEq)]
pub struct LambShift {
    /// Lᵢ(ᾱ) (zero for the top level).
    pub lamb: Vec<f64>,
    /// Sᵢ(ᾱ) = −(L_{i+1} − Lᵢ).
    pub pull: Vec<f64>,
    /// ω′ᵢ = ωᵢ + 𝕊ᵢ|ᾱ|² + 𝕂ᵢ|ᾱ|⁴ + Lᵢ.
    pub dressed: Vec<f64>,
}

/// Lᵢ(ᾱ) = gᵢ²/(ω″_{i+1} − ω″ᵢ − ω′_r) with ω″ᵢ = ωᵢ + 𝕊ᵢ|ᾱ|² + 𝕂ᵢ⁽¹⁾|ᾱ|⁴
/// and ω′_r = ω_r + 2K|ᾱ|².
pub fn lamb_shift_and_pull(
    spec: &QubitSpec,
    ctx: &DriveContext,
    alpha_sq: f64,
    guard: &ResonanceGuard,
) -> Result<LambShift> {
    let c = coefficients(spec, ctx.omega_d, guard)?;
    let m = spec.levels();
    let w = spec.freqs();
    let second: Vec<f64> = (0..m)
        .map(|i| w[i] + c.stark[i] * alpha_sq + c.kerr1[i] * alpha_sq * alpha_sq)
        .collect();
    let omega_r_shifted = ctx.omega_r + 2.0 * ctx.kerr * alpha_sq;
    let mut lamb = vec![0.0; m];
    for i in 0..m - 1 {
        let denom = second[i + 1] - second[i] - omega_r_shifted;
        guard.check(i, denom)?;
        lamb[i] = spec.couplings()[i].powi(2) / denom;
    }
    let pull = (0..m).map(|i| -(if i + 1 < m { lamb[i + 1] } else { 0.0 } - lamb[i])).collect();
    let dressed = (0..m)
        .map(|i| w[i] + c.stark[i] * alpha_sq + c.kerr[i] * alpha_sq * alpha_sq + lamb[i])
        .collect();
    Ok(LambShift { lamb, pull, dressed })
}

/// Low-power pulls Sᵢ = g_{i−1}²/Δ_{i−1,r} − gᵢ²/Δ_{i,r} and χ = S₁ − S₀.
pub fn multilevel_pull(spec: &QubitSpec, omega_r: f64, guard: &ResonanceGuard) -> Result<(Vec<f64>, f64)> {
    let m = spec.levels();
    let mut term = vec![0.0; m];
    for i in 0..m - 1 {
        let d = spec.transition(i) - omega_r;
        guard.check(i, d)?;
        term[i] = spec.couplings()[i].powi(2) / d;
    }
    let pulls: Vec<f64> = (0..m as isize).map(|i| at(&term, i - 1) - at(&term, i)).collect();
    let chi = pulls[1] - pulls[0];
    Ok((pulls, chi))
}

/// Purcell rates γ_{κi} = κgᵢ²/Δ_{i,r}², one per transition i ↔ i+1.
pub fn purcell_rates(spec: &QubitSpec, omega_r: f64, kappa: f64, guard: &ResonanceGuard) -> Result<Vec<f64>> {
    (0..spec.levels() - 1)
        .map(|i| {
            let d = spec.transition(i) - omega_r;
            guard.check(i, d)?;
            Ok(kappa * (spec.couplings()[i] / d).powi(2))
        })
        .collect()
}

/// Landau-Zener transition probability 1 − exp(−2πg²/v) for coupling `g`
/// (rad/s) swept at rate `v` (rad/s²).
pub fn landau_zener(g: f64, v: f64) -> f64 {
    assert!(v > 0.0, "sweep rate must be positive");
    -(-2.0 * PI * g * g / v).exp_m1()
}

/// Frame-validity grading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Validity {
    /// Every |Λᵢ| < 0.1 and |ξ| < 0.3.
    Valid,
    /// Worst normalized parameter within a factor of 3 of its bound.
    Marginal,
    Breakdown,
}

impl Validity {
    fn from_ratio(r: f64) -> Self {
        if r < 1.0 {
            Validity::Valid
        } else if r < 3.0 {
            Validity::Marginal
        } else {
            Validity::Breakdown
        }
    }
}

pub const LAMBDA_BOUND: f64 = 0.1;
pub const XI_BOUND: f64 = 0.3;

/// |Λᵢ|, |ξᵢ| = |Λᵢαᵢ|, |ξᵢ⁽²⁾| = |Λᵢ⁽²⁾αᵢα_{i+1}| and their grading.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidityReport {
    pub lambda_abs: Vec<f64>,
    pub xi_abs: Vec<f64>,
    pub xi2_abs: Vec<f64>,
    /// Verdict of the parameters touching each level.
    pub per_level: Vec<Validity>,
    pub verdict: Validity,
    /// Largest of |Λ|/0.1, |ξ|/0.3, |ξ⁽²⁾|/0.3.
    pub worst_ratio: f64,
}

/// Diagnostics for the displaced dispersive frame. `alphas` holds the
/// state-conditioned mean fields αᵢ; missing entries count as zero.
pub fn dispersive_validity(coeffs: &DispersiveCoefficients, alphas: &[C64]) -> ValidityReport {
    let m = coeffs.levels();
    let alpha = |i: usize| alphas.get(i).copied().unwrap_or_default();
    let lambda_abs: Vec<f64> = coeffs.lambda.iter().map(|l| l.abs()).collect();
    let xi_abs: Vec<f64> = (0..m).map(|i| (alpha(i) * coeffs.lambda[i]).norm()).collect();
    let xi2_abs: Vec<f64> = (0..m)
        .map(|i| if i + 1 < m { (alpha(i) * alpha(i + 1) * coeffs.lambda2[i]).norm() } else { 0.0 })
        .collect();

    let transition_ratio = |i: isize| -> f64 {
        if i < 0 || i as usize >= m {
            return 0.0;
        }
        let i = i as usize;
        (lambda_abs[i] / LAMBDA_BOUND).max(xi_abs[i] / XI_BOUND).max(xi2_abs[i] / XI_BOUND)
    };
    let per_level_ratio: Vec<f64> = (0..m as isize)
        .map(|i| {
            let two = at(&xi2_abs, i - 2).max(at(&xi2_abs, i - 1)) / XI_BOUND;
            transition_ratio(i).max(transition_ratio(i - 1)).max(two)
        })
        .collect();
    let worst_ratio = (0..m as isize).map(transition_ratio).fold(0.0, f64::max);
    let verdict = Validity::from_ratio(worst_ratio);
    if verdict != Validity::Valid {
        log::warn!("dispersive frame {verdict:?}: worst normalized parameter {worst_ratio:.2}");
    }
    ValidityReport {
        per_level: per_level_ratio.into_iter().map(Validity::from_ratio).collect(),
        lambda_abs,
        xi_abs,
        xi2_abs,
        verdict,
        worst_ratio,
    }
}
