//! Multi-level qubit specifications, explicit or from a charge-basis transmon.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::units::{mhz, to_mhz};

/// Ladder of M qubit levels with nearest-neighbour resonator couplings.
/// Frequencies are angular (rad/s) with ω₀ = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitSpec {
    level_freqs: Vec<f64>,
    couplings: Vec<f64>,
    label: String,
}

impl QubitSpec {
    pub fn new(level_freqs: Vec<f64>, couplings: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        let m = level_freqs.len();
        if m < 2 {
            return Err(Error::InvalidSpec(format!("need at least two levels, got {m}")));
        }
        if couplings.len() != m - 1 {
            return Err(Error::InvalidSpec(format!(
                "{m} levels need {} couplings, got {}",
                m - 1,
                couplings.len()
            )));
        }
        if level_freqs.iter().chain(&couplings).any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("non-finite frequency or coupling".into()));
        }
        if level_freqs[0] != 0.0 {
            return Err(Error::InvalidSpec(format!("ground level must sit at 0, got {}", level_freqs[0])));
        }
        if let Some(i) = level_freqs.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSpec(format!("level frequencies not increasing at level {}", i + 1)));
        }
        let transitions: Vec<f64> = level_freqs.windows(2).map(|w| w[1] - w[0]).collect();
        if transitions.len() >= 2 && transitions[1] < transitions[0] {
            if let Some(i) = transitions.windows(2).position(|w| w[1] >= w[0]) {
                return Err(Error::InvalidSpec(format!(
                    "negative-anharmonicity ladder with non-decreasing transition at level {}",
                    i + 1
                )));
            }
        }
        if let Some(i) = couplings.iter().position(|g| *g <= 0.0) {
            return Err(Error::InvalidSpec(format!("coupling g_{i} must be positive")));
        }
        Ok(Self { level_freqs, couplings, label: label.into() })
    }

    pub fn levels(&self) -> usize {
        self.level_freqs.len()
    }

    /// ωᵢ in rad/s.
    pub fn freqs(&self) -> &[f64] {
        &self.level_freqs
    }

    /// gᵢ (coupling of the i ↔ i+1 transition) in rad/s.
    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// ω_{i+1} − ωᵢ.
    pub fn transition(&self, i: usize) -> f64 {
        self.level_freqs[i + 1] - self.level_freqs[i]
    }

    /// The lowest `levels` levels of this ladder.
    pub fn truncated(&self, levels: usize) -> Result<Self> {
        if levels < 2 || levels > self.levels() {
            return Err(Error::InvalidSpec(format!(
                "cannot truncate {} levels to {levels}",
                self.levels()
            )));
        }
        Ok(Self {
            level_freqs: self.level_freqs[..levels].to_vec(),
            couplings: self.couplings[..levels - 1].to_vec(),
            label: self.label.clone(),
        })
    }

    /// Same ladder with every coupling multiplied by `factor`.
    pub fn with_scaled_couplings(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.level_freqs.clone(),
            self.couplings.iter().map(|g| g * factor).collect(),
            self.label.clone(),
        )
    }
}

/// Validated pass-through construction from angular frequencies.
pub fn explicit_spec(level_freqs: &[f64], couplings: &[f64]) -> Result<QubitSpec> {
    QubitSpec::new(level_freqs.to_vec(), couplings.to_vec(), "explicit")
}

/// Cooper-pair-box parameters, energies as linear frequencies in MHz.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmonParams {
    pub ec_mhz: f64,
    pub ej_mhz: f64,
    /// 0 ↔ 1 coupling at the reference Josephson energy.
    pub g_ref_mhz: f64,
    /// Josephson energy at which `g_ref_mhz` applies.
    pub ej_ref_mhz: f64,
    pub levels: usize,
    pub charge_basis_size: usize,
}

impl TransmonParams {
    pub const DEFAULT_CHARGE_BASIS: usize = 41;

    /// Parameters whose reference point is the given E_J.
    pub fn new(ec_mhz: f64, ej_mhz: f64, g_ref_mhz: f64, levels: usize) -> Self {
        Self {
            ec_mhz,
            ej_mhz,
            g_ref_mhz,
            ej_ref_mhz: ej_mhz,
            levels,
            charge_basis_size: Self::DEFAULT_CHARGE_BASIS,
        }
    }

    pub fn with_charge_basis(mut self, size: usize) -> Self {
        self.charge_basis_size = size;
        self
    }

    fn validate(&self) -> Result<()> {
        let nb = self.charge_basis_size;
        if self.levels < 2 {
            return Err(Error::InvalidParameter(format!("transmon needs at least two levels, got {}", self.levels)));
        }
        if nb % 2 == 0 || nb < 4 * self.levels + 1 {
            return Err(Error::InvalidParameter(format!(
                "charge basis size {nb} must be odd and at least {}",
                4 * self.levels + 1
            )));
        }
        if !(self.ec_mhz > 0.0 && self.ej_mhz > 0.0 && self.ej_ref_mhz > 0.0 && self.g_ref_mhz > 0.0) {
            return Err(Error::InvalidParameter("transmon energies and g_ref must be positive".into()));
        }
        if self.ej_mhz / self.ec_mhz < 20.0 {
            log::warn!("E_J/E_C = {:.2} is below the transmon regime", self.ej_mhz / self.ec_mhz);
        }
        Ok(())
    }
}

/// Edge weight of a retained eigenvector above which the charge basis is
/// considered too small.
const EDGE_WEIGHT_LIMIT: f64 = 1e-12;

/// Lowest `levels` energies (MHz, ground shifted to 0) and the charge matrix
/// elements |⟨i+1|n̂|i⟩| of 4E_C n̂² − E_J cos φ̂ at n_g = 0.
fn charge_basis_solve(ec: f64, ej: f64, levels: usize, nb: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let half = (nb / 2) as f64;
    let charge = |k: usize| k as f64 - half;
    let h = DMatrix::from_fn(nb, nb, |r, c| {
        if r == c {
            4.0 * ec * charge(r).powi(2)
        } else if r.abs_diff(c) == 1 {
            -0.5 * ej
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..nb).collect();
    order.sort_by(|a, b| eig.eigenvalues[*a].total_cmp(&eig.eigenvalues[*b]));
    let order = &order[..levels];

    let edge_weight = order
        .iter()
        .map(|&k| {
            let v = eig.eigenvectors.column(k);
            v[0].powi(2) + v[nb - 1].powi(2)
        })
        .fold(0.0, f64::max);
    if edge_weight > EDGE_WEIGHT_LIMIT {
        return Err(Error::BasisTooSmall { edge_weight });
    }

    let e0 = eig.eigenvalues[order[0]];
    let energies = order.iter().map(|&k| eig.eigenvalues[k] - e0).collect();
    let elements = order
        .windows(2)
        .map(|w| {
            let (a, b) = (eig.eigenvectors.column(w[0]), eig.eigenvectors.column(w[1]));
            (0..nb).map(|r| b[r] * charge(r) * a[r]).sum::<f64>().abs()
        })
        .collect();
    Ok((energies, elements))
}

/// Qubit ladder of a transmon: levels from charge-basis diagonalization,
/// couplings rescaled by the charge matrix elements relative to the reference
/// 0 ↔ 1 element at `ej_ref_mhz`.
pub fn transmon_spectrum(params: &TransmonParams) -> Result<QubitSpec> {
    params.validate()?;
    let nb = params.charge_basis_size;
    let (energies, elements) = charge_basis_solve(params.ec_mhz, params.ej_mhz, params.levels, nb)?;
    let (_, reference) = charge_basis_solve(params.ec_mhz, params.ej_ref_mhz, 2, nb)?;
    let freqs = energies.into_iter().map(mhz).collect();
    let couplings = elements.iter().map(|m| mhz(params.g_ref_mhz * m / reference[0])).collect();
    QubitSpec::new(
        freqs,
        couplings,
        format!("transmon EC={} MHz EJ={:.3} MHz", params.ec_mhz, params.ej_mhz),
    )
}

/// 0 → 1 transition frequency in MHz.
fn transition_mhz(params: &TransmonParams, ej: f64) -> Result<f64> {
    let (e, _) = charge_basis_solve(params.ec_mhz, ej, 2, params.charge_basis_size)?;
    Ok(e[1])
}

/// Frequency tolerance of [`tune_to_frequency`] in MHz (1 kHz).
pub const TUNING_TOLERANCE_MHZ: f64 = 1e-3;

/// Adjusts E_J by bisection on [20·E_C, E_J] so that ω₁₀/2π equals
/// `target_mhz`. The reference point for the coupling is kept.
pub fn tune_to_frequency(params: &TransmonParams, target_mhz: f64) -> Result<TransmonParams> {
    params.validate()?;
    let (mut lo, mut hi) = (20.0 * params.ec_mhz, params.ej_mhz);
    let (f_lo, f_hi) = (transition_mhz(params, lo)?, transition_mhz(params, hi)?);
    if !(f_lo - TUNING_TOLERANCE_MHZ..=f_hi + TUNING_TOLERANCE_MHZ).contains(&target_mhz) || lo > hi {
        return Err(Error::TargetUnreachable { target_mhz, low_mhz: f_lo, high_mhz: f_hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if transition_mhz(params, mid)? < target_mhz {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    let mut tuned = params.clone();
    tuned.ej_mhz = 0.5 * (lo + hi);
    let reached = transition_mhz(&tuned, tuned.ej_mhz)?;
    debug_assert!((reached - target_mhz).abs() < TUNING_TOLERANCE_MHZ);
    log::debug!("tuned E_J to {:.4} MHz (f01 = {:.6} MHz)", tuned.ej_mhz, to_mhz(mhz(reached)));
    Ok(tuned)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::to_mhz;

    fn tuned_reference() -> (TransmonParams, QubitSpec) {
        let p = tune_to_frequency(&TransmonParams::new(300.0, 25_000.0, 15.0, 5), 6000.0).unwrap();
        let s = transmon_spectrum(&p).unwrap();
        (p, s)
    }

    #[test]
    fn tuned_transmon_values() {
        let (p, s) = tuned_reference();
        assert!((p.ej_mhz - 16_623.776).abs() < 0.01, "E_J = {}", p.ej_mhz);
        let f: Vec<f64> = s.freqs().iter().map(|w| to_mhz(*w)).collect();
        for (got, want) in f.iter().zip([0.0, 6000.0, 11_658.313, 16_936.580, 21_747.806]) {
            assert!((got - want).abs() < 1e-2, "{got} vs {want}");
        }
        let g: Vec<f64> = s.couplings().iter().map(|w| to_mhz(*w)).collect();
        for (got, want) in g.iter().zip([13.4757, 18.4991, 21.8569, 24.1053]) {
            assert!((got - want).abs() < 1e-3, "{got} vs {want}");
        }
    }

    #[test]
    fn tuning_fixed_point() {
        let p = TransmonParams::new(300.0, 16_000.0, 15.0, 3);
        let f = transition_mhz(&p, p.ej_mhz).unwrap();
        let tuned = tune_to_frequency(&p, f).unwrap();
        assert!((tuned.ej_mhz - p.ej_mhz).abs() < 1e-3);
    }

    #[test]
    fn unreachable_target() {
        let p = TransmonParams::new(300.0, 25_000.0, 15.0, 3);
        assert!(matches!(tune_to_frequency(&p, 9000.0), Err(Error::TargetUnreachable { .. })));
        assert!(matches!(tune_to_frequency(&p, 1000.0), Err(Error::TargetUnreachable { .. })));
    }

    #[test]
    fn charge_basis_converged() {
        let (p, s) = tuned_reference();
        let big = transmon_spectrum(&p.clone().with_charge_basis(81)).unwrap();
        for (a, b) in s.freqs().iter().zip(big.freqs()) {
            assert!(to_mhz((a - b).abs()) < 1e-6);
        }
    }

    #[test]
    fn transmon_regime_properties() {
        let (_, s) = tuned_reference();
        // E_J/E_C ≈ 55 here; the anharmonicity sits about 14% beyond −E_C.
        let anh = to_mhz(s.transition(1) - s.transition(0));
        assert!((anh + 341.687).abs() < 1e-2, "anharmonicity {anh}");
        let g0 = s.couplings()[0];
        for (i, g) in s.couplings().iter().enumerate().skip(1) {
            assert!(g / g0 < ((i + 1) as f64).sqrt());
        }
    }

    #[test]
    fn harmonic_limit() {
        let p = TransmonParams::new(1.0, 1.0e6, 1.0, 4).with_charge_basis(401);
        let s = transmon_spectrum(&p).unwrap();
        let t0 = s.transition(0);
        for i in 1..3 {
            assert!((s.transition(i) / t0 - 1.0).abs() < 2e-3);
            assert!((s.couplings()[i] / s.couplings()[0] - ((i + 1) as f64).sqrt()).abs() < 5e-3);
        }
    }

    #[test]
    fn small_basis_detected() {
        let p = TransmonParams::new(300.0, 25_000.0, 15.0, 3).with_charge_basis(13);
        assert!(matches!(transmon_spectrum(&p), Err(Error::BasisTooSmall { .. })));
        let even = TransmonParams::new(300.0, 25_000.0, 15.0, 3).with_charge_basis(40);
        assert!(matches!(transmon_spectrum(&even), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn explicit_specs() {
        assert!(explicit_spec(&[0.0, mhz(6000.0)], &[mhz(10.0)]).is_ok());
        assert!(matches!(
            explicit_spec(&[0.0, mhz(6000.0), mhz(5000.0)], &[mhz(10.0), mhz(10.0)]),
            Err(Error::InvalidSpec(_))
        ));
        assert!(explicit_spec(&[0.0, mhz(6000.0)], &[mhz(-1.0)]).is_err());
        assert!(explicit_spec(&[0.0, mhz(6000.0)], &[]).is_err());
        let bad_anh = [0.0, mhz(6000.0), mhz(11_700.0), mhz(17_500.0)];
        assert!(explicit_spec(&bad_anh, &[mhz(10.0); 3]).is_err());

        let (_, s) = tuned_reference();
        let round = explicit_spec(s.freqs(), s.couplings()).unwrap();
        assert_eq!(round.freqs(), s.freqs());
        assert_eq!(round.couplings(), s.couplings());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]

        #[test]
        fn anharmonicity_near_minus_ec(ratio in 100.0f64..400.0, ec in 150.0f64..400.0) {
            let p = TransmonParams::new(ec, ratio * ec, 15.0, 3).with_charge_basis(61);
            let s = transmon_spectrum(&p).unwrap();
            let anh = to_mhz(s.transition(1) - s.transition(0));
            proptest::prop_assert!((anh + ec).abs() < 0.1 * ec);
            let g = s.couplings();
            proptest::prop_assert!(g[1] / g[0] < 2f64.sqrt());
        }
    }
}
