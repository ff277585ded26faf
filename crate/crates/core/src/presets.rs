//! Reference parameter set: a 6 GHz transmon with E_C = 300 MHz tuned down
//! from E_J = 25 GHz, coupled to a 5 MHz-wide resonator with K/2π = −0.4 MHz.

use crate::error::Result;
use crate::qubit::{transmon_spectrum, tune_to_frequency, QubitSpec, TransmonParams};

pub const EC_MHZ: f64 = 300.0;
pub const EJ_REF_MHZ: f64 = 25_000.0;
pub const G_REF_MHZ: f64 = 15.0;
pub const F01_MHZ: f64 = 6000.0;

pub const KAPPA_MHZ: f64 = 5.0;
pub const KERR_MHZ: f64 = -0.4;
/// Resonator-drive detuning (ω_r − ω_d)/2π kept fixed while ω_d is swept.
pub const LOCK_DETUNING_MHZ: f64 = 15.0;

/// Operating point outside the straddling regime.
pub const POINT_A_MHZ: f64 = 5720.0;
/// Operating point inside the straddling regime.
pub const POINT_B_MHZ: f64 = 6044.0;

/// Untuned transmon parameters with `levels` levels.
pub fn transmon_params(levels: usize) -> TransmonParams {
    TransmonParams::new(EC_MHZ, EJ_REF_MHZ, G_REF_MHZ, levels)
}

/// The reference transmon tuned to ω₁₀/2π = 6 GHz.
pub fn reference_transmon(levels: usize) -> Result<QubitSpec> {
    let tuned = tune_to_frequency(&transmon_params(levels), F01_MHZ)?;
    transmon_spectrum(&tuned)
}
