use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("Fock truncation overflow: tail population {population:.3e} at t = {time:.3e} s")]
    TruncationOverflow { population: f64, time: f64 },

    #[error("invalid qubit specification: {0}")]
    InvalidSpec(String),

    #[error("charge basis too small: edge weight {edge_weight:.3e}")]
    BasisTooSmall { edge_weight: f64 },

    #[error("target 0->1 frequency {target_mhz} MHz outside reachable range [{low_mhz}, {high_mhz}] MHz")]
    TargetUnreachable { target_mhz: f64, low_mhz: f64, high_mhz: f64 },

    #[error("transition {level} is within the resonance guard (detuning {detuning_mhz:.4} MHz)")]
    ResonanceGuard { level: usize, detuning_mhz: f64 },

    #[error("two-photon transition {level} is within the resonance guard (detuning {detuning_mhz:.4} MHz)")]
    TwoPhotonResonanceGuard { level: usize, detuning_mhz: f64 },

    #[error("need at least {needed} points for the fit, found {found}")]
    InsufficientPoints { needed: usize, found: usize },

    #[error("resonator is not bistable (reduced detuning {reduced_detuning:.4})")]
    NotBistable { reduced_detuning: f64 },

    #[error("step size underflow at t = {time:.4e} s (h = {step:.3e} s)")]
    StepSizeUnderflow { time: f64, step: f64 },

    #[error("Q-function peaks unresolved around r* = {threshold:.3}")]
    PeaksUnresolved { threshold: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// Numerical failures (as opposed to guard or validation failures).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::TruncationOverflow { .. }
                | Error::StepSizeUnderflow { .. }
                | Error::BasisTooSmall { .. }
                | Error::PeaksUnresolved { .. }
        )
    }
}
