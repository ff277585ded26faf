//! Simulation toolkit for bifurcation readout of a multi-level qubit through a
//! Kerr nonlinear resonator: transmon spectra, dispersive coefficients, an
//! exact-diagonalization oracle, semiclassical bistability analysis, Lindblad
//! dynamics and sample-and-hold readout.

pub mod dispersive;
pub mod error;
pub mod lindblad;
pub mod oracle;
pub mod presets;
pub mod quantum;
pub mod qubit;
pub mod readout;
pub mod semiclassical;
pub mod units;

pub use error::{Error, Result};
