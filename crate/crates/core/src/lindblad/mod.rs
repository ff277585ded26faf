//! Driven, dissipative qubit-resonator dynamics in the frame rotating at ω_d:
//!
//! H = Σᵢ(ωᵢ − iω_d)Π_{i,i} + (ω_r − ω_d)a†a + (K/2)a†a†aa
//!     + Σᵢ gᵢ(a†Π_{i,i+1} + aΠ_{i+1,i}) + ε(t)(a + a†),
//!
//! with dissipators κD[a] and γΣᵢD[(gᵢ/g₀)Π_{i,i+1}].

mod engine;
mod generator;
mod integrator;

pub use engine::{
    evolve, evolve_from, steady_photon_number, EngineState, Envelope, Observation, SimulationConfig, Trajectory,
    DEFAULT_HORIZON, TRUNCATION_LEVELS, TRUNCATION_LIMIT,
};
pub use generator::{Generator, PackedLayout};
pub use integrator::{rms_error, Dopri5, IntegratorOptions, OdeSystem, StepStats};

use num_complex::Complex64 as C64;

use crate::dispersive::DriveContext;
use crate::error::Result;
use crate::quantum::{annihilation, qubit_projector, ComplexMatrix, HilbertLayout};
use crate::qubit::QubitSpec;

/// Rotating-frame Hamiltonian at drive amplitude `eps`, qubit-major layout.
pub fn hamiltonian(layout: &HilbertLayout, spec: &QubitSpec, ctx: &DriveContext, eps: f64) -> Result<ComplexMatrix> {
    let (m, n) = (layout.levels(), layout.fock());
    layout.check_level_pub(m - 1)?;
    if spec.levels() < m {
        return Err(crate::Error::InvalidSpec(format!("spec has {} levels, layout needs {m}", spec.levels())));
    }
    let mut trip = Vec::new();
    for q in 0..m {
        for k in 0..n {
            let nf = k as f64;
            let e = spec.freqs()[q] - q as f64 * ctx.omega_d
                + (ctx.omega_r - ctx.omega_d) * nf
                + 0.5 * ctx.kerr * nf * (nf - 1.0);
            trip.push((layout.index(q, k), layout.index(q, k), C64::new(e, 0.0)));
            if k + 1 < n {
                let s = (nf + 1.0).sqrt();
                let drive = C64::new(eps * s, 0.0);
                trip.push((layout.index(q, k), layout.index(q, k + 1), drive));
                trip.push((layout.index(q, k + 1), layout.index(q, k), drive));
                if q + 1 < m {
                    // a†Π_{q,q+1}: |q, k+1⟩⟨q+1, k|.
                    let g = C64::new(spec.couplings()[q] * s, 0.0);
                    trip.push((layout.index(q, k + 1), layout.index(q + 1, k), g));
                    trip.push((layout.index(q + 1, k), layout.index(q, k + 1), g));
                }
            }
        }
    }
    Ok(ComplexMatrix::from_triplets(layout.dim(), trip))
}

/// H(t) for a simulation configuration.
pub fn build_hamiltonian(config: &SimulationConfig, t: f64) -> Result<ComplexMatrix> {
    hamiltonian(&config.layout, &config.spec, &config.ctx, config.envelope.value(t))
}

/// Collapse operators √κ a and √γ (gᵢ/g₀)Π_{i,i+1}.
pub fn collapse_operators(config: &SimulationConfig) -> Result<Vec<ComplexMatrix>> {
    let layout = &config.layout;
    let mut ops = vec![&annihilation(layout) * config.ctx.kappa.sqrt()];
    let g = config.spec.couplings();
    for i in 0..layout.levels() - 1 {
        let w = config.gamma.sqrt() * g[i] / g[0];
        ops.push(&qubit_projector(layout, i, i + 1)? * w);
    }
    Ok(ops)
}
