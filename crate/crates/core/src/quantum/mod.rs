//! Truncated qubit ⊗ Fock operators, density matrices and phase-space tools.

mod layout;
mod operator;
mod qfunc;
mod state;

pub use layout::{HilbertLayout, LayoutBounds};
pub use operator::{ComplexMatrix, CsrMatrix, SPARSE_POPULATION};
pub use qfunc::{q_function, q_function_resonator, PhaseSpaceGrid, QFunction, Q_WEIGHT_TOLERANCE};
pub use state::{coherent_amplitudes, coherent_vector, DensityMatrix, COHERENT_TAIL_TOLERANCE};

pub use num_complex::Complex64 as C64;

use crate::error::Result;

/// Resonator annihilation operator a ⊗ 1 with √n on the Fock sub-diagonal.
pub fn annihilation(layout: &HilbertLayout) -> ComplexMatrix {
    let n_fock = layout.fock();
    let trip = (0..layout.levels()).flat_map(move |q| {
        (1..n_fock).map(move |n| (q * n_fock + n - 1, q * n_fock + n, C64::new((n as f64).sqrt(), 0.0)))
    });
    ComplexMatrix::from_triplets(layout.dim(), trip)
}

pub fn creation(layout: &HilbertLayout) -> ComplexMatrix {
    annihilation(layout).adjoint()
}

/// Photon number a†a.
pub fn number(layout: &HilbertLayout) -> ComplexMatrix {
    let trip = (0..layout.dim()).map(|k| {
        let (_, n) = layout.split(k);
        (k, k, C64::new(n as f64, 0.0))
    });
    ComplexMatrix::from_triplets(layout.dim(), trip)
}

/// Π_{i,j} ⊗ 1 = |i⟩⟨j| ⊗ 1_Fock.
pub fn qubit_projector(layout: &HilbertLayout, i: usize, j: usize) -> Result<ComplexMatrix> {
    layout.check_level(i)?;
    layout.check_level(j)?;
    let trip = (0..layout.fock()).map(|n| (layout.index(i, n), layout.index(j, n), C64::new(1.0, 0.0)));
    Ok(ComplexMatrix::from_triplets(layout.dim(), trip))
}
