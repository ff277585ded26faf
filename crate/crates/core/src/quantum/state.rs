use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::{ComplexMatrix, HilbertLayout};
use crate::error::{Error, Result};

/// Largest admissible weight lost beyond the Fock truncation by a coherent state.
pub const COHERENT_TAIL_TOLERANCE: f64 = 1e-6;

/// Exact truncated coherent-state components e^{−|α|²/2} αⁿ/√(n!), n < N,
/// without renormalization.
pub fn coherent_amplitudes(fock: usize, alpha: C64) -> Vec<C64> {
    let mut out = Vec::with_capacity(fock);
    let mut c = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..fock {
        out.push(c);
        c = c * alpha / ((n + 1) as f64).sqrt();
    }
    out
}

/// Normalized truncated coherent state |α⟩ on an N-level Fock space.
pub fn coherent_vector(fock: usize, alpha: C64) -> Result<Vec<C64>> {
    let mut c = coherent_amplitudes(fock, alpha);
    let weight: f64 = c.iter().map(|v| v.norm_sqr()).sum();
    let tail = 1.0 - weight;
    if tail > COHERENT_TAIL_TOLERANCE {
        return Err(Error::TruncationOverflow { population: tail, time: 0.0 });
    }
    let s = weight.sqrt().recip();
    c.iter_mut().for_each(|v| *v *= s);
    Ok(c)
}

/// Density matrix over a qubit ⊗ Fock layout, stored dense and row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    layout: HilbertLayout,
    data: Vec<C64>,
    time: f64,
}

impl DensityMatrix {
    pub fn from_row_major(layout: HilbertLayout, data: Vec<C64>, time: f64) -> Result<Self> {
        let d = layout.dim();
        if data.len() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, found: data.len() });
        }
        Ok(Self { layout, data, time })
    }

    /// |ψ⟩⟨ψ| for a state vector ψ (not renormalized).
    pub fn pure(layout: HilbertLayout, psi: &[C64]) -> Result<Self> {
        let d = layout.dim();
        if psi.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: psi.len() });
        }
        let mut data = vec![C64::new(0.0, 0.0); d * d];
        for (r, a) in psi.iter().enumerate() {
            if *a == C64::new(0.0, 0.0) {
                continue;
            }
            for (c, b) in psi.iter().enumerate() {
                data[r * d + c] = a * b.conj();
            }
        }
        Ok(Self { layout, data, time: 0.0 })
    }

    /// Product state |level⟩ ⊗ |n⟩.
    pub fn basis(layout: HilbertLayout, level: usize, n: usize) -> Result<Self> {
        layout.check_level(level)?;
        if n >= layout.fock() {
            return Err(Error::IndexOutOfRange { index: n, limit: layout.fock() });
        }
        let d = layout.dim();
        let k = layout.index(level, n);
        let mut data = vec![C64::new(0.0, 0.0); d * d];
        data[k * d + k] = C64::new(1.0, 0.0);
        Ok(Self { layout, data, time: 0.0 })
    }

    /// |level⟩ ⊗ |β⟩ with a normalized truncated coherent state.
    pub fn coherent(layout: HilbertLayout, level: usize, beta: C64) -> Result<Self> {
        layout.check_level(level)?;
        let c = coherent_vector(layout.fock(), beta)?;
        let mut psi = vec![C64::new(0.0, 0.0); layout.dim()];
        for (n, v) in c.into_iter().enumerate() {
            psi[layout.index(level, n)] = v;
        }
        Self::pure(layout, &psi)
    }

    /// 1/d on the diagonal.
    pub fn maximally_mixed(layout: HilbertLayout) -> Self {
        let d = layout.dim();
        let mut data = vec![C64::new(0.0, 0.0); d * d];
        for k in 0..d {
            data[k * d + k] = C64::new(1.0 / d as f64, 0.0);
        }
        Self { layout, data, time: 0.0 }
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.dim() + c]
    }

    pub fn trace(&self) -> C64 {
        let d = self.dim();
        (0..d).map(|k| self.data[k * d + k]).sum()
    }

    /// Tr(ρA).
    pub fn expectation(&self, op: &ComplexMatrix) -> Result<C64> {
        let d = self.dim();
        if op.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: op.dim() });
        }
        // Tr(ρA) = Σ_{r,c} A[r,c] ρ[c,r]
        Ok(op.entries().map(|(r, c, v)| v * self.data[c * d + r]).sum())
    }

    /// Qubit level populations P_i.
    pub fn populations(&self) -> Vec<f64> {
        let (m, n, d) = (self.layout.levels(), self.layout.fock(), self.dim());
        (0..m)
            .map(|q| (0..n).map(|k| self.data[(q * n + k) * (d + 1)].re).sum())
            .collect()
    }

    /// Photon-number distribution summed over qubit levels.
    pub fn fock_distribution(&self) -> Vec<f64> {
        let (m, n, d) = (self.layout.levels(), self.layout.fock(), self.dim());
        (0..n)
            .map(|k| (0..m).map(|q| self.data[(q * n + k) * (d + 1)].re).sum())
            .collect()
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.fock_distribution().iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    /// ⟨a⟩ = Σ √n ρ[(q,n),(q,n−1)].
    pub fn mean_field(&self) -> C64 {
        let (m, n, d) = (self.layout.levels(), self.layout.fock(), self.dim());
        let mut acc = C64::new(0.0, 0.0);
        for q in 0..m {
            for k in 1..n {
                acc += self.data[(q * n + k) * d + q * n + k - 1] * (k as f64).sqrt();
            }
        }
        acc
    }

    /// Population of the `count` highest Fock levels.
    pub fn top_fock_population(&self, count: usize) -> f64 {
        let p = self.fock_distribution();
        p.iter().rev().take(count).sum()
    }

    /// Resonator state Tr_qubit ρ as an N×N matrix.
    pub fn resonator_state(&self) -> DMatrix<C64> {
        let (m, n, d) = (self.layout.levels(), self.layout.fock(), self.dim());
        DMatrix::from_fn(n, n, |r, c| (0..m).map(|q| self.data[(q * n + r) * d + q * n + c]).sum())
    }

    /// Qubit state Tr_Fock ρ as an M×M matrix.
    pub fn qubit_state(&self) -> DMatrix<C64> {
        let (m, n, d) = (self.layout.levels(), self.layout.fock(), self.dim());
        DMatrix::from_fn(m, m, |i, j| (0..n).map(|k| self.data[(i * n + k) * d + j * n + k]).sum())
    }

    /// max |ρ − ρ†|.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self.data[r * d + c] - self.data[c * d + r].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part. Costs a full eigensolve.
    pub fn min_eigenvalue(&self) -> f64 {
        let d = self.dim();
        let m = DMatrix::from_fn(d, d, |r, c| 0.5 * (self.data[r * d + c] + self.data[c * d + r].conj()));
        m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }
}
