//! Numerical ac-Stark and Kerr coefficients from exact diagonalization of the
//! undriven Jaynes-Cummings ladder (K = 0).
//!
//! The rotating-wave coupling conserves the excitation number i + n, so the
//! Hamiltonian is diagonalized block by block; each block is exact and no
//! Fock truncation enters.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::qubit::QubitSpec;

/// Assignments with squared overlap at or below this are ambiguous.
pub const OVERLAP_THRESHOLD: f64 = 0.5;

/// Default highest photon number of the ladder used in fits.
pub const DEFAULT_N_FIT: usize = 5;

/// Dressed energies E_{i,n} for i < M, n ≤ N_fit, with their squared
/// overlaps with the bare states |i,n⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct DressedLadder {
    levels: usize,
    n_fit: usize,
    energies: Vec<f64>,
    overlaps: Vec<f64>,
}

impl DressedLadder {
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn n_fit(&self) -> usize {
        self.n_fit
    }

    fn slot(&self, i: usize, n: usize) -> usize {
        i * (self.n_fit + 1) + n
    }

    pub fn energy(&self, i: usize, n: usize) -> f64 {
        self.energies[self.slot(i, n)]
    }

    pub fn overlap(&self, i: usize, n: usize) -> f64 {
        self.overlaps[self.slot(i, n)]
    }

    /// Smallest squared overlap along the ladder of level i.
    pub fn min_overlap(&self, i: usize) -> f64 {
        (0..=self.n_fit).map(|n| self.overlap(i, n)).fold(f64::INFINITY, f64::min)
    }

    /// Entries whose assignment is ambiguous (overlap² ≤ 0.5).
    pub fn ambiguous(&self) -> Vec<(usize, usize)> {
        (0..self.levels)
            .flat_map(|i| (0..=self.n_fit).map(move |n| (i, n)))
            .filter(|&(i, n)| self.overlap(i, n) <= OVERLAP_THRESHOLD)
            .collect()
    }
}

/// Diagonalizes H_q + ω_r a†a + Σ gᵢ(a†Π_{i,i+1} + h.c.) and assigns each bare
/// state |i,n⟩ (n ≤ n_fit) to the eigenstate of largest overlap.
pub fn dressed_energies(spec: &QubitSpec, omega_r: f64, n_fit: usize) -> Result<DressedLadder> {
    if n_fit == 0 {
        return Err(Error::InsufficientPoints { needed: 2, found: 1 });
    }
    let m = spec.levels();
    let w = spec.freqs();
    let g = spec.couplings();
    let mut energies = vec![0.0; m * (n_fit + 1)];
    let mut overlaps = vec![0.0; m * (n_fit + 1)];

    for k in 0..m + n_fit {
        // Block basis |i, k − i⟩ for every level i ≤ k.
        let top = k.min(m - 1);
        let size = top + 1;
        let h = DMatrix::from_fn(size, size, |r, c| {
            if r == c {
                w[r] + (k - r) as f64 * omega_r
            } else if r.abs_diff(c) == 1 {
                // ⟨i+1, n| H |i, n+1⟩ = gᵢ √(n+1) with n = k − i − 1.
                let i = r.min(c);
                g[i] * ((k - i) as f64).sqrt()
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(h);
        for i in 0..size {
            let n = k - i;
            if n > n_fit {
                continue;
            }
            let (best, weight) = (0..size)
                .map(|col| (col, eig.eigenvectors[(i, col)].powi(2)))
                .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            let slot = i * (n_fit + 1) + n;
            energies[slot] = eig.eigenvalues[best];
            overlaps[slot] = weight;
        }
    }
    let ladder = DressedLadder { levels: m, n_fit, energies, overlaps };
    for (i, n) in ladder.ambiguous() {
        log::debug!("ambiguous dressed-state assignment at (i={i}, n={n}): overlap² {:.3}", ladder.overlap(i, n));
    }
    Ok(ladder)
}

/// Fitted coefficients for one qubit level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleCoefficients {
    /// 𝕊ᵢ^num = c₀ − ω_r − c₁/2.
    pub stark: f64,
    /// 𝕂ᵢ^num = c₁/2.
    pub kerr: f64,
    /// Quadratic coefficient c₂ of the fit.
    pub curvature: f64,
    /// Smallest squared overlap entering the fit.
    pub min_overlap: f64,
}

impl OracleCoefficients {
    /// True when the curvature term rivals the Kerr slope over the fit range,
    /// signalling a breakdown of the quadratic energy model.
    pub fn fit_breakdown(&self, n_fit: usize) -> bool {
        self.curvature.abs() * n_fit as f64 > (2.0 * self.kerr).abs()
    }
}

/// Least-squares fit of ω_{r,i}(n) = E_{i,n+1} − E_{i,n}, n = 0..N_fit−1, to
/// c₀ + c₁n + c₂n², mapped to (𝕊ᵢ^num, 𝕂ᵢ^num).
pub fn extract_coefficients(ladder: &DressedLadder, omega_r: f64) -> Result<Vec<OracleCoefficients>> {
    let points = ladder.n_fit();
    if points < 4 {
        return Err(Error::InsufficientPoints { needed: 4, found: points });
    }
    let design = DMatrix::from_fn(points, 3, |r, c| (r as f64).powi(c as i32));
    // Fit in units relative to ω_r to keep the normal equations well scaled.
    let scale = omega_r.abs().max(1.0);
    let qr = design.clone().qr();
    (0..ladder.levels())
        .map(|i| {
            let y = DVector::from_fn(points, |n, _| (ladder.energy(i, n + 1) - ladder.energy(i, n) - omega_r) / scale);
            let rhs = qr.q().transpose() * y;
            let coef = qr
                .r()
                .solve_upper_triangular(&rhs)
                .ok_or(Error::InsufficientPoints { needed: 3, found: points })?;
            let (c0, c1, c2) = (coef[0] * scale, coef[1] * scale, coef[2] * scale);
            Ok(OracleCoefficients {
                stark: c0 - 0.5 * c1,
                kerr: 0.5 * c1,
                curvature: c2,
                min_overlap: ladder.min_overlap(i),
            })
        })
        .collect()
}

/// [`dressed_energies`] followed by [`extract_coefficients`].
pub fn oracle_coefficients(spec: &QubitSpec, omega_r: f64, n_fit: usize) -> Result<Vec<OracleCoefficients>> {
    extract_coefficients(&dressed_energies(spec, omega_r, n_fit)?, omega_r)
}
