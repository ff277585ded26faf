use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::{coherent_amplitudes, DensityMatrix};

/// Allowed shortfall of the integrated Q function before a normalization
/// warning is raised.
pub const Q_WEIGHT_TOLERANCE: f64 = 1e-3;

/// Square grid over the complex plane, |Re α|, |Im α| ≤ half_width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpaceGrid {
    half_width: f64,
    points: usize,
}

impl PhaseSpaceGrid {
    pub fn square(half_width: f64, points: usize) -> Self {
        assert!(half_width > 0.0 && points >= 2, "degenerate phase-space grid");
        Self { half_width, points }
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Points per axis.
    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.spacing().powi(2)
    }

    pub fn coordinate(&self, k: usize) -> f64 {
        -self.half_width + k as f64 * self.spacing()
    }

    /// Grid point α at column `ix` (real part) and row `iy` (imaginary part).
    pub fn alpha(&self, ix: usize, iy: usize) -> C64 {
        C64::new(self.coordinate(ix), self.coordinate(iy))
    }
}

/// Husimi Q function sampled on a [`PhaseSpaceGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct QFunction {
    grid: PhaseSpaceGrid,
    values: Vec<f64>,
    weight: f64,
}

impl QFunction {
    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    /// Values in row-major order, row index = imaginary part.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.grid.points() + ix]
    }

    /// Cell-sum integral Σ Q ΔA.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// True when the grid misses more than [`Q_WEIGHT_TOLERANCE`] of the state.
    pub fn normalization_warning(&self) -> bool {
        (self.weight - 1.0).abs() > Q_WEIGHT_TOLERANCE
    }

    /// Σ Q ΔA over grid points with |α| > r.
    pub fn weight_beyond(&self, r: f64) -> f64 {
        let p = self.grid.points();
        let mut acc = 0.0;
        for iy in 0..p {
            for ix in 0..p {
                if self.grid.alpha(ix, iy).norm() > r {
                    acc += self.values[iy * p + ix];
                }
            }
        }
        acc * self.grid.cell_area()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Q(α) = ⟨α| Tr_qubit ρ |α⟩ / π on every grid point.
pub fn q_function(rho: &DensityMatrix, grid: PhaseSpaceGrid) -> QFunction {
    q_function_resonator(&rho.resonator_state(), grid)
}

/// Q function of a resonator density matrix given directly.
pub fn q_function_resonator(rho_r: &DMatrix<C64>, grid: PhaseSpaceGrid) -> QFunction {
    let n = rho_r.nrows();
    let p = grid.points();
    let values: Vec<f64> = (0..p * p)
        .into_par_iter()
        .map(|k| {
            let c = coherent_amplitudes(n, grid.alpha(k % p, k / p));
            let mut acc = C64::new(0.0, 0.0);
            for col in 0..n {
                let column = rho_r.column(col);
                let mut inner = C64::new(0.0, 0.0);
                for row in 0..n {
                    inner += c[row].conj() * column[row];
                }
                acc += inner * c[col];
            }
            acc.re / PI
        })
        .collect();
    let weight = values.iter().sum::<f64>() * grid.cell_area();
    if (weight - 1.0).abs() > Q_WEIGHT_TOLERANCE {
        log::warn!("Q-function grid captures weight {weight:.5}; enlarge the grid");
    }
    QFunction { grid, values, weight }
}
