use std::ops::RangeInclusive;

use crate::error::{Error, Result};

/// Admissible sizes for a [`HilbertLayout`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayoutBounds {
    pub levels: RangeInclusive<usize>,
    pub fock: RangeInclusive<usize>,
}

impl Default for LayoutBounds {
    fn default() -> Self {
        Self { levels: 2..=10, fock: 8..=512 }
    }
}

impl LayoutBounds {
    /// Accepts any non-empty space. Used for toy spaces in tests and for the
    /// charge-basis and ladder computations that manage their own sizes.
    pub fn permissive() -> Self {
        Self { levels: 1..=usize::MAX, fock: 1..=usize::MAX }
    }
}

/// Truncated qubit ⊗ Fock space with qubit-major ordering:
/// basis index = qubit_level · N + fock_index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HilbertLayout {
    levels: usize,
    fock: usize,
}

impl HilbertLayout {
    pub fn new(levels: usize, fock: usize) -> Result<Self> {
        Self::with_bounds(levels, fock, &LayoutBounds::default())
    }

    pub fn with_bounds(levels: usize, fock: usize, bounds: &LayoutBounds) -> Result<Self> {
        if !bounds.levels.contains(&levels) {
            return Err(Error::InvalidLayout(format!(
                "qubit level count {levels} outside {:?}",
                bounds.levels
            )));
        }
        if !bounds.fock.contains(&fock) {
            return Err(Error::InvalidLayout(format!(
                "Fock truncation {fock} outside {:?}",
                bounds.fock
            )));
        }
        Ok(Self { levels, fock })
    }

    /// Qubit level count M.
    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Fock truncation N.
    pub fn fock(&self) -> usize {
        self.fock
    }

    pub fn dim(&self) -> usize {
        self.levels * self.fock
    }

    #[inline]
    pub fn index(&self, level: usize, n: usize) -> usize {
        debug_assert!(level < self.levels && n < self.fock);
        level * self.fock + n
    }

    #[inline]
    pub fn split(&self, index: usize) -> (usize, usize) {
        (index / self.fock, index % self.fock)
    }

    /// Errors unless `level` < M.
    pub fn check_level_pub(&self, level: usize) -> Result<()> {
        self.check_level(level)
    }

    pub(crate) fn check_level(&self, level: usize) -> Result<()> {
        if level < self.levels {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: level, limit: self.levels })
        }
    }
}
