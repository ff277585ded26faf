use std::collections::BTreeMap;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Operators whose fill fraction is below this are kept in CSR form.
pub const SPARSE_POPULATION: f64 = 0.1;

/// Square compressed-sparse-row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl CsrMatrix {
    /// Duplicate entries are summed; exact zeros are dropped.
    pub fn from_triplets<I>(dim: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        let mut rows: Vec<BTreeMap<usize, C64>> = vec![BTreeMap::new(); dim];
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "triplet ({r}, {c}) outside {dim}x{dim}");
            *rows[r].entry(c).or_insert(C64::new(0.0, 0.0)) += v;
        }
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (c, v) in row {
                if v != C64::new(0.0, 0.0) {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { dim, row_ptr, cols, vals }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_triplets(dim, (0..dim).map(|i| (i, i, C64::new(1.0, 0.0))))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Nonzeros of row `r` as `(column, value)` pairs.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&c) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn cols(&self) -> &[usize] {
        &self.cols
    }

    pub fn vals(&self) -> &[C64] {
        &self.vals
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.dim, self.triplets().map(|(r, c, v)| (c, r, v.conj())))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        for r in 0..self.dim {
            let mut acc: BTreeMap<usize, C64> = BTreeMap::new();
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    *acc.entry(c).or_insert(C64::new(0.0, 0.0)) += a * b;
                }
            }
            out.extend(acc.into_iter().map(|(c, v)| (r, c, v)));
        }
        Self::from_triplets(self.dim, out)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Sparse(CsrMatrix),
    Dense(DMatrix<C64>),
}

/// Square complex operator; stored sparse when its population is below
/// [`SPARSE_POPULATION`], dense otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    repr: Repr,
}

impl ComplexMatrix {
    pub fn from_triplets<I>(dim: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        Self::from_csr(CsrMatrix::from_triplets(dim, triplets))
    }

    pub fn from_csr(csr: CsrMatrix) -> Self {
        let dim = csr.dim().max(1);
        if (csr.nnz() as f64) < SPARSE_POPULATION * (dim * dim) as f64 {
            Self { repr: Repr::Sparse(csr) }
        } else {
            Self { repr: Repr::Dense(csr.to_dense()) }
        }
    }

    pub fn from_dense(m: DMatrix<C64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "operator must be square");
        let nnz = m.iter().filter(|v| **v != C64::new(0.0, 0.0)).count();
        let dim = m.nrows().max(1);
        if (nnz as f64) < SPARSE_POPULATION * (dim * dim) as f64 {
            let n = m.nrows();
            let trip: Vec<_> = (0..n)
                .flat_map(|r| (0..n).map(move |c| (r, c)))
                .filter_map(|(r, c)| {
                    let v = m[(r, c)];
                    (v != C64::new(0.0, 0.0)).then_some((r, c, v))
                })
                .collect();
            Self { repr: Repr::Sparse(CsrMatrix::from_triplets(n, trip)) }
        } else {
            Self { repr: Repr::Dense(m) }
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_csr(CsrMatrix::identity(dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self { repr: Repr::Sparse(CsrMatrix::from_triplets(dim, std::iter::empty())) }
    }

    pub fn dim(&self) -> usize {
        match &self.repr {
            Repr::Sparse(s) => s.dim(),
            Repr::Dense(d) => d.nrows(),
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.repr, Repr::Sparse(_))
    }

    /// Sparse view, when the operator is stored sparse.
    pub fn as_csr(&self) -> Option<&CsrMatrix> {
        match &self.repr {
            Repr::Sparse(s) => Some(s),
            Repr::Dense(_) => None,
        }
    }

    pub fn to_csr(&self) -> CsrMatrix {
        match &self.repr {
            Repr::Sparse(s) => s.clone(),
            Repr::Dense(d) => {
                let n = d.nrows();
                CsrMatrix::from_triplets(
                    n,
                    (0..n).flat_map(|r| (0..n).map(move |c| (r, c, d[(r, c)]))),
                )
            }
        }
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        match &self.repr {
            Repr::Sparse(s) => s.get(r, c),
            Repr::Dense(d) => d[(r, c)],
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        match &self.repr {
            Repr::Sparse(s) => s.to_dense(),
            Repr::Dense(d) => d.clone(),
        }
    }

    /// Iterates over stored entries (all entries for dense storage).
    pub fn entries(&self) -> Box<dyn Iterator<Item = (usize, usize, C64)> + '_> {
        match &self.repr {
            Repr::Sparse(s) => Box::new(s.triplets()),
            Repr::Dense(d) => {
                let n = d.nrows();
                Box::new((0..n).flat_map(move |r| (0..n).map(move |c| (r, c, d[(r, c)]))))
            }
        }
    }

    pub fn adjoint(&self) -> Self {
        match &self.repr {
            Repr::Sparse(s) => Self { repr: Repr::Sparse(s.adjoint()) },
            Repr::Dense(d) => Self { repr: Repr::Dense(d.adjoint()) },
        }
    }

    pub fn scale(&self, k: C64) -> Self {
        match &self.repr {
            Repr::Sparse(s) => {
                Self::from_csr(CsrMatrix::from_triplets(s.dim(), s.triplets().map(|(r, c, v)| (r, c, v * k))))
            }
            Repr::Dense(d) => Self { repr: Repr::Dense(d * k) },
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().map(|(_, _, v)| v.norm()).fold(0.0, f64::max)
    }

    /// max |A − A†|.
    pub fn hermiticity_defect(&self) -> f64 {
        self.entries()
            .map(|(r, c, v)| (v - self.get(c, r).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Hermiticity check with the relative tolerance max|A − A†| < tol · max|A|.
    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.hermiticity_defect() <= rel_tol * self.max_abs()
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(match (&self.repr, &other.repr) {
            (Repr::Sparse(a), Repr::Sparse(b)) => {
                Self::from_csr(CsrMatrix::from_triplets(a.dim(), a.triplets().chain(b.triplets())))
            }
            _ => Self::from_dense(self.to_dense() + other.to_dense()),
        })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(match (&self.repr, &other.repr) {
            (Repr::Sparse(a), Repr::Sparse(b)) => Self::from_csr(a.matmul(b)),
            _ => Self::from_dense(self.to_dense() * other.to_dense()),
        })
    }

    /// [A, B] = AB − BA.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        let ab = self.try_mul(other)?;
        let ba = other.try_mul(self)?;
        ab.try_add(&ba.scale(C64::new(-1.0, 0.0)))
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() == other.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() })
        }
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: Self) -> ComplexMatrix {
        self.try_add(rhs).expect("operator dimensions differ")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: Self) -> ComplexMatrix {
        self.try_add(&rhs.scale(C64::new(-1.0, 0.0))).expect("operator dimensions differ")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: Self) -> ComplexMatrix {
        self.try_mul(rhs).expect("operator dimensions differ")
    }
}

impl Mul<f64> for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: f64) -> ComplexMatrix {
        self.scale(C64::new(rhs, 0.0))
    }
}
