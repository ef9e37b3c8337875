//! Dense square matrices, the symmetric/hollow/diagonal split of a quadratic
//! form, Frobenius and operator norms, and a cyclic Jacobi eigensolver.
//!
//! Every quadratic form `xᵀMx` only sees the symmetric part `A = (M+Mᵀ)/2`.
//! `A` is further split into its hollow `Å` (zero diagonal, the off-diagonal
//! chaos) and its diagonal `A − Å`. Both splits are exact:
//! `hollow(a) + diagonal_part(a) == a` entry by entry, and the hollow diagonal
//! is a literal zero so that `trace(Å) == 0` holds without rounding.

mod io;
mod jacobi;

use std::ops::Deref;

pub use io::{read_matrix, parse_matrix, write_matrix_csv, write_matrix_json, MatrixFormat};
pub use jacobi::{EigenDecomposition, MAX_SWEEPS};

use crate::error::{Error, Result};

/// Largest dimension accepted from user input.
pub const MAX_DIM: usize = 10_000;

/// Dense square real matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

/// A [`Matrix`] whose entries satisfy `a[i][j] == a[j][i]` bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(Matrix);

impl Matrix {
    /// Builds a matrix from row-major storage, validating shape and finiteness.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Validation("matrix dimension must be at least 1".into()));
        }
        if n > MAX_DIM {
            return Err(Error::Validation(format!(
                "matrix dimension {n} exceeds the supported maximum {MAX_DIM}"
            )));
        }
        if data.len() != n * n {
            return Err(Error::Validation(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "entry ({}, {}) is not finite",
                pos / n,
                pos % n
            )));
        }
        Ok(Matrix { n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::Validation(format!(
                "matrix is not square: row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        Self::from_row_major(n, rows.concat())
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "matrix dimension must be at least 1");
        Matrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.data[i * m.n + i] = v;
        }
        m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// True iff every diagonal entry is exactly zero.
    pub fn is_diagonal_free(&self) -> bool {
        (0..self.n).all(|i| self.get(i, i) == 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    pub fn transpose(&self) -> Matrix {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j];
            }
        }
        Matrix { n, data }
    }
}

impl SymMatrix {
    /// Accepts `m` only if it is exactly symmetric.
    pub fn try_from_matrix(m: Matrix) -> Result<Self> {
        if !m.is_symmetric() {
            return Err(Error::Validation("matrix is not exactly symmetric".into()));
        }
        Ok(SymMatrix(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::try_from_matrix(Matrix::from_rows(rows)?)
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    /// Builds a symmetric matrix from a generator evaluated once per pair
    /// `i <= j`; the lower triangle is a copy.
    fn from_upper(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        SymMatrix(Matrix { n, data })
    }
}

impl Deref for SymMatrix {
    type Target = Matrix;

    fn deref(&self) -> &Matrix {
        &self.0
    }
}

impl AsRef<Matrix> for SymMatrix {
    fn as_ref(&self) -> &Matrix {
        &self.0
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// `(M + Mᵀ)/2`, each off-diagonal pair computed once.
pub fn symmetrize(m: &Matrix) -> SymMatrix {
    SymMatrix::from_upper(m.n, |i, j| {
        if i == j {
            m.get(i, i)
        } else {
            (m.get(i, j) + m.get(j, i)) / 2.0
        }
    })
}

/// Copy of `a` with a literal zero diagonal.
pub fn hollow(a: &SymMatrix) -> SymMatrix {
    SymMatrix::from_upper(a.n, |i, j| if i == j { 0.0 } else { a.get(i, j) })
}

/// `a − hollow(a)`: the diagonal of `a` and zeros elsewhere.
pub fn diagonal_part(a: &SymMatrix) -> SymMatrix {
    SymMatrix::from_upper(a.n, |i, j| if i == j { a.get(i, i) } else { 0.0 })
}

/// Squared Frobenius norm, compensated.
pub fn frobenius_norm_sq(m: &Matrix) -> f64 {
    m.data.iter().map(|v| v * v).collect::<CompensatedSum>().value()
}

pub fn frobenius_norm(m: &Matrix) -> f64 {
    frobenius_norm_sq(m).sqrt()
}

/// Spectral norm of a symmetric matrix: the largest absolute eigenvalue.
pub fn operator_norm(a: &SymMatrix) -> Result<f64> {
    if a.is_zero() {
        return Ok(0.0);
    }
    Ok(eigen_decompose(a)?.spectral_radius())
}

/// Spectral norm (largest singular value) of an arbitrary square matrix.
///
/// Symmetric input goes straight to the eigensolver. Otherwise the norm is
/// `sqrt(λ_max(MᵀM))`, with the Gram matrix assembled pairwise so that it is
/// exactly symmetric.
pub fn general_operator_norm(m: &Matrix) -> Result<f64> {
    if m.is_symmetric() {
        return operator_norm(&SymMatrix(m.clone()));
    }
    let n = m.n;
    let gram = SymMatrix::from_upper(n, |i, j| {
        (0..n)
            .map(|k| m.get(k, i) * m.get(k, j))
            .collect::<CompensatedSum>()
            .value()
    });
    let top = eigen_decompose(&gram)?
        .eigenvalues
        .iter()
        .fold(0.0_f64, |acc, &v| acc.max(v));
    Ok(top.sqrt())
}

pub fn eigen_decompose(a: &SymMatrix) -> Result<EigenDecomposition> {
    jacobi::decompose(a)
}

pub fn trace(m: &Matrix) -> f64 {
    (0..m.n).map(|i| m.get(i, i)).collect::<CompensatedSum>().value()
}

/// `Σ_ij x_i m_ij x_j` with compensated accumulation.
pub fn quadratic_form(m: &Matrix, x: &[f64]) -> Result<f64> {
    if x.len() != m.n {
        return Err(Error::Dimension {
            expected: m.n,
            got: x.len(),
        });
    }
    let mut acc = CompensatedSum::default();
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0.0 {
            continue;
        }
        for (&mij, &xj) in m.row(i).iter().zip(x) {
            acc.add(xi * mij * xj);
        }
    }
    Ok(acc.value())
}

/// Product of two matrices; used for reconstruction checks.
pub fn matmul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.n != b.n {
        return Err(Error::Dimension {
            expected: a.n,
            got: b.n,
        });
    }
    let n = a.n;
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a.get(i, k);
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                data[i * n + j] += aik * b.get(k, j);
            }
        }
    }
    Ok(Matrix { n, data })
}
