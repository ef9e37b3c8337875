use crate::linalg::{symmetrize, Matrix};

/// Precomputed evaluator for `xᵀMx` through the symmetric part of `M`.
#[derive(Debug, Clone)]
pub enum QuadKernel {
    Zero,
    Diagonal(Vec<f64>),
    /// Row `i` holds `a_ii, 2a_{i,i+1}, …, 2a_{i,n−1}`.
    Dense { n: usize, rows: Vec<Vec<f64>> },
}

impl QuadKernel {
    pub fn new(m: &Matrix) -> Self {
        let a = symmetrize(m);
        let n = a.n();
        if a.is_zero() {
            return QuadKernel::Zero;
        }
        let off_diagonal_zero = (0..n).all(|i| ((i + 1)..n).all(|j| a.get(i, j) == 0.0));
        if off_diagonal_zero {
            return QuadKernel::Diagonal(a.diag());
        }
        let rows = (0..n)
            .map(|i| {
                std::iter::once(a.get(i, i))
                    .chain(((i + 1)..n).map(|j| 2.0 * a.get(i, j)))
                    .collect()
            })
            .collect();
        QuadKernel::Dense { n, rows }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, QuadKernel::Zero)
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            QuadKernel::Zero => 0.0,
            QuadKernel::Diagonal(d) => d.iter().zip(x).map(|(&a, &v)| a * v * v).sum(),
            QuadKernel::Dense { n, rows } => {
                debug_assert_eq!(x.len(), *n);
                rows.iter()
                    .enumerate()
                    .map(|(i, row)| x[i] * dot(row, &x[i..]))
                    .sum()
            }
        }
    }
}

/// Eight-lane dot product; fixed association order.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..8 {
            acc[l] += x[l] * y[l];
        }
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail
}
