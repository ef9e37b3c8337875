use super::{frobenius_norm, Matrix, SymMatrix};
use crate::error::{Error, Result};

pub const MAX_SWEEPS: usize = 100;

/// Sweeps stop once the off-diagonal Frobenius mass drops below this
/// fraction of `‖A‖_F`.
const REL_TOL: f64 = 1e-14;

/// `A = R · diag(eigenvalues) · Rᵀ` with `R` orthogonal.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    /// Sorted by decreasing absolute value; ties broken by decreasing value.
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the eigenvector for `eigenvalues[k]`.
    pub rotation: Matrix,
    pub sweeps: usize,
}

impl EigenDecomposition {
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.first().map_or(0.0, |v| v.abs())
    }

    /// `R · diag(λ) · Rᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.rotation.n();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = (0..n)
                    .map(|k| self.rotation.get(i, k) * self.eigenvalues[k] * self.rotation.get(j, k))
                    .sum();
            }
        }
        Matrix::from_row_major(n, data).expect("finite reconstruction")
    }
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            s += 2.0 * a[i * n + j] * a[i * n + j];
        }
    }
    s.sqrt()
}

/// Cyclic-by-row Jacobi rotations.
pub(super) fn decompose(sym: &SymMatrix) -> Result<EigenDecomposition> {
    let n = sym.n();
    let mut a = sym.as_slice().to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let threshold = REL_TOL * frobenius_norm(sym);
    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a, n);
        if off <= threshold || off == 0.0 {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, off_norm: off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let tau = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + tau.hypot(1.0))
                } else {
                    -1.0 / (-tau + tau.hypot(1.0))
                };
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                rotate(&mut a, &mut v, n, p, q, t, c, s);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    order.sort_by(|&i, &j| {
        diag[j]
            .abs()
            .total_cmp(&diag[i].abs())
            .then(diag[j].total_cmp(&diag[i]))
    });
    let eigenvalues = order.iter().map(|&k| diag[k]).collect();
    let mut rot = vec![0.0; n * n];
    for (col, &k) in order.iter().enumerate() {
        for i in 0..n {
            rot[i * n + col] = v[i * n + k];
        }
    }
    Ok(EigenDecomposition {
        eigenvalues,
        rotation: Matrix::from_row_major(n, rot)?,
        sweeps,
    })
}

/// `A ← JᵀAJ`, `V ← VJ` for the plane rotation in `(p, q)` with `t = tan θ`.
#[allow(clippy::too_many_arguments)]
fn rotate(a: &mut [f64], v: &mut [f64], n: usize, p: usize, q: usize, t: f64, c: f64, s: f64) {
    let apq = a[p * n + q];
    a[p * n + p] -= t * apq;
    a[q * n + q] += t * apq;
    a[p * n + q] = 0.0;
    a[q * n + p] = 0.0;
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        let (np, nq) = (c * akp - s * akq, s * akp + c * akq);
        a[k * n + p] = np;
        a[p * n + k] = np;
        a[k * n + q] = nq;
        a[q * n + k] = nq;
    }
    for k in 0..n {
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = c * vkp - s * vkq;
        v[k * n + q] = s * vkp + c * vkq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigen_decompose, trace};

    fn sym(rows: &[&[f64]]) -> SymMatrix {
        SymMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn assert_close(got: &[f64], want: &[f64]) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-12, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn swap_matrix() {
        let e = eigen_decompose(&sym(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap();
        assert_close(&e.eigenvalues, &[1.0, -1.0]);
    }

    #[test]
    fn two_by_two_characteristic_polynomial() {
        // λ² − 4λ + 3 = 0
        let e = eigen_decompose(&sym(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap();
        assert_close(&e.eigenvalues, &[3.0, 1.0]);
    }

    #[test]
    fn diagonal_input_needs_no_sweeps() {
        let d = SymMatrix::try_from_matrix(Matrix::diagonal(&[0.5, -7.0, 2.0, 0.0])).unwrap();
        let e = eigen_decompose(&d).unwrap();
        assert_eq!(e.sweeps, 0);
        assert_eq!(e.eigenvalues, vec![-7.0, 2.0, 0.5, 0.0]);
    }

    #[test]
    fn reconstruction_and_orthogonality() {
        let a = sym(&[
            &[4.0, -1.0, 0.5, 2.0],
            &[-1.0, 3.0, 1.5, 0.0],
            &[0.5, 1.5, -2.0, 1.0],
            &[2.0, 0.0, 1.0, 0.25],
        ]);
        let e = eigen_decompose(&a).unwrap();
        let r = e.reconstruct();
        for i in 0..4 {
            for j in 0..4 {
                assert!((r.get(i, j) - a.get(i, j)).abs() < 1e-10);
                let dot: f64 = (0..4).map(|k| e.rotation.get(k, i) * e.rotation.get(k, j)).sum();
                let id = if i == j { 1.0 } else { 0.0 };
                assert!((dot - id).abs() < 1e-10);
            }
        }
        let sum: f64 = e.eigenvalues.iter().sum();
        assert!((sum - trace(&a)).abs() < 1e-10 * 4.0 * a.max_abs());
    }
}
