//! Closed-form Hanson–Wright bounds and the scalar inequalities behind them.
//!
//! For iid mean-zero σ²-sub-Gaussian entries and `λ ∈ [0, 1/(3·c2·‖M‖_op·σ²))`
//!
//! ```text
//! E exp(λ(XᵀMX − E XᵀMX)) ≤ exp(c1·λ²·σ⁴·‖M‖_F²)
//! P(|XᵀMX − E XᵀMX| ≥ t) ≤ 2·exp(−min(t²/(4·c1·σ⁴·‖M‖_F²), t/(6·c2·σ²·‖M‖_op)))
//! ```
//!
//! with `(c1, c2) = (2, 1)` when `M` has an all-zero diagonal and `(20, 4)`
//! otherwise. The general constants come from bounding the hollow and
//! diagonal parts separately at `2λ` and recombining them by Cauchy–Schwarz;
//! passing from `A = (M+Mᵀ)/2` norms to `M` norms uses `‖A‖ ≤ ‖M‖` for both
//! norms.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, frobenius_norm_sq, general_operator_norm, Matrix, SymMatrix};

/// `cosh(1/2)`, the series constant in the central-moment bound.
pub fn cosh_half() -> f64 {
    0.5f64.cosh()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    DiagonalFree,
    General,
}

impl Regime {
    /// `(c1, c2)`.
    pub fn constants(self) -> (f64, f64) {
        match self {
            Regime::DiagonalFree => (2.0, 1.0),
            Regime::General => (20.0, 4.0),
        }
    }

    pub fn of(m: &Matrix) -> Regime {
        if m.is_diagonal_free() {
            Regime::DiagonalFree
        } else {
            Regime::General
        }
    }
}

/// `[0, hi)` or `[0, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaDomain {
    pub lo: f64,
    pub hi: f64,
    pub hi_inclusive: bool,
}

impl LambdaDomain {
    pub fn half_open(hi: f64) -> Self {
        LambdaDomain { lo: 0.0, hi, hi_inclusive: false }
    }

    pub fn closed(hi: f64) -> Self {
        LambdaDomain { lo: 0.0, hi, hi_inclusive: true }
    }

    pub fn contains(&self, lambda: f64) -> bool {
        lambda >= self.lo
            && if self.hi_inclusive {
                lambda <= self.hi
            } else {
                lambda < self.hi
            }
    }

    fn check(&self, name: &'static str, value: f64) -> Result<()> {
        if self.contains(value) {
            Ok(())
        } else {
            Err(Error::domain(name, value, self.lo, self.hi, self.hi_inclusive))
        }
    }
}

/// Resolved constants and norms of one Hanson–Wright instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundSpec {
    pub c1: f64,
    pub c2: f64,
    pub diagonal_free: bool,
    pub sigma2: f64,
    /// `‖M‖_F²`
    pub frob2: f64,
    /// `‖M‖_op`
    pub opnorm: f64,
    /// `1/(3·c2·‖M‖_op·σ²)`, `+∞` for the zero matrix.
    pub lambda_max: f64,
}

impl BoundSpec {
    pub fn from_norms(regime: Regime, sigma2: f64, frob2: f64, opnorm: f64) -> Result<Self> {
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return Err(Error::Validation(format!("sigma2 must be positive and finite, got {sigma2}")));
        }
        if !(frob2.is_finite() && frob2 >= 0.0 && opnorm.is_finite() && opnorm >= 0.0) {
            return Err(Error::Validation("norms must be finite and nonnegative".into()));
        }
        let (c1, c2) = regime.constants();
        let lambda_max = if opnorm == 0.0 {
            f64::INFINITY
        } else {
            1.0 / (3.0 * c2 * opnorm * sigma2)
        };
        Ok(BoundSpec {
            c1,
            c2,
            diagonal_free: regime == Regime::DiagonalFree,
            sigma2,
            frob2,
            opnorm,
            lambda_max,
        })
    }

    pub fn regime(&self) -> Regime {
        if self.diagonal_free {
            Regime::DiagonalFree
        } else {
            Regime::General
        }
    }

    /// Same norms, other constants.
    pub fn with_regime(&self, regime: Regime) -> BoundSpec {
        Self::from_norms(regime, self.sigma2, self.frob2, self.opnorm).expect("already validated")
    }

    pub fn domain(&self) -> LambdaDomain {
        LambdaDomain::half_open(self.lambda_max)
    }

    pub fn is_degenerate(&self) -> bool {
        self.frob2 == 0.0
    }

    /// `c1·σ⁴·‖M‖_F²`, the quadratic coefficient of the log-MGF bound.
    pub fn mgf_coefficient(&self) -> f64 {
        self.c1 * self.sigma2 * self.sigma2 * self.frob2
    }

    /// Smallest `t` at which the two-sided tail bound equals `value`, for
    /// `0 < value < 2`. `None` for degenerate specs.
    pub fn t_for_tail_bound(&self, value: f64) -> Option<f64> {
        if self.is_degenerate() || !(value > 0.0 && value < 2.0) {
            return None;
        }
        let e = (2.0 / value).ln();
        let gaussian = (4.0 * self.mgf_coefficient() * e).sqrt();
        let exponential = 6.0 * self.c2 * self.sigma2 * self.opnorm * e;
        Some(gaussian.max(exponential))
    }
}

pub fn make_bound_spec(m: &Matrix, sigma2: f64) -> Result<BoundSpec> {
    let frob2 = frobenius_norm_sq(m);
    let opnorm = general_operator_norm(m)?;
    BoundSpec::from_norms(Regime::of(m), sigma2, frob2, opnorm)
}

/// `exp(c1·λ²·σ⁴·‖M‖_F²)` on `[0, λ_max)`.
pub fn hw_mgf_bound(spec: &BoundSpec, lambda: f64) -> Result<f64> {
    spec.domain().check("lambda", lambda)?;
    Ok((spec.mgf_coefficient() * lambda * lambda).exp())
}

/// Two-sided tail bound. A degenerate spec (`‖M‖_F = 0`) describes a constant
/// form, so the bound is 0 for every `t > 0`.
pub fn hw_tail_bound(spec: &BoundSpec, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain("t", t, 0.0, f64::INFINITY, false));
    }
    if t == 0.0 {
        return Ok(2.0);
    }
    if spec.is_degenerate() {
        return Ok(0.0);
    }
    let gaussian = t * t / (4.0 * spec.mgf_coefficient());
    let exponential = t / (6.0 * spec.c2 * spec.sigma2 * spec.opnorm);
    Ok(2.0 * (-gaussian.min(exponential)).exp())
}

/// `exp(Σ λμ_i + 2λ²μ_i²)` on `[0, 1/(3·max|μ_i|)]`.
pub fn chi2_mgf_bound(mu: &[f64], lambda: f64) -> Result<f64> {
    let max_abs = mu.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let hi = if max_abs == 0.0 { f64::INFINITY } else { 1.0 / (3.0 * max_abs) };
    LambdaDomain::closed(hi).check("lambda", lambda)?;
    let exponent: f64 = mu.iter().map(|&m| lambda * m + 2.0 * lambda * lambda * m * m).sum();
    Ok(exponent.exp())
}

/// `exp(10·λ²·σ⁴)` on `[0, 1/(4σ²)]`.
pub fn square_mgf_bound(sigma2: f64, lambda: f64) -> Result<f64> {
    check_sigma2(sigma2)?;
    LambdaDomain::closed(1.0 / (4.0 * sigma2)).check("lambda", lambda)?;
    Ok((10.0 * lambda * lambda * sigma2 * sigma2).exp())
}

/// `(2x + 4x²) − (−log(1 − 2x))` for `|x| ≤ 1/3`; nonnegative on that range.
pub fn log_inequality_gap(x: f64) -> Result<f64> {
    if !(x.abs() <= 1.0 / 3.0) {
        return Err(Error::domain("x", x, -1.0 / 3.0, 1.0 / 3.0, true));
    }
    Ok(2.0 * x + 4.0 * x * x + (-2.0 * x).ln_1p())
}

/// `2^j·j!·σ^(2j)`, the even-moment bound of a σ²-sub-Gaussian variable.
pub fn subgaussian_moment_bound(sigma2: f64, j: u32) -> Result<f64> {
    check_sigma2(sigma2)?;
    let v = (1..=j).fold(1.0, |acc, i| acc * 2.0 * f64::from(i) * sigma2);
    finite(v, || format!("2^{j}·{j}!·σ^{}", 2 * j))
}

/// `cosh(1/2)·(2σ²)^k·k!`, `k >= 2`.
pub fn central_moment_bound(sigma2: f64, k: u32) -> Result<f64> {
    if k < 2 {
        return Err(Error::Validation(format!("central moment order must be at least 2, got {k}")));
    }
    check_sigma2(sigma2)?;
    let v = cosh_half() * (1..=k).fold(1.0, |acc, i| acc * 2.0 * sigma2 * f64::from(i));
    finite(v, || format!("cosh(1/2)·(2σ²)^{k}·{k}!"))
}

/// Exponent of `sqrt(exp(e_d)·exp(e_o))`.
pub fn combine_cauchy_schwarz(diag_exponent: f64, offdiag_exponent: f64) -> f64 {
    (diag_exponent + offdiag_exponent) / 2.0
}

/// Relative margin keeping the optimiser strictly inside `[0, b)`.
pub const CHERNOFF_EDGE_MARGIN: f64 = 1e-9;

/// `inf_{λ ∈ [0, b)} exp(−λt + aλ²)`, with the minimiser clamped to
/// `b·(1 − 1e-9)` when it would leave the open interval. `b` may be `+∞`.
pub fn chernoff_tail_from_mgf(a: f64, b: f64, t: f64) -> f64 {
    let unconstrained = t / (2.0 * a);
    let lambda = if b.is_finite() {
        unconstrained.min(b * (1.0 - CHERNOFF_EDGE_MARGIN))
    } else {
        unconstrained
    };
    (-lambda * t + a * lambda * lambda).exp()
}

/// The one-sided closed form `exp(−min(t²/(4a), t·b/2))` that dominates
/// [`chernoff_tail_from_mgf`].
pub fn chernoff_closed_form(a: f64, b: f64, t: f64) -> f64 {
    (-(t * t / (4.0 * a)).min(t * b / 2.0)).exp()
}

/// Left-hand sides of the two side conditions needed when the diagonal and
/// hollow parts are each bounded at `2λ`: `max_i |4·(2λ)·a_ii|·σ²` and
/// `3·(2λ)·‖Å‖_op·σ²`. Both must be `< 1`.
pub fn side_conditions(a: &SymMatrix, sigma2: f64, lambda: f64) -> Result<(f64, f64)> {
    let max_diag = a.diag().iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let hollow_op = linalg::operator_norm(&linalg::hollow(a))?;
    Ok((
        4.0 * 2.0 * lambda * max_diag * sigma2,
        3.0 * 2.0 * lambda * hollow_op * sigma2,
    ))
}

fn check_sigma2(sigma2: f64) -> Result<()> {
    if sigma2.is_finite() && sigma2 > 0.0 {
        Ok(())
    } else {
        Err(Error::Validation(format!("sigma2 must be positive and finite, got {sigma2}")))
    }
}

fn finite(v: f64, what: impl FnOnce() -> String) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Range(format!("{} overflows", what())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SWAP: [[f64; 2]; 2] = [[0.0, 1.0], [1.0, 0.0]];

    fn m(rows: [[f64; 2]; 2]) -> Matrix {
        Matrix::from_rows(&rows.map(|r| r.to_vec())).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn spec_constants() {
        let s = make_bound_spec(&m(SWAP), 1.0).unwrap();
        assert_eq!((s.c1, s.c2, s.diagonal_free), (2.0, 1.0, true));
        close(s.lambda_max, 1.0 / 3.0, 1e-12);

        let s = make_bound_spec(&Matrix::identity(2), 1.0).unwrap();
        assert_eq!((s.c1, s.c2, s.diagonal_free), (20.0, 4.0, false));
        close(s.lambda_max, 1.0 / 12.0, 1e-12);

        let s = make_bound_spec(&Matrix::zeros(3), 1.0).unwrap();
        assert_eq!((s.frob2, s.opnorm), (0.0, 0.0));
        assert!(s.lambda_max.is_infinite());
        assert_eq!(hw_mgf_bound(&s, 1e6).unwrap(), 1.0);
        assert_eq!(hw_tail_bound(&s, 1e-9).unwrap(), 0.0);
        assert_eq!(hw_tail_bound(&s, 0.0).unwrap(), 2.0);

        assert!(make_bound_spec(&Matrix::identity(2), 0.0).is_err());
        assert!(make_bound_spec(&Matrix::identity(2), -1.0).is_err());
    }

    #[test]
    fn near_zero_diagonal_takes_general_constants() {
        let s = make_bound_spec(&m([[1e-300, 1.0], [1.0, 0.0]]), 1.0).unwrap();
        assert!(!s.diagonal_free);
    }

    #[test]
    fn mgf_bound_examples() {
        let free = make_bound_spec(&m(SWAP), 1.0).unwrap();
        assert_eq!(hw_mgf_bound(&free, 0.0).unwrap(), 1.0);
        close(hw_mgf_bound(&free, 0.1).unwrap(), 0.04f64.exp(), 1e-15);
        close(hw_mgf_bound(&free, 0.1).unwrap(), 1.0408108, 1e-7);

        let general = make_bound_spec(&Matrix::identity(2), 1.0).unwrap();
        let err = hw_mgf_bound(&general, 0.1).unwrap_err();
        assert!(err.to_string().contains("0.08333"), "{err}");
        assert!(err.to_string().ends_with(')'), "{err}");
        // Right endpoint is excluded.
        assert!(hw_mgf_bound(&general, general.lambda_max).is_err());
        assert!(hw_mgf_bound(&general, -1e-3).is_err());
    }

    #[test]
    fn tail_bound_examples() {
        let general = make_bound_spec(&Matrix::identity(2), 1.0).unwrap();
        assert_eq!(hw_tail_bound(&general, 0.0).unwrap(), 2.0);
        close(hw_tail_bound(&general, 4.0).unwrap(), 2.0 * (-0.1f64).exp(), 1e-12);
        close(hw_tail_bound(&general, 4.0).unwrap(), 1.8096748, 1e-7);

        let free = make_bound_spec(&m(SWAP), 1.0).unwrap();
        // ‖M‖_F² = 2: min(4/16, 2/6) = 1/4.
        close(hw_tail_bound(&free, 2.0).unwrap(), 2.0 * (-0.25f64).exp(), 1e-12);
        close(hw_tail_bound(&free, 2.0).unwrap(), 1.5576016, 1e-7);
        assert!(hw_tail_bound(&free, -1.0).is_err());
    }

    #[test]
    fn tail_bound_inversion() {
        let s = make_bound_spec(&Matrix::identity(5), 2.0).unwrap();
        for v in [1.9, 0.5, 1e-3] {
            let t = s.t_for_tail_bound(v).unwrap();
            close(hw_tail_bound(&s, t).unwrap(), v, 1e-12 * v.max(1.0));
        }
    }

    #[test]
    fn chi2_bound_examples() {
        close(chi2_mgf_bound(&[1.0, -1.0], 0.1).unwrap(), 1.0408108, 1e-7);
        assert_eq!(chi2_mgf_bound(&[0.3, 2.0], 0.0).unwrap(), 1.0);
        // Closed right endpoint 1/6 for μ = 2.
        close(chi2_mgf_bound(&[2.0], 1.0 / 6.0).unwrap(), 1.7429089, 1e-7);
        let err = chi2_mgf_bound(&[2.0], 0.17).unwrap_err();
        assert!(err.to_string().ends_with(']'), "{err}");
    }

    #[test]
    fn square_bound_examples() {
        assert_eq!(square_mgf_bound(1.0, 0.0).unwrap(), 1.0);
        close(square_mgf_bound(1.0, 0.1).unwrap(), 1.1051709, 1e-7);
        close(square_mgf_bound(1.0, 0.25).unwrap(), 1.8682460, 1e-7);
        assert!(square_mgf_bound(1.0, 0.2500001).is_err());
        assert!(square_mgf_bound(1.0, -0.1).is_err());
    }

    #[test]
    fn log_gap_examples() {
        assert_eq!(log_inequality_gap(0.0).unwrap(), 0.0);
        close(log_inequality_gap(1.0 / 3.0).unwrap(), 0.0124988, 1e-7);
        close(log_inequality_gap(-1.0 / 3.0).unwrap(), 0.2886034, 1e-7);
        assert!(log_inequality_gap(0.34).is_err());
        assert!(log_inequality_gap(f64::NAN).is_err());
    }

    #[test]
    fn central_moment_bound_examples() {
        close(central_moment_bound(1.0, 2).unwrap(), 9.0210077, 1e-7);
        close(central_moment_bound(1.0, 3).unwrap(), 54.126046, 1e-6);
        close(central_moment_bound(0.5, 2).unwrap(), 2.2552519, 1e-7);
        assert!(central_moment_bound(1.0, 1).is_err());
        assert!(matches!(central_moment_bound(1e3, 400), Err(Error::Range(_))));
    }

    #[test]
    fn cauchy_schwarz_examples() {
        assert_eq!(combine_cauchy_schwarz(0.0, 0.3), 0.15);
        assert_eq!(combine_cauchy_schwarz(0.0, 0.0), 0.0);
        // ‖A−Å‖_F² = 2, ‖Å‖_F² = 1, λ = 0.1, σ² = 1
        let e = combine_cauchy_schwarz(40.0 * 0.01 * 2.0, 8.0 * 0.01 * 1.0);
        close(e, 0.44, 1e-15);
        assert!(e <= 20.0 * 0.01 * 3.0);
    }

    #[test]
    fn chernoff_examples() {
        assert_eq!(chernoff_tail_from_mgf(3.0, 0.5, 0.0), 1.0);
        close(chernoff_tail_from_mgf(1.0, f64::INFINITY, 2.0), (-1.0f64).exp(), 1e-15);
        close(chernoff_tail_from_mgf(1.0, 1e12, 2.0), (-1.0f64).exp(), 1e-15);
        // I₂, σ² = 1: a = c1σ⁴‖M‖_F² = 40, b = 1/12.
        let v = chernoff_tail_from_mgf(40.0, 1.0 / 12.0, 4.0);
        close(v, (-0.1f64).exp(), 1e-15);
        let spec = make_bound_spec(&Matrix::identity(2), 1.0).unwrap();
        close(v, hw_tail_bound(&spec, 4.0).unwrap() / 2.0, 1e-15);
    }

    #[test]
    fn side_conditions_hold_inside_general_domain() {
        let a = SymMatrix::from_rows(&[vec![1.0, 0.5], vec![0.5, -2.0]]).unwrap();
        let spec = make_bound_spec(&a, 1.5).unwrap();
        let lambda = spec.lambda_max * (1.0 - 1e-12);
        let (d, h) = side_conditions(&a, 1.5, lambda).unwrap();
        assert!(d < 1.0 && h < 1.0, "{d} {h}");
    }
}
