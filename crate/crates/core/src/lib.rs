//! Hanson–Wright concentration bounds for quadratic forms in independent
//! sub-Gaussian variables, with exact Gaussian oracles and a reproducible
//! Monte Carlo harness for checking them.
//!
//! For a random vector `X` with iid mean-zero entries of sub-Gaussian proxy
//! `σ²` and any real `n × n` matrix `M`,
//!
//! ```text
//! E exp(λ(XᵀMX − E XᵀMX)) ≤ exp(c1·λ²·σ⁴·‖M‖_F²),   0 ≤ λ < 1/(3·c2·σ²·‖M‖),
//! P(XᵀMX − E XᵀMX ≥ t) ≤ 2·exp(−min(t²/(4c1σ⁴‖M‖_F²), t/(6c2σ²‖M‖))),
//! ```
//!
//! with `(c1, c2) = (2, 1)` when `M` has a zero diagonal and `(20, 4)`
//! otherwise.
//!
//! ```
//! use hw_core::{make_bound_spec, hw_tail_bound, Matrix};
//!
//! let m = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
//! let spec = make_bound_spec(&m, 1.0).unwrap();
//! assert_eq!((spec.c1, spec.c2), (2.0, 1.0));
//! let p = hw_tail_bound(&spec, 2.0).unwrap();
//! assert!((p - 2.0 * (-0.25f64).exp()).abs() < 1e-12);
//! ```

// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod linalg;
pub mod mc;
pub mod oracle;
pub mod subgauss;
pub mod verify;

pub use bounds::{hw_mgf_bound, hw_tail_bound, make_bound_spec, BoundSpec, LambdaDomain, Regime};
pub use error::{Bracket, Error, Result};
pub use linalg::{Matrix, SymMatrix};
pub use mc::{MgfEstimate, SoundnessReport, TailEstimate};
pub use subgauss::{Family, RngStream, SubGaussianDist};
pub use verify::{Category, Check, Suite, Summary, VerificationReport, VerifyConfig};
