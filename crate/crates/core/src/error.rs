use std::fmt;

use thiserror::Error;

/// Right endpoint of a λ (or x) domain, open or closed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub hi_inclusive: bool,
}

impl fmt::Display for Bracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let close = if self.hi_inclusive { ']' } else { ')' };
        write!(f, "[{}, {}{}", self.lo, self.hi, close)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("{name} = {value} lies outside the admissible domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: Bracket,
    },

    #[error("value out of floating-point range: {0}")]
    Range(String),

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal mass {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, lo: f64, hi: f64, hi_inclusive: bool) -> Self {
        Error::Domain {
            name,
            value,
            domain: Bracket { lo, hi, hi_inclusive },
        }
    }
}
