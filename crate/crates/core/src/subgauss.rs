//! Mean-zero sub-Gaussian families with valid variance proxies, reproducible
//! samplers and closed-form moments.
//!
//! # Random streams
//!
//! Every draw comes from ChaCha8 (a counter-based generator, identical output
//! on every platform). An [`RngStream`] is the pair `(seed, stream_id)`: the
//! 256-bit ChaCha key is the splitmix64 expansion of `seed`, and `stream_id`
//! selects one of the 2⁶⁴ independent ChaCha streams under that key.
//! Floating-point conversions take the top 53 bits of each word, and the
//! Box–Muller transform uses the pure-Rust `libm` routines, so a given
//! `(seed, stream_id)` yields the same samples everywhere.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// splitmix64 finaliser.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes a parent seed and a label into an unrelated child seed.
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    splitmix64(seed ^ splitmix64(label.wrapping_add(0x6A09_E667_F3BC_C908)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn generator(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        let mut state = self.seed;
        for word in key.chunks_exact_mut(8) {
            state = splitmix64(state);
            word.copy_from_slice(&state.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Stream `stream_id` under a seed derived from this stream and `label`.
    pub fn substream(&self, label: u64, stream_id: u64) -> RngStream {
        RngStream::new(derive_seed(derive_seed(self.seed, self.stream_id), label), stream_id)
    }
}

/// Uniform on `[0, 1)` with 53 random bits.
#[inline]
pub fn unit_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gaussian,
    Rademacher,
    Uniform,
}

/// A mean-zero, σ²-sub-Gaussian distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubGaussianDist {
    family: Family,
    scale: f64,
    proxy_sigma2: f64,
    second_moment: f64,
}

impl SubGaussianDist {
    /// `N(0, σ²)`; proxy and second moment are both `σ²`.
    pub fn gaussian(sigma: f64) -> Result<Self> {
        check_scale("gaussian sigma", sigma)?;
        Ok(SubGaussianDist {
            family: Family::Gaussian,
            scale: sigma,
            proxy_sigma2: sigma * sigma,
            second_moment: sigma * sigma,
        })
    }

    /// Uniform signs `±1`.
    pub fn rademacher() -> Self {
        SubGaussianDist {
            family: Family::Rademacher,
            scale: 1.0,
            proxy_sigma2: 1.0,
            second_moment: 1.0,
        }
    }

    /// Uniform on `[−a, a]` with the Hoeffding proxy `a²`.
    pub fn uniform(a: f64) -> Result<Self> {
        check_scale("uniform half-width", a)?;
        Ok(SubGaussianDist {
            family: Family::Uniform,
            scale: a,
            proxy_sigma2: a * a,
            second_moment: a * a / 3.0,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn proxy_sigma2(&self) -> f64 {
        self.proxy_sigma2
    }

    pub fn second_moment(&self) -> f64 {
        self.second_moment
    }

    /// Fills `out` with iid draws, consuming the generator in a fixed pattern:
    /// one word per Rademacher or uniform draw, two words per Gaussian pair
    /// (the second normal of an odd tail is discarded).
    pub fn fill(&self, rng: &mut impl RngCore, out: &mut [f64]) {
        match self.family {
            Family::Rademacher => {
                for x in out.iter_mut() {
                    *x = if rng.next_u64() >> 63 == 0 { -1.0 } else { 1.0 };
                }
            }
            Family::Uniform => {
                let a = self.scale;
                for x in out.iter_mut() {
                    *x = a * (2.0 * unit_f64(rng) - 1.0);
                }
            }
            Family::Gaussian => {
                let sigma = self.scale;
                let mut pairs = out.chunks_exact_mut(2);
                for pair in &mut pairs {
                    let (z0, z1) = box_muller(rng);
                    pair[0] = sigma * z0;
                    pair[1] = sigma * z1;
                }
                if let [last] = pairs.into_remainder() {
                    *last = sigma * box_muller(rng).0;
                }
            }
        }
    }
}

fn check_scale(what: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Validation(format!("{what} must be positive and finite, got {v}")))
    }
}

#[inline]
fn box_muller(rng: &mut impl RngCore) -> (f64, f64) {
    let u1 = unit_f64(rng);
    let u2 = unit_f64(rng);
    // 1 − u1 ∈ (0, 1], so the log is finite.
    let r = (-2.0 * libm::log(1.0 - u1)).sqrt();
    let (s, c) = libm::sincos(TAU * u2);
    (r * c, r * s)
}

impl fmt::Display for SubGaussianDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::Gaussian => write!(f, "gaussian:{}", self.scale),
            Family::Rademacher => write!(f, "rademacher"),
            Family::Uniform => write!(f, "uniform:{}", self.scale),
        }
    }
}

impl FromStr for SubGaussianDist {
    type Err = Error;

    /// `gaussian:<sigma>`, `rademacher` or `uniform:<a>`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let parse_arg = |a: Option<&str>| -> Result<f64> {
            let a = a.ok_or_else(|| Error::Parse(format!("distribution {name:?} needs a parameter, e.g. {name}:1")))?;
            a.parse::<f64>()
                .map_err(|e| Error::Parse(format!("distribution parameter {a:?}: {e}")))
        };
        match name {
            "gaussian" => Self::gaussian(parse_arg(arg)?),
            "uniform" => Self::uniform(parse_arg(arg)?),
            "rademacher" if arg.is_none() => Ok(Self::rademacher()),
            "rademacher" => Err(Error::Parse("rademacher takes no parameter".into())),
            other => Err(Error::Parse(format!(
                "unknown distribution {other:?} (expected gaussian:<sigma>, rademacher or uniform:<a>)"
            ))),
        }
    }
}

/// `count` iid draws from stream `rng`.
pub fn sample(d: &SubGaussianDist, rng: RngStream, count: usize) -> Vec<f64> {
    let mut out = vec![0.0; count];
    d.fill(&mut rng.generator(), &mut out);
    out
}

/// `E X^(2j)` for `j >= 0`.
fn even_moment(d: &SubGaussianDist, j: u32) -> Result<f64> {
    let v = match d.family {
        Family::Rademacher => 1.0,
        Family::Uniform => d.scale.powi(2 * j as i32) / f64::from(2 * j + 1),
        // (2j−1)!! σ^(2j), accumulated factor by factor.
        Family::Gaussian => {
            let s2 = d.scale * d.scale;
            (1..=j).fold(1.0, |acc, i| acc * f64::from(2 * i - 1) * s2)
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Range(format!("E X^{} overflows for {d}", 2 * j)))
    }
}

/// `E X^(2j)`, `j >= 1`.
pub fn exact_even_moment(d: &SubGaussianDist, j: u32) -> Result<f64> {
    if j == 0 {
        return Err(Error::Validation("even moment order j must be at least 1".into()));
    }
    even_moment(d, j)
}

/// `E (X² − E X²)^k` by the binomial expansion over exact even moments.
pub fn exact_central_square_moment(d: &SubGaussianDist, k: u32) -> Result<f64> {
    if k == 0 {
        return Err(Error::Validation("central moment order k must be at least 1".into()));
    }
    let m2 = d.second_moment;
    let mut binom = 1.0;
    let mut total = 0.0;
    for j in 0..=k {
        if j > 0 {
            binom = binom * f64::from(k - j + 1) / f64::from(j);
        }
        let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * binom * m2.powi((k - j) as i32) * even_moment(d, j)?;
    }
    if total.is_finite() {
        Ok(total)
    } else {
        Err(Error::Range(format!("E (X²−EX²)^{k} overflows for {d}")))
    }
}
