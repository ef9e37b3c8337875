//! Monte Carlo estimation of tails and MGFs of centred quadratic forms.
//!
//! Work is split into chunks of [`CHUNK_SIZE`] samples. Chunk `c` of a run
//! seeded by stream `s` draws from `s.substream(SAMPLES, c)` and resamples
//! from `s.substream(BOOTSTRAP, c)`, and partial results are reduced in
//! chunk order, so every estimate is bitwise identical whatever the size of
//! the rayon pool.
//!
//! MGF intervals use a Poisson bootstrap: each replicate weights every
//! sample by an independent Poisson(1) count. That is the streaming form of
//! the multinomial resample and needs no stored samples.

mod binomial;
mod kernel;

use rayon::prelude::*;
use serde::Serialize;

pub use binomial::{beta_quantile, clopper_pearson, clopper_pearson_interval};
pub use kernel::QuadKernel;

use crate::bounds::{hw_mgf_bound, hw_tail_bound, make_bound_spec, BoundSpec};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymMatrix};
use crate::oracle::{exact_gaussian_quadratic_mgf, exact_quadratic_mean};
use crate::subgauss::{RngStream, SubGaussianDist};
use rand_chacha::rand_core::RngCore;

pub const CHUNK_SIZE: usize = 65_536;
pub const BOOTSTRAP_REPLICATES: usize = 200;
/// Samples per cache block in the bootstrap accumulation.
const BOOT_BLOCK: usize = 2048;
pub const DEFAULT_CONFIDENCE: f64 = 0.999;
/// MGF estimates are only attempted for `λ ≤ MGF_LAMBDA_FRACTION·λ_max`.
pub const MGF_LAMBDA_FRACTION: f64 = 0.5;
/// Largest admissible `λ·max|sample|` before `exp` is considered unsafe.
pub const MAX_EXPONENT: f64 = 700.0;

const SAMPLES: u64 = 0x5341_4d50;
const BOOTSTRAP: u64 = 0x424f_4f54;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailEstimate {
    pub t: f64,
    pub n_samples: u64,
    pub exceed_count: u64,
    pub point: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
}

impl TailEstimate {
    /// Two-sided Clopper–Pearson estimate from raw counts.
    pub fn from_counts(t: f64, exceed_count: u64, n_samples: u64, confidence: f64) -> Self {
        let (ci_low, ci_high) = clopper_pearson_interval(exceed_count, n_samples, confidence);
        TailEstimate {
            t,
            n_samples,
            exceed_count,
            point: exceed_count as f64 / n_samples as f64,
            ci_low,
            ci_high,
            confidence,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MgfEstimate {
    pub lambda: f64,
    pub n_samples: u64,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
}

fn check_confidence(confidence: f64) -> Result<()> {
    if confidence > 0.0 && confidence < 1.0 {
        Ok(())
    } else {
        Err(Error::Validation(format!("confidence must lie in (0, 1), got {confidence}")))
    }
}

/// `#{|s| ≥ t}` with its two-sided Clopper–Pearson interval.
pub fn estimate_tail(samples: &[f64], t: f64, confidence: f64) -> Result<TailEstimate> {
    if samples.is_empty() {
        return Err(Error::Validation("no samples".into()));
    }
    check_confidence(confidence)?;
    let k = samples.iter().filter(|s| s.abs() >= t).count() as u64;
    Ok(TailEstimate::from_counts(t, k, samples.len() as u64, confidence))
}

/// Poisson(1) by inversion of a 32-bit uniform.
#[derive(Debug, Clone)]
struct PoissonOne {
    /// `⌊F(k)·2³²⌋` for `k = 0, 1, …` while below `2³²`.
    thresholds: Vec<u32>,
    head: [u32; 4],
}

impl PoissonOne {
    fn new() -> Self {
        let mut thresholds = Vec::new();
        let mut p = (-1.0f64).exp();
        let mut cdf = 0.0;
        for k in 1..30u32 {
            cdf += p;
            let th = (cdf * 4_294_967_296.0).floor();
            if th >= 4_294_967_296.0 {
                break;
            }
            thresholds.push(th as u32);
            p /= f64::from(k);
        }
        let head = [thresholds[0], thresholds[1], thresholds[2], thresholds[3]];
        PoissonOne { thresholds, head }
    }

    #[inline]
    fn draw(&self, u: u32) -> u32 {
        let h = &self.head;
        let fast = u32::from(u >= h[0]) + u32::from(u >= h[1]) + u32::from(u >= h[2]) + u32::from(u >= h[3]);
        if fast < 4 {
            fast
        } else {
            self.thresholds.iter().map(|&th| u32::from(u >= th)).sum()
        }
    }
}

/// Low then high 32-bit halves of successive `next_u64` words.
fn fill_u32(rng: &mut impl RngCore, out: &mut [u32]) {
    for pair in out.chunks_mut(2) {
        let word = rng.next_u64();
        pair[0] = word as u32;
        if let Some(hi) = pair.get_mut(1) {
            *hi = (word >> 32) as u32;
        }
    }
}

/// Per-chunk MGF sums: plain and for each bootstrap replicate.
#[derive(Debug, Clone)]
struct MgfPartial {
    sums: Vec<f64>,
    boot_sums: Vec<f64>,
    boot_weights: Vec<f64>,
}

impl MgfPartial {
    fn empty(k: usize) -> Self {
        MgfPartial {
            sums: vec![0.0; k],
            boot_sums: vec![0.0; k * BOOTSTRAP_REPLICATES],
            boot_weights: vec![0.0; BOOTSTRAP_REPLICATES],
        }
    }

    fn merge(&mut self, other: &MgfPartial) {
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            *a += b;
        }
        for (a, b) in self.boot_sums.iter_mut().zip(&other.boot_sums) {
            *a += b;
        }
        for (a, b) in self.boot_weights.iter_mut().zip(&other.boot_weights) {
            *a += b;
        }
    }

    fn accumulate(samples: &[f64], lambdas: &[f64], boot: RngStream, poisson: &PoissonOne) -> Self {
        let k = lambdas.len();
        let mut part = Self::empty(k);
        if k == 0 {
            return part;
        }
        let len = samples.len();
        // Column-major: `cols[j·len + i] = exp(λ_j·y_i)`.
        let mut cols = vec![0.0; len * k];
        for (j, (col, &lambda)) in cols.chunks_exact_mut(len).zip(lambdas).enumerate() {
            for (v, &y) in col.iter_mut().zip(samples) {
                *v = (lambda * y).exp();
            }
            part.sums[j] = col.iter().sum();
        }
        let mut rng = boot.generator();
        let mut weights = [0.0; BOOT_BLOCK];
        let mut words = vec![0u32; len];
        let mut acc = vec![0.0; k];
        for b in 0..BOOTSTRAP_REPLICATES {
            fill_u32(&mut rng, &mut words);
            acc.iter_mut().for_each(|a| *a = 0.0);
            let mut total = 0u64;
            for (start, block) in (0..len).step_by(BOOT_BLOCK).zip(words.chunks(BOOT_BLOCK)) {
                let w = &mut weights[..block.len()];
                for (w, &u) in w.iter_mut().zip(block) {
                    let draw = poisson.draw(u);
                    total += u64::from(draw);
                    *w = f64::from(draw);
                }
                for (j, a) in acc.iter_mut().enumerate() {
                    if lambdas[j] != 0.0 {
                        *a += kernel::dot(w, &cols[j * len + start..j * len + start + w.len()]);
                    }
                }
            }
            for (j, a) in acc.iter().enumerate() {
                part.boot_sums[b * k + j] = if lambdas[j] == 0.0 { total as f64 } else { *a };
            }
            part.boot_weights[b] = total as f64;
        }
        part
    }

    fn finish(&self, lambdas: &[f64], n: u64, confidence: f64) -> Vec<MgfEstimate> {
        let alpha = 1.0 - confidence;
        let k = lambdas.len();
        lambdas
            .iter()
            .enumerate()
            .map(|(j, &lambda)| {
                if lambda == 0.0 {
                    return MgfEstimate {
                        lambda,
                        n_samples: n,
                        mean: 1.0,
                        ci_low: 1.0,
                        ci_high: 1.0,
                        confidence,
                    };
                }
                let mean = self.sums[j] / n as f64;
                let mut reps: Vec<f64> = (0..BOOTSTRAP_REPLICATES)
                    .filter(|&b| self.boot_weights[b] > 0.0)
                    .map(|b| self.boot_sums[b * k + j] / self.boot_weights[b])
                    .collect();
                reps.sort_by(f64::total_cmp);
                let (lo, hi) = if reps.is_empty() {
                    (mean, mean)
                } else {
                    (quantile(&reps, alpha / 2.0), quantile(&reps, 1.0 - alpha / 2.0))
                };
                MgfEstimate {
                    lambda,
                    n_samples: n,
                    mean,
                    ci_low: lo.min(mean),
                    ci_high: hi.max(mean),
                    confidence,
                }
            })
            .collect()
    }
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

fn check_mgf_range(lambdas: &[f64], max_abs: f64) -> Result<()> {
    for &lambda in lambdas {
        if lambda.abs() * max_abs > MAX_EXPONENT {
            return Err(Error::Range(format!(
                "lambda = {lambda} times max |sample| = {max_abs} exceeds {MAX_EXPONENT}; use a smaller lambda"
            )));
        }
    }
    Ok(())
}

fn chunk_bounds(n_samples: usize) -> impl Iterator<Item = (u64, usize, usize)> + Clone {
    (0..n_samples.div_ceil(CHUNK_SIZE)).map(move |c| {
        let start = c * CHUNK_SIZE;
        (c as u64, start, (start + CHUNK_SIZE).min(n_samples))
    })
}

/// Plug-in MGF estimate `mean(exp(λ·s))` with a Poisson-bootstrap interval
/// drawn from `rng`.
pub fn estimate_mgf(samples: &[f64], lambda: f64, confidence: f64, rng: RngStream) -> Result<MgfEstimate> {
    Ok(estimate_mgf_grid(samples, &[lambda], confidence, rng)?.remove(0))
}

pub fn estimate_mgf_grid(
    samples: &[f64],
    lambdas: &[f64],
    confidence: f64,
    rng: RngStream,
) -> Result<Vec<MgfEstimate>> {
    if samples.is_empty() {
        return Err(Error::Validation("no samples".into()));
    }
    check_confidence(confidence)?;
    check_mgf_range(lambdas, samples.iter().fold(0.0, |m, s| m.max(s.abs())))?;
    let poisson = PoissonOne::new();
    let parts: Vec<MgfPartial> = chunk_bounds(samples.len())
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(c, start, end)| {
            MgfPartial::accumulate(&samples[start..end], lambdas, rng.substream(BOOTSTRAP, c), &poisson)
        })
        .collect();
    let mut total = MgfPartial::empty(lambdas.len());
    for p in &parts {
        total.merge(p);
    }
    Ok(total.finish(lambdas, samples.len() as u64, confidence))
}

/// Summary of one simulated cell.
#[derive(Debug, Clone)]
pub struct CellStats {
    pub n_samples: u64,
    pub center: f64,
    pub exceed: Vec<u64>,
    pub mean: f64,
    /// Unbiased sample variance of the centred forms.
    pub variance: f64,
    pub max_abs: f64,
    pub mgf: Vec<MgfEstimate>,
    pub samples: Option<Vec<f64>>,
}

struct ChunkResult {
    len: usize,
    exceed: Vec<u64>,
    mean: f64,
    m2: f64,
    max_abs: f64,
    mgf: MgfPartial,
    samples: Option<Vec<f64>>,
}

/// Draws `n_samples` centred forms `XᵀMX − m₂·tr(M)` and accumulates
/// exceedance counts for `t_grid` and bootstrap MGF sums for `lambda_grid`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_cell(
    m: &Matrix,
    d: &SubGaussianDist,
    rng: RngStream,
    n_samples: usize,
    t_grid: &[f64],
    lambda_grid: &[f64],
    confidence: f64,
    keep_samples: bool,
) -> Result<CellStats> {
    if n_samples == 0 {
        return Err(Error::Validation("n_samples must be at least 1".into()));
    }
    check_confidence(confidence)?;
    let kernel = QuadKernel::new(m);
    let center = exact_quadratic_mean(m, d);
    let poisson = PoissonOne::new();
    let n = m.n();

    let chunks: Vec<ChunkResult> = chunk_bounds(n_samples)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(c, start, end)| {
            let len = end - start;
            let mut ys = vec![0.0; len];
            if !kernel.is_zero() {
                let mut gen = rng.substream(SAMPLES, c).generator();
                let mut x = vec![0.0; n];
                for y in ys.iter_mut() {
                    d.fill(&mut gen, &mut x);
                    *y = kernel.eval(&x) - center;
                }
            }
            let mut exceed = vec![0u64; t_grid.len()];
            let mut max_abs = 0.0_f64;
            let mut sum = 0.0;
            for &y in &ys {
                let a = y.abs();
                max_abs = max_abs.max(a);
                sum += y;
                for (e, &t) in exceed.iter_mut().zip(t_grid) {
                    *e += u64::from(a >= t);
                }
            }
            let mean = sum / len as f64;
            let m2 = ys.iter().map(|y| (y - mean) * (y - mean)).sum();
            let mgf = MgfPartial::accumulate(&ys, lambda_grid, rng.substream(BOOTSTRAP, c), &poisson);
            ChunkResult {
                len,
                exceed,
                mean,
                m2,
                max_abs,
                mgf,
                samples: keep_samples.then_some(ys),
            }
        })
        .collect();

    let mut exceed = vec![0u64; t_grid.len()];
    let mut count = 0usize;
    let (mut mean, mut m2, mut max_abs) = (0.0, 0.0, 0.0_f64);
    let mut mgf = MgfPartial::empty(lambda_grid.len());
    let mut samples = keep_samples.then(|| Vec::with_capacity(n_samples));
    for ch in chunks {
        for (a, b) in exceed.iter_mut().zip(&ch.exceed) {
            *a += b;
        }
        // Chan et al. pairwise update.
        let total = count + ch.len;
        let delta = ch.mean - mean;
        mean += delta * ch.len as f64 / total as f64;
        m2 += ch.m2 + delta * delta * (count as f64) * (ch.len as f64) / total as f64;
        count = total;
        max_abs = max_abs.max(ch.max_abs);
        mgf.merge(&ch.mgf);
        if let (Some(all), Some(part)) = (samples.as_mut(), ch.samples) {
            all.extend(part);
        }
    }
    check_mgf_range(lambda_grid, max_abs)?;
    let variance = if count > 1 { m2 / (count - 1) as f64 } else { 0.0 };
    Ok(CellStats {
        n_samples: count as u64,
        center,
        exceed,
        mean,
        variance,
        max_abs,
        mgf: mgf.finish(lambda_grid, count as u64, confidence),
        samples,
    })
}

/// `n_samples` iid draws of `XᵀMX − m₂·tr(M)`.
pub fn sample_centered_forms(m: &Matrix, d: &SubGaussianDist, rng: RngStream, n_samples: usize) -> Result<Vec<f64>> {
    let stats = simulate_cell(m, d, rng, n_samples, &[], &[], DEFAULT_CONFIDENCE, true)?;
    Ok(stats.samples.expect("samples kept"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailCheck {
    pub estimate: TailEstimate,
    pub bound: f64,
    pub pass: bool,
}

impl TailCheck {
    /// `(bound − ci_low)/bound`, or `−ci_low` for a zero bound; nonnegative
    /// exactly when the check passes.
    pub fn margin(&self) -> f64 {
        if self.bound > 0.0 {
            (self.bound - self.estimate.ci_low) / self.bound
        } else {
            -self.estimate.ci_low
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MgfCheck {
    pub estimate: MgfEstimate,
    pub bound: f64,
    pub pass: bool,
}

impl MgfCheck {
    /// `ln(bound) − ln(ci_low)`: the gap between exponents.
    pub fn margin(&self) -> f64 {
        self.bound.ln() - self.estimate.ci_low.ln()
    }
}

/// Empirical tail and MGF checks of one `(M, distribution)` pair.
#[derive(Debug, Clone)]
pub struct SoundnessReport {
    pub spec: BoundSpec,
    pub stats: CellStats,
    pub tails: Vec<TailCheck>,
    pub mgfs: Vec<MgfCheck>,
    pub notices: Vec<String>,
}

impl SoundnessReport {
    pub fn all_pass(&self) -> bool {
        self.tails.iter().all(|c| c.pass) && self.mgfs.iter().all(|c| c.pass)
    }

    /// `5·sqrt(var/N)` plus a rounding allowance for forms that are
    /// constant up to floating-point error.
    pub fn centering_tolerance(&self) -> f64 {
        let s = &self.stats;
        5.0 * (s.variance / s.n_samples as f64).sqrt() + 64.0 * f64::EPSILON * (s.center.abs() + s.max_abs)
    }

    pub fn mean_is_centered(&self) -> bool {
        self.stats.mean.abs() <= self.centering_tolerance()
    }
}

/// `t` values at which the tail bound equals `points` log-spaced levels from
/// 1.9 down to 1e-3. A degenerate spec gets `0.1, 0.2, …`.
pub fn default_t_grid(spec: &BoundSpec, points: usize) -> Vec<f64> {
    let (hi, lo): (f64, f64) = (1.9, 1e-3);
    (0..points)
        .map(|i| {
            let frac = if points > 1 { i as f64 / (points - 1) as f64 } else { 0.0 };
            let level = hi * (lo / hi).powf(frac);
            spec.t_for_tail_bound(level).unwrap_or(0.1 * (i + 1) as f64)
        })
        .collect()
}

/// `points` equally spaced values on `[0, ½·λ_max]` (`[0, 1]` when the
/// domain is unbounded).
pub fn default_lambda_grid(spec: &BoundSpec, points: usize) -> Vec<f64> {
    let top = if spec.lambda_max.is_finite() {
        MGF_LAMBDA_FRACTION * spec.lambda_max
    } else {
        1.0
    };
    (0..points)
        .map(|i| if points > 1 { top * (i as f64 / (points - 1) as f64) } else { 0.0 })
        .collect()
}

/// Simulates `XᵀMX` and checks the empirical lower confidence limits
/// against the tail bound at each `t` and the MGF bound at each `λ`,
/// with `σ²` taken from the distribution's proxy.
#[allow(clippy::too_many_arguments)]
pub fn run_soundness(
    m: &Matrix,
    d: &SubGaussianDist,
    t_grid: &[f64],
    lambda_grid: &[f64],
    n_samples: usize,
    confidence: f64,
    rng: RngStream,
    keep_samples: bool,
) -> Result<SoundnessReport> {
    let spec = make_bound_spec(m, d.proxy_sigma2())?;
    if let Some(&t) = t_grid.iter().find(|t| !(**t >= 0.0)) {
        return Err(Error::Validation(format!("t-grid values must be nonnegative, got {t}")));
    }
    let mgf_top = if spec.lambda_max.is_finite() {
        MGF_LAMBDA_FRACTION * spec.lambda_max
    } else {
        f64::INFINITY
    };
    if let Some(&l) = lambda_grid.iter().find(|&&l| !(l >= 0.0 && l <= mgf_top)) {
        return Err(Error::domain("lambda", l, 0.0, mgf_top, true));
    }
    let stats = simulate_cell(m, d, rng, n_samples, t_grid, lambda_grid, confidence, keep_samples)?;

    let tails = t_grid
        .iter()
        .zip(&stats.exceed)
        .map(|(&t, &k)| {
            let estimate = TailEstimate::from_counts(t, k, stats.n_samples, confidence);
            let bound = hw_tail_bound(&spec, t)?;
            Ok(TailCheck {
                estimate,
                bound,
                pass: bound >= 1.0 || estimate.ci_low <= bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mgfs = stats
        .mgf
        .iter()
        .map(|est| {
            let bound = hw_mgf_bound(&spec, est.lambda)?;
            Ok(MgfCheck {
                estimate: *est,
                bound,
                pass: est.ci_low <= bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut notices = Vec::new();
    if spec.is_degenerate() {
        notices.push("degenerate matrix: ‖M‖_F = 0, the centred form is identically zero".to_string());
    } else if stats.max_abs == 0.0 {
        notices.push("every centred sample is exactly zero for this distribution".to_string());
    }
    Ok(SoundnessReport {
        spec,
        stats,
        tails,
        mgfs,
        notices,
    })
}

/// Tail soundness at each `t`.
pub fn run_tail_suite(
    m: &Matrix,
    d: &SubGaussianDist,
    t_grid: &[f64],
    n_samples: usize,
    confidence: f64,
    rng: RngStream,
) -> Result<Vec<TailCheck>> {
    if t_grid.is_empty() {
        return Err(Error::Validation("t-grid is empty".into()));
    }
    Ok(run_soundness(m, d, t_grid, &[], n_samples, confidence, rng, false)?.tails)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonRecord {
    pub empirical: MgfEstimate,
    pub gaussian_exact: f64,
    pub pass: bool,
}

/// Empirical MGF of the hollow form `XᵀÅX` against the exact Gaussian value
/// `E exp(λ·GᵀÅG)` with `G ~ N(0, σ²I)`.
pub fn compare_hollow_mgf(
    a_hollow: &SymMatrix,
    d: &SubGaussianDist,
    sigma2: f64,
    lambda: f64,
    rng: RngStream,
    n_samples: usize,
) -> Result<ComparisonRecord> {
    Ok(compare_hollow_mgf_grid(a_hollow, d, sigma2, &[lambda], rng, n_samples, DEFAULT_CONFIDENCE)?.remove(0))
}

pub fn compare_hollow_mgf_grid(
    a_hollow: &SymMatrix,
    d: &SubGaussianDist,
    sigma2: f64,
    lambdas: &[f64],
    rng: RngStream,
    n_samples: usize,
    confidence: f64,
) -> Result<Vec<ComparisonRecord>> {
    if !a_hollow.is_diagonal_free() {
        return Err(Error::Validation("comparison needs a hollow matrix (zero diagonal)".into()));
    }
    if d.proxy_sigma2() != sigma2 {
        return Err(Error::Validation(format!(
            "sigma2 = {sigma2} differs from the distribution's proxy {}",
            d.proxy_sigma2()
        )));
    }
    if let Some(&l) = lambdas.iter().find(|&&l| !(l >= 0.0)) {
        return Err(Error::domain("lambda", l, 0.0, f64::INFINITY, false));
    }
    let exact = lambdas
        .iter()
        .map(|&l| exact_gaussian_quadratic_mgf(a_hollow, sigma2, l))
        .collect::<Result<Vec<_>>>()?;
    let stats = simulate_cell(a_hollow, d, rng, n_samples, &[], lambdas, confidence, false)?;
    Ok(stats
        .mgf
        .into_iter()
        .zip(exact)
        .map(|(empirical, gaussian_exact)| ComparisonRecord {
            empirical,
            gaussian_exact,
            pass: empirical.ci_low <= gaussian_exact * (1.0 + 1e-9),
        })
        .collect())
}
