//! Exact (Clopper–Pearson) binomial confidence limits.

use statrs::function::gamma::ln_gamma;

const CF_MAX_ITER: usize = 20_000;
const CF_EPS: f64 = 1e-16;

/// Regularised incomplete beta `I_x(a, b)` by Lentz's continued fraction.
fn reg_inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (-x).ln_1p();
    if x < (a + 1.0) / (a + b + 2.0) {
        (ln_front.exp() * beta_cf(a, b, x)) / a
    } else {
        1.0 - (ln_front.exp() * beta_cf(b, a, 1.0 - x)) / b
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let tiny = f64::MIN_POSITIVE / f64::EPSILON;
    let clamp = |v: f64| if v.abs() < tiny { tiny } else { v };
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 / clamp(1.0 - qab * x / qap);
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 / clamp(1.0 + aa * d);
        c = clamp(1.0 + aa / c);
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 / clamp(1.0 + aa * d);
        c = clamp(1.0 + aa / c);
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() <= CF_EPS {
            break;
        }
    }
    h
}

/// Quantile of `Beta(a, b)` at probability `p`, by bisection on the CDF.
pub fn beta_quantile(p: f64, a: f64, b: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if reg_inc_beta(a, b, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Clopper–Pearson limits for `k` successes in `n` trials with separate
/// tail probabilities: the lower limit has `P(p < lower) ≤ alpha_low`, the
/// upper limit `P(p > upper) ≤ alpha_high`. A zero alpha disables that side.
pub fn clopper_pearson(k: u64, n: u64, alpha_low: f64, alpha_high: f64) -> (f64, f64) {
    assert!(n > 0 && k <= n, "need 0 <= k <= n, n > 0");
    let (kf, nf) = (k as f64, n as f64);
    let lower = if k == 0 || alpha_low <= 0.0 {
        0.0
    } else if k == n {
        alpha_low.powf(1.0 / nf)
    } else {
        beta_quantile(alpha_low, kf, nf - kf + 1.0)
    };
    let upper = if k == n || alpha_high <= 0.0 {
        1.0
    } else if k == 0 {
        1.0 - alpha_high.powf(1.0 / nf)
    } else {
        beta_quantile(1.0 - alpha_high, kf + 1.0, nf - kf)
    };
    (lower, upper)
}

/// Two-sided interval at `confidence`, `α/2` in each tail.
pub fn clopper_pearson_interval(k: u64, n: u64, confidence: f64) -> (f64, f64) {
    let half = (1.0 - confidence) / 2.0;
    clopper_pearson(k, n, half, half)
}
