//! Statistical machinery for the verification suites: Kolmogorov-Smirnov
//! tests, exact binomial upper confidence bounds, percentile bootstrap and
//! rank correlation.

use rand::Rng;
use statrs::distribution::{Beta, ContinuousCDF};

/// Survival function of the Kolmogorov distribution,
/// `Q(lambda) = 2 sum_{j>=1} (-1)^(j-1) exp(-2 j^2 lambda^2)`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..101 {
        let term = (-2.0 * (j as f64) * (j as f64) * lambda * lambda).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample KS statistic of `samples` against the reference CDF.
/// Sorts the slice in place.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut sup = 0.0f64;
    for (i, &x) in samples.iter().enumerate() {
        let fx = cdf(x);
        sup = sup.max((fx - i as f64 / n).abs());
        sup = sup.max(((i + 1) as f64 / n - fx).abs());
    }
    sup
}

/// Result of a two-sample KS test.
#[derive(Debug, Clone, Copy)]
pub struct KsTwoSample {
    pub statistic: f64,
    pub p_value: f64,
}

/// Two-sample KS test with the asymptotic p-value
/// (small-sample correction of Stephens). Sorts both slices in place.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> KsTwoSample {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    assert!(n > 0 && m > 0, "two-sample KS needs non-empty samples");

    let mut i = 0;
    let mut j = 0;
    let mut sup = 0.0f64;
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        sup = sup.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }

    let ne = (n as f64 * m as f64) / (n as f64 + m as f64);
    let sqrt_ne = ne.sqrt();
    let lambda = (sqrt_ne + 0.12 + 0.11 / sqrt_ne) * sup;
    KsTwoSample {
        statistic: sup,
        p_value: kolmogorov_survival(lambda),
    }
}

/// One-sided Clopper-Pearson upper confidence bound for a binomial
/// proportion with `k` successes out of `n` trials.
pub fn clopper_pearson_upper(k: usize, n: usize, confidence: f64) -> f64 {
    assert!(n > 0, "empty sample");
    assert!((0.0..1.0).contains(&(1.0 - confidence)));
    if k >= n {
        return 1.0;
    }
    // upper bound solves Beta(k+1, n-k) quantile at the confidence level
    let beta = Beta::new((k + 1) as f64, (n - k) as f64).expect("valid Beta parameters");
    beta.inverse_cdf(confidence)
}

/// Two-sided equal-tailed Clopper-Pearson interval.
pub fn clopper_pearson_interval(k: usize, n: usize, confidence: f64) -> (f64, f64) {
    assert!(n > 0, "empty sample");
    let tail = 0.5 * (1.0 - confidence);
    let lower = if k == 0 {
        0.0
    } else {
        Beta::new(k as f64, (n - k + 1) as f64)
            .expect("valid Beta parameters")
            .inverse_cdf(tail)
    };
    let upper = if k >= n {
        1.0
    } else {
        Beta::new((k + 1) as f64, (n - k) as f64)
            .expect("valid Beta parameters")
            .inverse_cdf(1.0 - tail)
    };
    (lower, upper)
}

/// One-sided percentile-bootstrap upper confidence bound on the mean of
/// `values`. Heavy-tail friendly: no normality is assumed.
pub fn bootstrap_mean_upper<R: Rng>(
    values: &[f64],
    n_resamples: usize,
    confidence: f64,
    rng: &mut R,
) -> f64 {
    assert!(!values.is_empty(), "empty sample");
    let n = values.len();
    let mut means = Vec::with_capacity(n_resamples);
    for _ in 0..n_resamples {
        let mut acc = 0.0;
        for _ in 0..n {
            acc += values[rng.random_range(0..n)];
        }
        means.push(acc / n as f64);
    }
    means.sort_by(f64::total_cmp);
    let idx = ((n_resamples as f64) * confidence).ceil() as usize;
    means[idx.clamp(1, n_resamples) - 1]
}

/// Two-sided equal-tailed percentile-bootstrap interval for the mean.
pub fn bootstrap_mean_interval<R: Rng>(
    values: &[f64],
    n_resamples: usize,
    confidence: f64,
    rng: &mut R,
) -> (f64, f64) {
    assert!(!values.is_empty(), "empty sample");
    let n = values.len();
    let mut means = Vec::with_capacity(n_resamples);
    for _ in 0..n_resamples {
        let mut acc = 0.0;
        for _ in 0..n {
            acc += values[rng.random_range(0..n)];
        }
        means.push(acc / n as f64);
    }
    means.sort_by(f64::total_cmp);
    let tail = 0.5 * (1.0 - confidence);
    let lo_idx = ((n_resamples as f64) * tail).floor() as usize;
    let hi_idx = ((n_resamples as f64) * (1.0 - tail)).ceil() as usize;
    (
        means[lo_idx.min(n_resamples - 1)],
        means[hi_idx.clamp(1, n_resamples) - 1],
    )
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        // average ranks over ties
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation of two equal-length samples.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2);
    let rx = ranks(xs);
    let ry = ranks(ys);
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    cov / (vx * vy).sqrt()
}
