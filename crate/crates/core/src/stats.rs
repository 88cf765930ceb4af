//! Small statistical test helpers shared by the verification harnesses:
//! Kolmogorov–Smirnov against an analytic CDF, chi-square tail probability,
//! binomial standard errors, and batch-means Monte Carlo errors for
//! autocorrelated chains.

use crate::specfun::gamma_q;

/// Sup distance between the empirical CDF of sorted `xs` and `cdf`.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    d
}

/// Asymptotic Kolmogorov p-value with the Stephens small-sample correction.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    let mut p = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let term = sign * (-2.0 * (j as f64 * lambda).powi(2)).exp();
        p += term;
        sign = -sign;
        if term.abs() < 1e-12 {
            break;
        }
    }
    (2.0 * p).clamp(0.0, 1.0)
}

/// One-call KS test of sorted data against an analytic CDF.
pub fn ks_pvalue_against_cdf(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    ks_pvalue(ks_statistic(sorted, cdf), sorted.len())
}

/// Pr(X² > x) for a chi-square with `df` degrees of freedom.
pub fn chi2_sf(x: f64, df: f64) -> f64 {
    gamma_q(0.5 * df, 0.5 * x).unwrap_or(f64::NAN)
}

/// Standard error of a binomial proportion estimate.
pub fn binomial_se(p_hat: f64, n: usize) -> f64 {
    (p_hat * (1.0 - p_hat) / n as f64).sqrt()
}

/// Normal-approximation confidence interval for a proportion.
pub fn binomial_ci(p_hat: f64, n: usize, z: f64) -> (f64, f64) {
    let se = binomial_se(p_hat, n);
    ((p_hat - z * se).max(0.0), (p_hat + z * se).min(1.0))
}

/// Mean and batch-means standard error for a (possibly autocorrelated) chain.
pub fn batch_means_se(chain: &[f64], n_batches: usize) -> (f64, f64) {
    let n = chain.len();
    assert!(n_batches >= 2 && n >= n_batches);
    let batch = n / n_batches;
    let used = batch * n_batches;
    let mean = chain[..used].iter().sum::<f64>() / used as f64;
    let mut var_b = 0.0;
    for b in 0..n_batches {
        let m = chain[b * batch..(b + 1) * batch].iter().sum::<f64>() / batch as f64;
        var_b += (m - mean) * (m - mean);
    }
    var_b /= (n_batches - 1) as f64;
    (mean, (var_b / n_batches as f64).sqrt())
}

/// Ordinary least-squares slope of y on x.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxy += (xi - mx) * (yi - my);
        sxx += (xi - mx) * (xi - mx);
    }
    sxy / sxx
}

/// Kahan-compensated sum; the deterministic reduction used for likelihoods.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}
