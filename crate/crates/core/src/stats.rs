//! Small descriptive and inferential helpers used across the crate.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Sample quantile with linear interpolation between order statistics
/// (the "type 7" definition). `sorted` must be ascending.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub fn median(values: &[f64]) -> f64 {
    quantile_sorted(&sorted(values), 0.5)
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Mean, variance (divisor n), skewness and excess kurtosis.
pub fn sample_moments(values: &[f64]) -> (f64, f64, f64, f64) {
    let n = values.len() as f64;
    let m = mean(values);
    let (mut c2, mut c3, mut c4) = (0.0, 0.0, 0.0);
    for v in values {
        let d = v - m;
        let d2 = d * d;
        c2 += d2;
        c3 += d2 * d;
        c4 += d2 * d2;
    }
    c2 /= n;
    c3 /= n;
    c4 /= n;
    (m, c2, c3 / c2.powf(1.5), c4 / (c2 * c2) - 3.0)
}

pub fn rmse(estimates: &[f64], truth: f64) -> f64 {
    (estimates.iter().map(|e| (e - truth).powi(2)).sum::<f64>() / estimates.len() as f64).sqrt()
}

/// Ordinary least squares of `y` on the columns of `x` (row-major,
/// `ncols` wide). Returns the coefficient vector.
pub fn least_squares(y: &[f64], x: &[f64], ncols: usize) -> Result<Vec<f64>> {
    let n = y.len();
    if ncols == 0 {
        return Ok(Vec::new());
    }
    if x.len() != n * ncols || n < ncols {
        return Err(Error::domain(
            "least squares design has the wrong shape or too few rows",
        ));
    }
    let a = DMatrix::from_row_slice(n, ncols, x);
    let b = DVector::from_column_slice(y);
    let svd = a.svd(true, true);
    let max_sv = svd.singular_values.max();
    if !(max_sv > 0.0) || svd.singular_values.min() <= 1e-12 * max_sv {
        return Err(Error::domain("least squares design is rank deficient"));
    }
    let sol = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::domain(e.to_string()))?;
    Ok(sol.iter().copied().collect())
}

/// Sample autocorrelations `r(0..=max_lag)` about the sample mean.
pub fn sample_acf(values: &[f64], max_lag: usize) -> Vec<f64> {
    let n = values.len();
    let m = mean(values);
    let c0: f64 = values.iter().map(|v| (v - m).powi(2)).sum();
    (0..=max_lag)
        .map(|k| {
            if k >= n || c0 == 0.0 {
                return if k == 0 { 1.0 } else { 0.0 };
            }
            (k..n)
                .map(|t| (values[t] - m) * (values[t - k] - m))
                .sum::<f64>()
                / c0
        })
        .collect()
}

/// Sample partial autocorrelations of orders `1..=p` from Yule-Walker
/// (Durbin-Levinson on the sample autocorrelations). Every entry lies in
/// `(-1, 1)` because the biased sample autocovariance is positive definite.
pub fn yule_walker_pacf(values: &[f64], p: usize) -> Vec<f64> {
    let r = sample_acf(values, p);
    let mut phi: Vec<f64> = Vec::new();
    let mut v = 1.0;
    let mut pacf = Vec::with_capacity(p);
    for k in 1..=p {
        let num = r[k] - (1..k).map(|j| phi[j - 1] * r[k - j]).sum::<f64>();
        let rk = if v > 0.0 {
            (num / v).clamp(-0.99, 0.99)
        } else {
            0.0
        };
        let mut next: Vec<f64> = (1..k).map(|j| phi[j - 1] - rk * phi[k - j - 1]).collect();
        next.push(rk);
        phi = next;
        v *= 1.0 - rk * rk;
        pacf.push(rk);
    }
    pacf
}

/// Kolmogorov-Smirnov distance of a sample from Uniform(0, 1).
pub fn ks_uniform(values: &[f64]) -> f64 {
    let s = sorted(values);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &u)| {
            let u = u.clamp(0.0, 1.0);
            (u - i as f64 / n).max((i + 1) as f64 / n - u)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic p-value of the one-sample KS statistic `d` at sample size `n`,
/// with Stephens' small-sample correction.
pub fn kolmogorov_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = 2.0 * (-1f64).powi(k - 1) * (-2.0 * kf * kf * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}
