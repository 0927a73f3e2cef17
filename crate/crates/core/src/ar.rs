//! Stationary Gaussian AR(p) processes with unit marginal variance.
//!
//! Most quantities are derived from the partial autocorrelations through the
//! Durbin-Levinson recursion: the nested predictor coefficients of every
//! order `k <= p`, the prediction-error variances `v_k = prod (1 - r_j^2)` and
//! the autocorrelations.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spectral radius margin below 1 that counts as stationary.
pub const STATIONARITY_MARGIN: f64 = 1e-10;

/// AR coefficients `phi_1..phi_p` of a causal, stationary process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ArCoeffs {
    phi: Vec<f64>,
}

impl TryFrom<Vec<f64>> for ArCoeffs {
    type Error = Error;

    fn try_from(phi: Vec<f64>) -> Result<Self> {
        Self::new(phi)
    }
}

impl From<ArCoeffs> for Vec<f64> {
    fn from(c: ArCoeffs) -> Self {
        c.phi
    }
}

/// Partial autocorrelations, each strictly inside `(-1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PacfVector {
    r: Vec<f64>,
}

impl PacfVector {
    pub fn new(r: Vec<f64>) -> Result<Self> {
        if let Some((j, v)) = r.iter().enumerate().find(|(_, v)| !(v.abs() < 1.0)) {
            return Err(Error::domain(format!(
                "partial autocorrelation r_{} = {v} outside (-1, 1)",
                j + 1
            )));
        }
        Ok(Self { r })
    }

    pub fn values(&self) -> &[f64] {
        &self.r
    }

    pub fn order(&self) -> usize {
        self.r.len()
    }
}

/// One-step conditional law of the latent process given its past.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalMoments {
    pub mu_tilde: f64,
    pub sigma_tilde2: f64,
}

/// True iff the companion matrix of `phi` has spectral radius below
/// `1 - STATIONARITY_MARGIN`.
pub fn is_stationary(phi: &[f64]) -> bool {
    let p = phi.len();
    if p == 0 {
        return true;
    }
    if phi.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let mut companion = DMatrix::<f64>::zeros(p, p);
    for (j, &v) in phi.iter().enumerate() {
        companion[(0, j)] = v;
    }
    for i in 1..p {
        companion[(i, i - 1)] = 1.0;
    }
    let radius = companion
        .complex_eigenvalues()
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    radius < 1.0 - STATIONARITY_MARGIN
}

impl ArCoeffs {
    pub fn new(phi: Vec<f64>) -> Result<Self> {
        if !is_stationary(&phi) {
            return Err(Error::domain(format!(
                "AR coefficients {phi:?} are not stationary"
            )));
        }
        Ok(Self { phi })
    }

    pub fn white_noise() -> Self {
        Self { phi: Vec::new() }
    }

    pub fn order(&self) -> usize {
        self.phi.len()
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn is_stationary(&self) -> bool {
        is_stationary(&self.phi)
    }

    /// Maps partial autocorrelations onto coefficients. The image is
    /// stationary for every admissible input.
    pub fn from_pacf(pacf: &PacfVector) -> Self {
        Self {
            phi: Ladder::from_pacf(pacf.values()).top().to_vec(),
        }
    }

    /// Inverse of [`ArCoeffs::from_pacf`] by the step-down recursion.
    pub fn to_pacf(&self) -> Result<PacfVector> {
        let p = self.order();
        let mut r = vec![0.0; p];
        let mut cur = self.phi.clone();
        for k in (1..=p).rev() {
            let rk = cur[k - 1];
            if !(rk.abs() < 1.0) {
                return Err(Error::domain(format!(
                    "AR coefficients {:?} are not stationary",
                    self.phi
                )));
            }
            r[k - 1] = rk;
            let denom = 1.0 - rk * rk;
            let prev: Vec<f64> = (0..k - 1)
                .map(|j| (cur[j] + rk * cur[k - 2 - j]) / denom)
                .collect();
            cur = prev;
        }
        PacfVector::new(r)
    }

    pub(crate) fn ladder(&self) -> Ladder {
        Ladder::from_pacf(self.to_pacf().expect("stationary by construction").values())
    }

    /// Innovation variance that gives the process unit marginal variance,
    /// `1 - sum phi_j rho(j)`.
    pub fn innovation_variance(&self) -> f64 {
        let rho = self.acf(self.order());
        1.0 - self
            .phi
            .iter()
            .zip(&rho[1..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
    }

    pub fn innovation_sd(&self) -> f64 {
        self.innovation_variance().sqrt()
    }

    /// Autocorrelations `rho(0..=max_lag)`.
    pub fn acf(&self, max_lag: usize) -> Vec<f64> {
        let ladder = self.ladder();
        let p = self.order();
        let mut rho = Vec::with_capacity(max_lag.max(p) + 1);
        rho.push(1.0);
        // Order-k Yule-Walker equations evaluated at lag k.
        for k in 1..=p {
            let coeffs = ladder.coeffs(k);
            rho.push((1..=k).map(|j| coeffs[j - 1] * rho[k - j]).sum());
        }
        for tau in p + 1..=max_lag {
            rho.push((1..=p).map(|j| self.phi[j - 1] * rho[tau - j]).sum());
        }
        rho.truncate(max_lag + 1);
        rho
    }

    /// First `n_terms` coefficients of the moving-average representation.
    pub fn psi_weights(&self, n_terms: usize) -> Vec<f64> {
        let p = self.order();
        let mut psi = Vec::with_capacity(n_terms);
        for j in 0..n_terms {
            if j == 0 {
                psi.push(1.0);
            } else {
                psi.push((1..=p.min(j)).map(|i| self.phi[i - 1] * psi[j - i]).sum());
            }
        }
        psi
    }

    /// Moving-average coefficients, extended until the last `max(p, 1)`
    /// weights all fall below `1e-12` in magnitude.
    pub fn psi_weights_converged(&self) -> Vec<f64> {
        const CAP: usize = 1_000_000;
        let p = self.order();
        let window = p.max(1);
        let mut psi = vec![1.0];
        while psi.len() < CAP {
            let j = psi.len();
            let next = (1..=p.min(j)).map(|i| self.phi[i - 1] * psi[j - i]).sum();
            psi.push(next);
            if psi.len() > window
                && psi[psi.len() - window..]
                    .iter()
                    .all(|v: &f64| v.abs() < 1e-12)
            {
                break;
            }
        }
        psi
    }

    /// Conditional mean and variance of the next value given the history in
    /// chronological order (most recent last).
    pub fn conditional_moments(&self, history: &[f64]) -> Result<ConditionalMoments> {
        let p = self.order();
        if history.len() < p {
            return Err(Error::domain(format!(
                "history of length {} is shorter than the order {p}",
                history.len()
            )));
        }
        let n = history.len();
        let mu = (1..=p).map(|j| self.phi[j - 1] * history[n - j]).sum();
        Ok(ConditionalMoments {
            mu_tilde: mu,
            sigma_tilde2: self.innovation_variance(),
        })
    }

    /// Simulates `n` values of the unit-variance process started from its
    /// stationary law.
    pub fn simulate_unit<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        let ladder = self.ladder();
        let p = self.order();
        let mut z = Vec::with_capacity(n);
        for t in 0..n {
            // The first p values follow the exact conditionals of growing order.
            let k = t.min(p);
            let coeffs = ladder.coeffs(k);
            let mean: f64 = (1..=k).map(|j| coeffs[j - 1] * z[t - j]).sum();
            let e: f64 = rng.sample(StandardNormal);
            z.push(mean + ladder.variance(k).sqrt() * e);
        }
        z
    }
}

/// Conditional mean and variance of `z_t` given up to `p` previous values,
/// for every position of the series, using exact conditionals of growing
/// order at the start.
pub(crate) struct Ladder {
    coeffs: Vec<Vec<f64>>,
    variances: Vec<f64>,
}

impl Ladder {
    pub fn from_pacf(r: &[f64]) -> Self {
        let mut coeffs: Vec<Vec<f64>> = vec![Vec::new()];
        let mut variances = vec![1.0];
        for (k, &rk) in r.iter().enumerate() {
            let prev = &coeffs[k];
            let mut next = Vec::with_capacity(k + 1);
            for j in 0..k {
                next.push(prev[j] - rk * prev[k - 1 - j]);
            }
            next.push(rk);
            coeffs.push(next);
            variances.push(variances[k] * (1.0 - rk * rk));
        }
        Self { coeffs, variances }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Best linear predictor coefficients of order `k`.
    pub fn coeffs(&self, k: usize) -> &[f64] {
        &self.coeffs[k]
    }

    pub fn variance(&self, k: usize) -> f64 {
        self.variances[k]
    }

    pub fn top(&self) -> &[f64] {
        &self.coeffs[self.order()]
    }

    /// Exact Gaussian log-density of a unit-variance AR path.
    pub fn log_density(&self, z: &[f64]) -> f64 {
        let p = self.order();
        let mut ll = 0.0;
        let ln_var: Vec<f64> = self.variances.iter().map(|v| v.ln()).collect();
        for t in 0..z.len() {
            let k = t.min(p);
            let c = &self.coeffs[k];
            let mut mean = 0.0;
            for j in 1..=k {
                mean += c[j - 1] * z[t - j];
            }
            let d = z[t] - mean;
            ll -= crate::normal::LN_SQRT_2PI + 0.5 * ln_var[k] + 0.5 * d * d / self.variances[k];
        }
        ll
    }
}
