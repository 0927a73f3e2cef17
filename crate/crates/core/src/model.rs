//! The two g-and-h autoregressive models.
//!
//! * **Latent-transformed** (`t`): `Y_t = X_t'beta + xi + omega * tau(Z_t)` where
//!   `Z_t` is a unit-variance Gaussian AR(p) process.
//! * **Error-transformed** (`e`): `Y~_t = sum phi_j Y~_{t-j} + omega * tau(eps_t)`
//!   with `eps_t` iid `N(0, 1)` and `Y~_t = Y_t - X_t'beta - xi`.
//!
//! Both likelihoods need `tau^{-1}` at every observation; it is taken either
//! exactly or from an [`InverseTable`] built over the range of the current
//! standardized residuals.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::ar::{ArCoeffs, Ladder};
use crate::error::{Error, Result};
use crate::normal::LN_SQRT_2PI;
use crate::tgh::{InverseTable, TghParams, TghShape, TghSummary, G_SWITCH};

/// Which of the two models a spec describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// g-and-h transform of a latent Gaussian AR process.
    #[serde(rename = "t")]
    TransformedLatent,
    /// AR recursion driven by g-and-h innovations.
    #[serde(rename = "e")]
    TransformedError,
}

impl Variant {
    pub fn tag(&self) -> &'static str {
        match self {
            Variant::TransformedLatent => "t",
            Variant::TransformedError => "e",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t" | "t-model" | "latent" => Ok(Variant::TransformedLatent),
            "e" | "e-model" | "error" => Ok(Variant::TransformedError),
            other => Err(Error::domain(format!(
                "unknown model variant '{other}' (expected t or e)"
            ))),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// Row-major covariate matrix aligned with a series.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Covariates {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl Covariates {
    /// `nrows` rows without any covariate columns.
    pub fn none(nrows: usize) -> Self {
        Self {
            nrows,
            ncols: 0,
            data: Vec::new(),
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let ncols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * ncols);
        for (t, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(Error::domain(format!(
                    "covariate row {t} has {} entries, expected {ncols}",
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::domain(format!(
                    "covariate row {t} contains non-finite value {v}"
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            nrows: rows.len(),
            ncols,
            data,
        })
    }

    /// Harmonic pair `(cos(2 pi t / period), sin(2 pi t / period))` for
    /// `t = first_t, first_t + 1, ...`.
    pub fn harmonics(nrows: usize, period: f64, first_t: usize) -> Self {
        let mut data = Vec::with_capacity(2 * nrows);
        for i in 0..nrows {
            let angle = 2.0 * std::f64::consts::PI * (first_t + i) as f64 / period;
            data.push(angle.cos());
            data.push(angle.sin());
        }
        Self {
            nrows,
            ncols: 2,
            data,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.ncols..(t + 1) * self.ncols]
    }

    pub fn rows(&self, range: std::ops::Range<usize>) -> Self {
        Self {
            nrows: range.len(),
            ncols: self.ncols,
            data: self.data[range.start * self.ncols..range.end * self.ncols].to_vec(),
        }
    }
}

/// Observations with their aligned covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    y: Vec<f64>,
    x: Covariates,
}

impl TimeSeries {
    pub fn new(y: Vec<f64>, x: Covariates) -> Result<Self> {
        if y.len() != x.nrows() {
            return Err(Error::domain(format!(
                "{} observations but {} covariate rows",
                y.len(),
                x.nrows()
            )));
        }
        if let Some(t) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("observation {t} is not finite")));
        }
        Ok(Self { y, x })
    }

    pub fn univariate(y: Vec<f64>) -> Result<Self> {
        let n = y.len();
        Self::new(y, Covariates::none(n))
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn covariates(&self) -> &Covariates {
        &self.x
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        Self {
            y: self.y[range.clone()].to_vec(),
            x: self.x.rows(range),
        }
    }
}

/// Regression coefficients applied to the covariate rows.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RegressionSpec {
    pub beta: Vec<f64>,
}

impl RegressionSpec {
    pub fn new(beta: Vec<f64>) -> Self {
        Self { beta }
    }

    pub fn none() -> Self {
        Self::default()
    }

    pub fn dim(&self) -> usize {
        self.beta.len()
    }

    #[inline]
    pub fn effect(&self, row: &[f64]) -> f64 {
        self.beta.iter().zip(row).map(|(b, x)| b * x).sum()
    }

    fn check(&self, x: &Covariates) -> Result<()> {
        if x.ncols() != self.dim() {
            return Err(Error::domain(format!(
                "{} covariate columns but {} regression coefficients",
                x.ncols(),
                self.dim()
            )));
        }
        Ok(())
    }
}

/// A fully specified model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub variant: Variant,
    pub tgh: TghParams,
    pub ar: ArCoeffs,
    pub reg: RegressionSpec,
}

/// Mean, standard deviation, skewness and excess kurtosis of the stochastic
/// part `Y_t - X_t'beta - xi` of a model.
pub type MomentDescriptors = TghSummary;

impl ModelSpec {
    pub fn new(variant: Variant, tgh: TghParams, ar: ArCoeffs, reg: RegressionSpec) -> Self {
        Self {
            variant,
            tgh,
            ar,
            reg,
        }
    }

    pub fn order(&self) -> usize {
        self.ar.order()
    }

    pub fn shape(&self) -> TghShape {
        self.tgh.shape()
    }

    /// Marginal descriptors of `Y_t - X_t'beta - xi`.
    pub fn marginal_descriptors(&self) -> Result<MomentDescriptors> {
        match self.variant {
            Variant::TransformedLatent => {
                let s = self.shape().summary()?;
                let w = self.tgh.omega();
                Ok(TghSummary {
                    mean: w * s.mean,
                    sd: w * s.sd,
                    ..s
                })
            }
            Variant::TransformedError => e_model_moment_descriptors(self),
        }
    }
}

/// Draws a path of length `covariates.nrows()` from the model.
pub fn simulate<R: Rng + ?Sized>(
    spec: &ModelSpec,
    covariates: &Covariates,
    rng: &mut R,
) -> Result<TimeSeries> {
    let n = covariates.nrows();
    if n == 0 {
        return Err(Error::domain("cannot simulate a series of length 0"));
    }
    spec.reg.check(covariates)?;
    let shape = spec.shape();
    let (xi, omega) = (spec.tgh.xi(), spec.tgh.omega());
    let stochastic: Vec<f64> = match spec.variant {
        Variant::TransformedLatent => {
            let z = spec.ar.simulate_unit(n, rng);
            z.into_iter().map(|v| omega * shape.tau(v)).collect()
        }
        Variant::TransformedError => {
            let p = spec.order();
            let phi = spec.ar.phi();
            let burn_in = (50 * p).max(500);
            let mut y = vec![0.0; p];
            y.reserve(burn_in + n);
            for _ in 0..burn_in + n {
                let t = y.len();
                let eps: f64 = rng.sample(StandardNormal);
                let ar: f64 = (1..=p).map(|j| phi[j - 1] * y[t - j]).sum();
                y.push(ar + omega * shape.tau(eps));
            }
            y.split_off(p + burn_in)
        }
    };
    let y = stochastic
        .into_iter()
        .enumerate()
        .map(|(t, s)| s + xi + spec.reg.effect(covariates.row(t)))
        .collect();
    TimeSeries::new(y, covariates.clone())
}

/// Default interpolation tolerance of the likelihood's inverse table. Much
/// finer tables cost more to build than exact inversion at moderate `n`.
pub const LIKELIHOOD_TABLE_TOL: f64 = 1e-5;

/// How `tau^{-1}` is evaluated inside a likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum InverseMode {
    Exact,
    /// Piecewise-linear table built over the residual range at each
    /// evaluation.
    Table {
        max_abs_err: f64,
    },
}

impl Default for InverseMode {
    fn default() -> Self {
        InverseMode::Table {
            max_abs_err: LIKELIHOOD_TABLE_TOL,
        }
    }
}

/// Value of a log-likelihood, or why it has none.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogLik {
    Finite(f64),
    /// A standardized residual lies outside the support of the transform.
    OutOfSupport {
        index: usize,
    },
    /// Evaluation overflowed or the inverse failed to converge.
    Degenerate,
}

impl LogLik {
    /// The log-likelihood with every failure mapped to `-inf`.
    pub fn value(&self) -> f64 {
        match *self {
            LogLik::Finite(v) => v,
            _ => f64::NEG_INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, LogLik::Finite(_))
    }
}

/// Reusable buffers for repeated likelihood evaluation.
#[derive(Debug, Default, Clone)]
pub(crate) struct Workspace {
    resid: Vec<f64>,
    z: Vec<f64>,
    detrended: Vec<f64>,
}

enum Inversion {
    Done,
    OutOfSupport(usize),
    Failed,
}

/// Fills `out` with `tau^{-1}` of every entry of `t`.
fn invert_all(shape: TghShape, t: &[f64], mode: InverseMode, out: &mut Vec<f64>) -> Inversion {
    out.clear();
    if shape.is_gaussian() {
        out.extend_from_slice(t);
        return Inversion::Done;
    }
    let (lo, hi) = shape.support();
    let mut t_min = f64::INFINITY;
    let mut t_max = f64::NEG_INFINITY;
    for (i, &v) in t.iter().enumerate() {
        if !(v > lo && v < hi) {
            return Inversion::OutOfSupport(i);
        }
        t_min = t_min.min(v);
        t_max = t_max.max(v);
    }
    // Closed forms are as cheap as a table lookup.
    if matches!(mode, InverseMode::Exact) || shape.h() == 0.0 || shape.g().abs() < G_SWITCH {
        for &v in t {
            match shape.tau_inverse(v) {
                Ok(z) => out.push(z),
                Err(_) => return Inversion::Failed,
            }
        }
        return Inversion::Done;
    }
    let InverseMode::Table { max_abs_err } = mode else {
        unreachable!()
    };
    let (Ok(z_lo), Ok(z_hi)) = (shape.tau_inverse(t_min), shape.tau_inverse(t_max)) else {
        return Inversion::Failed;
    };
    if z_hi <= z_lo {
        out.resize(t.len(), z_lo);
        return Inversion::Done;
    }
    let Ok(table) = InverseTable::build(shape, (z_lo, z_hi), max_abs_err) else {
        return Inversion::Failed;
    };
    for &v in t {
        match table.eval(v) {
            Ok(z) => out.push(z),
            Err(_) => return Inversion::Failed,
        }
    }
    Inversion::Done
}

fn check_data(spec: &ModelSpec, data: &TimeSeries) -> Result<()> {
    spec.reg.check(data.covariates())?;
    if data.len() <= spec.order() {
        return Err(Error::domain(format!(
            "series of length {} is too short for order {}",
            data.len(),
            spec.order()
        )));
    }
    Ok(())
}

/// Full log-likelihood of the latent-transformed model.
///
/// The latent path `z_t = tau^{-1}((y_t - xi - x_t'beta)/omega)` is scored
/// by its exact Gaussian AR density (stationary start, conditionals of
/// growing order for `t <= p`), with the Jacobian `-n log omega - sum log tau'(z_t)`.
pub fn loglik_t_model(spec: &ModelSpec, data: &TimeSeries, inverse: InverseMode) -> Result<LogLik> {
    check_data(spec, data)?;
    let ladder = spec.ar.ladder();
    Ok(loglik_t_with(
        spec,
        &ladder,
        data,
        inverse,
        &mut Workspace::default(),
    ))
}

pub(crate) fn loglik_t_with(
    spec: &ModelSpec,
    ladder: &Ladder,
    data: &TimeSeries,
    inverse: InverseMode,
    ws: &mut Workspace,
) -> LogLik {
    let (xi, omega) = (spec.tgh.xi(), spec.tgh.omega());
    let shape = spec.shape();
    let x = data.covariates();
    ws.resid.clear();
    ws.resid.extend(
        data.y()
            .iter()
            .enumerate()
            .map(|(t, &y)| (y - xi - spec.reg.effect(x.row(t))) / omega),
    );
    match invert_all(shape, &ws.resid, inverse, &mut ws.z) {
        Inversion::Done => {}
        Inversion::OutOfSupport(i) => return LogLik::OutOfSupport { index: i },
        Inversion::Failed => return LogLik::Degenerate,
    }
    let n = ws.z.len() as f64;
    let mut ll = ladder.log_density(&ws.z) - n * omega.ln();
    if !shape.is_gaussian() {
        ll -= ws.z.iter().map(|&z| shape.log_tau_prime(z)).sum::<f64>();
    }
    if ll.is_finite() {
        LogLik::Finite(ll)
    } else {
        LogLik::Degenerate
    }
}

/// Log-likelihood of the error-transformed model conditional on the first
/// `k >= p` observations.
pub fn loglik_e_model(
    spec: &ModelSpec,
    data: &TimeSeries,
    k: usize,
    inverse: InverseMode,
) -> Result<LogLik> {
    check_data(spec, data)?;
    if k < spec.order() {
        return Err(Error::domain(format!(
            "conditioning length k = {k} is below the order {}",
            spec.order()
        )));
    }
    if data.len() <= k {
        return Err(Error::domain(format!(
            "series of length {} leaves nothing after k = {k}",
            data.len()
        )));
    }
    Ok(loglik_e_with(
        spec,
        data,
        k,
        inverse,
        &mut Workspace::default(),
    ))
}

pub(crate) fn loglik_e_with(
    spec: &ModelSpec,
    data: &TimeSeries,
    k: usize,
    inverse: InverseMode,
    ws: &mut Workspace,
) -> LogLik {
    let (xi, omega) = (spec.tgh.xi(), spec.tgh.omega());
    let shape = spec.shape();
    let phi = spec.ar.phi();
    let p = phi.len();
    let x = data.covariates();
    ws.detrended.clear();
    ws.detrended.extend(
        data.y()
            .iter()
            .enumerate()
            .map(|(t, &y)| y - xi - spec.reg.effect(x.row(t))),
    );
    ws.resid.clear();
    let d = &ws.detrended;
    for t in k..d.len() {
        let mut pred = 0.0;
        for j in 1..=p {
            pred += phi[j - 1] * d[t - j];
        }
        ws.resid.push((d[t] - pred) / omega);
    }
    match invert_all(shape, &ws.resid, inverse, &mut ws.z) {
        Inversion::Done => {}
        Inversion::OutOfSupport(i) => return LogLik::OutOfSupport { index: i + k },
        Inversion::Failed => return LogLik::Degenerate,
    }
    let m = ws.z.len() as f64;
    let mut ll = -m * (LN_SQRT_2PI + omega.ln());
    for &e in &ws.z {
        ll -= 0.5 * e * e;
    }
    if !shape.is_gaussian() {
        ll -= ws.z.iter().map(|&e| shape.log_tau_prime(e)).sum::<f64>();
    }
    if ll.is_finite() {
        LogLik::Finite(ll)
    } else {
        LogLik::Degenerate
    }
}

/// Autocovariance of `T_t = tau(Z_t)` at a lag where `Z` has correlation `rho_z`.
pub fn t_model_autocovariance(shape: TghShape, rho_z: f64) -> Result<f64> {
    let h = shape.h();
    if h >= 0.5 {
        return Err(Error::Undefined {
            what: "autocovariance",
            h,
        });
    }
    if !(rho_z.abs() <= 1.0) {
        return Err(Error::domain(format!(
            "correlation {rho_z} outside [-1, 1]"
        )));
    }
    let mean = shape.moment(1)?;
    let r2 = rho_z * rho_z;
    let det = (1.0 - h) * (1.0 - h) - r2 * h * h;
    let g = shape.g();
    if g.abs() < G_SWITCH {
        // E[Z1 Z2 exp(h (Z1^2 + Z2^2)/2)] for a correlated standard normal pair.
        return Ok(rho_z * det.powf(-1.5));
    }
    let g2 = g * g;
    let a = (1.0 + rho_z) / (1.0 - h * (1.0 + rho_z)) * g2;
    let b = (1.0 - h * (1.0 - r2)) / det * g2 / 2.0;
    let cross = (a.exp_m1() - 2.0 * b.exp_m1()) / (g2 * det.sqrt());
    Ok(cross - mean * mean)
}

/// Mean, sd, skewness and excess kurtosis of `Y~_t` in the error-transformed
/// model, from the innovation moments and the psi-weights.
pub fn e_model_moment_descriptors(spec: &ModelSpec) -> Result<MomentDescriptors> {
    let s = spec.shape().summary()?;
    let psi = spec.ar.psi_weights_converged();
    let sum_pow = |k: i32| psi.iter().map(|v| v.powi(k)).sum::<f64>();
    let (s2, s3, s4) = (sum_pow(2), sum_pow(3), sum_pow(4));
    let omega = spec.tgh.omega();
    let phi_sum: f64 = spec.ar.phi().iter().sum();
    Ok(TghSummary {
        mean: omega / (1.0 - phi_sum) * s.mean,
        sd: omega * (s2).sqrt() * s.sd,
        skewness: s3 / s2.powf(1.5) * s.skewness,
        excess_kurtosis: s4 / (s2 * s2) * s.excess_kurtosis,
    })
}

/// Consecutive detrended pairs `(y_{t-1} - x_{t-1}'beta, y_t - x_t'beta)`.
pub fn lag_plot_data(data: &TimeSeries, reg: &RegressionSpec) -> Result<Vec<(f64, f64)>> {
    reg.check(data.covariates())?;
    if data.len() < 2 {
        return Err(Error::domain("lag plot needs at least two observations"));
    }
    let x = data.covariates();
    let d: Vec<f64> = data
        .y()
        .iter()
        .enumerate()
        .map(|(t, &y)| y - reg.effect(x.row(t)))
        .collect();
    Ok(d.windows(2).map(|w| (w[0], w[1])).collect())
}
