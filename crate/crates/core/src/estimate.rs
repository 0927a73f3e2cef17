//! Maximum approximated-likelihood estimation, BIC order selection and the
//! two-stage independence baseline.

use serde::{Deserialize, Serialize};

use crate::ar::{ArCoeffs, Ladder, PacfVector};
use crate::error::{Error, Result};
use crate::model::{
    loglik_e_with, loglik_t_with, InverseMode, ModelSpec, RegressionSpec, TimeSeries, Variant,
    Workspace,
};
use crate::normal;
use crate::optim::{nelder_mead, SimplexOptions};
use crate::stats;
use crate::tgh::{TghParams, TghShape};

/// PACF values are `tanh(u)` with `u` clipped to this range.
const PACF_U_LIMIT: f64 = 10.0;

/// Evaluation budget, per parameter, of each screening run in a multistart fit.
const SCREEN_EVALS_PER_DIM: usize = 25;

/// Tuning of a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub variant: Variant,
    /// Largest order considered by [`select_order`].
    pub max_order: usize,
    pub simplex: SimplexOptions,
    /// Number of optimizer start points. Each is screened by a short
    /// simplex run and the full search continues from the best of them.
    pub multistart: usize,
    pub inverse: InverseMode,
    /// Conditioning length of the error-transformed likelihood. `None` uses
    /// `p` in [`fit`] and `max_order` in [`select_order`].
    pub k: Option<usize>,
    /// Holds `(g, h)` at a given value instead of estimating them;
    /// `Some(TghShape::gaussian())` gives the Gaussian AR fit.
    pub fixed_shape: Option<TghShape>,
}

impl FitConfig {
    pub fn new(variant: Variant) -> Self {
        Self {
            variant,
            max_order: 6,
            simplex: SimplexOptions::default(),
            multistart: 5,
            inverse: InverseMode::default(),
            k: None,
            fixed_shape: None,
        }
    }

    /// Gaussian AR fit through the latent-transformed likelihood at `g = h = 0`.
    pub fn gaussian() -> Self {
        Self {
            fixed_shape: Some(TghShape::gaussian()),
            ..Self::new(Variant::TransformedLatent)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.simplex;
        if !(s.f_tol > 0.0 && s.x_tol > 0.0) || s.max_evals == 0 {
            return Err(Error::domain(
                "optimizer tolerances and evaluation budget must be positive",
            ));
        }
        if self.multistart == 0 {
            return Err(Error::domain("multistart must be at least 1"));
        }
        if let InverseMode::Table { max_abs_err } = self.inverse {
            if !(max_abs_err > 0.0) {
                return Err(Error::domain("table tolerance must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Convergence {
    /// At least one start met the simplex tolerances.
    pub converged: bool,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub spec: ModelSpec,
    /// Approximated log-likelihood at the optimum.
    pub loglik: f64,
    pub bic: f64,
    pub order_selected: usize,
    /// Observations entering the likelihood (`n - k` for the error model).
    pub n_used: usize,
    /// Conditioning length; 0 for the latent-transformed model.
    pub k: usize,
    /// Whether `(g, h)` were estimated; fixes the BIC parameter count.
    pub shape_estimated: bool,
    pub convergence: Convergence,
    pub start_points_tried: usize,
}

/// `-2 loglik + (p + 4) log n_used`, with the 4 reduced to 2 when the shape
/// is held fixed.
pub fn bic(loglik: f64, order: usize, n_used: usize, shape_estimated: bool) -> f64 {
    let free = order + if shape_estimated { 4 } else { 2 };
    -2.0 * loglik + free as f64 * (n_used as f64).ln()
}

/// Starting values in the natural parameterization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialValues {
    pub xi: f64,
    pub omega: f64,
    pub g: f64,
    pub h: f64,
    pub beta: Vec<f64>,
    pub phi: Vec<f64>,
}

/// Robust moment-type starting values.
///
/// `beta` comes from least squares with an intercept, `xi` and `omega` from
/// the median and IQR, `g` from the octile ratio
/// `log((q_{7/8} - q_{1/2}) / (q_{1/2} - q_{1/8})) / z_{7/8}`, and `phi`
/// from Yule-Walker. For the latent model these statistics use the detrended
/// series and Yule-Walker runs on its rough back-transform; for the error
/// model they use the residuals of a Yule-Walker fit to the detrended series.
pub fn initial_values(data: &TimeSeries, p: usize, variant: Variant) -> Result<InitialValues> {
    let n = data.len();
    if n < p + 2 {
        return Err(Error::domain(format!(
            "need at least {} observations for order {p}",
            p + 2
        )));
    }
    let x = data.covariates();
    let nb = x.ncols();
    let beta = if nb == 0 {
        Vec::new()
    } else {
        let design: Vec<f64> = (0..n)
            .flat_map(|t| std::iter::once(1.0).chain(x.row(t).iter().copied()))
            .collect();
        stats::least_squares(data.y(), &design, nb + 1)?.split_off(1)
    };
    let reg = RegressionSpec::new(beta.clone());
    let d: Vec<f64> = data
        .y()
        .iter()
        .enumerate()
        .map(|(t, &y)| y - reg.effect(x.row(t)))
        .collect();
    let h = 0.05;
    let (xi, omega, g, phi) = match variant {
        Variant::TransformedLatent => {
            let (med, omega, g) = robust_location_scale_skew(&d)?;
            let shape = TghShape::new(g, h)?;
            let z: Vec<f64> = d
                .iter()
                .map(|v| shape.tau_inverse((v - med) / omega))
                .collect::<Result<_>>()?;
            let pacf = stats::yule_walker_pacf(&z, p);
            (
                med,
                omega,
                g,
                ArCoeffs::from_pacf(&PacfVector::new(pacf)?).phi().to_vec(),
            )
        }
        Variant::TransformedError => {
            let pacf = stats::yule_walker_pacf(&d, p);
            let phi = ArCoeffs::from_pacf(&PacfVector::new(pacf)?).phi().to_vec();
            let resid: Vec<f64> = (p..n)
                .map(|t| d[t] - (1..=p).map(|j| phi[j - 1] * d[t - j]).sum::<f64>())
                .collect();
            let (med, omega, g) = robust_location_scale_skew(&resid)?;
            let xi = med / (1.0 - phi.iter().sum::<f64>());
            (xi, omega, g, phi)
        }
    };
    Ok(InitialValues {
        xi,
        omega,
        g,
        h,
        beta,
        phi,
    })
}

fn robust_location_scale_skew(v: &[f64]) -> Result<(f64, f64, f64)> {
    let s = stats::sorted(v);
    let q = |p: f64| stats::quantile_sorted(&s, p);
    let (q1, q8, med, q7, q3) = (q(0.25), q(0.125), q(0.5), q(0.875), q(0.75));
    let iqr = q3 - q1;
    if !(iqr > 0.0) || !iqr.is_finite() {
        return Err(Error::domain(
            "series is degenerate (zero interquartile range)",
        ));
    }
    let omega = iqr / (2.0 * normal::quantile(0.75));
    let (upper, lower) = (q7 - med, med - q8);
    let g = if upper > 0.0 && lower > 0.0 {
        ((upper / lower).ln() / normal::quantile(0.875)).clamp(-1.0, 1.0)
    } else {
        0.0
    };
    Ok((med, omega, g))
}

/// Mapping between [`ModelSpec`] and the unconstrained optimizer vector
/// `(xi, log omega, g, h_raw, beta, atanh(pacf))` with `h = max(h_raw, 0)`.
/// `g` and `h_raw` are absent when the shape is fixed.
struct Layout {
    variant: Variant,
    p: usize,
    nb: usize,
    fixed_shape: Option<TghShape>,
}

impl Layout {
    fn shape_offset(&self) -> usize {
        2
    }

    fn beta_offset(&self) -> usize {
        if self.fixed_shape.is_some() {
            2
        } else {
            4
        }
    }

    fn pacf_offset(&self) -> usize {
        self.beta_offset() + self.nb
    }

    fn dim(&self) -> usize {
        self.pacf_offset() + self.p
    }

    fn encode(&self, iv: &InitialValues) -> Vec<f64> {
        let mut x = vec![iv.xi, iv.omega.ln()];
        if self.fixed_shape.is_none() {
            x.extend([iv.g, iv.h]);
        }
        x.extend_from_slice(&iv.beta);
        let pacf = ArCoeffs::new(iv.phi.clone())
            .and_then(|a| a.to_pacf())
            .map(|r| r.values().to_vec())
            .unwrap_or_else(|_| vec![0.0; self.p]);
        x.extend(pacf.iter().map(|r| r.clamp(-0.999, 0.999).atanh()));
        x
    }

    fn decode(&self, x: &[f64]) -> Option<(ModelSpec, Ladder)> {
        let omega = x[1].exp();
        let shape = match self.fixed_shape {
            Some(s) => s,
            None => {
                let o = self.shape_offset();
                TghShape::new(x[o], x[o + 1].max(0.0)).ok()?
            }
        };
        let tgh = TghParams::new(x[0], omega, shape).ok()?;
        let beta = x[self.beta_offset()..self.pacf_offset()].to_vec();
        let r: Vec<f64> = x[self.pacf_offset()..]
            .iter()
            .map(|u| u.clamp(-PACF_U_LIMIT, PACF_U_LIMIT).tanh())
            .collect();
        let ladder = Ladder::from_pacf(&r);
        let ar = ArCoeffs::from_pacf(&PacfVector::new(r).ok()?);
        Some((
            ModelSpec::new(self.variant, tgh, ar, RegressionSpec::new(beta)),
            ladder,
        ))
    }

    fn steps(&self, iv: &InitialValues, data: &TimeSeries) -> Vec<f64> {
        let mut s = vec![0.2 * iv.omega, 0.1];
        if self.fixed_shape.is_none() {
            s.extend([0.1, 0.05]);
        }
        let x = data.covariates();
        for j in 0..self.nb {
            let col: Vec<f64> = (0..x.nrows()).map(|t| x.row(t)[j]).collect();
            let (_, var, _, _) = stats::sample_moments(&col);
            let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
            s.push(0.2 * iv.omega / sd);
        }
        s.extend(std::iter::repeat_n(0.1, self.p));
        s
    }
}

/// Deterministic perturbations of the base start.
fn start_points(layout: &Layout, iv: &InitialValues, count: usize) -> Vec<Vec<f64>> {
    let base = layout.encode(iv);
    let shaped = layout.fixed_shape.is_none();
    let mut out = vec![base.clone()];
    let pacf_offset = layout.pacf_offset();
    for i in 1..count {
        let mut x = base.clone();
        match i {
            1 if shaped => x[3] = 0.2,
            2 if shaped => {
                x[2] = iv.g / 2.0;
                x[3] = -0.02;
            }
            3 => {
                for u in &mut x[pacf_offset..] {
                    *u *= 0.5;
                }
                if shaped {
                    x[3] = 0.1;
                }
            }
            4 if shaped => {
                x[1] += 0.8f64.ln();
                x[2] = if iv.g >= 0.0 {
                    iv.g + 0.25
                } else {
                    iv.g - 0.25
                };
                x[3] = 0.1;
            }
            _ => {
                // Quasi-random offsets from a Weyl sequence.
                for (j, v) in x.iter_mut().enumerate() {
                    let frac = ((i * (j + 1)) as f64 * 0.618_033_988_749_895).fract() - 0.5;
                    *v += frac * if j == 0 { iv.omega } else { 0.4 };
                }
            }
        }
        out.push(x);
    }
    out
}

struct Fitted {
    result: FitResult,
    x: Vec<f64>,
}

fn min_length(p: usize, nb: usize) -> usize {
    30.max(5 * (p + 4 + nb))
}

fn fit_inner(
    data: &TimeSeries,
    p: usize,
    config: &FitConfig,
    k: usize,
    warm: Option<&[f64]>,
) -> Result<Fitted> {
    config.validate()?;
    let n = data.len();
    let nb = data.covariates().ncols();
    if n < min_length(p, nb) {
        return Err(Error::domain(format!(
            "series of length {n} is too short for order {p} with {nb} covariates (need {})",
            min_length(p, nb)
        )));
    }
    let variant = config.variant;
    if variant == Variant::TransformedError && (k < p || k >= n) {
        return Err(Error::domain(format!(
            "conditioning length k = {k} must satisfy {p} <= k < {n}"
        )));
    }
    let n_used = if variant == Variant::TransformedError {
        n - k
    } else {
        n
    };
    let layout = Layout {
        variant,
        p,
        nb,
        fixed_shape: config.fixed_shape,
    };
    let mut iv = initial_values(data, p, variant)?;
    if let Some(s) = config.fixed_shape {
        iv.g = s.g();
        iv.h = s.h();
    }
    let steps = layout.steps(&iv, data);
    let mut starts = start_points(&layout, &iv, config.multistart);
    if let Some(w) = warm {
        if w.len() == layout.dim() {
            starts.push(w.to_vec());
        }
    }

    let mut ws = Workspace::default();
    let inverse = config.inverse;
    let scale = n_used as f64;
    let mut objective = |x: &[f64]| -> f64 {
        let Some((spec, ladder)) = layout.decode(x) else {
            return f64::INFINITY;
        };
        debug_assert!(spec.tgh.omega() > 0.0 && spec.shape().h() >= 0.0);
        let ll = match variant {
            Variant::TransformedLatent => loglik_t_with(&spec, &ladder, data, inverse, &mut ws),
            Variant::TransformedError => loglik_e_with(&spec, data, k, inverse, &mut ws),
        };
        -ll.value() / scale
    };

    // Every start gets a short screening run; the full search with restarts
    // then continues from the best screened point.
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut evaluations = 0;
    if starts.len() > 1 {
        let screen = SimplexOptions {
            max_evals: SCREEN_EVALS_PER_DIM * layout.dim().max(1),
            restarts: 0,
            ..config.simplex
        };
        for x0 in &starts {
            let m = nelder_mead(&mut objective, x0, &steps, &screen);
            evaluations += m.evaluations;
            if best.as_ref().is_none_or(|(_, f)| m.f < *f) {
                best = Some((m.x, m.f));
            }
        }
    }
    let from = best.as_ref().map_or(&starts[0], |(x, _)| x).clone();
    let m = nelder_mead(&mut objective, &from, &steps, &config.simplex);
    evaluations += m.evaluations;
    let any_converged = m.converged && m.f.is_finite();
    if best.as_ref().is_none_or(|(_, f)| m.f <= *f) {
        best = Some((m.x, m.f));
    }
    let (x, f) = best.expect("at least one start");
    if !f.is_finite() {
        return Err(Error::domain("likelihood is not finite at any start point"));
    }
    let (spec, _) = layout
        .decode(&x)
        .expect("finite objective implies a valid spec");
    let loglik = -f * scale;
    let shape_estimated = config.fixed_shape.is_none();
    let result = FitResult {
        spec,
        loglik,
        bic: bic(loglik, p, n_used, shape_estimated),
        order_selected: p,
        n_used,
        k: if variant == Variant::TransformedError {
            k
        } else {
            0
        },
        shape_estimated,
        convergence: Convergence {
            converged: any_converged,
            evaluations,
        },
        start_points_tried: starts.len(),
    };
    Ok(Fitted { result, x })
}

/// Maximizes the approximated likelihood of order `p` jointly over all
/// parameters.
///
/// Returns [`Error::NotConverged`] carrying the best point when no start
/// meets the simplex tolerances.
pub fn fit(data: &TimeSeries, p: usize, config: &FitConfig) -> Result<FitResult> {
    let k = config.k.unwrap_or(p);
    let fitted = fit_inner(data, p, config, k, None)?;
    finish(fitted.result)
}

fn finish(result: FitResult) -> Result<FitResult> {
    if result.convergence.converged {
        Ok(result)
    } else {
        Err(Error::NotConverged(Box::new(result)))
    }
}

/// One row of the order-selection table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderCandidate {
    pub order: usize,
    pub loglik: Option<f64>,
    pub bic: Option<f64>,
    pub converged: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderSelection {
    /// Fit with the smallest BIC among converged candidates.
    pub best: FitResult,
    pub candidates: Vec<OrderCandidate>,
    /// Some order failed or did not converge.
    pub incomplete: bool,
}

/// Fits orders `0..=max_order` and keeps the one with the smallest BIC.
///
/// For the error-transformed model every candidate conditions on the same
/// first `k` observations (`k = max_order` unless configured).
pub fn select_order(data: &TimeSeries, config: &FitConfig) -> Result<OrderSelection> {
    let k = config.k.unwrap_or(config.max_order);
    let mut candidates = Vec::with_capacity(config.max_order + 1);
    let mut best: Option<FitResult> = None;
    let mut fallback: Option<FitResult> = None;
    let mut warm: Option<Vec<f64>> = None;
    let mut first_error = None;
    for p in 0..=config.max_order {
        let outcome = fit_inner(data, p, config, k, warm.as_deref());
        match outcome {
            Ok(Fitted { result, x }) => {
                let mut next = x;
                next.push(0.0);
                warm = Some(next);
                candidates.push(OrderCandidate {
                    order: p,
                    loglik: Some(result.loglik),
                    bic: Some(result.bic),
                    converged: result.convergence.converged,
                    error: None,
                });
                let slot = if result.convergence.converged {
                    &mut best
                } else {
                    &mut fallback
                };
                if slot.as_ref().is_none_or(|b| result.bic < b.bic) {
                    *slot = Some(result);
                }
            }
            Err(e) => {
                warm = None;
                candidates.push(OrderCandidate {
                    order: p,
                    loglik: None,
                    bic: None,
                    converged: false,
                    error: Some(e.to_string()),
                });
                first_error.get_or_insert(e);
            }
        }
    }
    let incomplete = candidates.iter().any(|c| !c.converged);
    match (best, fallback) {
        (Some(best), _) => Ok(OrderSelection {
            best,
            candidates,
            incomplete,
        }),
        (None, Some(fb)) => Err(Error::NotConverged(Box::new(fb))),
        (None, None) => Err(first_error.expect("some order was attempted")),
    }
}

/// Two-stage baseline: `(xi, omega, g, h, beta)` from an independence fit,
/// then `phi` from a Gaussian AR fit to the back-transformed series.
pub fn fit_sequential_baseline(
    data: &TimeSeries,
    p: usize,
    config: &FitConfig,
) -> Result<FitResult> {
    let stage1_config = FitConfig {
        variant: Variant::TransformedLatent,
        k: None,
        ..config.clone()
    };
    let stage1 = fit(data, 0, &stage1_config)?;
    let s = &stage1.spec;
    let (xi, omega, shape) = (s.tgh.xi(), s.tgh.omega(), s.shape());
    let x = data.covariates();
    let z: Vec<f64> = data
        .y()
        .iter()
        .enumerate()
        .map(|(t, &y)| shape.tau_inverse((y - xi - s.reg.effect(x.row(t))) / omega))
        .collect::<Result<_>>()?;
    let stage2_config = FitConfig {
        multistart: 1,
        ..FitConfig::gaussian()
    };
    let stage2 = fit(&TimeSeries::univariate(z)?, p, &stage2_config)?;
    let spec = ModelSpec::new(
        Variant::TransformedLatent,
        s.tgh,
        stage2.spec.ar.clone(),
        s.reg.clone(),
    );
    let loglik = crate::model::loglik_t_model(&spec, data, config.inverse)?.value();
    Ok(FitResult {
        spec,
        loglik,
        bic: bic(loglik, p, data.len(), true),
        order_selected: p,
        n_used: data.len(),
        k: 0,
        shape_estimated: true,
        convergence: Convergence {
            converged: stage1.convergence.converged && stage2.convergence.converged,
            evaluations: stage1.convergence.evaluations + stage2.convergence.evaluations,
        },
        start_points_tried: stage1.start_points_tried + stage2.start_points_tried,
    })
}
