//! One-step-ahead predictive distributions, point forecasts, prediction
//! intervals and forecast scores.
//!
//! Both models give a predictive law of the form
//! `Y_{t+1} | past = d + omega * tau(mu + sigma * Z)` with `Z ~ N(0, 1)`.
//! For the error-transformed model `mu = 0` and `sigma = 1` and all the
//! dependence sits in the deterministic part `d`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{fit, select_order, FitConfig};
use crate::model::{ModelSpec, TimeSeries, Variant};
use crate::normal;
use crate::tgh::{LatentLaw, TghShape, G_SWITCH};

/// Predictive law `deterministic + omega * tau(latent_mu + latent_sigma * Z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastDistribution {
    pub variant: Variant,
    pub deterministic: f64,
    pub omega: f64,
    pub shape: TghShape,
    pub latent_mu: f64,
    pub latent_sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntervalKind {
    /// Equal tail probabilities `alpha / 2` on each side.
    SymmetricWeight,
    /// Shortest interval with the nominal probability.
    MinimumLength,
}

impl std::str::FromStr for IntervalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symmetric" | "symmetric-weight" => Ok(IntervalKind::SymmetricWeight),
            "minlength" | "min-length" | "minimum-length" => Ok(IntervalKind::MinimumLength),
            other => Err(Error::domain(format!("unknown interval kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionInterval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub kind: IntervalKind,
    /// Lower-tail probability of the minimum-length interval.
    pub gamma_opt: Option<f64>,
}

impl PredictionInterval {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, y: f64) -> bool {
        self.lower <= y && y <= self.upper
    }
}

impl ForecastDistribution {
    pub fn new(
        variant: Variant,
        deterministic: f64,
        omega: f64,
        shape: TghShape,
        latent_mu: f64,
        latent_sigma: f64,
    ) -> Result<Self> {
        if !(latent_sigma > 0.0 && latent_sigma.is_finite()) || !(omega > 0.0 && omega.is_finite())
        {
            return Err(Error::domain(
                "predictive scale parameters must be positive",
            ));
        }
        if !(deterministic.is_finite() && latent_mu.is_finite()) {
            return Err(Error::domain(
                "predictive location parameters must be finite",
            ));
        }
        Ok(Self {
            variant,
            deterministic,
            omega,
            shape,
            latent_mu,
            latent_sigma,
        })
    }

    fn law(&self) -> LatentLaw {
        LatentLaw::new(
            self.deterministic,
            self.omega,
            self.shape,
            self.latent_mu,
            self.latent_sigma,
        )
    }

    pub fn cdf(&self, y: f64) -> f64 {
        self.law().cdf(y)
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::domain(format!(
                "quantile level {u} must lie in (0, 1)"
            )));
        }
        Ok(self.law().value_at(normal::quantile(u)))
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.law().value_at(rng.sample(rand_distr::StandardNormal))
    }

    /// The symmetric case where both interval kinds coincide.
    fn is_symmetric(&self) -> bool {
        self.shape.g().abs() < G_SWITCH && self.latent_mu == 0.0
    }
}

/// Predictive law of the observation following `history`, whose covariate
/// row is `x_next`.
pub fn predictive(
    spec: &ModelSpec,
    history: &TimeSeries,
    x_next: &[f64],
) -> Result<ForecastDistribution> {
    predictive_with(spec, history, x_next, None)
}

/// As [`predictive`], optionally inflating the latent variance by `1 + p/n`
/// for a fit on `n` observations.
pub fn predictive_with(
    spec: &ModelSpec,
    history: &TimeSeries,
    x_next: &[f64],
    inflate_for_n: Option<usize>,
) -> Result<ForecastDistribution> {
    let p = spec.order();
    if history.len() < p {
        return Err(Error::domain(format!(
            "history of length {} is shorter than the order {p}",
            history.len()
        )));
    }
    if x_next.len() != spec.reg.dim() || history.covariates().ncols() != spec.reg.dim() {
        return Err(Error::domain(format!(
            "model has {} covariates but the forecast inputs have {} and {}",
            spec.reg.dim(),
            history.covariates().ncols(),
            x_next.len()
        )));
    }
    let (xi, omega, shape) = (spec.tgh.xi(), spec.tgh.omega(), spec.shape());
    let n = history.len();
    let x = history.covariates();
    let detrended = |t: usize| history.y()[t] - xi - spec.reg.effect(x.row(t));
    let base = xi + spec.reg.effect(x_next);
    let inflation = inflate_for_n.map_or(1.0, |m| 1.0 + p as f64 / m as f64);
    match spec.variant {
        Variant::TransformedLatent => {
            let mut z = Vec::with_capacity(p);
            for t in n - p..n {
                let v = detrended(t) / omega;
                if !shape.in_support(v) {
                    return Err(Error::domain(format!(
                        "observation {t} lies outside the support of the fitted transform"
                    )));
                }
                z.push(shape.tau_inverse(v)?);
            }
            let m = spec.ar.conditional_moments(&z)?;
            ForecastDistribution::new(
                spec.variant,
                base,
                omega,
                shape,
                m.mu_tilde,
                (m.sigma_tilde2 * inflation).sqrt(),
            )
        }
        Variant::TransformedError => {
            let phi = spec.ar.phi();
            let ar: f64 = (1..=p).map(|j| phi[j - 1] * detrended(n - j)).sum();
            ForecastDistribution::new(spec.variant, base + ar, omega, shape, 0.0, inflation.sqrt())
        }
    }
}

/// Conditional median, the minimizer of expected absolute error.
pub fn point_median(dist: &ForecastDistribution) -> f64 {
    dist.law().value_at(0.0)
}

/// Conditional mean, the minimizer of expected squared error. Exists only
/// when `h * sigma^2 < 1`.
pub fn point_mean(dist: &ForecastDistribution) -> Result<f64> {
    let (g, h) = (dist.shape.g(), dist.shape.h());
    let (mu, s2) = (dist.latent_mu, dist.latent_sigma * dist.latent_sigma);
    let c = 1.0 - h * s2;
    if !(c > 0.0) {
        return Err(Error::Undefined {
            what: "predictive mean",
            h,
        });
    }
    let tilt = (h * mu * mu / (2.0 * c)).exp();
    let m = if g.abs() < G_SWITCH {
        mu * c.powf(-1.5) * tilt
    } else {
        tilt / (g * c.sqrt()) * ((g * g * s2 + 2.0 * g * mu) / (2.0 * c)).exp_m1()
    };
    Ok(dist.deterministic + dist.omega * m)
}

/// Central (`SymmetricWeight`) or shortest (`MinimumLength`) interval with
/// predictive probability `level`.
pub fn interval(
    dist: &ForecastDistribution,
    level: f64,
    kind: IntervalKind,
) -> Result<PredictionInterval> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain(format!(
            "interval level {level} must lie in (0, 1)"
        )));
    }
    let alpha = 1.0 - level;
    let law = dist.law();
    let bounds = |gamma: f64| {
        (
            law.value_at(normal::quantile(gamma)),
            law.value_at(normal::quantile(gamma + level)),
        )
    };
    let gamma = match kind {
        IntervalKind::SymmetricWeight => None,
        IntervalKind::MinimumLength if dist.is_symmetric() => Some(alpha / 2.0),
        IntervalKind::MinimumLength => Some(shortest_split(
            |g| {
                let (lo, hi) = bounds(g);
                hi - lo
            },
            alpha,
        )),
    };
    let (lower, upper) = bounds(gamma.unwrap_or(alpha / 2.0));
    Ok(PredictionInterval {
        lower,
        upper,
        level,
        kind,
        gamma_opt: gamma,
    })
}

/// Minimizes `width` over `(0, alpha)`: a grid scan brackets the minimum,
/// golden-section search refines it to `1e-10`.
fn shortest_split<F: Fn(f64) -> f64>(width: F, alpha: f64) -> f64 {
    const GRID: usize = 64;
    const TOL: f64 = 1e-10;
    let h = alpha / GRID as f64;
    let node = |i: usize| (i as f64 + 0.5) * h;
    let best = (0..GRID)
        .min_by(|&a, &b| width(node(a)).total_cmp(&width(node(b))))
        .unwrap_or(GRID / 2);
    let mut a = if best == 0 {
        alpha * 1e-12
    } else {
        node(best - 1)
    };
    let mut b = if best + 1 == GRID {
        alpha * (1.0 - 1e-12)
    } else {
        node(best + 1)
    };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (width(c), width(d));
    while b - a > TOL {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = width(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = width(d);
        }
    }
    0.5 * (a + b)
}

/// Probability integral transform of the realized value; 0 or 1 outside
/// the support.
pub fn pit(dist: &ForecastDistribution, y: f64) -> f64 {
    dist.cdf(y)
}

/// Continuous ranked probability score; needs `h * sigma^2 < 1/2`.
pub fn crps(dist: &ForecastDistribution, y: f64) -> Result<f64> {
    dist.law().crps(y)
}

/// Settings of a rolling-origin evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingConfig {
    /// Number of observations in each estimation window.
    pub window: usize,
    /// Refit after this many forecasts (1 refits at every origin).
    pub refit_every: usize,
    pub level: f64,
    /// Fixed order, or `None` to select by BIC up to `fit.max_order`.
    pub order: Option<usize>,
    pub fit: FitConfig,
    /// Skip estimation and forecast with these parameters.
    pub fixed_spec: Option<ModelSpec>,
    /// Inflate the latent variance by `1 + p / window`.
    pub inflate: bool,
}

impl RollingConfig {
    pub fn new(window: usize, fit: FitConfig) -> Self {
        Self {
            window,
            refit_every: 1,
            level: 0.95,
            order: None,
            fit,
            fixed_spec: None,
            inflate: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastRecord {
    /// Position of the forecast observation in the series.
    pub index: usize,
    pub order: usize,
    pub median: f64,
    pub mean: Option<f64>,
    pub symmetric: PredictionInterval,
    pub min_length: PredictionInterval,
    pub realized: f64,
    pub pit: f64,
    pub crps: Option<f64>,
}

/// Scores of a set of one-step forecasts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastScores {
    pub forecasts: usize,
    /// Mean absolute error of the median forecast.
    pub mae: f64,
    /// Root mean squared error of the mean forecast.
    pub rmse: f64,
    pub coverage_min_length: f64,
    pub width_min_length: f64,
    pub coverage_symmetric: f64,
    pub width_symmetric: f64,
    pub mean_crps: f64,
}

impl ForecastScores {
    pub fn from_records(records: &[ForecastRecord]) -> Self {
        let n = records.len() as f64;
        let avg = |f: &dyn Fn(&ForecastRecord) -> Option<f64>| {
            let (s, c) = records
                .iter()
                .filter_map(f)
                .fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
            if c == 0 {
                f64::NAN
            } else {
                s / c as f64
            }
        };
        let covered = |i: &PredictionInterval, y: f64| if i.contains(y) { 1.0 } else { 0.0 };
        Self {
            forecasts: records.len(),
            mae: records
                .iter()
                .map(|r| (r.realized - r.median).abs())
                .sum::<f64>()
                / n,
            rmse: avg(&|r| r.mean.map(|m| (r.realized - m).powi(2))).sqrt(),
            coverage_min_length: avg(&|r| Some(covered(&r.min_length, r.realized))),
            width_min_length: avg(&|r| Some(r.min_length.width())),
            coverage_symmetric: avg(&|r| Some(covered(&r.symmetric, r.realized))),
            width_symmetric: avg(&|r| Some(r.symmetric.width())),
            mean_crps: avg(&|r| r.crps),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingOutcome {
    pub records: Vec<ForecastRecord>,
    /// Forecast positions skipped because their window could not be fitted.
    pub failures: Vec<(usize, String)>,
    pub scores: ForecastScores,
}

/// Forecast record for one realized value.
pub fn score_forecast(
    dist: &ForecastDistribution,
    index: usize,
    order: usize,
    level: f64,
    y: f64,
) -> Result<ForecastRecord> {
    Ok(ForecastRecord {
        index,
        order,
        median: point_median(dist),
        mean: point_mean(dist).ok(),
        symmetric: interval(dist, level, IntervalKind::SymmetricWeight)?,
        min_length: interval(dist, level, IntervalKind::MinimumLength)?,
        realized: y,
        pit: pit(dist, y),
        crps: crps(dist, y).ok(),
    })
}

/// Rolling-origin one-step evaluation: every position `t >= window` is
/// forecast from a model fitted to the preceding `window` observations.
pub fn rolling_forecast(data: &TimeSeries, config: &RollingConfig) -> Result<RollingOutcome> {
    let n = data.len();
    let w = config.window;
    if w == 0 || w >= n {
        return Err(Error::domain(format!("window {w} must lie in 1..{n}")));
    }
    if config.refit_every == 0 {
        return Err(Error::domain("refit_every must be at least 1"));
    }
    if !(config.level > 0.0 && config.level < 1.0) {
        return Err(Error::domain(format!(
            "interval level {} must lie in (0, 1)",
            config.level
        )));
    }
    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut current: Option<ModelSpec> = config.fixed_spec.clone();
    for (step, t) in (w..n).enumerate() {
        let window = data.slice(t - w..t);
        if config.fixed_spec.is_none() && step % config.refit_every == 0 {
            let fitted = match config.order {
                Some(p) => fit(&window, p, &config.fit),
                None => select_order(&window, &config.fit).map(|s| s.best),
            };
            match fitted {
                Ok(r) => current = Some(r.spec),
                Err(e) => {
                    current = None;
                    failures.push((t, e.to_string()));
                    continue;
                }
            }
        }
        let Some(spec) = current.as_ref() else {
            failures.push((t, "no fitted model for this window".into()));
            continue;
        };
        let inflate = config.inflate.then_some(w);
        let record = predictive_with(spec, &window, data.covariates().row(t), inflate)
            .and_then(|d| score_forecast(&d, t, spec.order(), config.level, data.y()[t]));
        match record {
            Ok(r) => records.push(r),
            Err(e) => failures.push((t, e.to_string())),
        }
    }
    let scores = ForecastScores::from_records(&records);
    Ok(RollingOutcome {
        records,
        failures,
        scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ar::ArCoeffs;
    use crate::model::{simulate, Covariates, RegressionSpec};
    use crate::quad::adaptive_simpson;
    use crate::stats;
    use crate::tgh::TghParams;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn shape(g: f64, h: f64) -> TghShape {
        TghShape::new(g, h).unwrap()
    }

    fn dist(variant: Variant, g: f64, h: f64, mu: f64, sigma: f64) -> ForecastDistribution {
        ForecastDistribution::new(variant, 0.7, 1.5, shape(g, h), mu, sigma).unwrap()
    }

    fn spec(variant: Variant, g: f64, h: f64, phi: &[f64]) -> ModelSpec {
        ModelSpec::new(
            variant,
            TghParams::new(-3.0, 1.5, shape(g, h)).unwrap(),
            ArCoeffs::new(phi.to_vec()).unwrap(),
            RegressionSpec::new(vec![3.0, -2.0]),
        )
    }

    #[test]
    fn gaussian_predictive_of_the_latent_model() {
        let s = ModelSpec::new(
            Variant::TransformedLatent,
            TghParams::new(1.0, 2.0, TghShape::gaussian()).unwrap(),
            ArCoeffs::new(vec![0.8]).unwrap(),
            RegressionSpec::none(),
        );
        // last detrended standardized value z = 1
        let history = TimeSeries::univariate(vec![0.0, 3.0]).unwrap();
        let d = predictive(&s, &history, &[]).unwrap();
        assert!((d.latent_mu - 0.8).abs() < 1e-15 && (d.latent_sigma.powi(2) - 0.36).abs() < 1e-14);
        let m = point_mean(&d).unwrap();
        assert!((point_median(&d) - m).abs() < 1e-12 && (m - (1.0 + 2.0 * 0.8)).abs() < 1e-12);
        let sym = interval(&d, 0.95, IntervalKind::SymmetricWeight).unwrap();
        let half = normal::quantile(0.975) * 2.0 * 0.6;
        assert!((sym.lower - (m - half)).abs() < 1e-9 && (sym.upper - (m + half)).abs() < 1e-9);
    }

    #[test]
    fn e_model_median_is_the_ar_forecast() {
        let s = spec(Variant::TransformedError, 0.3, 0.1, &[0.5, 0.2]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let data = simulate(&s, &Covariates::harmonics(50, 24.0, 1), &mut rng).unwrap();
        let hist = data.slice(0..49);
        let x_next = data.covariates().row(49);
        let d = predictive(&s, &hist, x_next).unwrap();
        let det = |t: usize| data.y()[t] + 3.0 - s.reg.effect(data.covariates().row(t));
        let ar = -3.0 + s.reg.effect(x_next) + 0.5 * det(48) + 0.2 * det(47);
        assert!((point_median(&d) - ar).abs() < 1e-12);
        assert_eq!((d.latent_mu, d.latent_sigma), (0.0, 1.0));
    }

    #[test]
    fn e_model_mean_shift() {
        let d = dist(Variant::TransformedError, 0.3, 0.1, 0.0, 1.0);
        let shift = point_mean(&d).unwrap() - point_median(&d);
        assert!((shift - 1.5 * 0.180_149).abs() < 1e-5, "{shift}");
        let closed = 1.5 / (0.3 * 0.9f64.sqrt()) * ((0.09f64 / 1.8).exp() - 1.0);
        assert!((shift - closed).abs() < 1e-12);
    }

    #[test]
    fn mean_matches_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..40 {
            let g = rng.random_range(-0.8..0.8);
            let h = rng.random_range(0.0..0.3);
            let mu = rng.random_range(-1.5..1.5);
            let sigma = rng.random_range(0.3..1.0);
            let d = dist(Variant::TransformedLatent, g, h, mu, sigma);
            let law = d.law();
            let q = adaptive_simpson(|z| law.value_at(z) * normal::pdf(z), -12.0, 12.0, 1e-12, 50);
            let m = point_mean(&d).unwrap();
            assert!(
                (m - q).abs() < 1e-6 * m.abs().max(1.0),
                "g={g} h={h} mu={mu} sigma={sigma}: {m} vs {q}"
            );
        }
    }

    #[test]
    fn mean_requires_light_enough_tails() {
        assert!(point_mean(&dist(Variant::TransformedError, 0.3, 1.0, 0.0, 1.0)).is_err());
        assert!(point_mean(&dist(Variant::TransformedLatent, 0.3, 1.5, 0.0, 0.7)).is_ok());
    }

    #[test]
    fn mean_median_ordering() {
        for (g, sign) in [(0.4, 1.0), (-0.4, -1.0), (0.0, 0.0)] {
            let d = dist(Variant::TransformedError, g, 0.1, 0.0, 1.0);
            let diff = point_mean(&d).unwrap() - point_median(&d);
            if sign == 0.0 {
                assert_eq!(diff, 0.0);
            } else {
                assert!(diff * sign > 0.0);
            }
        }
    }

    #[test]
    fn interval_examples() {
        for (g, h) in [(0.0, 0.0), (0.0, 0.2)] {
            let d = dist(Variant::TransformedError, g, h, 0.0, 1.0);
            let a = interval(&d, 0.9, IntervalKind::SymmetricWeight).unwrap();
            let b = interval(&d, 0.9, IntervalKind::MinimumLength).unwrap();
            assert!((b.gamma_opt.unwrap() - 0.05).abs() < 1e-15);
            assert!((a.lower - b.lower).abs() < 1e-12 && (a.upper - b.upper).abs() < 1e-12);
        }
        let d = dist(Variant::TransformedError, 0.3, 0.1, 0.0, 1.0);
        let sym = interval(&d, 0.95, IntervalKind::SymmetricWeight).unwrap();
        let short = interval(&d, 0.95, IntervalKind::MinimumLength).unwrap();
        for i in [sym, short] {
            assert!((d.cdf(i.upper) - d.cdf(i.lower) - 0.95).abs() < 1e-8);
        }
        assert!(short.width() < sym.width());
        assert!(interval(&d, 1.2, IntervalKind::SymmetricWeight).is_err());
        assert!(interval(&d, 0.0, IntervalKind::MinimumLength).is_err());
    }

    #[test]
    fn min_length_beats_nearby_splits() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let d = dist(
                Variant::TransformedLatent,
                rng.random_range(-1.0..1.0),
                rng.random_range(0.0..0.4),
                rng.random_range(-2.0..2.0),
                rng.random_range(0.2..1.0),
            );
            let level = rng.random_range(0.5..0.99);
            let short = interval(&d, level, IntervalKind::MinimumLength).unwrap();
            let sym = interval(&d, level, IntervalKind::SymmetricWeight).unwrap();
            assert!(short.width() <= sym.width() + 1e-12);
            let alpha = 1.0 - level;
            for k in 1..100 {
                let g = alpha * k as f64 / 100.0;
                let w = d.quantile(g + level).unwrap() - d.quantile(g).unwrap();
                assert!(short.width() <= w + 1e-9);
            }
            // endpoints are predictive quantiles at their nominal levels
            let gamma = short.gamma_opt.unwrap();
            assert!((d.cdf(short.lower) - gamma).abs() < 1e-8);
            assert!((d.cdf(short.upper) - gamma - level).abs() < 1e-8);
        }
    }

    #[test]
    fn pit_examples() {
        let d = dist(Variant::TransformedLatent, 0.3, 0.1, 0.4, 0.6);
        assert!((pit(&d, point_median(&d)) - 0.5).abs() < 1e-12);
        let bounded = dist(Variant::TransformedError, 0.5, 0.0, 0.0, 1.0);
        assert_eq!(pit(&bounded, -1e6), 0.0);
        assert_eq!(pit(&d, f64::NEG_INFINITY), 0.0);
        assert_eq!(pit(&d, f64::INFINITY), 1.0);
    }

    #[test]
    fn crps_reduces_to_gaussian_and_is_proper() {
        let d = dist(Variant::TransformedLatent, 0.0, 0.0, 0.3, 0.8);
        let (m, s) = (0.7 + 1.5 * 0.3, 1.5 * 0.8);
        for y in [-3.0, 0.0, 1.1, 4.0] {
            let w = (y - m) / s;
            let closed = s
                * (w * (2.0 * normal::cdf(w) - 1.0) + 2.0 * normal::pdf(w)
                    - 1.0 / std::f64::consts::PI.sqrt());
            assert!((crps(&d, y).unwrap() - closed).abs() < 1e-7);
        }
        let truth = dist(Variant::TransformedLatent, 0.3, 0.1, 0.2, 0.7);
        let wide = ForecastDistribution {
            omega: truth.omega * 1.5,
            ..truth
        };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (mut a, mut b) = (0.0, 0.0);
        for _ in 0..10_000 {
            let y = truth.sample(&mut rng);
            let ca = crps(&truth, y).unwrap();
            assert!(ca >= 0.0);
            a += ca;
            b += crps(&wide, y).unwrap();
        }
        assert!(a < b);
    }

    #[test]
    fn true_model_pits_are_uniform() {
        for variant in [Variant::TransformedLatent, Variant::TransformedError] {
            let s = spec(variant, 0.3, 0.1, &[0.8]);
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let n = 10_001;
            let data = simulate(&s, &Covariates::harmonics(n, 24.0, 1), &mut rng).unwrap();
            let pits: Vec<f64> = (1..n)
                .map(|t| {
                    let d =
                        predictive(&s, &data.slice(t - 1..t), data.covariates().row(t)).unwrap();
                    pit(&d, data.y()[t])
                })
                .collect();
            let ks = stats::ks_uniform(&pits);
            assert!(
                stats::kolmogorov_pvalue(ks, pits.len()) > 0.01,
                "{variant}: ks {ks}"
            );
        }
    }

    #[test]
    fn support_violation_names_the_index() {
        let s = ModelSpec::new(
            Variant::TransformedLatent,
            TghParams::new(0.0, 1.0, shape(0.5, 0.0)).unwrap(),
            ArCoeffs::new(vec![0.5]).unwrap(),
            RegressionSpec::none(),
        );
        let history = TimeSeries::univariate(vec![0.0, -5.0]).unwrap();
        let err = predictive(&s, &history, &[]).unwrap_err();
        assert!(err.to_string().contains("observation 1"), "{err}");
    }

    #[test]
    fn rolling_with_true_parameters_is_calibrated() {
        let s = spec(Variant::TransformedError, 0.3, 0.1, &[0.8]);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let data = simulate(&s, &Covariates::harmonics(4000, 24.0, 1), &mut rng).unwrap();
        let config = RollingConfig {
            fixed_spec: Some(s.clone()),
            ..RollingConfig::new(10, FitConfig::new(Variant::TransformedError))
        };
        let out = rolling_forecast(&data, &config).unwrap();
        assert_eq!(out.records.len(), 3990);
        assert!(out.failures.is_empty());
        // binomial standard error at 3990 forecasts is about 0.35 points
        assert!(
            (out.scores.coverage_min_length - 0.95).abs() < 0.015,
            "{:?}",
            out.scores
        );
        assert!(out.scores.width_min_length < out.scores.width_symmetric);
    }

    #[test]
    fn rolling_rejects_degenerate_windows() {
        let data = TimeSeries::univariate(vec![0.0; 20]).unwrap();
        let config = RollingConfig::new(20, FitConfig::new(Variant::TransformedError));
        assert!(rolling_forecast(&data, &config).is_err());
        let config = RollingConfig::new(25, FitConfig::new(Variant::TransformedError));
        assert!(rolling_forecast(&data, &config).is_err());
    }

    #[test]
    fn rolling_records_fit_failures() {
        let s = spec(Variant::TransformedError, 0.3, 0.1, &[0.8]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let data = simulate(&s, &Covariates::harmonics(45, 24.0, 1), &mut rng).unwrap();
        // windows of 20 are below the minimum sample size for a fit
        let config = RollingConfig {
            order: Some(1),
            ..RollingConfig::new(20, FitConfig::new(Variant::TransformedError))
        };
        let out = rolling_forecast(&data, &config).unwrap();
        assert_eq!(out.failures.len(), 25);
        assert!(out.records.is_empty());
    }
}
