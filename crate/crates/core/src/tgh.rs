//! Tukey g-and-h transformation and the induced univariate distribution.
//!
//! For `h >= 0` the map
//!
//! ```text
//! tau(z) = (exp(g z) - 1) / g * exp(h z^2 / 2)     g != 0
//! tau(z) = z * exp(h z^2 / 2)                      g == 0
//! ```
//!
//! is strictly increasing. `T = tau(Z)` with `Z ~ N(0, 1)` follows the
//! standard g-and-h law; `g` skews it (to the right for `g > 0`) and `h`
//! thickens both tails. The support is the whole line except when `h = 0`
//! and `g != 0`, where it is bounded by `-1/g` on one side.
//!
//! The inverse has no closed form in general. [`TghShape::tau_inverse`]
//! solves it by safeguarded Newton iteration and [`InverseTable`] provides the
//! piecewise-linear approximation used inside the likelihood.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal;
use crate::quad::adaptive_simpson;

/// Below this `|g|` the `g = 0` branch of every formula is used.
pub const G_SWITCH: f64 = 1e-8;

const NEWTON_MAX_ITER: usize = 100;
const NEWTON_RESIDUAL_TOL: f64 = 1e-12;

/// Default knot placement for [`InverseTable::build`].
pub const DEFAULT_TABLE_RANGE: (f64, f64) = (-8.0, 8.0);
pub const DEFAULT_TABLE_TOL: f64 = 1e-8;

/// Probability mass left out of each tail by the CRPS quadrature.
const CRPS_TAIL_MASS: f64 = 1e-8;
const CRPS_REL_TOL: f64 = 1e-8;

/// Skewness `g` and tail weight `h` of the transformation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TghShape {
    g: f64,
    h: f64,
}

impl TghShape {
    pub fn new(g: f64, h: f64) -> Result<Self> {
        if !g.is_finite() || !h.is_finite() {
            return Err(Error::domain(format!(
                "non-finite shape (g = {g}, h = {h})"
            )));
        }
        if h < 0.0 {
            return Err(Error::domain(format!(
                "tail parameter h = {h} must be >= 0"
            )));
        }
        Ok(Self { g, h })
    }

    /// The identity transformation (`g = h = 0`).
    pub const fn gaussian() -> Self {
        Self { g: 0.0, h: 0.0 }
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    #[inline]
    fn g_is_zero(&self) -> bool {
        self.g.abs() < G_SWITCH
    }

    pub fn is_gaussian(&self) -> bool {
        self.g_is_zero() && self.h == 0.0
    }

    /// Evaluates `tau(z)`. Non-finite input propagates; see [`tau`] for the
    /// checked form.
    #[inline]
    pub fn tau(&self, z: f64) -> f64 {
        let core = if self.g_is_zero() {
            z
        } else {
            (self.g * z).exp_m1() / self.g
        };
        if self.h == 0.0 {
            core
        } else {
            core * (0.5 * self.h * z * z).exp()
        }
    }

    /// Derivative `tau'(z) = exp(h z^2/2) * [exp(g z) + h z (exp(g z) - 1)/g]`.
    #[inline]
    pub fn tau_prime(&self, z: f64) -> f64 {
        self.log_tau_prime(z).exp()
    }

    /// `log tau'(z)`. The bracket is a sum of two non-negative terms, so this
    /// never cancels.
    #[inline]
    pub fn log_tau_prime(&self, z: f64) -> f64 {
        let hz2 = 0.5 * self.h * z * z;
        if self.g_is_zero() {
            hz2 + (self.h * z * z).ln_1p()
        } else {
            let gz = self.g * z;
            let ratio = if gz == 0.0 { z } else { gz.exp_m1() / self.g };
            hz2 + (gz.exp() + self.h * z * ratio).ln()
        }
    }

    /// Open interval of attainable `tau` values.
    pub fn support(&self) -> (f64, f64) {
        if self.h == 0.0 && !self.g_is_zero() {
            if self.g > 0.0 {
                (-1.0 / self.g, f64::INFINITY)
            } else {
                (f64::NEG_INFINITY, -1.0 / self.g)
            }
        } else {
            (f64::NEG_INFINITY, f64::INFINITY)
        }
    }

    pub fn in_support(&self, t: f64) -> bool {
        let (lo, hi) = self.support();
        t > lo && t < hi
    }

    /// Exact inverse `tau^{-1}(t)`.
    ///
    /// Closed forms are used when `g = 0` or `h = 0`; otherwise a Newton
    /// iteration safeguarded by bisection on a sign-change bracket.
    pub fn tau_inverse(&self, t: f64) -> Result<f64> {
        self.tau_inverse_from(t, None)
    }

    /// Exact inverse with an optional starting point for the Newton search.
    pub fn tau_inverse_from(&self, t: f64, guess: Option<f64>) -> Result<f64> {
        if !t.is_finite() {
            return Err(Error::domain(format!("cannot invert non-finite value {t}")));
        }
        if !self.in_support(t) {
            let (lo, hi) = self.support();
            return Err(Error::domain(format!(
                "value {t} outside the support ({lo}, {hi}) of the g-and-h transform"
            )));
        }
        if self.h == 0.0 {
            return Ok(if self.g_is_zero() {
                t
            } else {
                (self.g * t).ln_1p() / self.g
            });
        }
        if self.g_is_zero() {
            return Ok(self.inverse_g_zero(t));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        self.newton_inverse(t, guess)
    }

    /// `z exp(h z^2/2) = t` gives `h z^2 = W(h t^2)`.
    fn inverse_g_zero(&self, t: f64) -> f64 {
        let w = lambert_w0(self.h * t * t);
        t.signum() * (w / self.h).sqrt()
    }

    fn newton_inverse(&self, t: f64, guess: Option<f64>) -> Result<f64> {
        // tau(0) = 0, so the root lies on the same side of zero as t.
        let (mut lo, mut hi) = if t > 0.0 { (0.0, 1.0) } else { (-1.0, 0.0) };
        let mut expansions = 0;
        loop {
            let edge = if t > 0.0 { hi } else { lo };
            let reached = if t > 0.0 {
                self.tau(edge) >= t
            } else {
                self.tau(edge) <= t
            };
            if reached {
                break;
            }
            if t > 0.0 {
                lo = hi;
                hi *= 2.0;
            } else {
                hi = lo;
                lo *= 2.0;
            }
            expansions += 1;
            if expansions > 64 {
                return Err(Error::RootNotConverged {
                    iterations: expansions,
                    lo,
                    hi,
                });
            }
        }

        let start = guess.unwrap_or_else(|| self.inverse_g_zero(t));
        let mut z = if start > lo && start < hi {
            start
        } else {
            0.5 * (lo + hi)
        };
        let tol = NEWTON_RESIDUAL_TOL * t.abs().max(1.0);
        for _ in 0..NEWTON_MAX_ITER {
            let f = self.tau(z) - t;
            if f > 0.0 {
                hi = z;
            } else {
                lo = z;
            }
            let deriv = self.tau_prime(z);
            let mut next = z - f / deriv;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let step = (next - z).abs();
            z = next;
            if f.abs() <= tol && step <= 1e-14 * z.abs().max(1.0) {
                return Ok(z);
            }
            if step <= 4.0 * f64::EPSILON * z.abs().max(1.0)
                || hi - lo <= 4.0 * f64::EPSILON * z.abs().max(1.0)
            {
                return Ok(z);
            }
        }
        Err(Error::RootNotConverged {
            iterations: NEWTON_MAX_ITER,
            lo,
            hi,
        })
    }

    /// `E(T^q)` for `T = tau(Z)`, defined only for `h < 1/q`.
    pub fn moment(&self, q: u32) -> Result<f64> {
        if q == 0 {
            return Ok(1.0);
        }
        let qf = q as f64;
        if self.h * qf >= 1.0 {
            return Err(Error::MomentUndefined { q, h: self.h });
        }
        let denom = 1.0 - qf * self.h;
        if self.g_is_zero() {
            if q % 2 == 1 {
                return Ok(0.0);
            }
            // q! / (2^{q/2} (q/2)!) is the double factorial (q-1)!!.
            let double_factorial: f64 = (1..q).step_by(2).map(|k| k as f64).product();
            return Ok(double_factorial * denom.powf(-(qf + 1.0) / 2.0));
        }
        // The alternating binomial sum of ones vanishes, so exp() - 1 can be
        // used termwise to limit cancellation for small g.
        let g2 = self.g * self.g;
        let mut binom = 1.0;
        let mut sum = 0.0;
        for i in 0..=q {
            let k = (q - i) as f64;
            let term = binom * (k * k * g2 / (2.0 * denom)).exp_m1();
            sum += if i % 2 == 0 { term } else { -term };
            binom = binom * (q - i) as f64 / (i + 1) as f64;
        }
        Ok(sum / (self.g.powi(q as i32) * denom.sqrt()))
    }

    /// Mean, standard deviation, skewness and excess kurtosis of `tau(Z)`.
    pub fn summary(&self) -> Result<TghSummary> {
        if self.h >= 0.25 {
            return Err(Error::MomentUndefined { q: 4, h: self.h });
        }
        let m1 = self.moment(1)?;
        let m2 = self.moment(2)?;
        let m3 = self.moment(3)?;
        let m4 = self.moment(4)?;
        let var = m2 - m1 * m1;
        let mu3 = m3 - 3.0 * m1 * m2 + 2.0 * m1.powi(3);
        let mu4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1.powi(4);
        let sd = var.sqrt();
        Ok(TghSummary {
            mean: m1,
            sd,
            skewness: mu3 / (var * sd),
            excess_kurtosis: mu4 / (var * var) - 3.0,
        })
    }
}

/// Checked evaluation of `tau(z)`.
pub fn tau(shape: &TghShape, z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::domain(format!(
            "tau evaluated at non-finite z = {z}"
        )));
    }
    Ok(shape.tau(z))
}

/// Principal branch of the Lambert W function for `x >= 0`.
fn lambert_w0(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let mut w = if x < 1.0 {
        x * (1.0 - x + 1.5 * x * x).min(1.0)
    } else {
        let l = x.ln();
        (l - l.max(1.0).ln()).max(0.5)
    };
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        // Halley step.
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if step.abs() <= 1e-15 * w.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    w
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TghSummary {
    pub mean: f64,
    pub sd: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

/// Location `xi`, scale `omega` and shape of `xi + omega * tau(Z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TghParams {
    xi: f64,
    omega: f64,
    shape: TghShape,
}

impl TghParams {
    pub fn new(xi: f64, omega: f64, shape: TghShape) -> Result<Self> {
        if !xi.is_finite() {
            return Err(Error::domain(format!("location xi = {xi} is not finite")));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::domain(format!(
                "scale omega = {omega} must be positive"
            )));
        }
        Ok(Self { xi, omega, shape })
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn shape(&self) -> TghShape {
        self.shape
    }

    pub fn standard(shape: TghShape) -> Self {
        Self {
            xi: 0.0,
            omega: 1.0,
            shape,
        }
    }

    pub fn pdf(&self, y: f64) -> f64 {
        let t = (y - self.xi) / self.omega;
        if !self.shape.in_support(t) {
            return 0.0;
        }
        match self.shape.tau_inverse(t) {
            Ok(z) => (normal::ln_pdf(z) - self.shape.log_tau_prime(z)).exp() / self.omega,
            Err(_) => 0.0,
        }
    }

    pub fn cdf(&self, y: f64) -> f64 {
        LatentLaw::new(self.xi, self.omega, self.shape, 0.0, 1.0).cdf(y)
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::domain(format!(
                "quantile level {u} must lie in (0, 1)"
            )));
        }
        Ok(self.xi + self.omega * self.shape.tau(normal::quantile(u)))
    }

    /// Continuous ranked probability score at observation `y`.
    pub fn crps(&self, y: f64) -> Result<f64> {
        LatentLaw::new(self.xi, self.omega, self.shape, 0.0, 1.0).crps(y)
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(rand_distr::StandardNormal);
        self.xi + self.omega * self.shape.tau(z)
    }
}

/// The law of `location + scale * tau(mu + sigma * Z)`, `Z ~ N(0, 1)`.
///
/// With `mu = 0, sigma = 1` this is the g-and-h distribution; other values
/// describe the one-step predictive law of the latent-transformed model,
/// which is not itself of location-scale g-and-h form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LatentLaw {
    pub location: f64,
    pub scale: f64,
    pub shape: TghShape,
    pub mu: f64,
    pub sigma: f64,
}

impl LatentLaw {
    pub fn new(location: f64, scale: f64, shape: TghShape, mu: f64, sigma: f64) -> Self {
        Self {
            location,
            scale,
            shape,
            mu,
            sigma,
        }
    }

    /// Standardized latent coordinate of `y`; `+-inf` outside the support.
    pub fn latent_z(&self, y: f64) -> f64 {
        let t = (y - self.location) / self.scale;
        let (lo, hi) = self.shape.support();
        if t.is_nan() {
            return f64::NAN;
        }
        if t <= lo {
            return f64::NEG_INFINITY;
        }
        if t >= hi {
            return f64::INFINITY;
        }
        match self.shape.tau_inverse(t) {
            Ok(u) => (u - self.mu) / self.sigma,
            Err(_) => {
                if t > 0.0 {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    pub fn cdf(&self, y: f64) -> f64 {
        normal::cdf(self.latent_z(y))
    }

    pub fn value_at(&self, z: f64) -> f64 {
        self.location + self.scale * self.shape.tau(self.mu + self.sigma * z)
    }

    pub fn crps(&self, y: f64) -> Result<f64> {
        let h_eff = self.shape.h() * self.sigma * self.sigma;
        if h_eff >= 0.5 {
            return Err(Error::Undefined {
                what: "CRPS",
                h: self.shape.h(),
            });
        }
        if !y.is_finite() {
            return Err(Error::domain(format!("CRPS at non-finite observation {y}")));
        }
        // In the latent coordinate x = value_at(z), dx = scale*sigma*tau'(mu+sigma z) dz,
        // so CRPS = scale*sigma * int (Phi(z) - 1{z >= z_y})^2 tau'(mu+sigma z) dz.
        let cut = -normal::quantile(CRPS_TAIL_MASS);
        let zy = self.latent_z(y);
        let jac = |z: f64| self.shape.tau_prime(self.mu + self.sigma * z);
        let below = |z: f64| {
            let p = normal::cdf(z);
            p * p * jac(z)
        };
        let above = |z: f64| {
            let q = normal::sf(z);
            q * q * jac(z)
        };
        let mut total = 0.0;
        let split = zy.clamp(-cut, cut);
        if split > -cut {
            total += adaptive_simpson(below, -cut, split, CRPS_REL_TOL, 50);
        }
        if split < cut {
            total += adaptive_simpson(above, split, cut, CRPS_REL_TOL, 50);
        }
        total *= self.scale * self.sigma;
        // Beyond the truncation points the indicator term dominates and the
        // integrand is 1 up to O(CRPS_TAIL_MASS).
        if zy > cut {
            total += y - self.value_at(cut);
        } else if zy < -cut {
            total += self.value_at(-cut) - y;
        }
        Ok(total)
    }
}

/// Piecewise-linear approximation of `tau^{-1}` on a z-interval.
///
/// Knots are `(tau(z_i), z_i)` pairs, refined by interval bisection until
/// linear interpolation in `t` reproduces the exact inverse to `max_abs_err`.
#[derive(Debug, Clone)]
pub struct InverseTable {
    shape: TghShape,
    t: Vec<f64>,
    z: Vec<f64>,
    max_abs_err: f64,
}

impl InverseTable {
    pub fn build(shape: TghShape, z_range: (f64, f64), max_abs_err: f64) -> Result<Self> {
        let (z_lo, z_hi) = z_range;
        if !(z_lo.is_finite() && z_hi.is_finite()) || z_lo >= z_hi {
            return Err(Error::domain(format!(
                "empty or non-finite table range [{z_lo}, {z_hi}]"
            )));
        }
        if !(max_abs_err > 0.0) {
            return Err(Error::domain(format!(
                "table tolerance {max_abs_err} must be positive"
            )));
        }
        let mut t = Vec::new();
        let mut z = Vec::new();
        t.push(shape.tau(z_lo));
        z.push(z_lo);
        if shape.is_gaussian() {
            t.push(z_hi);
            z.push(z_hi);
            return Ok(Self {
                shape,
                t,
                z,
                max_abs_err,
            });
        }
        // March across the range, checking the chord error at the midpoint
        // of each candidate interval (where the exact inverse is known) and
        // resizing the next step from the error just observed, which scales
        // with the square of the width.
        let accept = 0.5 * max_abs_err;
        let min_width = 1e-9;
        let (mut za, mut ta) = (z_lo, t[0]);
        let mut dz = (z_hi - z_lo) / 16.0;
        loop {
            let zb = (za + dz).min(z_hi);
            let width = zb - za;
            let tb = shape.tau(zb);
            let zm = za + 0.5 * width;
            let interp = za + (shape.tau(zm) - ta) / (tb - ta) * width;
            let err = (interp - zm).abs();
            let factor = if err > 0.0 {
                0.9 * (accept / err).sqrt()
            } else {
                2.0
            };
            if err <= accept || width <= min_width {
                t.push(tb);
                z.push(zb);
                if zb >= z_hi {
                    break;
                }
                za = zb;
                ta = tb;
                dz = width * factor.clamp(0.2, 2.0);
            } else {
                dz = width * factor.clamp(0.1, 0.7);
            }
        }
        Ok(Self {
            shape,
            t,
            z,
            max_abs_err,
        })
    }

    /// Table on [`DEFAULT_TABLE_RANGE`] with [`DEFAULT_TABLE_TOL`].
    pub fn with_defaults(shape: TghShape) -> Result<Self> {
        Self::build(shape, DEFAULT_TABLE_RANGE, DEFAULT_TABLE_TOL)
    }

    pub fn shape(&self) -> TghShape {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn max_abs_err(&self) -> f64 {
        self.max_abs_err
    }

    pub fn z_range(&self) -> (f64, f64) {
        (self.z[0], self.z[self.z.len() - 1])
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.t[0], self.t[self.t.len() - 1])
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.t.iter().copied().zip(self.z.iter().copied())
    }

    /// Interpolated inverse; values outside the table are solved exactly,
    /// starting from the nearest knot.
    #[inline]
    pub fn eval(&self, t: f64) -> Result<f64> {
        let last = self.t.len() - 1;
        if t >= self.t[0] && t <= self.t[last] {
            let i = self.t.partition_point(|&k| k < t).clamp(1, last);
            let (t0, t1) = (self.t[i - 1], self.t[i]);
            let (z0, z1) = (self.z[i - 1], self.z[i]);
            return Ok(z0 + (t - t0) / (t1 - t0) * (z1 - z0));
        }
        let seed = if t < self.t[0] {
            self.z[0]
        } else {
            self.z[last]
        };
        self.shape.tau_inverse_from(t, Some(seed))
    }
}
