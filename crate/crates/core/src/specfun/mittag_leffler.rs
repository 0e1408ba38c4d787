//! Two-parameter Mittag-Leffler function `E_{a,b}(z)` on the real axis,
//! `-1e8 <= z <= 2` (positive arguments only where the series converges).
//!
//! Three evaluation paths, tried in order:
//! the power series (while cancellation stays harmless), the large-argument
//! expansion `-sum z^{-k} / Gamma(b - a k)` truncated at its smallest term,
//! and a real integral representation on `(0, inf)` for the gap in between.

use std::f64::consts::PI;

use super::gamma::{recip_gamma, sin_pi};
use super::quadrature::adaptive_gk15;
use crate::error::{Error, Result};

/// Most negative argument accepted.
pub const Z_MIN: f64 = -1e8;
/// Largest argument accepted.
pub const Z_MAX: f64 = 2.0;

const SERIES_TERMS: usize = 500;
const ASYMPTOTIC_TERMS: usize = 60;
const TOL: f64 = 1e-11;
const COEFF_REL_ERR: f64 = 1e-14;

/// Arguments of `E_{alpha,beta}(z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MLArgs {
    pub alpha: f64,
    pub beta: f64,
    pub z: f64,
}

/// `E_{alpha,beta}(z)` with relative error below 1e-8.
pub fn mittag_leffler(args: MLArgs) -> Result<f64> {
    MittagLeffler::new(args.alpha, args.beta)?.eval(args.z)
}

/// `1 - E_{alpha,1}(-lambda t^alpha)`, accurate also when it is tiny.
pub fn ml_decay(alpha: f64, lambda: f64, t: f64) -> Result<f64> {
    if !(lambda > 0.0) || !(t >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "ml_decay needs lambda > 0 and t >= 0, got lambda = {lambda}, t = {t}"
        )));
    }
    let z = -lambda * t.powf(alpha);
    if z >= -1.0 {
        // 1 - E_{a,1}(z) = -z E_{a,1+a}(z)
        return Ok(-z * MittagLeffler::new(alpha, 1.0 + alpha)?.eval(z)?);
    }
    Ok(1.0 - MittagLeffler::new(alpha, 1.0)?.eval(z)?)
}

/// `d/dt E_{alpha,1}(-lambda t^alpha) = -lambda t^{alpha-1} E_{alpha,alpha}(-lambda t^alpha)`
/// for `t > 0`.
pub fn ml_time_derivative(alpha: f64, lambda: f64, t: f64) -> Result<f64> {
    if !(lambda > 0.0) || !(t > 0.0) {
        return Err(Error::InvalidInput(format!(
            "derivative needs lambda > 0 and t > 0, got lambda = {lambda}, t = {t}"
        )));
    }
    let z = -lambda * t.powf(alpha);
    let e = MittagLeffler::new(alpha, alpha)?.eval(z)?;
    Ok(-lambda * t.powf(alpha - 1.0) * e)
}

/// `E_{alpha,beta}` with its series and expansion coefficients cached, for
/// repeated evaluation at many arguments.
#[derive(Debug, Clone)]
pub struct MittagLeffler {
    alpha: f64,
    beta: f64,
    /// `1 / Gamma(alpha k + beta)`, k = 0..
    series: Vec<f64>,
    /// `1 / Gamma(beta - alpha k)`, k = 0.. (index 0 unused)
    asymptotic: Vec<f64>,
}

impl MittagLeffler {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::domain(
                "mittag_leffler",
                format!("alpha = {alpha} outside (0, 1]"),
            ));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::domain(
                "mittag_leffler",
                format!("beta = {beta} must be positive"),
            ));
        }
        let series = (0..SERIES_TERMS)
            .map(|k| recip_gamma(alpha * k as f64 + beta))
            .collect();
        let asymptotic = (0..=ASYMPTOTIC_TERMS + 1)
            .map(|k| {
                let x = beta - alpha * k as f64;
                // poles of Gamma hit only up to rounding of beta - alpha k
                let slack = 64.0 * f64::EPSILON * (beta + alpha * k as f64);
                if x <= slack && (x - x.round()).abs() <= slack {
                    0.0
                } else {
                    recip_gamma(x)
                }
            })
            .collect();
        Ok(Self {
            alpha,
            beta,
            series,
            asymptotic,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn eval(&self, z: f64) -> Result<f64> {
        if !(Z_MIN..=Z_MAX).contains(&z) {
            return Err(Error::domain(
                "mittag_leffler",
                format!("z = {z} outside [{Z_MIN}, {Z_MAX}]"),
            ));
        }
        if z == 0.0 {
            return Ok(self.series[0]);
        }
        if self.alpha == 1.0 {
            if self.beta == 1.0 {
                return Ok(z.exp());
            }
            if self.beta == 2.0 {
                return Ok(z.exp_m1() / z);
            }
        }
        if let Some(v) = self.try_series(z) {
            return Ok(v);
        }
        if z > 0.0 {
            return Err(Error::domain(
                "mittag_leffler",
                format!("series does not converge for alpha = {}, z = {z}", self.alpha),
            ));
        }
        if let Some(v) = self.try_asymptotic(z) {
            return Ok(v);
        }
        if self.alpha < 1.0 && self.beta < 1.0 + self.alpha {
            return Ok(self.integral(-z));
        }
        if z < -1.0 && (self.beta - 1.0 - self.alpha).abs() < 1e-15 {
            // E_{a,1+a}(z) = (E_{a,1}(z) - 1) / z, no cancellation once |z| > 1
            let e1 = MittagLeffler::new(self.alpha, 1.0)?.eval(z)?;
            return Ok((e1 - 1.0) / z);
        }
        Err(Error::domain(
            "mittag_leffler",
            format!(
                "no accurate method for alpha = {}, beta = {}, z = {z}",
                self.alpha, self.beta
            ),
        ))
    }

    fn try_series(&self, z: f64) -> Option<f64> {
        let mut sum: f64 = 0.0;
        let mut power = 1.0;
        let mut max_term: f64 = 0.0;
        let mut prev = f64::INFINITY;
        for &c in &self.series {
            let term = c * power;
            sum += term;
            let a = term.abs();
            max_term = max_term.max(a);
            if a < prev && a <= 1e-17 * sum.abs() {
                // the coefficients carry ~1e-14 relative error, which the
                // largest term amplifies
                return (max_term * COEFF_REL_ERR <= TOL * sum.abs()).then_some(sum);
            }
            if a > 1e250 {
                return None;
            }
            prev = a;
            power *= z;
            if !power.is_finite() {
                return None;
            }
        }
        None
    }

    fn try_asymptotic(&self, z: f64) -> Option<f64> {
        if z > -1.0 {
            return None;
        }
        let inv = 1.0 / z;
        let mut power = 1.0;
        let mut sum: f64 = 0.0;
        let mut prev = f64::INFINITY;
        for k in 1..self.asymptotic.len() {
            power *= inv;
            let c = self.asymptotic[k];
            if c == 0.0 {
                continue;
            }
            let term = -c * power;
            let a = term.abs();
            if a > prev || k == self.asymptotic.len() - 1 {
                // `term` is the first omitted one
                return (a <= TOL * sum.abs()).then_some(sum);
            }
            sum += term;
            prev = a;
        }
        None
    }

    /// `E(-x)` for `x > 0`, `alpha < 1`, `beta < 1 + alpha`.
    fn integral(&self, x: f64) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        let s1 = sin_pi(1.0 - b);
        let s2 = sin_pi(1.0 - b + a);
        let c = (PI * a).cos();
        let p = (1.0 - b) / a;
        let inv_a = 1.0 / a;
        let f = |chi: f64| {
            if chi <= 0.0 {
                return 0.0;
            }
            let den = chi * chi + 2.0 * chi * x * c + x * x;
            chi.powf(p) * (-chi.powf(inv_a)).exp() * (chi * s1 + x * s2) / den
        };
        let upper = 50f64.powf(a);
        let mut breaks = vec![0.0];
        let peak = -x * c;
        if peak > 0.0 && peak < upper {
            let width = x * (PI * a).sin();
            for pt in [peak - 4.0 * width, peak, peak + 4.0 * width] {
                if pt > *breaks.last().unwrap() && pt < upper {
                    breaks.push(pt);
                }
            }
        }
        if upper > 1.0 && !breaks.contains(&1.0) && *breaks.last().unwrap() < 1.0 {
            breaks.push(1.0);
        }
        breaks.push(upper);
        let (v, _) = adaptive_gk15(f, &breaks, 1e-300, 1e-13);
        v / (a * PI)
    }
}
