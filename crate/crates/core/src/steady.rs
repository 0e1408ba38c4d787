//! Boundary flux of the Poisson problem `-Δv = χ_D`, `v = 0` on the unit
//! circle, its shape derivative, and the point-source circle initializer.

use std::f64::consts::PI;

use log::warn;
use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::shape::{ObservationSet, StarShape, TrigPoly};

/// Angular quadrature points for the Fourier integrals.
pub const ANGULAR_POINTS: usize = 1024;
const MAX_HARMONIC: usize = 400;

/// Number of harmonics after which `q_max^{n}` falls below 1e-17.
pub fn default_n_max(q: &StarShape) -> usize {
    let (_, hi) = q.sampled_range();
    let n = (-17.0 * std::f64::consts::LN_10 / hi.ln()).ceil() as usize;
    n.clamp(2 * q.degree() + 2, MAX_HARMONIC)
}

/// Cosine table `cos(2 pi j / N)` shared by the Fourier sums.
fn unit_roots() -> (Vec<f64>, Vec<f64>) {
    (0..ANGULAR_POINTS)
        .map(|j| {
            let t = 2.0 * PI * j as f64 / ANGULAR_POINTS as f64;
            (t.cos(), t.sin())
        })
        .unzip()
}

/// Fourier coefficients `a_n = 1/((n+2) pi) ∫ q^{n+2} (cos, sin)(n s) ds`
/// of the steady flux, so that `∂v/∂n(θ) = -[a_0/2 + Σ a_n^c cos nθ + a_n^s sin nθ]`.
#[derive(Debug, Clone)]
pub struct SteadyExpansion {
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl SteadyExpansion {
    pub fn new(q: &StarShape, n_max: usize) -> Self {
        let samples = q.sample(ANGULAR_POINTS);
        let weights = vec![1.0; ANGULAR_POINTS];
        let (cos, sin) = power_moments(&samples, &weights, 2, n_max);
        let scale = |v: Vec<f64>| -> Vec<f64> {
            v.into_iter()
                .enumerate()
                .map(|(n, x)| x / ((n + 2) as f64 * PI))
                .collect()
        };
        Self {
            cos: scale(cos),
            sin: scale(sin),
        }
    }

    pub fn flux(&self, theta: f64) -> f64 {
        let mut v = 0.5 * self.cos[0];
        for n in 1..self.cos.len() {
            let a = n as f64 * theta;
            v += self.cos[n] * a.cos() + self.sin[n] * a.sin();
        }
        -v
    }
}

/// `(Σ_j w_j q_j^{n+p} cos(n s_j), Σ_j w_j q_j^{n+p} sin(n s_j)) * (2 pi / N)`
/// for `n = 0..=n_max`.
fn power_moments(q: &[f64], w: &[f64], p: i32, n_max: usize) -> (Vec<f64>, Vec<f64>) {
    let (ct, st) = unit_roots();
    let nn = ANGULAR_POINTS;
    let dx = 2.0 * PI / nn as f64;
    let mut pw: Vec<f64> = q.iter().zip(w).map(|(&x, &wi)| wi * x.powi(p)).collect();
    let mut cos = Vec::with_capacity(n_max + 1);
    let mut sin = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let (mut c, mut s) = (0.0, 0.0);
        for (j, &v) in pw.iter().enumerate() {
            let idx = (n * j) % nn;
            c += v * ct[idx];
            s += v * st[idx];
        }
        cos.push(c * dx);
        sin.push(s * dx);
        for (v, &x) in pw.iter_mut().zip(q) {
            *v *= x;
        }
    }
    (cos, sin)
}

/// Outward normal derivative of the steady state at angle `theta`.
pub fn steady_flux(q: &StarShape, theta: f64, n_max: usize) -> f64 {
    SteadyExpansion::new(q, n_max).flux(theta)
}

/// Linearization of the steady flux in the direction `h`, as a Fourier
/// series `-[c_0/2 + Σ c_n cos nθ + d_n sin nθ]` with
/// `c_n = (1/pi) ∫ q^{n+1} h cos(n s) ds`.
#[derive(Debug, Clone)]
pub struct SteadyDerivative {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl SteadyDerivative {
    pub fn new(q: &StarShape, h: &TrigPoly, n_max: usize) -> Self {
        let samples = q.sample(ANGULAR_POINTS);
        let hs = h.sample(ANGULAR_POINTS);
        let (cos, sin) = power_moments(&samples, &hs, 1, n_max);
        Self {
            cos: cos.into_iter().map(|x| x / PI).collect(),
            sin: sin.into_iter().map(|x| x / PI).collect(),
        }
    }

    pub fn value(&self, theta: f64) -> f64 {
        let mut v = 0.5 * self.cos[0];
        for n in 1..self.cos.len() {
            let a = n as f64 * theta;
            v += self.cos[n] * a.cos() + self.sin[n] * a.sin();
        }
        -v
    }
}

pub fn steady_flux_shape_derivative(
    q: &StarShape,
    h: &TrigPoly,
    theta: f64,
    n_max: usize,
) -> f64 {
    SteadyDerivative::new(q, h, n_max).value(theta)
}

/// Normal derivative at `z` of the Dirichlet Green's function of a unit point
/// source at `c`: `-(1 - |c|^2) / (2 pi |z - c|^2)`.
pub fn point_source_flux(c: [f64; 2], theta: f64) -> f64 {
    let (dx, dy) = (theta.cos() - c[0], theta.sin() - c[1]);
    -(1.0 - c[0] * c[0] - c[1] * c[1]) / (2.0 * PI * (dx * dx + dy * dy))
}

/// Result of the point-source fit.
#[derive(Debug, Clone)]
pub struct CircleFit {
    pub centre: [f64; 2],
    /// Source weight `rho`, equal to the area of the circle.
    pub weight: f64,
    pub radius: f64,
    /// True if the off-centre fit was abandoned for the origin-centred one.
    pub fell_back: bool,
    pub shape: StarShape,
}

/// Fits `-rho (1-|c|^2) / (2 pi |z_l - c|^2)` to steady flux values and returns
/// the circle of area `rho` about `c`, projected onto degree `degree`.
///
/// With two observations the centre is fixed at the origin.
pub fn fit_initial_circle(
    values: &[f64],
    obs: &ObservationSet,
    degree: usize,
) -> Result<CircleFit> {
    if values.len() != obs.len() {
        return Err(Error::InvalidInput(format!(
            "{} values for {} observation points",
            values.len(),
            obs.len()
        )));
    }
    if values.len() < 2 {
        return Err(Error::InvalidInput("circle fit needs at least two values".into()));
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if !(mean < 0.0) {
        return Err(Error::InvalidInput(format!(
            "steady flux values must be negative for a positive source, mean = {mean}"
        )));
    }
    let origin = |fell_back| -> Result<CircleFit> {
        let weight = -2.0 * PI * mean;
        let radius = (weight / PI).sqrt();
        Ok(CircleFit {
            centre: [0.0, 0.0],
            weight,
            radius,
            fell_back,
            shape: StarShape::circle(radius, degree)?,
        })
    };
    if values.len() == 2 {
        return origin(false);
    }
    match fit_pole(values, obs.angles(), -2.0 * PI * mean) {
        Some((c, weight)) => {
            let radius = (weight / PI).sqrt();
            match StarShape::off_centre_circle(c, radius, degree) {
                Ok(shape) => Ok(CircleFit {
                    centre: c,
                    weight,
                    radius,
                    fell_back: false,
                    shape,
                }),
                Err(e) => {
                    warn!("circle fit rejected ({e}); using origin-centred circle");
                    origin(true)
                }
            }
        }
        None => {
            warn!("point-source fit did not converge; using origin-centred circle");
            origin(true)
        }
    }
}

/// Levenberg-Marquardt on `(c_x, c_y, rho)`.
fn fit_pole(values: &[f64], angles: &[f64], rho0: f64) -> Option<([f64; 2], f64)> {
    let model = |p: &Vector3<f64>, t: f64| p[2] * point_source_flux([p[0], p[1]], t);
    let residual = |p: &Vector3<f64>| -> Vec<f64> {
        angles
            .iter()
            .zip(values)
            .map(|(&t, &v)| v - model(p, t))
            .collect()
    };
    let cost = |r: &[f64]| r.iter().map(|x| x * x).sum::<f64>();
    let scale = cost(values);
    let mut p = Vector3::new(0.0, 0.0, rho0);
    let mut r = residual(&p);
    let mut mu = 1e-3;
    for _ in 0..200 {
        // analytic Jacobian of the model
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        for (&t, &ri) in angles.iter().zip(&r) {
            let (z0, z1) = (t.cos(), t.sin());
            let (dx, dy) = (z0 - p[0], z1 - p[1]);
            let d2 = dx * dx + dy * dy;
            let c2 = p[0] * p[0] + p[1] * p[1];
            let base = -(1.0 - c2) / (2.0 * PI * d2);
            let g = Vector3::new(
                p[2] * (p[0] / (PI * d2) + base * 2.0 * dx / d2),
                p[2] * (p[1] / (PI * d2) + base * 2.0 * dy / d2),
                base,
            );
            jtj += g * g.transpose();
            jtr += g * ri;
        }
        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj;
            for i in 0..3 {
                a[(i, i)] += mu * jtj[(i, i)].max(1e-12);
            }
            let step = a.lu().solve(&jtr)?;
            let cand = p + step;
            if cand[0].hypot(cand[1]) >= 0.99 || cand[2] <= 0.0 {
                mu *= 10.0;
                continue;
            }
            let rc = residual(&cand);
            if cost(&rc) < cost(&r) {
                let done = step.norm() < 1e-13 * (1.0 + p.norm());
                p = cand;
                r = rc;
                mu = (mu * 0.3).max(1e-12);
                improved = true;
                if done {
                    return Some(([p[0], p[1]], p[2]));
                }
                break;
            }
            mu *= 10.0;
        }
        if !improved || cost(&r) <= 1e-28 * scale {
            break;
        }
    }
    // accept a stalled iteration only if it actually fits the data
    (cost(&r) <= 1e-10 * scale).then_some(([p[0], p[1]], p[2]))
}

/// Estimate of `g(∞)` from a trace: the last value when the trace has
/// flattened, otherwise the intercept of a least-squares fit
/// `g(t) ≈ g_∞ + c t^{-α}` over the last quarter of samples.
pub fn estimate_steady_value(times: &[f64], values: &[f64], alpha: f64) -> f64 {
    let n = times.len().min(values.len());
    let last = values[n - 1];
    let start = n - (n / 4).max(1);
    if n - start < 3 {
        return last;
    }
    let (mut s1, mut sx, mut sxx, mut sy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in start..n {
        let x = times[i].powf(-alpha);
        s1 += 1.0;
        sx += x;
        sxx += x * x;
        sy += values[i];
        sxy += x * values[i];
    }
    let det = s1 * sxx - sx * sx;
    if det.abs() <= 1e-14 * s1 * sxx {
        return last;
    }
    let g_inf = (sxx * sy - sx * sxy) / det;
    // the transient only deepens the flux; never extrapolate past 2x
    if g_inf.signum() == last.signum() && g_inf.abs() >= last.abs() && g_inf.abs() <= 2.0 * last.abs()
    {
        g_inf
    } else {
        last
    }
}
