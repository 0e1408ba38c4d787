//! Trigonometric radial functions, admissible star shapes, and observation
//! points on the unit circle.

use std::f64::consts::PI;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of uniformly spaced angles used to check `0 < q < 1`.
pub const ADMISSIBILITY_SAMPLES: usize = 720;

/// `p(theta) = q0/2 + sum_n (c_n cos n theta + s_n sin n theta)`.
///
/// The coefficient vector layout used throughout is `[q0, c_1..c_M, s_1..s_M]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigPoly {
    pub q0: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl TrigPoly {
    pub fn new(q0: f64, cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        if cos.len() != sin.len() {
            return Err(Error::InvalidInput(format!(
                "cosine and sine coefficient counts differ ({} vs {})",
                cos.len(),
                sin.len()
            )));
        }
        Ok(Self { q0, cos, sin })
    }

    pub fn constant(value: f64, degree: usize) -> Self {
        Self {
            q0: 2.0 * value,
            cos: vec![0.0; degree],
            sin: vec![0.0; degree],
        }
    }

    /// Zero polynomial of the given degree.
    pub fn zero(degree: usize) -> Self {
        Self::constant(0.0, degree)
    }

    /// The `j`-th basis direction in `[1/2, cos 1θ.., sin 1θ..]` order.
    pub fn basis_direction(j: usize, degree: usize) -> Self {
        let mut v = vec![0.0; 2 * degree + 1];
        v[j] = 1.0;
        Self::from_coeffs(&v).expect("odd-length vector")
    }

    /// From `[q0, c_1..c_M, s_1..s_M]`.
    pub fn from_coeffs(v: &[f64]) -> Result<Self> {
        if v.len() % 2 != 1 {
            return Err(Error::InvalidInput(format!(
                "coefficient vector must have odd length, got {}",
                v.len()
            )));
        }
        let m = v.len() / 2;
        Ok(Self {
            q0: v[0],
            cos: v[1..=m].to_vec(),
            sin: v[m + 1..].to_vec(),
        })
    }

    pub fn coeffs(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(1 + 2 * self.degree());
        v.push(self.q0);
        v.extend_from_slice(&self.cos);
        v.extend_from_slice(&self.sin);
        v
    }

    pub fn degree(&self) -> usize {
        self.cos.len()
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let mut v = 0.5 * self.q0;
        for (i, (c, s)) in self.cos.iter().zip(&self.sin).enumerate() {
            let a = (i + 1) as f64 * theta;
            v += c * a.cos() + s * a.sin();
        }
        v
    }

    /// Values at `n` uniform angles `2 pi j / n`.
    pub fn sample(&self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|j| self.eval(2.0 * PI * j as f64 / n as f64))
            .collect()
    }

    /// Least-squares projection of samples at `2 pi j / n` onto degree `degree`.
    pub fn project(samples: &[f64], degree: usize) -> Self {
        let n = samples.len() as f64;
        let mut q0 = 0.0;
        let mut cos = vec![0.0; degree];
        let mut sin = vec![0.0; degree];
        for (j, &f) in samples.iter().enumerate() {
            let t = 2.0 * PI * j as f64 / n;
            q0 += f;
            for k in 0..degree {
                let a = (k + 1) as f64 * t;
                cos[k] += f * a.cos();
                sin[k] += f * a.sin();
            }
        }
        let scale = 2.0 / n;
        Self {
            q0: q0 * scale,
            cos: cos.into_iter().map(|c| c * scale).collect(),
            sin: sin.into_iter().map(|s| s * scale).collect(),
        }
    }

    /// Coefficient-wise `self + t * other` (degrees may differ).
    pub fn axpy(&self, t: f64, other: &TrigPoly) -> Self {
        let d = self.degree().max(other.degree());
        let get = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
        Self {
            q0: self.q0 + t * other.q0,
            cos: (0..d).map(|i| get(&self.cos, i) + t * get(&other.cos, i)).collect(),
            sin: (0..d).map(|i| get(&self.sin, i) + t * get(&other.sin, i)).collect(),
        }
    }

    /// Range of the function over `ADMISSIBILITY_SAMPLES` angles.
    pub fn sampled_range(&self) -> (f64, f64) {
        self.sample(ADMISSIBILITY_SAMPLES)
            .into_iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// A radial function `q` of a star-shaped domain inside the unit disc,
/// checked to satisfy `0 < q < 1` at 720 uniform angles.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StarShape(TrigPoly);

impl StarShape {
    pub fn new(poly: TrigPoly) -> Result<Self> {
        let (lo, hi) = poly.sampled_range();
        if !(lo > 0.0 && hi < 1.0) {
            return Err(Error::InvalidShape(format!(
                "radial function ranges over [{lo}, {hi}], must lie in (0, 1)"
            )));
        }
        Ok(Self(poly))
    }

    pub fn from_coeffs(v: &[f64]) -> Result<Self> {
        Self::new(TrigPoly::from_coeffs(v)?)
    }

    /// Circle of radius `r` about the origin, embedded at the given degree.
    pub fn circle(r: f64, degree: usize) -> Result<Self> {
        Self::new(TrigPoly::constant(r, degree))
    }

    /// The circle with centre `c` and radius `r` (origin strictly inside),
    /// projected onto trigonometric degree `degree`.
    pub fn off_centre_circle(c: [f64; 2], r: f64, degree: usize) -> Result<Self> {
        let c2 = c[0] * c[0] + c[1] * c[1];
        if !(r > 0.0) || c2 >= r * r {
            return Err(Error::InvalidShape(format!(
                "circle centre {c:?} radius {r} does not contain the origin"
            )));
        }
        let n = 1024;
        let samples: Vec<f64> = (0..n)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / n as f64;
                let ce = c[0] * t.cos() + c[1] * t.sin();
                ce + (r * r - c2 + ce * ce).sqrt()
            })
            .collect();
        Self::new(TrigPoly::project(&samples, degree))
    }

    pub fn poly(&self) -> &TrigPoly {
        &self.0
    }

    pub fn into_poly(self) -> TrigPoly {
        self.0
    }
}

impl Deref for StarShape {
    type Target = TrigPoly;
    fn deref(&self) -> &TrigPoly {
        &self.0
    }
}

/// Distinct measurement angles on the unit circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSet {
    angles: Vec<f64>,
}

impl ObservationSet {
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::InvalidInput("no observation angles".into()));
        }
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidInput("non-finite observation angle".into()));
        }
        for i in 0..angles.len() {
            for j in 0..i {
                let d = (angles[i] - angles[j]).rem_euclid(2.0 * PI);
                if d < 1e-12 || 2.0 * PI - d < 1e-12 {
                    return Err(Error::InvalidInput(format!(
                        "observation angles {} and {} coincide modulo 2 pi",
                        angles[j], angles[i]
                    )));
                }
            }
        }
        Ok(Self { angles })
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// Points `(cos theta, sin theta)`.
    pub fn points(&self) -> Vec<[f64; 2]> {
        self.angles.iter().map(|t| [t.cos(), t.sin()]).collect()
    }
}
