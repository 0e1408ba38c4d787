//! Spectral forward map `G`, its shape derivative `G'`, and the weighted
//! Jacobian on the trigonometric coefficients of `q`.
//!
//! With `C_n(θ) = ∫ Φ_n(q(s)) cos(m(s - θ)) ds` and
//! `Φ_n(x) = ∫_0^{x√λ_n} ρ J_m(ρ) dρ`, the flux splits as
//! `G_l(t) = v_ν(θ_l) + Σ'_n b_n E_{α,1}(-λ_n t^α) C_n(θ_l)`,
//! where `v_ν` is the steady flux and `Σ'` runs over distinct eigenvalues.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::eigensystem::EigenBasis;
use crate::error::{Error, Result};
use crate::shape::{StarShape, TrigPoly};
use crate::specfun::{BesselScratch, MittagLeffler};
use crate::steady::{default_n_max, SteadyDerivative, SteadyExpansion};
use crate::trace::{FluxTrace, MeasurementSchedule};

/// Points of the trapezoid rule in the angular integrals.
pub const QUADRATURE_POINTS: usize = 1024;

#[derive(Debug, Clone, Copy)]
struct Mode {
    m: u32,
    lambda: f64,
    b: f64,
}

/// Everything that depends on `(basis, α, schedule, angles)` but not on `q`:
/// in particular the table `E_{α,1}(-λ_n t_s^α)`.
#[derive(Debug, Clone)]
pub struct ForwardModel {
    alpha: f64,
    angles: Vec<f64>,
    schedule: MeasurementSchedule,
    modes: Vec<Mode>,
    /// `etable[(s, n)] = E_{α,1}(-λ_n t_s^α)`.
    etable: DMatrix<f64>,
    sqrt_w: Vec<f64>,
    cos_s: Vec<f64>,
    sin_s: Vec<f64>,
}

/// Per-mode angular moments of a shape.
struct Profiles {
    /// `(∫Φ cos ms, ∫Φ sin ms)` per mode.
    phi: Vec<(f64, f64)>,
    /// `λ q_j J_m(√λ q_j)` per mode, on the quadrature grid.
    dphi: Vec<Vec<f64>>,
}

impl ForwardModel {
    pub fn new(
        basis: &EigenBasis,
        alpha: f64,
        schedule: &MeasurementSchedule,
        angles: &[f64],
    ) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::InvalidInput("no observation angles".into()));
        }
        let modes: Vec<Mode> = basis
            .distinct()
            .map(|md| Mode {
                m: md.m,
                lambda: md.lambda,
                b: md.b,
            })
            .collect();
        let ml = MittagLeffler::new(alpha, 1.0)?;
        let times = schedule.times();
        let powers: Vec<f64> = times.iter().map(|t| t.powf(alpha)).collect();
        let mut etable = DMatrix::zeros(times.len(), modes.len());
        for (n, md) in modes.iter().enumerate() {
            for (s, &tp) in powers.iter().enumerate() {
                let z = -md.lambda * tp;
                // far below double precision relative to the steady part
                etable[(s, n)] = if z < -1e8 { 0.0 } else { ml.eval(z)? };
            }
        }
        let sqrt_w = schedule
            .quadrature_weights()
            .into_iter()
            .map(f64::sqrt)
            .collect();
        let (cos_s, sin_s) = (0..QUADRATURE_POINTS)
            .map(|j| {
                let s = 2.0 * PI * j as f64 / QUADRATURE_POINTS as f64;
                (s.cos(), s.sin())
            })
            .unzip();
        Ok(Self {
            alpha,
            angles: angles.to_vec(),
            schedule: schedule.clone(),
            modes,
            etable,
            sqrt_w,
            cos_s,
            sin_s,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn schedule(&self) -> &MeasurementSchedule {
        &self.schedule
    }

    /// Number of rows of the stacked data vector (`angles x samples`).
    pub fn rows(&self) -> usize {
        self.angles.len() * self.schedule.len()
    }

    /// `cos(m s_j)`, `sin(m s_j)` on the quadrature grid via the index table.
    fn trig(&self, m: u32, j: usize) -> (f64, f64) {
        let idx = (m as usize * j) % QUADRATURE_POINTS;
        (self.cos_s[idx], self.sin_s[idx])
    }

    fn profiles(&self, q: &StarShape, with_derivative: bool) -> Profiles {
        let qs = q.sample(QUADRATURE_POINTS);
        let ds = 2.0 * PI / QUADRATURE_POINTS as f64;
        let mut scratch = BesselScratch::default();
        let mut phi = Vec::with_capacity(self.modes.len());
        let mut dphi = Vec::new();
        for md in &self.modes {
            let k = md.lambda.sqrt();
            let (mut c, mut s) = (0.0, 0.0);
            let mut d = if with_derivative {
                Vec::with_capacity(QUADRATURE_POINTS)
            } else {
                Vec::new()
            };
            for (j, &x) in qs.iter().enumerate() {
                let (jm, moment) = scratch.value_and_moment(k * x, md.m as usize);
                let (cj, sj) = self.trig(md.m, j);
                c += moment * cj;
                s += moment * sj;
                if with_derivative {
                    d.push(md.lambda * x * jm);
                }
            }
            phi.push((c * ds, s * ds));
            if with_derivative {
                dphi.push(d);
            }
        }
        Profiles { phi, dphi }
    }

    /// `G(q)`.
    pub fn evaluate(&self, q: &StarShape) -> Result<FluxTrace> {
        let prof = self.profiles(q, false);
        self.assemble_values(q, &prof)
    }

    fn assemble_values(&self, q: &StarShape, prof: &Profiles) -> Result<FluxTrace> {
        let steady = SteadyExpansion::new(q, default_n_max(q));
        let nm = self.modes.len();
        // coefficient of E_n in row l
        let mut coef = DMatrix::zeros(nm, self.angles.len());
        for (l, &th) in self.angles.iter().enumerate() {
            for (n, md) in self.modes.iter().enumerate() {
                let a = md.m as f64 * th;
                let (pc, ps) = prof.phi[n];
                coef[(n, l)] = md.b * (a.cos() * pc + a.sin() * ps);
            }
        }
        let transient = &self.etable * coef;
        let values = self
            .angles
            .iter()
            .enumerate()
            .map(|(l, &th)| {
                let v0 = steady.flux(th);
                transient.column(l).iter().map(|x| v0 + x).collect()
            })
            .collect();
        FluxTrace::new(self.schedule.clone(), self.angles.clone(), values)
    }

    /// `G'(q) h`, unweighted, one row per angle.
    pub fn derivative(&self, q: &StarShape, h: &TrigPoly) -> Result<FluxTrace> {
        let prof = self.profiles(q, true);
        let cols = self.derivative_columns(q, &prof, std::slice::from_ref(h));
        let s = self.schedule.len();
        let values = (0..self.angles.len())
            .map(|l| cols.column(0).rows(l * s, s).iter().copied().collect())
            .collect();
        FluxTrace::new(self.schedule.clone(), self.angles.clone(), values)
    }

    /// Unweighted `[G'(q) h_1, ..., G'(q) h_J]` stacked as `angles x samples` rows.
    fn derivative_columns(&self, q: &StarShape, prof: &Profiles, dirs: &[TrigPoly]) -> DMatrix<f64> {
        let n_max = default_n_max(q);
        let ds = 2.0 * PI / QUADRATURE_POINTS as f64;
        let hs: Vec<Vec<f64>> = dirs.iter().map(|h| h.sample(QUADRATURE_POINTS)).collect();
        let nd = dirs.len();
        let na = self.angles.len();
        let nm = self.modes.len();
        // coef[(n, l * nd + d)] multiplies E_n
        let mut coef = DMatrix::zeros(nm, na * nd);
        for (n, md) in self.modes.iter().enumerate() {
            let dp = &prof.dphi[n];
            for (d, h) in hs.iter().enumerate() {
                let (mut c, mut s) = (0.0, 0.0);
                for j in 0..QUADRATURE_POINTS {
                    let (cj, sj) = self.trig(md.m, j);
                    let v = dp[j] * h[j];
                    c += v * cj;
                    s += v * sj;
                }
                for (l, &th) in self.angles.iter().enumerate() {
                    let a = md.m as f64 * th;
                    coef[(n, l * nd + d)] = md.b * ds * (a.cos() * c + a.sin() * s);
                }
            }
        }
        let transient = &self.etable * coef;
        let ns = self.schedule.len();
        let mut out = DMatrix::zeros(na * ns, nd);
        for (d, h) in dirs.iter().enumerate() {
            let sd = SteadyDerivative::new(q, h, n_max);
            for (l, &th) in self.angles.iter().enumerate() {
                let v0 = sd.value(th);
                for s in 0..ns {
                    out[(l * ns + s, d)] = v0 + transient[(s, l * nd + d)];
                }
            }
        }
        out
    }

    /// `G(q)` together with the weighted Jacobian `diag(√w) [G'(q) e_j]` for the
    /// basis directions `e_j` of degree `degree`.
    pub fn linearize(&self, q: &StarShape, degree: usize) -> Result<(FluxTrace, DMatrix<f64>)> {
        let prof = self.profiles(q, true);
        let g = self.assemble_values(q, &prof)?;
        let dirs: Vec<TrigPoly> = (0..2 * degree + 1)
            .map(|j| TrigPoly::basis_direction(j, degree))
            .collect();
        let mut jac = self.derivative_columns(q, &prof, &dirs);
        self.weight_rows(&mut jac);
        Ok((g, jac))
    }

    /// Weighted Jacobian alone.
    pub fn jacobian(&self, q: &StarShape, degree: usize) -> Result<DMatrix<f64>> {
        Ok(self.linearize(q, degree)?.1)
    }

    fn weight_rows(&self, m: &mut DMatrix<f64>) {
        let ns = self.schedule.len();
        for (r, mut row) in m.row_iter_mut().enumerate() {
            row *= self.sqrt_w[r % ns];
        }
    }

    /// Stacks a trace into `diag(√w) g` (angle-major).
    pub fn weighted_vector(&self, trace: &FluxTrace) -> DVector<f64> {
        let ns = self.schedule.len();
        DVector::from_iterator(
            self.rows(),
            trace
                .values
                .iter()
                .flat_map(|row| row.iter().enumerate().map(|(s, v)| v * self.sqrt_w[s % ns])),
        )
    }
}

/// `G(q)` for one-off use; builds a [`ForwardModel`] internally.
pub fn op_g(
    q: &StarShape,
    angles: &[f64],
    schedule: &MeasurementSchedule,
    basis: &EigenBasis,
    alpha: f64,
) -> Result<FluxTrace> {
    ForwardModel::new(basis, alpha, schedule, angles)?.evaluate(q)
}

/// `G'(q) h` for one-off use.
pub fn op_gprime(
    q: &StarShape,
    h: &TrigPoly,
    angles: &[f64],
    schedule: &MeasurementSchedule,
    basis: &EigenBasis,
    alpha: f64,
) -> Result<FluxTrace> {
    ForwardModel::new(basis, alpha, schedule, angles)?.derivative(q, h)
}

/// Weighted Jacobian with columns `G'(q) e_j`, `e_j` in `[1/2, cos nθ, sin nθ]`.
pub fn assemble_jacobian(
    q: &StarShape,
    angles: &[f64],
    schedule: &MeasurementSchedule,
    basis: &EigenBasis,
    alpha: f64,
    degree: usize,
) -> Result<DMatrix<f64>> {
    ForwardModel::new(basis, alpha, schedule, angles)?.jacobian(q, degree)
}
