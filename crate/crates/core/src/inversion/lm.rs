//! Regularized Levenberg-Marquardt iteration for the trigonometric
//! coefficients of `q`.

use log::{debug, info, warn};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::operators::ForwardModel;
use super::placement::placement_check;
use crate::error::{Error, Result};
use crate::shape::{ObservationSet, StarShape, TrigPoly};
use crate::steady::{estimate_steady_value, fit_initial_circle};
use crate::trace::FluxTrace;

/// Damping, degree and stopping parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LMConfig {
    pub beta: f64,
    pub degree: usize,
    /// Stop once `|g - G(q)| / |g| <= epsilon`.
    pub epsilon: f64,
    pub max_iter: usize,
    /// Also stop when the relative residual changes by less than this
    /// between iterations (0 disables).
    #[serde(default = "default_stagnation")]
    pub stagnation: f64,
}

fn default_stagnation() -> f64 {
    1e-6
}

impl LMConfig {
    pub fn new(beta: f64, degree: usize, epsilon: f64) -> Self {
        Self {
            beta,
            degree,
            epsilon,
            max_iter: 50,
            stagnation: default_stagnation(),
        }
    }

    /// H² seminorm weights: `1` for `q0`, `i²` for the `i`-th harmonics.
    pub fn penalty(&self) -> Vec<f64> {
        let m = self.degree;
        let mut p = vec![1.0; 2 * m + 1];
        for i in 1..=m {
            let w = (i * i) as f64;
            p[i] = w;
            p[i + m] = w;
        }
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Residual fell below `epsilon`.
    Discrepancy,
    /// Residual stopped changing: the iteration reached its fixed point.
    Stagnation,
    MaxIterations,
}

/// One row of the iteration history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub coeffs: Vec<f64>,
    pub residual: f64,
    pub relative_residual: f64,
    /// Number of step halvings needed to stay admissible.
    pub halvings: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct InversionState {
    pub iterate: StarShape,
    pub initial: StarShape,
    pub residual: f64,
    pub relative_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stop: StopReason,
    pub history: Vec<IterationRecord>,
    /// Singular values of the weighted Jacobian at the final iterate.
    pub singular_values: Vec<f64>,
}

/// Solves `(JᵀJ + βP) δ = Jᵀ r` by Cholesky and returns `δ`.
pub fn lm_step(jac: &DMatrix<f64>, residual: &DVector<f64>, cfg: &LMConfig) -> Result<DVector<f64>> {
    let n = jac.ncols();
    if n != 2 * cfg.degree + 1 {
        return Err(Error::InvalidInput(format!(
            "Jacobian has {n} columns, expected {}",
            2 * cfg.degree + 1
        )));
    }
    if jac.nrows() != residual.len() {
        return Err(Error::InvalidInput("Jacobian and residual sizes differ".into()));
    }
    let mut normal = jac.tr_mul(jac);
    for (i, p) in cfg.penalty().into_iter().enumerate() {
        normal[(i, i)] += cfg.beta * p;
    }
    let rhs = jac.tr_mul(residual);
    let chol = normal.cholesky().ok_or_else(|| {
        Error::Regularization(format!(
            "normal matrix not positive definite (beta = {})",
            cfg.beta
        ))
    })?;
    Ok(chol.solve(&rhs))
}

/// Circle initializer from the data: steady estimates per observation point,
/// then the point-source fit.
pub fn initial_guess(data: &FluxTrace, obs: &ObservationSet, alpha: f64, degree: usize) -> Result<StarShape> {
    let times = data.schedule.times();
    let steady: Vec<f64> = data
        .values
        .iter()
        .map(|row| estimate_steady_value(times, row, alpha))
        .collect();
    Ok(fit_initial_circle(&steady, obs, degree)?.shape)
}

/// Runs the iteration from the circle initializer.
pub fn reconstruct(
    model: &ForwardModel,
    data: &FluxTrace,
    obs: &ObservationSet,
    cfg: &LMConfig,
) -> Result<InversionState> {
    let q0 = initial_guess(data, obs, model.alpha(), cfg.degree)?;
    reconstruct_from(model, data, obs, cfg, q0)
}

/// Runs the iteration from a given starting shape.
pub fn reconstruct_from(
    model: &ForwardModel,
    data: &FluxTrace,
    obs: &ObservationSet,
    cfg: &LMConfig,
    start: StarShape,
) -> Result<InversionState> {
    if data.schedule != *model.schedule() || data.angles.len() != model.angles().len() {
        return Err(Error::InvalidInput(
            "data and forward model use different samples".into(),
        ));
    }
    let diag = placement_check(obs, cfg.degree);
    if !diag.ok {
        warn!(
            "observation angles violate the placement condition for {} mode pairs",
            diag.violations.len()
        );
    }
    let target = model.weighted_vector(data);
    let data_norm = target.norm();
    if data_norm == 0.0 {
        return Err(Error::InvalidInput("data trace is identically zero".into()));
    }
    let start = embed(&start, cfg.degree)?;
    let mut q = start.clone();
    let mut history = Vec::new();
    let mut prev_rel = f64::INFINITY;
    let mut stop = StopReason::MaxIterations;
    let mut iterations = 0;

    let (mut g, mut jac) = model.linearize(&q, cfg.degree)?;
    let mut resid = &target - model.weighted_vector(&g);
    loop {
        let rnorm = resid.norm();
        let rel = rnorm / data_norm;
        history.push(IterationRecord {
            iteration: iterations,
            coeffs: q.coeffs(),
            residual: rnorm,
            relative_residual: rel,
            halvings: 0,
        });
        debug!("iteration {iterations}: relative residual {rel:.3e}");
        if rel <= cfg.epsilon {
            stop = StopReason::Discrepancy;
            break;
        }
        if cfg.stagnation > 0.0 && (prev_rel - rel).abs() <= cfg.stagnation * rel {
            stop = StopReason::Stagnation;
            break;
        }
        if iterations >= cfg.max_iter {
            break;
        }
        prev_rel = rel;
        let step = lm_step(&jac, &resid, cfg)?;
        let coeffs = DVector::from_vec(q.coeffs());
        let mut t = 1.0;
        let mut halvings = 0;
        let next = loop {
            let cand = TrigPoly::from_coeffs((&coeffs + t * &step).as_slice())?;
            match StarShape::new(cand) {
                Ok(s) => break s,
                Err(_) if halvings < 10 => {
                    t *= 0.5;
                    halvings += 1;
                }
                Err(e) => {
                    return Err(Error::Numerical(format!(
                        "iterate left the admissible set after 10 step halvings: {e}"
                    )))
                }
            }
        };
        iterations += 1;
        q = next;
        (g, jac) = model.linearize(&q, cfg.degree)?;
        resid = &target - model.weighted_vector(&g);
        if let Some(last) = history.last_mut() {
            last.halvings = halvings;
        }
    }
    let singular_values = super::singular_values(&jac);
    let last = history.last().expect("at least one record");
    info!(
        "reconstruction stopped after {iterations} iterations ({stop:?}), relative residual {:.3e}",
        last.relative_residual
    );
    Ok(InversionState {
        residual: last.residual,
        relative_residual: last.relative_residual,
        iterate: q,
        initial: start,
        iterations,
        converged: stop != StopReason::MaxIterations,
        stop,
        history,
        singular_values,
    })
}

/// Pads or truncates a shape to the working degree.
fn embed(q: &StarShape, degree: usize) -> Result<StarShape> {
    let mut c = q.cos.clone();
    let mut s = q.sin.clone();
    c.resize(degree, 0.0);
    s.resize(degree, 0.0);
    StarShape::new(TrigPoly::new(q.q0, c, s)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn penalty_layout() {
        let cfg = LMConfig::new(1e-2, 3, 0.0);
        assert_eq!(cfg.penalty(), vec![1.0, 1.0, 4.0, 9.0, 1.0, 4.0, 9.0]);
    }

    #[test]
    fn zero_residual_gives_zero_step() {
        let cfg = LMConfig::new(1e-2, 1, 0.0);
        let jac = DMatrix::from_row_slice(4, 3, &[1.0, 2.0, 0.0, 0.5, 1.0, 1.0, 0.0, 3.0, 1.0, 2.0, 0.0, 1.0]);
        let step = lm_step(&jac, &DVector::zeros(4), &cfg).unwrap();
        assert!(step.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn large_damping_shrinks_step() {
        let jac = DMatrix::from_row_slice(3, 3, &[1.0, 0.2, 0.0, 0.1, 1.0, 0.3, 0.0, 0.2, 1.0]);
        let r = DVector::from_vec(vec![1.0, -1.0, 0.5]);
        let s1 = lm_step(&jac, &r, &LMConfig::new(1e4, 1, 0.0)).unwrap().norm();
        let s2 = lm_step(&jac, &r, &LMConfig::new(1e6, 1, 0.0)).unwrap().norm();
        assert!((s1 / s2 - 100.0).abs() < 1.0);
    }

    #[test]
    fn singular_normal_matrix_is_reported() {
        let jac = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let r = DVector::from_vec(vec![1.0, 1.0]);
        let e = lm_step(&jac, &r, &LMConfig::new(0.0, 1, 0.0)).unwrap_err();
        assert!(matches!(e, Error::Regularization(_)));
    }
}
