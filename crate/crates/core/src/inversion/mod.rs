//! Forward map, Jacobian, Levenberg-Marquardt reconstruction and
//! diagnostics.

pub mod lm;
pub mod noise;
pub mod operators;
pub mod placement;

use nalgebra::DMatrix;

pub use lm::{
    initial_guess, lm_step, reconstruct, reconstruct_from, InversionState, IterationRecord, LMConfig,
    StopReason,
};
pub use noise::add_noise;
pub use operators::{assemble_jacobian, op_g, op_gprime, ForwardModel};
pub use placement::{placement_check, PlacementDiagnostic, PlacementViolation};

/// Singular values of `jac` in descending order.
pub fn singular_values(jac: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = jac.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Least-squares line `log σ_k = a + b k` (k from 1); returns `(slope, R²)`.
pub fn log_linear_fit(sigma: &[f64]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = sigma
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > 0.0)
        .map(|(k, s)| ((k + 1) as f64, s.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r2)
}
