//! Dirichlet eigensystem of `-Δ` on the unit disc.

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::specfun::{zeros_below, BesselScratch};

/// Default eigenvalue cut-off for spectral sums.
pub const DEFAULT_LAMBDA_MAX: f64 = 2000.0;

/// Angular phase of an eigenfunction: `cos(m theta)` or `cos(m theta + pi/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Phase {
    Cos,
    Sin,
}

impl Phase {
    pub fn angle(self) -> f64 {
        match self {
            Phase::Cos => 0.0,
            Phase::Sin => 0.5 * PI,
        }
    }
}

/// One eigenpair `phi_n = w_n J_m(sqrt(lambda) r) cos(m theta + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenMode {
    /// 1-based position in the sorted basis.
    pub n: usize,
    pub m: u32,
    pub k: u32,
    pub phase: Phase,
    pub lambda: f64,
    pub eta: f64,
    /// `J_{m+1}(sqrt(lambda))`.
    pub j_next: f64,
    /// L2 normalization `1 / (sqrt(eta pi) |J_{m+1}(sqrt(lambda))|)`.
    pub weight: f64,
    /// Flux coefficient `1 / (eta pi lambda^{3/2} J_{m+1}(sqrt(lambda)))`.
    pub b: f64,
}

impl EigenMode {
    fn new(m: u32, k: u32, phase: Phase, zero: f64, scratch: &mut BesselScratch) -> Self {
        let lambda = zero * zero;
        let eta = if m == 0 { 1.0 } else { 0.5 };
        let j_next = scratch.orders(zero, m as usize + 1)[m as usize + 1];
        Self {
            n: 0,
            m,
            k,
            phase,
            lambda,
            eta,
            j_next,
            weight: 1.0 / ((eta * PI).sqrt() * j_next.abs()),
            b: 1.0 / (eta * PI * lambda.powf(1.5) * j_next),
        }
    }

    pub fn frequency(&self) -> f64 {
        self.lambda.sqrt()
    }
}

/// `phi_n(r, theta)` for `r` in `[0, 1]`.
pub fn eigenfunction_value(mode: &EigenMode, r: f64, theta: f64) -> f64 {
    let mut scratch = BesselScratch::default();
    let m = mode.m as usize;
    let radial = scratch.orders(mode.frequency() * r, m)[m];
    mode.weight * radial * (mode.m as f64 * theta + mode.phase.angle()).cos()
}

/// All modes with `lambda <= lambda_max`, ordered by `(lambda, m, phase)`.
#[derive(Debug, Clone, Serialize)]
pub struct EigenBasis {
    pub modes: Vec<EigenMode>,
    pub lambda_max: f64,
    pub degree_max: u32,
}

/// Builds the truncated basis; `lambda_max` must be at least `j_{0,1}^2`.
pub fn build_basis(lambda_max: f64) -> Result<EigenBasis> {
    if !(lambda_max.is_finite() && lambda_max > 0.0) {
        return Err(Error::InvalidInput(format!("lambda_max = {lambda_max}")));
    }
    let table = zeros_below(lambda_max.sqrt())?;
    if table.is_empty() {
        return Err(Error::InvalidInput(format!(
            "lambda_max = {lambda_max} is below the first eigenvalue"
        )));
    }
    let mut scratch = BesselScratch::default();
    let mut modes = Vec::new();
    for (m, row) in table.iter().enumerate() {
        for (k, &z) in row.iter().enumerate() {
            let (m, k) = (m as u32, k as u32 + 1);
            modes.push(EigenMode::new(m, k, Phase::Cos, z, &mut scratch));
            if m > 0 {
                modes.push(EigenMode::new(m, k, Phase::Sin, z, &mut scratch));
            }
        }
    }
    modes.sort_by(|a, b| {
        a.lambda
            .total_cmp(&b.lambda)
            .then(a.m.cmp(&b.m))
            .then(a.phase.cmp(&b.phase))
    });
    for (i, mode) in modes.iter_mut().enumerate() {
        mode.n = i + 1;
    }
    Ok(EigenBasis {
        degree_max: table.len() as u32 - 1,
        modes,
        lambda_max,
    })
}

impl EigenBasis {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// One representative (the cosine mode) per distinct eigenvalue.
    pub fn distinct(&self) -> impl Iterator<Item = &EigenMode> {
        self.modes.iter().filter(|m| m.phase == Phase::Cos)
    }

    /// Writes `n,m,k,phase,lambda,b` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "n,m,k,phase,lambda,b")?;
        for md in &self.modes {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                md.n,
                md.m,
                md.k,
                md.phase.angle(),
                md.lambda,
                md.b
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_basis() {
        let b = build_basis(6.0).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b.modes[0].m, 0);
        assert!((b.modes[0].lambda - 5.783_185_962_946_784).abs() < 1e-11);
    }

    #[test]
    fn first_pair() {
        let b = build_basis(15.0).unwrap();
        assert_eq!(b.len(), 3);
        assert_eq!(b.modes[1].phase, Phase::Cos);
        assert_eq!(b.modes[2].phase, Phase::Sin);
        assert_eq!(b.modes[1].lambda, b.modes[2].lambda);
        assert!((b.modes[1].lambda - 14.681_970_642_123_89).abs() < 1e-10);
        assert_eq!(b.distinct().count(), 2);
    }

    #[test]
    fn too_small_cutoff_is_rejected() {
        assert!(build_basis(5.0).is_err());
        assert!(build_basis(-1.0).is_err());
    }

    #[test]
    fn sorted_and_indexed() {
        let b = build_basis(DEFAULT_LAMBDA_MAX).unwrap();
        assert!(b.modes.windows(2).all(|w| w[0].lambda <= w[1].lambda));
        assert!(b.modes.iter().enumerate().all(|(i, m)| m.n == i + 1));
        assert!(b.modes.iter().all(|m| m.lambda <= DEFAULT_LAMBDA_MAX));
    }

    #[test]
    fn boundary_value_vanishes() {
        let b = build_basis(300.0).unwrap();
        for md in &b.modes {
            assert!(eigenfunction_value(md, 1.0, 0.7).abs() < 1e-10);
        }
    }

    #[test]
    fn csv_has_header_and_rows() {
        let b = build_basis(15.0).unwrap();
        let mut buf = Vec::new();
        b.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().count(), 4);
        assert!(s.starts_with("n,m,k,phase,lambda,b\n1,0,1,0,"));
    }
}
