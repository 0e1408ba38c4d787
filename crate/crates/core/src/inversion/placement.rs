//! Check that no pair of observation angles is blind to a mode `m' <= M`,
//! i.e. `|sin(m'(θ_i - θ_j))|` stays away from zero.

use serde::Serialize;

use crate::shape::ObservationSet;

pub const PLACEMENT_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacementViolation {
    pub i: usize,
    pub j: usize,
    pub mode: usize,
    pub sine: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacementDiagnostic {
    pub ok: bool,
    pub violations: Vec<PlacementViolation>,
}

pub fn placement_check(obs: &ObservationSet, degree: usize) -> PlacementDiagnostic {
    let a = obs.angles();
    let mut violations = Vec::new();
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            for m in 1..=degree {
                let s = (m as f64 * (a[i] - a[j])).sin();
                if s.abs() <= PLACEMENT_TOLERANCE {
                    violations.push(PlacementViolation { i, j, mode: m, sine: s });
                }
            }
        }
    }
    PlacementDiagnostic {
        ok: violations.is_empty(),
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn modes(d: &PlacementDiagnostic) -> Vec<usize> {
        d.violations.iter().map(|v| v.mode).collect()
    }

    #[test]
    fn opposite_points_fail_every_mode() {
        let d = placement_check(&ObservationSet::new(vec![0.0, PI]).unwrap(), 2);
        assert!(!d.ok);
        assert_eq!(modes(&d), vec![1, 2]);
    }

    #[test]
    fn quarter_turn_fails_second_mode() {
        let d = placement_check(&ObservationSet::new(vec![0.0, PI / 2.0]).unwrap(), 2);
        assert_eq!(modes(&d), vec![2]);
    }

    #[test]
    fn experiment_angles_pass() {
        let obs = ObservationSet::new(vec![15.0 * PI / 32.0, 19.0 * PI / 16.0]).unwrap();
        assert!(placement_check(&obs, 5).ok);
    }
}
