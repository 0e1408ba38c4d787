//! Built-in experiment configurations.

use super::config::{
    Angle, ExperimentSection, InversionSection, OutputSection, RunConfig, ScheduleSpec, ShapeSpec,
    SolverSection,
};
use crate::error::{Error, Result};

/// Name and one-line description of every preset.
pub const PRESETS: &[(&str, &str)] = &[
    ("E1a", "q = 0.6 + 0.1 cos θ + 0.1 sin 2θ, angles 15π/32, 19π/16"),
    ("E1b", "q = 0.6 + 0.1 cos θ + 0.1 sin 2θ, angles 3π/4, 55π/32"),
    ("E2a", "q = 0.5 + 0.05 cos θ + 0.3 sin 2θ, angles 0, 31π/32"),
    ("E2b", "q = 0.5 + 0.05 cos θ + 0.3 sin 2θ, angles 23π/32, 27π/16"),
    ("E2c", "E2b shape with four angles 23π/32, 57π/32, π/4, 39π/32"),
    ("circle", "noiseless circle r = 0.45, radius-only fit"),
];

fn angles(list: &[&str]) -> Vec<Angle> {
    list.iter()
        .map(|s| Angle::parse(s).expect("preset angle"))
        .collect()
}

fn e1_shape() -> ShapeSpec {
    ShapeSpec {
        mean: 0.6,
        cos: vec![0.1, 0.0],
        sin: vec![0.0, 0.1],
    }
}

fn e2_shape() -> ShapeSpec {
    ShapeSpec {
        mean: 0.5,
        cos: vec![0.05, 0.0],
        sin: vec![0.0, 0.3],
    }
}

fn base(name: &str, shape: ShapeSpec, obs: &[&str], delta: f64, eps_div: f64, degree: usize) -> RunConfig {
    RunConfig {
        experiment: ExperimentSection {
            name: name.to_string(),
            alpha: 0.9,
            t_end: 1.0,
            t0: 0.0,
            shape,
            angles: angles(obs),
            schedule: ScheduleSpec::Uniform { dt: 1e-3 },
            delta,
            seed: 42,
        },
        solver: SolverSection::default(),
        inversion: InversionSection {
            beta: 1e-2,
            degree,
            epsilon: delta / eps_div,
            max_iter: 50,
            stagnation: 1e-6,
        },
        output: OutputSection::default(),
    }
}

/// The named preset (case-insensitive).
pub fn preset(name: &str) -> Result<RunConfig> {
    let cfg = match name.to_ascii_lowercase().as_str() {
        "e1a" => base("E1a", e1_shape(), &["15pi/32", "19pi/16"], 0.01, 2.0, 4),
        "e1b" => base("E1b", e1_shape(), &["3pi/4", "55pi/32"], 0.01, 2.0, 4),
        "e2a" => base("E2a", e2_shape(), &["0", "31pi/32"], 0.01, 10.0, 5),
        "e2b" => base("E2b", e2_shape(), &["23pi/32", "27pi/16"], 0.01, 10.0, 5),
        "e2c" => {
            let mut c = base(
                "E2c",
                e2_shape(),
                &["23pi/32", "57pi/32", "pi/4", "39pi/32"],
                0.01,
                10.0,
                5,
            );
            c.inversion.beta = 3e-2;
            c
        }
        "circle" => base(
            "circle",
            ShapeSpec {
                mean: 0.45,
                cos: vec![],
                sin: vec![],
            },
            &["3pi/4", "55pi/32"],
            0.0,
            1.0,
            0,
        ),
        _ => {
            let names: Vec<&str> = PRESETS.iter().map(|p| p.0).collect();
            return Err(Error::Config(format!(
                "unknown preset {name:?}; available: {}",
                names.join(", ")
            )));
        }
    };
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn every_listed_preset_is_valid() {
        for (name, _) in PRESETS {
            let c = preset(name).unwrap();
            c.validate().unwrap();
            assert_eq!(&c.experiment.name, name);
        }
        assert!(preset("E9").is_err());
    }

    #[test]
    fn e1a_definition() {
        let c = preset("e1a").unwrap();
        let a = c.angles();
        assert!((a[0] - 15.0 * PI / 32.0).abs() < 1e-15);
        assert!((a[1] - 19.0 * PI / 16.0).abs() < 1e-15);
        assert_eq!(c.inversion.epsilon, c.experiment.delta / 2.0);
        let q = c.truth().unwrap();
        let t = 0.3_f64;
        let want = 0.6 + 0.1 * t.cos() + 0.1 * (2.0 * t).sin();
        assert!((q.eval(t) - want).abs() < 1e-15);
    }

    #[test]
    fn e2c_definition() {
        let c = preset("E2c").unwrap();
        let want = [23.0 / 32.0, 57.0 / 32.0, 0.25, 39.0 / 32.0];
        for (a, w) in c.angles().iter().zip(want) {
            assert!((a - w * PI).abs() < 1e-15);
        }
        assert_eq!(c.inversion.beta, 3e-2);
        assert_eq!(c.experiment.delta, 0.01);
        assert!((c.inversion.epsilon - 0.001).abs() < 1e-18);
    }
}
