use fracinv_core::experiments::{
    preset, run_experiment, Angle, RunConfig, ScheduleSpec, ShapeSpec, PRESETS,
};
use proptest::prelude::*;

fn small(name: &str) -> RunConfig {
    let mut c = preset(name).unwrap();
    c.experiment.t_end = 0.3;
    c.experiment.schedule = ScheduleSpec::Uniform { dt: 1e-2 };
    c.solver.l = 32;
    c.solver.k = 32;
    c.solver.tau = 5e-3;
    c.solver.lambda_max = 400.0;
    c.inversion.max_iter = 3;
    c
}

#[test]
fn same_seed_gives_byte_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    for (name, _) in PRESETS {
        let run = |sub: &str| {
            let mut c = small(name);
            c.output.dir = Some(dir.path().join(name).join(sub));
            run_experiment(&c).unwrap()
        };
        let (a, b) = (run("a"), run("b"));
        // config.toml records the output directory itself
        let data = |r: &fracinv_core::experiments::ExperimentReport| {
            r.manifest.iter().filter(|e| e.path != "config.toml").cloned().collect::<Vec<_>>()
        };
        assert_eq!(data(&a), data(&b), "{name}");
        assert_eq!(a.manifest.len(), b.manifest.len());
        for f in ["flux.csv", "iterations.csv", "curve.csv"] {
            let read = |sub: &str| std::fs::read(dir.path().join(name).join(sub).join(f)).unwrap();
            assert_eq!(read("a"), read("b"), "{name}/{f}");
        }
        let mut c = small(name);
        c.experiment.seed += 1;
        if c.experiment.delta > 0.0 {
            assert_ne!(run_experiment(&c).unwrap().state.history, a.state.history, "{name}");
        }
    }
}

#[test]
fn report_plot_has_the_three_legend_elements() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small("E1b");
    c.output.dir = Some(dir.path().to_path_buf());
    run_experiment(&c).unwrap();
    let svg = std::fs::read_to_string(dir.path().join("reconstruction.svg")).unwrap();
    // unit circle, dotted exact curve, dashed reconstruction, one bullet per angle
    assert_eq!(svg.matches("<path").count(), 3);
    assert!(svg.contains("stroke-dasharray=\"2,4\""));
    assert!(svg.contains("stroke-dasharray=\"10,6\""));
    assert_eq!(svg.matches("<circle").count(), 2);
}

#[test]
fn report_json_lists_every_file_with_its_hash() {
    use sha2::{Digest, Sha256};
    let dir = tempfile::tempdir().unwrap();
    let mut c = small("E2c");
    c.output.dir = Some(dir.path().to_path_buf());
    let r = run_experiment(&c).unwrap();
    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["name"], "E2c");
    let listed = json["manifest"].as_array().unwrap();
    assert_eq!(listed.len(), r.manifest.len());
    for entry in &r.manifest {
        let bytes = std::fs::read(dir.path().join(&entry.path)).unwrap();
        assert_eq!(hex::encode(Sha256::digest(&bytes)), entry.sha256);
        assert_eq!(bytes.len() as u64, entry.bytes);
    }
}

fn config() -> impl Strategy<Value = RunConfig> {
    (
        0.05f64..=1.0,
        0.3f64..0.6,
        prop::collection::vec(-0.05f64..0.05, 0..4),
        prop::collection::vec(-0.05f64..0.05, 0..4),
        0..=i64::MAX as u64,
        0.0f64..0.1,
        prop::bool::ANY,
    )
        .prop_map(|(alpha, mean, cos, sin, seed, delta, graded)| {
            let mut c = preset("E1b").unwrap();
            c.experiment.alpha = alpha;
            c.experiment.shape = ShapeSpec { mean, cos, sin };
            c.experiment.seed = seed;
            c.experiment.delta = delta;
            c.experiment.angles = vec![Angle::parse("3pi/4").unwrap(), Angle::Radians(delta + 4.0)];
            if graded {
                c.experiment.schedule = ScheduleSpec::Graded { dt0: 1e-3, growth: 1.2, cap: 0.1 };
            }
            c.inversion.beta = delta;
            c
        })
}

proptest! {
    #[test]
    fn configs_round_trip_through_toml(c in config()) {
        prop_assert!(c.validate().is_ok());
        let text = c.to_toml_string().unwrap();
        prop_assert_eq!(RunConfig::from_toml_str(&text).unwrap(), c);
    }
}

#[test]
fn graded_sampling_matches_uniform_sampling() {
    let uniform = preset("E1b").unwrap();
    let mut graded = uniform.clone();
    // dt grows from 1e-3 and sits at the 0.1 cap over the second half
    graded.experiment.schedule = ScheduleSpec::Graded { dt0: 1e-3, growth: 1.2, cap: 0.1 };
    let sched = graded.schedule().unwrap();
    assert!(sched.len() < 60 && sched.times()[0] <= 1.0e-3 + 1e-12);
    let (a, b) = (run_experiment(&uniform).unwrap(), run_experiment(&graded).unwrap());
    let (ea, eb) = (a.metrics.relative_l2, b.metrics.relative_l2);
    eprintln!("uniform {ea:.4}, graded {eb:.4} with {} samples", sched.len());
    assert!((eb - ea).abs() <= 0.1 * ea, "uniform {ea:.4}, graded {eb:.4}");
}

#[test]
fn five_percent_noise_is_only_slightly_worse() {
    let one = preset("E1a").unwrap();
    let mut five = one.clone();
    five.experiment.delta = 0.05;
    five.inversion.epsilon = 0.025;
    let (a, b) = (run_experiment(&one).unwrap(), run_experiment(&five).unwrap());
    let (e1, e5) = (a.metrics.relative_l2, b.metrics.relative_l2);
    eprintln!("1%: {e1:.4} (residual {:.3e}), 5%: {e5:.4} (residual {:.3e})", a.state.residual, b.state.residual);
    assert!(b.state.residual > a.state.residual);
    assert!(e5 < 2.0 * e1 + 0.05, "1%: {e1:.4}, 5%: {e5:.4}");
}
