//! Runs experiments: data generation with the finite-difference solver,
//! noise, spectral reconstruction, metrics and output files.

use std::collections::HashMap;
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};

use log::info;
use rayon::prelude::*;
use serde::Serialize;

use super::config::RunConfig;
use super::plot::{render_svg, PlotCurves};
use super::report::{
    curve_csv, iterations_csv, shape_errors, summary_csv, ExperimentReport, ManifestEntry,
    OutputDir, CURVE_POINTS,
};
use crate::eigensystem::{build_basis, EigenBasis};
use crate::error::{Error, Result};
use crate::forward::{boundary_flux_table, FluxTable, SourceSampling};
use crate::inversion::{
    add_noise, log_linear_fit, placement_check, reconstruct, singular_values, ForwardModel,
};
use crate::trace::FluxTrace;

/// Identifies one finite-difference solve.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct TableKey {
    shape: Vec<u64>,
    alpha: u64,
    l: usize,
    k: usize,
    tau: u64,
    steps: usize,
    sampling: SourceSampling,
}

type Slot = Arc<Mutex<Option<Arc<FluxTable>>>>;

/// Solves shared across experiments in this process (sweeps and studies
/// reuse the same data).
static TABLES: OnceLock<Mutex<HashMap<TableKey, Slot>>> = OnceLock::new();
static BASES: OnceLock<Mutex<HashMap<u64, Arc<EigenBasis>>>> = OnceLock::new();

const MAX_CACHED_TABLES: usize = 64;

fn cached_basis(lambda_max: f64) -> Result<Arc<EigenBasis>> {
    let map = BASES.get_or_init(Default::default);
    if let Some(b) = map.lock().expect("basis cache").get(&lambda_max.to_bits()) {
        return Ok(b.clone());
    }
    let b = Arc::new(build_basis(lambda_max)?);
    map.lock()
        .expect("basis cache")
        .insert(lambda_max.to_bits(), b.clone());
    Ok(b)
}

fn cached_table(cfg: &RunConfig) -> Result<Arc<FluxTable>> {
    let q = cfg.truth()?;
    let grid = cfg.grid()?;
    let tg = cfg.time_grid()?;
    let key = TableKey {
        shape: q.coeffs().iter().map(|c| c.to_bits()).collect(),
        alpha: tg.alpha.to_bits(),
        l: grid.l,
        k: grid.k,
        tau: tg.tau.to_bits(),
        steps: tg.steps,
        sampling: cfg.solver.sampling,
    };
    let slot = {
        let mut map = TABLES.get_or_init(Default::default).lock().expect("table cache");
        if map.len() >= MAX_CACHED_TABLES && !map.contains_key(&key) {
            map.clear();
        }
        map.entry(key).or_default().clone()
    };
    let mut guard = slot.lock().expect("table slot");
    if let Some(t) = guard.as_ref() {
        return Ok(t.clone());
    }
    info!(
        "finite-difference solve: alpha {}, {} steps, grid {}x{}",
        tg.alpha, tg.steps, grid.l, grid.k
    );
    let t = Arc::new(boundary_flux_table(&q, &grid, &tg, cfg.solver.sampling)?);
    *guard = Some(t.clone());
    Ok(t)
}

/// Noise-free flux of the configured shape from the finite-difference solver.
pub fn simulate_data(cfg: &RunConfig) -> Result<FluxTrace> {
    cfg.validate()?;
    cached_table(cfg)?.extract(&cfg.angles(), &cfg.schedule()?)
}

/// Spectral forward map for the configuration's `alpha`, angles and schedule.
pub fn forward_model(cfg: &RunConfig) -> Result<ForwardModel> {
    let basis = cached_basis(cfg.solver.lambda_max)?;
    ForwardModel::new(&basis, cfg.experiment.alpha, &cfg.schedule()?, &cfg.angles())
}

fn with_name<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        e @ Error::Experiment { .. } => e,
        e => Error::Experiment {
            name: name.to_string(),
            source: Box::new(e),
        },
    })
}

/// Generates data, adds noise, reconstructs and, when an output directory is
/// configured, writes `config.toml`, `flux.csv`, `iterations.csv`,
/// `curve.csv`, `reconstruction.svg` and `report.json`.
pub fn run_experiment(cfg: &RunConfig) -> Result<ExperimentReport> {
    with_name(&cfg.experiment.name, run_inner(cfg))
}

fn run_inner(cfg: &RunConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let e = &cfg.experiment;
    let truth = cfg.truth()?;
    let obs = cfg.observations()?;
    let clean = simulate_data(cfg)?;
    let data = add_noise(&clean, e.delta, e.seed)?;
    let model = forward_model(cfg)?;
    let lm = cfg.lm_config();
    let state = reconstruct(&model, &data, &obs, &lm)?;
    let metrics = shape_errors(&state.iterate, &truth);
    let initial_metrics = shape_errors(&state.initial, &truth);
    info!(
        "{}: relative L2 error {:.4e} after {} iterations",
        e.name, metrics.relative_l2, state.iterations
    );
    let mut report = ExperimentReport {
        name: e.name.clone(),
        config: cfg.clone(),
        truth: truth.coeffs(),
        metrics,
        initial_metrics,
        placement: placement_check(&obs, lm.degree),
        state,
        manifest: Vec::new(),
    };
    if let Some(dir) = &cfg.output.dir {
        let mut out = OutputDir::create(dir)?;
        out.write("config.toml", cfg.to_toml_string()?.as_bytes())?;
        let mut flux = Vec::new();
        data.write_csv(&mut flux)?;
        out.write("flux.csv", &flux)?;
        out.write("iterations.csv", &iterations_csv(&report.state)?)?;
        out.write("curve.csv", &curve_csv(&truth, &report.state.iterate)?)?;
        if cfg.output.plot {
            let svg = render_svg(&PlotCurves {
                exact: truth.sample(CURVE_POINTS),
                reconstructed: Some(report.state.iterate.sample(CURVE_POINTS)),
                observations: cfg.angles(),
            })?;
            out.write("reconstruction.svg", svg.as_bytes())?;
        }
        report.manifest = out.into_manifest();
        write_json(dir, "report.json", &report)?;
    }
    Ok(report)
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Internal(format!("report serialization: {e}")))?;
    std::fs::write(dir.join(name), text + "\n")?;
    Ok(())
}

/// Runs of one base configuration over a parameter, plus the comparison table.
#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    /// Name of the swept parameter (`alpha` or `t0`).
    pub parameter: String,
    pub values: Vec<f64>,
    pub reports: Vec<ExperimentReport>,
    pub manifest: Vec<ManifestEntry>,
}

impl SweepReport {
    /// Relative L² errors in sweep order.
    pub fn errors(&self) -> Vec<f64> {
        self.reports.iter().map(|r| r.metrics.relative_l2).collect()
    }
}

fn sweep(
    base: &RunConfig,
    parameter: &str,
    values: &[f64],
    apply: impl Fn(&mut RunConfig, f64) + Sync,
) -> Result<SweepReport> {
    let configs: Vec<RunConfig> = values
        .iter()
        .map(|&v| {
            let mut c = base.clone();
            apply(&mut c, v);
            if let Some(dir) = &base.output.dir {
                c.output.dir = Some(dir.join(format!("{parameter}_{v}")));
            }
            c
        })
        .collect();
    let reports = configs
        .par_iter()
        .map(run_experiment)
        .collect::<Result<Vec<_>>>()?;
    let mut manifest = Vec::new();
    if let (Some(dir), false) = (&base.output.dir, values.is_empty()) {
        let mut out = OutputDir::create(dir)?;
        let rows: Vec<(f64, &ExperimentReport)> = values.iter().copied().zip(&reports).collect();
        out.write(&format!("sweep_{parameter}.csv"), &summary_csv(parameter, &rows)?)?;
        manifest = out.into_manifest();
    }
    Ok(SweepReport {
        parameter: parameter.to_string(),
        values: values.to_vec(),
        reports,
        manifest,
    })
}

/// One experiment per `alpha` with the same data seed.
pub fn run_alpha_sweep(base: &RunConfig, alphas: &[f64]) -> Result<SweepReport> {
    sweep(base, "alpha", alphas, |c, a| c.experiment.alpha = a)
}

/// One experiment per window start `t0` (delayed measurements).
pub fn run_window_sweep(base: &RunConfig, t0s: &[f64]) -> Result<SweepReport> {
    sweep(base, "t0", t0s, |c, t| c.experiment.t0 = t)
}

/// Singular values of the weighted Jacobian at the true shape for one `alpha`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SvdSeries {
    pub alpha: f64,
    pub sigma: Vec<f64>,
    /// Slope and R² of the least-squares line through `log σ_k`.
    pub slope: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SvdStudy {
    pub name: String,
    pub series: Vec<SvdSeries>,
    pub manifest: Vec<ManifestEntry>,
}

/// Writes `svd.csv` (`alpha,k,sigma`) and `svd_fit.csv` when an output
/// directory is configured.
pub fn run_svd_study(cfg: &RunConfig, alphas: &[f64]) -> Result<SvdStudy> {
    with_name(&cfg.experiment.name, svd_inner(cfg, alphas))
}

fn svd_inner(cfg: &RunConfig, alphas: &[f64]) -> Result<SvdStudy> {
    cfg.validate()?;
    let truth = cfg.truth()?;
    let degree = cfg.inversion.degree;
    let series = alphas
        .par_iter()
        .map(|&alpha| {
            let mut c = cfg.clone();
            c.experiment.alpha = alpha;
            let jac = forward_model(&c)?.jacobian(&truth, degree)?;
            let sigma = singular_values(&jac);
            let (slope, r_squared) = log_linear_fit(&sigma);
            Ok(SvdSeries {
                alpha,
                sigma,
                slope,
                r_squared,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut manifest = Vec::new();
    if let Some(dir) = &cfg.output.dir {
        let mut out = OutputDir::create(dir)?;
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["alpha", "k", "sigma"])?;
        for s in &series {
            for (k, v) in s.sigma.iter().enumerate() {
                w.write_record([s.alpha.to_string(), (k + 1).to_string(), v.to_string()])?;
            }
        }
        out.write("svd.csv", &into_bytes(w)?)?;
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["alpha", "slope", "r_squared"])?;
        for s in &series {
            w.write_record([s.alpha.to_string(), s.slope.to_string(), s.r_squared.to_string()])?;
        }
        out.write("svd_fit.csv", &into_bytes(w)?)?;
        manifest = out.into_manifest();
    }
    Ok(SvdStudy {
        name: cfg.experiment.name.clone(),
        series,
        manifest,
    })
}

fn into_bytes(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner()
        .map_err(|e| std::io::Error::other(e.to_string()).into())
}

/// Finite-difference flux of the configured shape.
#[derive(Debug, Clone, Serialize)]
pub struct ForwardReport {
    pub name: String,
    pub clean: FluxTrace,
    /// Present when the configuration has `delta > 0`.
    pub noisy: Option<FluxTrace>,
    pub manifest: Vec<ManifestEntry>,
}

/// Writes `flux.csv` and, for `delta > 0`, `flux_noisy.csv`.
pub fn run_forward(cfg: &RunConfig) -> Result<ForwardReport> {
    with_name(&cfg.experiment.name, forward_inner(cfg))
}

fn forward_inner(cfg: &RunConfig) -> Result<ForwardReport> {
    let clean = simulate_data(cfg)?;
    let e = &cfg.experiment;
    let noisy = if e.delta > 0.0 {
        Some(add_noise(&clean, e.delta, e.seed)?)
    } else {
        None
    };
    let mut manifest = Vec::new();
    if let Some(dir) = &cfg.output.dir {
        let mut out = OutputDir::create(dir)?;
        let mut buf = Vec::new();
        clean.write_csv(&mut buf)?;
        out.write("flux.csv", &buf)?;
        if let Some(n) = &noisy {
            let mut buf = Vec::new();
            n.write_csv(&mut buf)?;
            out.write("flux_noisy.csv", &buf)?;
        }
        manifest = out.into_manifest();
    }
    Ok(ForwardReport {
        name: e.name.clone(),
        clean,
        noisy,
        manifest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::presets::preset;

    fn small(name: &str) -> RunConfig {
        let mut c = preset(name).unwrap();
        c.experiment.t_end = 0.2;
        c.solver.l = 32;
        c.solver.k = 32;
        c.solver.tau = 2e-3;
        c.solver.lambda_max = 300.0;
        c.experiment.schedule = crate::experiments::ScheduleSpec::Uniform { dt: 4e-3 };
        c.inversion.max_iter = 3;
        c
    }

    #[test]
    fn empty_sweep_is_a_no_op() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = small("E1b");
        c.output.dir = Some(dir.path().join("sweep"));
        let r = run_alpha_sweep(&c, &[]).unwrap();
        assert!(r.reports.is_empty() && r.manifest.is_empty());
        assert!(!dir.path().join("sweep").exists());
    }

    #[test]
    fn single_alpha_sweep_matches_direct_run() {
        let mut c = small("E1b");
        c.experiment.alpha = 0.7;
        let direct = run_experiment(&c).unwrap();
        let swept = run_alpha_sweep(&c, &[0.7]).unwrap();
        assert_eq!(swept.reports.len(), 1);
        assert_eq!(swept.reports[0].state.history, direct.state.history);
        assert_eq!(swept.reports[0].metrics, direct.metrics);
    }

    #[test]
    fn errors_carry_the_experiment_name() {
        let mut c = small("E2a");
        c.solver.l = 8;
        let e = run_experiment(&c).unwrap_err();
        assert!(e.to_string().contains("E2a"), "{e}");
        assert!(matches!(e, Error::Experiment { .. }));
    }

    #[test]
    fn outputs_are_listed_and_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let mut runs = Vec::new();
        for sub in ["a", "b"] {
            let mut c = small("E1a");
            c.output.dir = Some(dir.path().join(sub));
            runs.push(run_experiment(&c).unwrap());
        }
        let names: Vec<&str> = runs[0].manifest.iter().map(|m| m.path.as_str()).collect();
        assert_eq!(
            names,
            ["config.toml", "flux.csv", "iterations.csv", "curve.csv", "reconstruction.svg"]
        );
        for m in &runs[0].manifest {
            let bytes = std::fs::read(dir.path().join("a").join(&m.path)).unwrap();
            assert_eq!(bytes.len() as u64, m.bytes);
        }
        // identical configurations apart from the directory give identical files
        for (x, y) in runs[0].manifest.iter().zip(&runs[1].manifest) {
            if x.path != "config.toml" {
                assert_eq!(x, y);
            }
        }
        assert!(dir.path().join("a").join("report.json").exists());
    }

    #[test]
    fn svd_rows_per_alpha() {
        let c = small("E2b");
        let s = run_svd_study(&c, &[0.5, 1.0]).unwrap();
        for series in &s.series {
            assert_eq!(series.sigma.len(), 2 * c.inversion.degree + 1);
            assert!(series.sigma[0] > series.sigma[1]);
        }
    }
}
