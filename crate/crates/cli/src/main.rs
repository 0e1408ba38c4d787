//! `fracinv`: run forward solves, reconstructions and studies from a preset
//! or a TOML configuration.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use fracinv_core::experiments::{
    preset, run_alpha_sweep, run_experiment, run_forward, run_svd_study, run_window_sweep,
    RunConfig, PRESETS,
};
use serde_json::json;

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the finite-difference solver and dump the boundary flux CSV.
    Forward(Source),
    /// Simulate data and reconstruct the source support.
    Reconstruct(Source),
    /// Reconstruct the same shape for several fractional orders.
    SweepAlpha {
        #[command(flatten)]
        source: Source,
        /// Comma-separated fractional orders.
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.5, 1.0])]
        alphas: Vec<f64>,
    },
    /// Reconstruct the same shape for several measurement window starts.
    SweepWindow {
        #[command(flatten)]
        source: Source,
        /// Comma-separated window starts.
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.1, 0.5])]
        t0s: Vec<f64>,
    },
    /// Singular values of the Jacobian at the true shape for several orders.
    Svd {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.5, 1.0])]
        alphas: Vec<f64>,
    },
    /// Print the resolved configuration as TOML.
    ShowConfig(Source),
    /// List the built-in presets.
    ListPresets,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "input")]
struct Source {
    /// TOML run configuration.
    #[arg(long, group = "input")]
    config: Option<PathBuf>,
    /// Built-in preset name (see `list-presets`).
    #[arg(long, group = "input")]
    preset: Option<String>,
}

#[derive(Debug, Args)]
struct Overrides {
    /// Override the noise seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; nothing is written to disk when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Parser)]
#[command(name = "fracinv", version, about = "Source support reconstruction for time-fractional diffusion")]
struct Top {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

impl Source {
    fn load(&self, o: &Overrides) -> Result<RunConfig> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => RunConfig::from_file(path)
                .with_context(|| format!("loading {}", path.display()))?,
            (None, Some(name)) => preset(name)?,
            (None, None) => unreachable!("clap requires one input"),
        };
        if let Some(seed) = o.seed {
            cfg.experiment.seed = seed;
        }
        if let Some(dir) = &o.out {
            cfg.output.dir = Some(dir.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn print(value: serde_json::Value) {
    println!("{value}");
}

fn run(top: Top) -> Result<()> {
    let o = &top.overrides;
    match top.command {
        Command::Forward(src) => {
            let cfg = src.load(o)?;
            let r = run_forward(&cfg)?;
            if cfg.output.dir.is_none() {
                r.clean.write_csv(std::io::stdout().lock())?;
            } else {
                print(json!({ "name": r.name, "files": r.manifest }));
            }
        }
        Command::Reconstruct(src) => {
            let cfg = src.load(o)?;
            let r = run_experiment(&cfg)?;
            print(json!({
                "name": r.name,
                "relative_l2": r.metrics.relative_l2,
                "max_radial_deviation": r.metrics.max_radial_deviation,
                "iterations": r.state.iterations,
                "stop": r.state.stop,
                "relative_residual": r.state.relative_residual,
                "coefficients": r.state.iterate.coeffs(),
                "files": r.manifest,
            }));
        }
        Command::SweepAlpha { source, alphas } => {
            let r = run_alpha_sweep(&source.load(o)?, &alphas)?;
            print(json!({ "alpha": r.values, "relative_l2": r.errors(), "files": r.manifest }));
        }
        Command::SweepWindow { source, t0s } => {
            let r = run_window_sweep(&source.load(o)?, &t0s)?;
            print(json!({ "t0": r.values, "relative_l2": r.errors(), "files": r.manifest }));
        }
        Command::Svd { source, alphas } => {
            let r = run_svd_study(&source.load(o)?, &alphas)?;
            print(json!({ "name": r.name, "series": r.series, "files": r.manifest }));
        }
        Command::ShowConfig(src) => print!("{}", src.load(o)?.to_toml_string()?),
        Command::ListPresets => {
            for (name, desc) in PRESETS {
                println!("{name}\t{desc}");
            }
        }
    }
    Ok(())
}

fn error_kind(err: &anyhow::Error) -> &'static str {
    err.chain()
        .find_map(|e| e.downcast_ref::<fracinv_core::Error>().map(|e| e.kind()))
        .or_else(|| err.chain().find_map(|e| e.downcast_ref::<std::io::Error>().map(|_| "io")))
        .unwrap_or("cli")
}

fn fail(kind: &str, message: String) -> ExitCode {
    eprintln!("{}", json!({ "error": kind, "message": message }));
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let top = match Top::try_parse() {
        Ok(t) => t,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("usage", e.render().to_string().trim().to_string()),
    };
    match run(top) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::debug!("{e:?}");
            fail(error_kind(&e), format!("{e:#}"))
        }
    }
}
