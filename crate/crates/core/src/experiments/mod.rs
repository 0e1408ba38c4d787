//! Experiment registry and driver: configurations, presets, runs, sweeps,
//! reports and plots.

pub mod config;
pub mod plot;
pub mod presets;
pub mod report;
pub mod runner;

pub use config::{Angle, RunConfig, ScheduleSpec, ShapeSpec};
pub use plot::{emit_plot, render_svg, PlotCurves};
pub use presets::{preset, PRESETS};
pub use report::{shape_errors, ErrorMetrics, ExperimentReport, ManifestEntry};
pub use runner::{
    run_alpha_sweep, run_experiment, run_forward, run_svd_study, run_window_sweep, simulate_data,
    ForwardReport, SvdStudy, SweepReport,
};
