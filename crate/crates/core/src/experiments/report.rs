//! Error metrics, CSV tables and the hashed file manifest.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::RunConfig;
use crate::error::Result;
use crate::inversion::{InversionState, PlacementDiagnostic};
use crate::shape::TrigPoly;

/// Number of angles used for curve output and shape metrics.
pub const CURVE_POINTS: usize = 720;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorMetrics {
    /// `‖q_rec - q_true‖ / ‖q_true‖` in `L²(0, 2π)`.
    pub relative_l2: f64,
    /// `max_θ |q_rec(θ) - q_true(θ)|`.
    pub max_radial_deviation: f64,
}

/// Shape errors on the 720-point trapezoid grid.
pub fn shape_errors(rec: &TrigPoly, truth: &TrigPoly) -> ErrorMetrics {
    let (mut num, mut den, mut max) = (0.0_f64, 0.0_f64, 0.0_f64);
    for j in 0..CURVE_POINTS {
        let t = 2.0 * PI * j as f64 / CURVE_POINTS as f64;
        let (a, b) = (rec.eval(t), truth.eval(t));
        num += (a - b).powi(2);
        den += b * b;
        max = max.max((a - b).abs());
    }
    ErrorMetrics {
        relative_l2: (num / den).sqrt(),
        max_radial_deviation: max,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Path relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Outcome of one experiment.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub config: RunConfig,
    pub truth: Vec<f64>,
    pub metrics: ErrorMetrics,
    pub initial_metrics: ErrorMetrics,
    pub placement: PlacementDiagnostic,
    pub state: InversionState,
    /// Every file written for this run except `report.json` itself.
    pub manifest: Vec<ManifestEntry>,
}

/// Writes files into one directory and records their hashes.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    manifest: Vec<ManifestEntry>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            manifest: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        std::fs::write(self.root.join(name), bytes)?;
        self.manifest.push(ManifestEntry {
            path: name.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    pub fn into_manifest(self) -> Vec<ManifestEntry> {
        self.manifest
    }
}

fn csv_bytes(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| std::io::Error::other(e.to_string()).into())
}

/// `iteration,residual,relative_residual,halvings,q0,c_1..,s_1..`.
pub fn iterations_csv(state: &InversionState) -> Result<Vec<u8>> {
    let m = state.iterate.degree();
    let mut header: Vec<String> = ["iteration", "residual", "relative_residual", "halvings", "q0"]
        .map(String::from)
        .to_vec();
    header.extend((1..=m).map(|i| format!("c_{i}")));
    header.extend((1..=m).map(|i| format!("s_{i}")));
    let rows = state.history.iter().map(|r| {
        let mut row = vec![
            r.iteration.to_string(),
            r.residual.to_string(),
            r.relative_residual.to_string(),
            r.halvings.to_string(),
        ];
        row.extend(r.coeffs.iter().map(f64::to_string));
        row
    });
    csv_bytes(&header, rows)
}

/// `theta,q_true,q_reconstructed` on the 720-point grid.
pub fn curve_csv(truth: &TrigPoly, rec: &TrigPoly) -> Result<Vec<u8>> {
    let header = ["theta", "q_true", "q_reconstructed"].map(String::from);
    let rows = (0..CURVE_POINTS).map(|j| {
        let t = 2.0 * PI * j as f64 / CURVE_POINTS as f64;
        vec![t.to_string(), truth.eval(t).to_string(), rec.eval(t).to_string()]
    });
    csv_bytes(&header, rows)
}

/// Comparison table, one row per run.
pub fn summary_csv(key: &str, rows: &[(f64, &ExperimentReport)]) -> Result<Vec<u8>> {
    let header = [
        key,
        "relative_l2",
        "max_radial_deviation",
        "iterations",
        "relative_residual",
        "stop",
    ]
    .map(String::from);
    let rows = rows.iter().map(|(v, r)| {
        vec![
            v.to_string(),
            r.metrics.relative_l2.to_string(),
            r.metrics.max_radial_deviation.to_string(),
            r.state.iterations.to_string(),
            r.state.relative_residual.to_string(),
            format!("{:?}", r.state.stop).to_lowercase(),
        ]
    });
    csv_bytes(&header, rows)
}

/// Reads the metric columns back from a curve CSV.
pub fn metrics_from_curve_csv(bytes: &[u8]) -> Result<ErrorMetrics> {
    let mut r = csv::Reader::from_reader(bytes);
    let (mut num, mut den, mut max) = (0.0_f64, 0.0_f64, 0.0_f64);
    for rec in r.records() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| crate::error::Error::InvalidInput(format!("bad curve row {rec:?}")))
        };
        let (b, a) = (parse(1)?, parse(2)?);
        num += (a - b).powi(2);
        den += b * b;
        max = max.max((a - b).abs());
    }
    Ok(ErrorMetrics {
        relative_l2: (num / den).sqrt(),
        max_radial_deviation: max,
    })
}
