//! Run configuration, read from TOML with sections `experiment`, `solver`,
//! `inversion` and `output`. Unknown keys are rejected.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::eigensystem::DEFAULT_LAMBDA_MAX;
use crate::forward::{PolarGrid, SourceSampling, TimeGrid};
use crate::inversion::LMConfig;
use crate::shape::{ObservationSet, StarShape, TrigPoly};
use crate::trace::MeasurementSchedule;

/// An angle given either in radians or as a multiple of pi such as
/// `"15pi/32"`, `"-pi/4"` or `"0.5pi"`. The written form is preserved.
#[derive(Debug, Clone, PartialEq)]
pub enum Angle {
    Radians(f64),
    PiMultiple { text: String, value: f64 },
}

impl Angle {
    pub fn parse(text: &str) -> Result<Self> {
        let value = parse_pi_expr(text)
            .ok_or_else(|| Error::Config(format!("cannot parse angle {text:?}")))?;
        Ok(Angle::PiMultiple {
            text: text.to_string(),
            value,
        })
    }

    pub fn radians(&self) -> f64 {
        match self {
            Angle::Radians(v) => *v,
            Angle::PiMultiple { value, .. } => *value,
        }
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Angle::Radians(v) => write!(f, "{v}"),
            Angle::PiMultiple { text, .. } => f.write_str(text),
        }
    }
}

/// `[sign][coef][*]pi[/den]` or a plain number.
fn parse_pi_expr(text: &str) -> Option<f64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let s = s.to_ascii_lowercase();
    if let Ok(v) = s.parse::<f64>() {
        return Some(v);
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d.parse::<f64>().ok().filter(|d| *d != 0.0)?),
        None => (s.as_str(), 1.0),
    };
    let coef = num.strip_suffix("pi")?;
    let coef = coef.strip_suffix('*').unwrap_or(coef);
    let c = match coef {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().ok()?,
    };
    Some(c * PI / den)
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Angle::Radians(v) => s.serialize_f64(*v),
            Angle::PiMultiple { text, .. } => s.serialize_str(text),
        }
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Angle::Radians(v)),
            Raw::Text(t) => Angle::parse(&t).map_err(serde::de::Error::custom),
        }
    }
}

/// `q(θ) = mean + Σ cos_i cos(iθ) + sin_i sin(iθ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeSpec {
    pub mean: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl ShapeSpec {
    pub fn to_shape(&self) -> Result<StarShape> {
        let m = self.cos.len().max(self.sin.len());
        let mut c = self.cos.clone();
        let mut s = self.sin.clone();
        c.resize(m, 0.0);
        s.resize(m, 0.0);
        StarShape::new(TrigPoly::new(2.0 * self.mean, c, s)?)
    }
}

/// Measurement times on `[t0, t_end]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    Uniform { dt: f64 },
    /// Step `dt0` growing by `growth` per sample up to `cap`.
    Graded { dt0: f64, growth: f64, cap: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub name: String,
    pub alpha: f64,
    pub t_end: f64,
    #[serde(default)]
    pub t0: f64,
    pub shape: ShapeSpec,
    pub angles: Vec<Angle>,
    pub schedule: ScheduleSpec,
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub l: usize,
    pub k: usize,
    pub tau: f64,
    #[serde(default)]
    pub sampling: SourceSampling,
    #[serde(default = "default_lambda_max")]
    pub lambda_max: f64,
}

fn default_lambda_max() -> f64 {
    DEFAULT_LAMBDA_MAX
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            l: 100,
            k: 128,
            tau: 1e-3,
            sampling: SourceSampling::default(),
            lambda_max: DEFAULT_LAMBDA_MAX,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InversionSection {
    pub beta: f64,
    pub degree: usize,
    pub epsilon: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_stagnation")]
    pub stagnation: f64,
}

fn default_max_iter() -> usize {
    50
}

fn default_stagnation() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Output directory; nothing is written when absent.
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default = "default_true")]
    pub plot: bool,
}

fn default_true() -> bool {
    true
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: None,
            plot: true,
        }
    }
}

/// Everything one experiment needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub solver: SolverSection,
    pub inversion: InversionSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            e => e,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Checks every derived object can be built.
    pub fn validate(&self) -> Result<()> {
        let e = &self.experiment;
        if !(e.alpha > 0.0 && e.alpha <= 1.0) {
            return Err(Error::Config(format!("alpha = {} outside (0, 1]", e.alpha)));
        }
        if !(e.t_end > 0.0 && e.t0 >= 0.0 && e.t0 < e.t_end) {
            return Err(Error::Config(format!(
                "need 0 <= t0 < t_end, got t0 = {}, t_end = {}",
                e.t0, e.t_end
            )));
        }
        if !(e.delta >= 0.0 && e.delta.is_finite()) {
            return Err(Error::Config(format!("delta = {}", e.delta)));
        }
        // TOML integers are signed 64-bit
        if i64::try_from(e.seed).is_err() {
            return Err(Error::Config(format!("seed = {} exceeds {}", e.seed, i64::MAX)));
        }
        let inv = &self.inversion;
        if !(inv.beta >= 0.0 && inv.epsilon >= 0.0) {
            return Err(Error::Config("beta and epsilon must be non-negative".into()));
        }
        if !(self.solver.lambda_max > 0.0) {
            return Err(Error::Config("lambda_max must be positive".into()));
        }
        self.truth()?;
        self.observations()?;
        self.schedule()?;
        self.time_grid()?;
        self.grid()?;
        Ok(())
    }

    pub fn truth(&self) -> Result<StarShape> {
        self.experiment.shape.to_shape()
    }

    pub fn angles(&self) -> Vec<f64> {
        self.experiment.angles.iter().map(Angle::radians).collect()
    }

    pub fn observations(&self) -> Result<ObservationSet> {
        ObservationSet::new(self.angles())
    }

    /// Measurement schedule on `[t0, t_end]` (built from zero so that
    /// delayed windows share the samples of the full window).
    pub fn schedule(&self) -> Result<MeasurementSchedule> {
        let e = &self.experiment;
        let full = match e.schedule {
            ScheduleSpec::Uniform { dt } => MeasurementSchedule::uniform(0.0, e.t_end, dt)?,
            ScheduleSpec::Graded { dt0, growth, cap } => {
                MeasurementSchedule::graded(0.0, e.t_end, dt0, growth, cap)?
            }
        };
        let full = full.snapped(self.solver.tau)?;
        if e.t0 > 0.0 {
            full.delayed(e.t0)
        } else {
            Ok(full)
        }
    }

    pub fn grid(&self) -> Result<PolarGrid> {
        PolarGrid::new(self.solver.l, self.solver.k)
    }

    pub fn time_grid(&self) -> Result<TimeGrid> {
        TimeGrid::to_time(self.experiment.alpha, self.solver.tau, self.experiment.t_end)
    }

    pub fn lm_config(&self) -> LMConfig {
        let i = &self.inversion;
        LMConfig {
            beta: i.beta,
            degree: i.degree,
            epsilon: i.epsilon,
            max_iter: i.max_iter,
            stagnation: i.stagnation,
        }
    }
}
