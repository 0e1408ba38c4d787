//! Measurement schedules and sampled boundary-flux traces.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Increasing sample times `t_1 < ... < t_S` inside `[t0, t_end]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSchedule {
    times: Vec<f64>,
    t0: f64,
    t_end: f64,
}

impl MeasurementSchedule {
    /// Sorts the samples and merges those closer than `1e-12`.
    pub fn new(mut times: Vec<f64>, t0: f64, t_end: f64) -> Result<Self> {
        if !(t0 >= 0.0 && t_end > t0) {
            return Err(Error::InvalidInput(format!(
                "schedule window [{t0}, {t_end}] is empty"
            )));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidInput("non-finite sample time".into()));
        }
        times.sort_by(f64::total_cmp);
        times.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
        if times.is_empty() {
            return Err(Error::InvalidInput("schedule has no samples".into()));
        }
        let eps = 1e-12 * t_end;
        if times[0] < t0 - eps || times[times.len() - 1] > t_end + eps {
            return Err(Error::InvalidInput(format!(
                "samples [{}, {}] leave the window [{t0}, {t_end}]",
                times[0],
                times[times.len() - 1]
            )));
        }
        Ok(Self { times, t0, t_end })
    }

    /// `t0 + dt, t0 + 2 dt, ...` up to `t_end`.
    pub fn uniform(t0: f64, t_end: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidInput(format!("dt = {dt}")));
        }
        let n = ((t_end - t0) / dt + 1e-9).floor() as usize;
        Self::new((1..=n).map(|i| t0 + i as f64 * dt).collect(), t0, t_end)
    }

    /// Steps start at `dt0`, grow by `growth` each sample, and are capped at
    /// `cap`; the last sample is `t_end`.
    pub fn graded(t0: f64, t_end: f64, dt0: f64, growth: f64, cap: f64) -> Result<Self> {
        if !(dt0 > 0.0 && growth >= 1.0 && cap >= dt0) {
            return Err(Error::InvalidInput(format!(
                "graded schedule needs dt0 > 0, growth >= 1, cap >= dt0 (got {dt0}, {growth}, {cap})"
            )));
        }
        let mut times = Vec::new();
        let (mut t, mut dt) = (t0, dt0);
        while t + dt < t_end - 1e-12 {
            t += dt;
            times.push(t);
            dt = (dt * growth).min(cap);
        }
        times.push(t_end);
        Self::new(times, t0, t_end)
    }

    /// Moves every sample to the nearest multiple of `tau` (dropping
    /// duplicates and the time origin).
    pub fn snapped(&self, tau: f64) -> Result<Self> {
        let times = self
            .times
            .iter()
            .map(|t| (t / tau).round() * tau)
            .filter(|&t| t > 0.0)
            .collect();
        Self::new(times, self.t0, self.t_end)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    /// Trapezoid weights for `∫_{t0}^{t_S} f dt` from the samples, with `f`
    /// taken as zero at `t0 = 0` (the traces start from zero).
    pub fn quadrature_weights(&self) -> Vec<f64> {
        let t = &self.times;
        let s = t.len();
        let mut w = vec![0.0; s];
        if s == 1 {
            w[0] = t[0] - self.t0;
            return w;
        }
        for i in 0..s {
            let left = if i == 0 { self.t0 } else { t[i - 1] };
            let right = if i + 1 == s { t[i] } else { t[i + 1] };
            w[i] = 0.5 * (right - left);
        }
        if self.t0 > 0.0 && t[0] > self.t0 {
            // no sample at t0 itself: give the first sample the full left interval
            w[0] += 0.5 * (t[0] - self.t0);
        }
        w
    }

    /// The samples with `t >= t0_new` as a delayed-window schedule.
    pub fn delayed(&self, t0_new: f64) -> Result<Self> {
        let times = self
            .times
            .iter()
            .copied()
            .filter(|&t| t >= t0_new - 1e-12)
            .collect();
        Self::new(times, t0_new, self.t_end)
    }
}

/// Flux values `values[l][s] = g_l(t_s)`, one row per observation angle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxTrace {
    pub schedule: MeasurementSchedule,
    pub angles: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    /// Relative noise level applied to the values (0 for clean data).
    pub delta: f64,
    pub seed: Option<u64>,
}

impl FluxTrace {
    pub fn new(schedule: MeasurementSchedule, angles: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != angles.len() {
            return Err(Error::InvalidInput(format!(
                "{} value rows for {} angles",
                values.len(),
                angles.len()
            )));
        }
        if values.iter().any(|r| r.len() != schedule.len()) {
            return Err(Error::InvalidInput(
                "value row length differs from schedule length".into(),
            ));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite flux value".into()));
        }
        Ok(Self {
            schedule,
            angles,
            values,
            delta: 0.0,
            seed: None,
        })
    }

    /// Discrete `L^2(t0, T)` norm summed over observation points.
    pub fn l2_norm(&self) -> f64 {
        let w = self.schedule.quadrature_weights();
        self.values
            .iter()
            .flat_map(|row| row.iter().zip(&w).map(|(v, wi)| wi * v * v))
            .sum::<f64>()
            .sqrt()
    }

    /// `|self - other| / |other|` in the discrete `L^2` norm.
    pub fn relative_l2_distance(&self, other: &FluxTrace) -> f64 {
        let w = self.schedule.quadrature_weights();
        let mut num = 0.0;
        for (a, b) in self.values.iter().zip(&other.values) {
            for ((x, y), wi) in a.iter().zip(b).zip(&w) {
                num += wi * (x - y) * (x - y);
            }
        }
        num.sqrt() / other.l2_norm()
    }

    /// Restriction to samples with `t >= t0`.
    pub fn delayed(&self, t0: f64) -> Result<Self> {
        let schedule = self.schedule.delayed(t0)?;
        let skip = self.schedule.len() - schedule.len();
        let values = self.values.iter().map(|r| r[skip..].to_vec()).collect();
        Ok(Self {
            schedule,
            angles: self.angles.clone(),
            values,
            delta: self.delta,
            seed: self.seed,
        })
    }

    /// Subset of observation rows.
    pub fn select(&self, rows: &[usize]) -> Self {
        Self {
            schedule: self.schedule.clone(),
            angles: rows.iter().map(|&r| self.angles[r]).collect(),
            values: rows.iter().map(|&r| self.values[r].clone()).collect(),
            delta: self.delta,
            seed: self.seed,
        }
    }

    /// CSV with header `t,g_1,...,g_m`; floats in shortest round-trip form.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend((1..=self.angles.len()).map(|i| format!("g_{i}")));
        w.write_record(&header)?;
        for (s, t) in self.schedule.times().iter().enumerate() {
            let mut rec = vec![t.to_string()];
            rec.extend(self.values.iter().map(|row| row[s].to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Parses the format written by [`FluxTrace::write_csv`].
    pub fn read_csv<R: Read>(input: R, angles: Vec<f64>, t0: f64, t_end: f64) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let cols = r.headers()?.len();
        if cols != angles.len() + 1 {
            return Err(Error::InvalidInput(format!(
                "flux CSV has {} value columns for {} angles",
                cols.saturating_sub(1),
                angles.len()
            )));
        }
        let mut times = Vec::new();
        let mut values = vec![Vec::new(); angles.len()];
        for rec in r.records() {
            let rec = rec?;
            let fields: Vec<f64> = rec
                .iter()
                .map(str::parse::<f64>)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::InvalidInput(format!("bad number in flux CSV: {e}")))?;
            times.push(fields[0]);
            for (row, v) in values.iter_mut().zip(&fields[1..]) {
                row.push(*v);
            }
        }
        let n = times.len();
        let schedule = MeasurementSchedule::new(times, t0, t_end)?;
        if schedule.len() != n {
            return Err(Error::InvalidInput("flux CSV times not strictly increasing".into()));
        }
        Self::new(schedule, angles, values)
    }
}
