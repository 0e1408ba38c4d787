//! Finite-difference solver for `∂_t^α u - Δu = χ_D` on the unit disc with
//! homogeneous Dirichlet data and zero initial state.
//!
//! Time: L1 discretization of the Caputo derivative on a uniform grid.
//! Space: the standard five-point polar stencil on nodes `r_l = l h_r`,
//! `θ_k = k h_θ`. Because the angular stencil is circulant, a real discrete
//! Fourier transform in `θ` splits every time step into `K` independent
//! tridiagonal radial systems, which are factored once. The nonlocal history
//! sum is evaluated block-wise with matrix products.

use std::f64::consts::PI;

use log::debug;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::shape::StarShape;
use crate::specfun::gamma;
use crate::trace::{FluxTrace, MeasurementSchedule};

/// `L` radial cells, `K` angular cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct PolarGrid {
    pub l: usize,
    pub k: usize,
}

impl PolarGrid {
    pub fn new(l: usize, k: usize) -> Result<Self> {
        if l < 16 {
            return Err(Error::InvalidInput(format!("need L >= 16 radial cells, got {l}")));
        }
        if k < 4 || !k.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!("K must be even and >= 4, got {k}")));
        }
        Ok(Self { l, k })
    }

    pub fn h_r(&self) -> f64 {
        1.0 / self.l as f64
    }

    pub fn h_theta(&self) -> f64 {
        2.0 * PI / self.k as f64
    }

    /// Number of unknowns per time level (`l = 1..L-1`, all `k`).
    pub fn unknowns(&self) -> usize {
        (self.l - 1) * self.k
    }

    /// Index of the grid angle nearest to `theta`.
    pub fn nearest_angle(&self, theta: f64) -> usize {
        let k = (theta.rem_euclid(2.0 * PI) / self.h_theta()).round() as usize;
        k % self.k
    }
}

/// L1 weights `b_j = ((j+1)^{1-α} - j^{1-α}) / Γ(2-α)`, `j = 0..n-1`.
pub fn l1_weights(alpha: f64, n: usize) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain("l1_weights", format!("alpha = {alpha} outside (0, 1]")));
    }
    if alpha == 1.0 {
        let mut w = vec![0.0; n];
        if n > 0 {
            w[0] = 1.0;
        }
        return Ok(w);
    }
    let g = gamma(2.0 - alpha);
    let p = 1.0 - alpha;
    Ok((0..n)
        .map(|j| {
            let j = j as f64;
            ((j + 1.0).powf(p) - j.powf(p)) / g
        })
        .collect())
}

/// Uniform time grid `t_n = n tau`, `n = 0..=N`, with its L1 weights.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    pub alpha: f64,
    pub tau: f64,
    pub steps: usize,
    pub weights: Vec<f64>,
}

impl TimeGrid {
    pub fn new(alpha: f64, tau: f64, steps: usize) -> Result<Self> {
        if !(tau > 0.0) || steps == 0 {
            return Err(Error::InvalidInput(format!(
                "time grid needs tau > 0 and at least one step (tau = {tau}, N = {steps})"
            )));
        }
        Ok(Self {
            alpha,
            tau,
            steps,
            weights: l1_weights(alpha, steps)?,
        })
    }

    /// Grid with step `tau` reaching `t_end`.
    pub fn to_time(alpha: f64, tau: f64, t_end: f64) -> Result<Self> {
        Self::new(alpha, tau, (t_end / tau).round() as usize)
    }

    pub fn t_end(&self) -> f64 {
        self.steps as f64 * self.tau
    }

    pub fn level_of(&self, t: f64) -> usize {
        ((t / self.tau).round() as usize).min(self.steps)
    }
}

/// Source values at the interior nodes, row-major in `(l-1, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceField {
    pub grid: PolarGrid,
    pub values: Vec<f64>,
}

impl SourceField {
    pub fn zeros(grid: PolarGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.unknowns()],
        }
    }

    pub fn get(&self, l: usize, k: usize) -> f64 {
        self.values[(l - 1) * self.grid.k + k]
    }
}

/// How the characteristic function of `D` is sampled onto the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceSampling {
    /// `1` where `r_l <= q(θ_k)`, else `0`.
    Nodal,
    /// Fraction of the radial cell `[r_l - h/2, r_l + h/2]` (by area) inside `D`.
    #[default]
    CellFraction,
}

fn check_inside(q: &StarShape) -> Result<()> {
    let (lo, hi) = q.sampled_range();
    if !(lo > 0.0 && hi < 1.0) {
        return Err(Error::InvalidShape(format!("q ranges over [{lo}, {hi}]")));
    }
    Ok(())
}

/// Binary mask: `mask(l, k) = 1` iff `r_l <= q(θ_k)`.
pub fn indicator_mask(q: &StarShape, grid: &PolarGrid) -> Result<SourceField> {
    sample_source(q, grid, SourceSampling::Nodal)
}

pub fn sample_source(q: &StarShape, grid: &PolarGrid, mode: SourceSampling) -> Result<SourceField> {
    check_inside(q)?;
    let h = grid.h_r();
    let mut field = SourceField::zeros(*grid);
    for k in 0..grid.k {
        let qk = q.eval(k as f64 * grid.h_theta());
        for l in 1..grid.l {
            let r = l as f64 * h;
            let v = match mode {
                SourceSampling::Nodal => f64::from(u8::from(r <= qk)),
                SourceSampling::CellFraction => {
                    let (a, b) = (r - 0.5 * h, r + 0.5 * h);
                    let top = qk.clamp(a, b);
                    (top * top - a * a) / (b * b - a * a)
                }
            };
            field.values[(l - 1) * grid.k + k] = v;
        }
    }
    Ok(field)
}

/// Real Fourier basis in `θ`: mode index `i <= K/2` is `cos(i θ)`,
/// index `K/2 + j` is `sin(j θ)`.
struct AngularBasis {
    k: usize,
    /// `basis[(i, k)]`: value of mode `i` at angle `θ_k`.
    basis: DMatrix<f64>,
    /// Analysis matrix: `coeffs = analysis * samples`.
    analysis: DMatrix<f64>,
    /// Eigenvalue of the periodic second difference `-(δ²_θ)/h_θ²` per mode.
    symbol: Vec<f64>,
}

impl AngularBasis {
    fn new(k: usize) -> Self {
        let half = k / 2;
        let ht = 2.0 * PI / k as f64;
        let freq = |i: usize| if i <= half { i } else { i - half };
        let basis = DMatrix::from_fn(k, k, |i, j| {
            let a = (freq(i) * j) as f64 * ht;
            if i <= half {
                a.cos()
            } else {
                a.sin()
            }
        });
        let analysis = DMatrix::from_fn(k, k, |i, j| {
            let s = if i == 0 || i == half { 1.0 } else { 2.0 } / k as f64;
            s * basis[(i, j)]
        });
        let symbol = (0..k)
            .map(|i| (2.0 - 2.0 * (freq(i) as f64 * ht).cos()) / (ht * ht))
            .collect();
        Self {
            k,
            basis,
            analysis,
            symbol,
        }
    }
}

/// Factored tridiagonal radial operator per angular mode (Thomas algorithm).
struct RadialSolver {
    n: usize,
    lower: Vec<f64>,
    /// Modified super-diagonal per mode.
    upper_mod: Vec<f64>,
    /// Inverse pivots per mode.
    inv_pivot: Vec<f64>,
}

impl RadialSolver {
    fn new(grid: &PolarGrid, angular: &AngularBasis, shift: f64) -> Self {
        let n = grid.l - 1;
        let h = grid.h_r();
        let h2 = h * h;
        let lower: Vec<f64> = (1..=n).map(|l| -1.0 / h2 + 0.5 / (l as f64 * h2)).collect();
        let upper: Vec<f64> = (1..=n).map(|l| -1.0 / h2 - 0.5 / (l as f64 * h2)).collect();
        let mut upper_mod = vec![0.0; n * angular.k];
        let mut inv_pivot = vec![0.0; n * angular.k];
        for (mode, &mu) in angular.symbol.iter().enumerate() {
            let off = mode * n;
            let mut prev_c = 0.0;
            for i in 0..n {
                let l = (i + 1) as f64;
                let mut diag = shift + 2.0 / h2 + mu / (l * l * h2);
                if i == 0 && mode == 0 {
                    // origin closure: the l = 0 value is the ring mean at l = 1
                    diag += lower[0];
                }
                let pivot = if i == 0 { diag } else { diag - lower[i] * prev_c };
                inv_pivot[off + i] = 1.0 / pivot;
                prev_c = upper[i] / pivot;
                upper_mod[off + i] = prev_c;
            }
        }
        Self {
            n,
            lower,
            upper_mod,
            inv_pivot,
        }
    }

    /// Solves in place for all modes; `x` is mode-major.
    fn solve(&self, x: &mut [f64]) {
        let n = self.n;
        for (mode, seg) in x.chunks_exact_mut(n).enumerate() {
            let off = mode * n;
            seg[0] *= self.inv_pivot[off];
            for i in 1..n {
                seg[i] = (seg[i] - self.lower[i] * seg[i - 1]) * self.inv_pivot[off + i];
            }
            for i in (0..n - 1).rev() {
                seg[i] -= self.upper_mod[off + i] * seg[i + 1];
            }
        }
    }
}

/// Which time levels a solve keeps.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum SaveLevels {
    #[default]
    All,
    Only(Vec<usize>),
}

/// Solution levels in angular-Fourier form.
pub struct FieldHistory {
    pub grid: PolarGrid,
    pub time: TimeGrid,
    levels: Vec<usize>,
    /// Column `c` holds level `levels[c]`, mode-major radial profiles.
    coeffs: DMatrix<f64>,
    angular_basis: DMatrix<f64>,
}

impl std::fmt::Debug for FieldHistory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FieldHistory")
            .field("grid", &self.grid)
            .field("alpha", &self.time.alpha)
            .field("levels", &self.levels.len())
            .finish()
    }
}

impl FieldHistory {
    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    fn column_of(&self, level: usize) -> Result<usize> {
        self.levels
            .binary_search(&level)
            .map_err(|_| Error::InvalidInput(format!("time level {level} was not stored")))
    }

    /// `u(r_l, θ_k)` for `l = 1..L-1` (row `l-1`) and all `k`.
    pub fn field(&self, level: usize) -> Result<DMatrix<f64>> {
        let c = self.column_of(level)?;
        let n = self.grid.l - 1;
        let kk = self.grid.k;
        // coefficient layout: mode-major, so reshape to (n x K) then map modes to angles
        let col = self.coeffs.column(c);
        let modal = DMatrix::from_column_slice(n, kk, col.as_slice());
        Ok(modal * &self.angular_basis)
    }

    /// `u(r_l, θ_k)` at one node.
    pub fn value(&self, level: usize, l: usize, k: usize) -> Result<f64> {
        let c = self.column_of(level)?;
        let n = self.grid.l - 1;
        if l == self.grid.l {
            return Ok(0.0);
        }
        let col = self.coeffs.column(c);
        Ok((0..self.grid.k)
            .map(|mode| col[mode * n + l - 1] * self.angular_basis[(mode, k)])
            .sum())
    }

    /// One-sided second-order `∂u/∂r` at `r = 1`, angle index `k`.
    pub fn boundary_flux(&self, level: usize, k: usize) -> Result<f64> {
        let l = self.grid.l;
        let u1 = self.value(level, l - 1, k)?;
        let u2 = self.value(level, l - 2, k)?;
        Ok((-4.0 * u1 + u2) / (2.0 * self.grid.h_r()))
    }
}

/// Boundary flux at every time level as a real trigonometric interpolant in
/// the angle (exact at the grid angles).
#[derive(Debug, Clone, PartialEq)]
pub struct FluxTable {
    pub grid: PolarGrid,
    pub time: TimeGrid,
    /// `modal[(n, i)]`: coefficient of angular mode `i` at level `n`.
    modal: DMatrix<f64>,
}

impl FluxTable {
    /// Values of the angular modes at `theta`, in the solver's mode order.
    fn mode_values(&self, theta: f64) -> Vec<f64> {
        let k = self.grid.k;
        let half = k / 2;
        (0..k)
            .map(|i| {
                if i <= half {
                    (i as f64 * theta).cos()
                } else {
                    ((i - half) as f64 * theta).sin()
                }
            })
            .collect()
    }

    /// Flux at level `n` and angle `theta`.
    pub fn value(&self, n: usize, theta: f64) -> f64 {
        let phi = self.mode_values(theta);
        self.modal.row(n).iter().zip(&phi).map(|(c, p)| c * p).sum()
    }

    /// Samples the table at `angles` and at the time levels nearest the
    /// schedule's samples.
    pub fn extract(&self, angles: &[f64], schedule: &MeasurementSchedule) -> Result<FluxTrace> {
        let snapped = schedule.snapped(self.time.tau)?;
        if snapped.t_end() > self.time.t_end() + 0.5 * self.time.tau {
            return Err(Error::InvalidInput(format!(
                "schedule ends at {} beyond the solve horizon {}",
                snapped.t_end(),
                self.time.t_end()
            )));
        }
        let values = angles
            .iter()
            .map(|&theta| {
                let phi = self.mode_values(theta);
                snapped
                    .times()
                    .iter()
                    .map(|&t| {
                        let n = self.time.level_of(t);
                        self.modal.row(n).iter().zip(&phi).map(|(c, p)| c * p).sum()
                    })
                    .collect()
            })
            .collect();
        FluxTrace::new(snapped, angles.to_vec(), values)
    }
}

/// Solves with `q`'s source and returns the boundary flux table.
pub fn boundary_flux_table(
    q: &StarShape,
    grid: &PolarGrid,
    tg: &TimeGrid,
    sampling: SourceSampling,
) -> Result<FluxTable> {
    let src = sample_source(q, grid, sampling)?;
    Ok(flux_table_source(&src, tg))
}

/// Boundary flux table for an arbitrary nodal source.
pub fn flux_table_source(src: &SourceField, tg: &TimeGrid) -> FluxTable {
    let grid = src.grid;
    let n = grid.l - 1;
    let h = grid.h_r();
    let mut modal = DMatrix::zeros(tg.steps + 1, grid.k);
    let angular = march(src, tg, |lev, c| {
        for mode in 0..grid.k {
            modal[(lev, mode)] = (-4.0 * c[mode * n + n - 1] + c[mode * n + n - 2]) / (2.0 * h);
        }
    });
    // the angular synthesis basis is the plain cos/sin family used by `mode_values`
    debug_assert_eq!(angular.k, grid.k);
    FluxTable {
        grid,
        time: tg.clone(),
        modal,
    }
}

/// Solves with the characteristic function of `q` as source, storing every level.
pub fn solve_fd(q: &StarShape, grid: &PolarGrid, tg: &TimeGrid) -> Result<FieldHistory> {
    let src = sample_source(q, grid, SourceSampling::default())?;
    solve_fd_source(&src, tg, SaveLevels::All)
}

/// Solves for an arbitrary nodal source.
pub fn solve_fd_source(src: &SourceField, tg: &TimeGrid, save: SaveLevels) -> Result<FieldHistory> {
    let grid = src.grid;
    let saved: Vec<usize> = match &save {
        SaveLevels::All => (0..=tg.steps).collect(),
        SaveLevels::Only(v) => {
            let mut v: Vec<usize> = v.iter().copied().filter(|&n| n <= tg.steps).collect();
            v.sort_unstable();
            v.dedup();
            v
        }
    };
    let mut out = DMatrix::zeros(grid.unknowns(), saved.len());
    let mut next = usize::from(saved.first() == Some(&0));
    let angular = march(src, tg, |n, state| {
        if next < saved.len() && saved[next] == n {
            out.column_mut(next).copy_from_slice(state);
            next += 1;
        }
    });
    Ok(FieldHistory {
        grid,
        time: tg.clone(),
        levels: saved,
        coeffs: out,
        angular_basis: angular.basis,
    })
}

/// Marches levels `1..=steps`, handing each modal state to `on_level`.
fn march(src: &SourceField, tg: &TimeGrid, mut on_level: impl FnMut(usize, &[f64])) -> AngularBasis {
    let grid = src.grid;
    let n_rad = grid.l - 1;
    let p = grid.unknowns();
    let steps = tg.steps;
    let angular = AngularBasis::new(grid.k);

    // source in modal form: rows l, columns modes -> mode-major vector
    let phys = DMatrix::from_row_slice(n_rad, grid.k, &src.values);
    let modal = &phys * angular.analysis.transpose();
    let f: Vec<f64> = modal.as_slice().to_vec();

    let scale = tg.tau.powf(-tg.alpha);
    let solver = RadialSolver::new(&grid, &angular, scale * tg.weights[0]);
    // a_j = b_j - b_{j-1}
    let a: Vec<f64> = (1..steps).map(|j| tg.weights[j] - tg.weights[j - 1]).collect();
    let memory = a.iter().rposition(|&x| x != 0.0).map_or(0, |i| i + 1);

    let mut rhs = vec![0.0; p];
    if memory == 0 {
        // no history (implicit Euler): march with a single state vector
        let mut state = vec![0.0; p];
        for n in 1..=steps {
            for i in 0..p {
                rhs[i] = f[i] + scale * tg.weights[0] * state[i];
            }
            solver.solve(&mut rhs);
            state.copy_from_slice(&rhs);
            on_level(n, &state);
        }
        return angular;
    }

    let mut x = DMatrix::<f64>::zeros(p, steps + 1);
    let block = 64usize;
    let mut n0 = 1;
    while n0 <= steps {
        let n1 = (n0 + block).min(steps + 1);
        let bw = n1 - n0;
        // history from levels 1..n0-1 for every n in [n0, n1)
        let mut hist = DMatrix::<f64>::zeros(p, bw);
        let lo = n0.saturating_sub(memory).max(1);
        if n0 > lo {
            let w = DMatrix::from_fn(n0 - lo, bw, |r, c| {
                let j = n0 + c - (lo + r);
                if j <= memory { a[j - 1] } else { 0.0 }
            });
            hist.gemm(1.0, &x.columns(lo, n0 - lo), &w, 0.0);
        }
        for c in 0..bw {
            let n = n0 + c;
            let hc = hist.column(c);
            rhs.copy_from_slice(hc.as_slice());
            for i in n0.max(n.saturating_sub(memory))..n {
                let aj = a[n - i - 1];
                let xi = x.column(i);
                for (r, v) in rhs.iter_mut().zip(xi.as_slice()) {
                    *r += aj * v;
                }
            }
            for (r, fi) in rhs.iter_mut().zip(&f) {
                *r = fi - scale * *r;
            }
            solver.solve(&mut rhs);
            x.column_mut(n).copy_from_slice(&rhs);
            on_level(n, &rhs);
        }
        n0 = n1;
    }
    debug!("fd solve: {} unknowns, {} steps", p, steps);
    angular
}

/// Boundary flux at the grid angles nearest `angles`, at the time levels
/// nearest the schedule's samples.
pub fn extract_flux(
    hist: &FieldHistory,
    angles: &[f64],
    schedule: &MeasurementSchedule,
) -> Result<FluxTrace> {
    let snapped = schedule.snapped(hist.time.tau)?;
    let mut values = Vec::with_capacity(angles.len());
    let mut used_angles = Vec::with_capacity(angles.len());
    for &theta in angles {
        let k = hist.grid.nearest_angle(theta);
        used_angles.push(k as f64 * hist.grid.h_theta());
        let row = snapped
            .times()
            .iter()
            .map(|&t| hist.boundary_flux(hist.time.level_of(t), k))
            .collect::<Result<Vec<_>>>()?;
        values.push(row);
    }
    FluxTrace::new(snapped, used_angles, values)
}

/// Solves and samples the flux in one go, storing only the needed levels.
pub fn simulate_flux(
    q: &StarShape,
    grid: &PolarGrid,
    tg: &TimeGrid,
    angles: &[f64],
    schedule: &MeasurementSchedule,
    sampling: SourceSampling,
) -> Result<FluxTrace> {
    let src = sample_source(q, grid, sampling)?;
    let snapped = schedule.snapped(tg.tau)?;
    let levels = snapped.times().iter().map(|&t| tg.level_of(t)).collect();
    let hist = solve_fd_source(&src, tg, SaveLevels::Only(levels))?;
    extract_flux(&hist, angles, &snapped)
}
