//! Deterministic parameter sweeps.
//!
//! Points are split into contiguous blocks, one per worker, and results are
//! written back by point index, so the output never depends on the worker
//! count or on completion order.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{
    chaos_onset_time, intensity_spectrum, lyapunov_from_log, spectral_flatness, HorizonEnd, OnsetDetector, Taper,
};
use crate::dynamics::{integrate_with_tangent, IntegratorConfig};
use crate::error::{Error, Result};
use crate::model::{classify_phase, Control, PhaseLabel, ReducedParams, SystemState, TangentVector, DEFAULT_EP_TOL};

/// Map `f` over `items` on `workers` threads using static block partitioning.
/// `workers == 0` uses the available parallelism.
pub fn parallel_map<T, R, F>(items: &[T], workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync,
{
    let n = items.len();
    let workers = match workers {
        0 => std::thread::available_parallelism().map(|v| v.get()).unwrap_or(1),
        w => w,
    }
    .min(n.max(1));
    if workers <= 1 {
        return items.iter().enumerate().map(|(i, t)| f(i, t)).collect();
    }
    let block = n.div_ceil(workers);
    let f = &f;
    std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(block)
            .enumerate()
            .map(|(b, chunk)| {
                scope.spawn(move || {
                    chunk.iter().enumerate().map(|(i, t)| f(b * block + i, t)).collect::<Vec<R>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub control: Control,
    pub values: Vec<f64>,
}

/// Which analyses run at every grid point. Windows are in `1/gamma`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AnalysisRecipe {
    pub lyapunov_window: Option<(f64, f64)>,
    /// Spectral flatness of `I1` over `window`, restricted to `band`.
    pub flatness: Option<FlatnessRecipe>,
    pub onset: Option<OnsetDetector>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlatnessRecipe {
    pub window: (f64, f64),
    pub band: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub base: ReducedParams,
    /// One or two axes; the first axis varies slowest.
    pub axes: Vec<Axis>,
    pub recipe: AnalysisRecipe,
    pub integrator: IntegratorConfig,
    pub initial_state: SystemState,
    /// Not part of the result; any value gives identical output.
    #[serde(skip)]
    pub workers: usize,
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(Error::InvalidConfig(format!("a sweep needs one or two axes, got {}", self.axes.len())));
        }
        for axis in &self.axes {
            if axis.values.is_empty() {
                return Err(Error::InvalidConfig(format!("axis {} has no values", axis.control.name())));
            }
            if axis.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidConfig(format!("axis {} has non-finite values", axis.control.name())));
            }
        }
        if self.axes.len() == 2 && self.axes[0].control == self.axes[1].control {
            return Err(Error::InvalidConfig("both axes sweep the same parameter".into()));
        }
        self.integrator.validate()?;
        self.base.validate()
    }

    /// Grid coordinates in row-major order.
    pub fn points(&self) -> Vec<Vec<f64>> {
        match self.axes.as_slice() {
            [a] => a.values.iter().map(|v| vec![*v]).collect(),
            [a, b] => a.values.iter().flat_map(|u| b.values.iter().map(move |v| vec![*u, *v])).collect(),
            _ => Vec::new(),
        }
    }

    pub fn params_at(&self, coords: &[f64]) -> ReducedParams {
        self.axes.iter().zip(coords).fold(self.base, |r, (axis, v)| r.with(axis.control, *v))
    }

    /// SHA-256 over the canonical JSON form of the grid.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("grid serializes");
        hex_digest(&json)
    }
}

pub(crate) fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointOutcome {
    pub coords: Vec<f64>,
    pub phase: PhaseLabel,
    pub lambda_benettin: Option<f64>,
    pub lambda_slope_d_i1: Option<f64>,
    pub fit_residual: Option<f64>,
    pub flatness: Option<f64>,
    pub tau: Option<f64>,
    pub onset_horizon: Option<f64>,
    pub steps: u64,
    pub rejected_steps: u64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub engine_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axes: Vec<Axis>,
    pub outcomes: Vec<PointOutcome>,
    pub provenance: Provenance,
    /// Wall-clock seconds per point. Kept out of the serialized payload since
    /// it differs from run to run.
    #[serde(skip)]
    pub wall_times: Vec<f64>,
}

impl SweepResult {
    pub fn failures(&self) -> impl Iterator<Item = &PointOutcome> {
        self.outcomes.iter().filter(|o| o.error.is_some())
    }

    /// Canonical JSON bytes of the deterministic payload.
    pub fn to_json(&self) -> Vec<u8> {
        serde_json::to_vec_pretty(self).expect("sweep result serializes")
    }
}

fn analyse_point(grid: &SweepGrid, coords: &[f64]) -> PointOutcome {
    let r = grid.params_at(coords);
    let mut out = PointOutcome {
        coords: coords.to_vec(),
        phase: classify_phase(r.j, 1.0, r.kappa, DEFAULT_EP_TOL),
        lambda_benettin: None,
        lambda_slope_d_i1: None,
        fit_residual: None,
        flatness: None,
        tau: None,
        onset_horizon: None,
        steps: 0,
        rejected_steps: 0,
        error: None,
    };
    let recipe = &grid.recipe;
    let mut errors = Vec::new();

    let t_needed = [recipe.lyapunov_window.map(|w| w.1), recipe.flatness.map(|f| f.window.1)]
        .into_iter()
        .flatten()
        .fold(0.0f64, f64::max);
    if t_needed > 0.0 {
        let cfg = IntegratorConfig { t_end: t_needed, ..grid.integrator };
        match integrate_with_tangent(&grid.initial_state, &TangentVector::uniform(), &r, &cfg) {
            Ok((traj, log)) => {
                out.steps += traj.meta.accepted;
                out.rejected_steps += traj.meta.rejected;
                if let Some(w) = recipe.lyapunov_window {
                    match lyapunov_from_log(&traj, &log, cfg.renorm_interval, w) {
                        Ok(l) => {
                            out.lambda_benettin = Some(l.lambda_benettin);
                            out.lambda_slope_d_i1 = Some(l.lambda_slope_d_i1);
                            out.fit_residual = Some(l.fit_residual);
                        }
                        Err(e) => errors.push(format!("lyapunov: {e}")),
                    }
                }
                if let Some(fl) = recipe.flatness {
                    match intensity_spectrum(&traj, fl.window, Taper::Hann).and_then(|s| spectral_flatness(&s, fl.band))
                    {
                        Ok(v) => out.flatness = Some(v),
                        Err(e) => errors.push(format!("flatness: {e}")),
                    }
                }
            }
            Err(e) => errors.push(format!("integration: {e}")),
        }
    }
    if let Some(det) = &recipe.onset {
        match chaos_onset_time(&grid.initial_state, &r, &grid.integrator, det) {
            Ok(o) => {
                out.tau = o.tau;
                out.onset_horizon = Some(o.horizon);
            }
            Err(e) => errors.push(format!("onset: {e}")),
        }
    }
    if !errors.is_empty() {
        out.error = Some(errors.join("; "));
    }
    out
}

/// Simulate and analyse every grid point. Point failures are recorded in the
/// outcome and never abort the sweep.
pub fn run_sweep(grid: &SweepGrid) -> Result<SweepResult> {
    grid.validate()?;
    let points = grid.points();
    let results = parallel_map(&points, grid.workers, |_, coords| {
        let start = Instant::now();
        let o = analyse_point(grid, coords);
        (o, start.elapsed().as_secs_f64())
    });
    let (outcomes, wall_times) = results.into_iter().unzip();
    Ok(SweepResult {
        axes: grid.axes.clone(),
        outcomes,
        provenance: Provenance {
            config_hash: grid.config_hash(),
            engine_version: env!("CARGO_PKG_VERSION").to_string(),
        },
        wall_times,
    })
}

/// Closed-form phase labels; `labels[i][k]` belongs to `kappa_values[i]`, `j_values[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub j_values: Vec<f64>,
    pub kappa_values: Vec<f64>,
    pub labels: Vec<Vec<PhaseLabel>>,
}

impl PhaseGrid {
    /// Midpoints between neighbouring J values where the label changes, per kappa row.
    pub fn transitions(&self) -> Vec<Vec<f64>> {
        self.labels
            .iter()
            .map(|row| {
                row.windows(2)
                    .zip(self.j_values.windows(2))
                    .filter(|(l, _)| l[0] != l[1])
                    .map(|(_, j)| 0.5 * (j[0] + j[1]))
                    .collect()
            })
            .collect()
    }
}

pub fn phase_diagram_scan(j_values: &[f64], kappa_values: &[f64], gamma: f64, tol: f64) -> Result<PhaseGrid> {
    if j_values.is_empty() || kappa_values.is_empty() {
        return Err(Error::InvalidInput("phase diagram needs non-empty J and kappa lists".into()));
    }
    if !(gamma > 0.0) {
        return Err(Error::InvalidInput("gamma must be positive".into()));
    }
    let labels = kappa_values
        .iter()
        .map(|&k| j_values.iter().map(|&j| classify_phase(j, gamma, k, tol)).collect())
        .collect();
    Ok(PhaseGrid { j_values: j_values.to_vec(), kappa_values: kappa_values.to_vec(), labels })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnsetPoint {
    pub omega_d_amp: f64,
    pub tau: Option<f64>,
    /// Horizon of the last attempt, in `1/gamma`.
    pub horizon: f64,
    pub horizon_end: Option<HorizonEnd>,
    pub error: Option<String>,
}

/// Onset time for each drive amplitude. When no onset is found the horizon
/// is doubled, up to `horizon_cap`.
pub fn onset_curve(
    omega_d_values: &[f64],
    r_base: &ReducedParams,
    cfg: &IntegratorConfig,
    detector: &OnsetDetector,
    horizon_cap: f64,
    workers: usize,
) -> Result<Vec<OnsetPoint>> {
    let phase = classify_phase(r_base.j, 1.0, r_base.kappa, DEFAULT_EP_TOL);
    if phase != PhaseLabel::PtBroken {
        return Err(Error::Precondition(format!(
            "onset curves need PT-broken base parameters, got {phase} (J = {}, kappa = {})",
            r_base.j, r_base.kappa
        )));
    }
    detector.validate()?;
    cfg.validate()?;
    let cap = horizon_cap.max(cfg.t_end);
    Ok(parallel_map(omega_d_values, workers, |_, &amp| {
        let r = r_base.with(Control::OmegaDAmp, amp);
        let mut t_end = cfg.t_end;
        loop {
            let run_cfg = IntegratorConfig { t_end, ..*cfg };
            match chaos_onset_time(&SystemState::ZERO, &r, &run_cfg, detector) {
                Ok(o) if o.tau.is_some() || t_end >= cap || o.horizon_end != HorizonEnd::Complete => {
                    return OnsetPoint {
                        omega_d_amp: amp,
                        tau: o.tau,
                        horizon: o.horizon,
                        horizon_end: Some(o.horizon_end),
                        error: None,
                    };
                }
                Ok(_) => t_end = (2.0 * t_end).min(cap),
                Err(e) => {
                    return OnsetPoint {
                        omega_d_amp: amp,
                        tau: None,
                        horizon: t_end,
                        horizon_end: None,
                        error: Some(e.to_string()),
                    }
                }
            }
        }
    }))
}
