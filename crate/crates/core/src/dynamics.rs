//! Sampled trajectories of the equations of motion and of their tangent flow.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{Rhs, Segment, StepStats, Stepper, Tolerances};
use crate::model::{jacobian_apply, rhs, ReducedParams, SystemState, TangentVector, DIM};

/// Integration settings. All times are in units of `1/gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub sample_dt: f64,
    pub t_end: f64,
    pub renorm_interval: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-9,
            abs_tol: 1e-9,
            max_step: 1.0,
            sample_dt: PI / (4.0 * 23.0),
            t_end: 20.0 * PI,
            renorm_interval: 0.1,
        }
    }
}

impl IntegratorConfig {
    /// Largest sampling interval that still resolves the fastest linear
    /// frequency of `r` with four samples per half period.
    pub fn default_sample_dt(r: &ReducedParams) -> f64 {
        let fastest = r.omega_m.max(r.delta_c.abs()).max(r.j);
        PI / (4.0 * fastest)
    }

    /// Defaults with the sampling interval matched to `r`.
    pub fn for_params(r: &ReducedParams, t_end: f64) -> Self {
        IntegratorConfig { sample_dt: Self::default_sample_dt(r), t_end, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("max_step", self.max_step),
            ("sample_dt", self.sample_dt),
            ("t_end", self.t_end),
            ("renorm_interval", self.renorm_interval),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || v.is_nan() {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if !self.t_end.is_finite() || !self.sample_dt.is_finite() {
            return Err(Error::InvalidConfig("t_end and sample_dt must be finite".into()));
        }
        Ok(())
    }

    fn tolerances(&self) -> Tolerances {
        Tolerances { rel: self.rel_tol, abs: self.abs_tol, max_step: self.max_step }
    }

    /// Sample instants `k * sample_dt` for `k = 0..=floor(t_end / sample_dt)`.
    pub fn sample_times(&self) -> Vec<f64> {
        let n = (self.t_end / self.sample_dt * (1.0 + 1e-12)).floor() as usize;
        (0..=n).map(|k| k as f64 * self.sample_dt).collect()
    }
}

/// Uniformly sampled solution plus derived intensities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SystemState>,
    pub i1: Vec<f64>,
    pub i2: Vec<f64>,
    pub params: ReducedParams,
    pub meta: StepStats,
}

impl Trajectory {
    fn with_capacity(n: usize, params: ReducedParams) -> Self {
        Trajectory {
            times: Vec::with_capacity(n),
            states: Vec::with_capacity(n),
            i1: Vec::with_capacity(n),
            i2: Vec::with_capacity(n),
            params,
            meta: StepStats::default(),
        }
    }

    fn push(&mut self, t: f64, s: SystemState) {
        self.times.push(t);
        self.i1.push(s.i1());
        self.i2.push(s.i2());
        self.states.push(s);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Sample spacing, assuming uniform sampling.
    pub fn dt(&self) -> f64 {
        if self.times.len() < 2 {
            return 0.0;
        }
        (self.times[self.times.len() - 1] - self.times[0]) / (self.times.len() - 1) as f64
    }

    /// Extract one state component by index (0 = x, ..., 5 = Im a2).
    pub fn component(&self, idx: usize) -> Vec<f64> {
        self.states.iter().map(|s| s.to_array()[idx]).collect()
    }

    /// Indices of samples with `t_a <= t <= t_b`.
    pub fn window_indices(&self, t_a: f64, t_b: f64) -> std::ops::Range<usize> {
        let lo = self.times.partition_point(|&t| t < t_a);
        let hi = self.times.partition_point(|&t| t <= t_b);
        lo..hi.max(lo)
    }
}

/// Renormalization history of the tangent flow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentLog {
    /// End of each renormalization interval.
    pub renorm_times: Vec<f64>,
    /// `ln(|delta(t_k)| / |delta(t_{k-1})|)` for each interval.
    pub increments: Vec<f64>,
    /// `ln |delta I1|` at every trajectory sample, with the renormalizations
    /// undone so the series reflects the actual growth of the perturbation.
    /// `-inf` where the linearized intensity perturbation vanishes exactly.
    pub ln_abs_d_i1: Vec<f64>,
    /// Norm of the initial tangent.
    pub initial_norm: f64,
}

impl TangentLog {
    /// Cumulative log growth at the end of every interval.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.increments
            .iter()
            .map(|v| {
                acc += v;
                acc
            })
            .collect()
    }
}

/// Integrate the equations of motion from `s0`, sampling at `cfg.sample_times()`.
pub fn integrate(s0: &SystemState, r: &ReducedParams, cfg: &IntegratorConfig) -> Result<Trajectory> {
    cfg.validate()?;
    r.validate()?;
    let times = cfg.sample_times();
    let mut traj = Trajectory::with_capacity(times.len(), *r);
    let f = |y: &[f64; DIM]| rhs(y, r);
    let mut stepper = Stepper::new(&f, 0.0, s0.to_array(), cfg.tolerances())?;
    traj.push(0.0, *s0);
    let mut next = 1;
    let t_end = *times.last().unwrap_or(&0.0);
    if t_end > 0.0 {
        stepper.advance(t_end, |seg: &Segment<'_, DIM>| {
            while next < times.len() && times[next] <= seg.t1 {
                traj.push(times[next], SystemState::from_array(seg.eval(times[next])));
                next += 1;
            }
            Ok(())
        })?;
    }
    traj.meta = stepper.stats;
    Ok(traj)
}

const AUG: usize = 2 * DIM;

/// State and tangent advanced together: `s' = f(s)`, `d' = M(s) d`.
struct Augmented<'r>(&'r ReducedParams);

impl Rhs<AUG> for Augmented<'_> {
    fn eval(&self, y: &[f64; AUG]) -> [f64; AUG] {
        let mut s = [0.0; DIM];
        let mut d = [0.0; DIM];
        s.copy_from_slice(&y[..DIM]);
        d.copy_from_slice(&y[DIM..]);
        let fs = rhs(&s, self.0);
        let fd = jacobian_apply(&s, self.0, &d);
        let mut out = [0.0; AUG];
        out[..DIM].copy_from_slice(&fs);
        out[DIM..].copy_from_slice(&fd);
        out
    }
}

/// First-order change of `|a1|^2` along `d`, `2 Re(conj(a1) d_a1)`.
fn linear_d_i1(y: &[f64; AUG]) -> f64 {
    2.0 * (y[2] * y[DIM + 2] + y[3] * y[DIM + 3])
}

const DIRECTION_GRID: f64 = (1u64 << 40) as f64;

/// Incremental tangent-flow integration, one renormalization interval at a time.
///
/// [`integrate_with_tangent`] drives this to the end of the horizon; the
/// onset detector stops it early once a decision has been reached.
pub struct TangentRun<'r> {
    stepper: Stepper<AUG, Augmented<'r>>,
    times: Vec<f64>,
    next_sample: usize,
    t_end: f64,
    renorm_interval: f64,
    interval: usize,
    n_intervals: usize,
    // ln of the true perturbation norm at the start of the current interval.
    cum: f64,
    traj: Trajectory,
    log: TangentLog,
}

impl<'r> TangentRun<'r> {
    pub fn new(s0: &SystemState, d0: &TangentVector, r: &'r ReducedParams, cfg: &IntegratorConfig) -> Result<Self> {
        cfg.validate()?;
        r.validate()?;
        let d_norm = d0.norm();
        if !(d_norm > 0.0) || !d_norm.is_finite() {
            return Err(Error::InvalidInput("initial tangent must have finite non-zero norm".into()));
        }
        let times = cfg.sample_times();
        let t_end = *times.last().unwrap_or(&0.0);

        let mut y0 = [0.0; AUG];
        y0[..DIM].copy_from_slice(&s0.to_array());
        // Snap the direction to a 2^-40 grid so parallel inputs of any scale
        // start from bit-identical tangents.
        for (k, v) in d0.0.iter().enumerate() {
            y0[DIM + k] = (v / d_norm * DIRECTION_GRID).round() / DIRECTION_GRID;
        }
        let mut traj = Trajectory::with_capacity(times.len(), *r);
        let mut log = TangentLog {
            renorm_times: Vec::new(),
            increments: Vec::new(),
            ln_abs_d_i1: Vec::with_capacity(times.len()),
            initial_norm: d_norm,
        };
        push_sample(&mut traj, &mut log, 0.0, &y0, d_norm.ln());
        let stepper = Stepper::new(Augmented(r), 0.0, y0, cfg.tolerances())?;
        let n_intervals = (t_end / cfg.renorm_interval * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        Ok(TangentRun {
            stepper,
            times,
            next_sample: 1,
            t_end,
            renorm_interval: cfg.renorm_interval,
            interval: 0,
            n_intervals,
            cum: d_norm.ln(),
            traj,
            log,
        })
    }

    pub fn t(&self) -> f64 {
        self.stepper.t
    }

    pub fn is_done(&self) -> bool {
        self.interval >= self.n_intervals
    }

    pub fn log(&self) -> &TangentLog {
        &self.log
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.traj
    }

    /// Integrate to the next renormalization instant and return the log growth
    /// of the tangent over that interval.
    pub fn next_interval(&mut self) -> Result<f64> {
        if self.is_done() {
            return Err(Error::InvalidInput("tangent run already reached the horizon".into()));
        }
        self.interval += 1;
        let k = self.interval;
        let t_stop = if k == self.n_intervals { self.t_end } else { k as f64 * self.renorm_interval };
        let (times, next, traj, log, cum) =
            (&self.times, &mut self.next_sample, &mut self.traj, &mut self.log, self.cum);
        self.stepper.advance(t_stop, |seg: &Segment<'_, AUG>| {
            while *next < times.len() && times[*next] <= seg.t1 {
                let y = seg.eval(times[*next]);
                push_sample(traj, log, times[*next], &y, cum);
                *next += 1;
            }
            Ok(())
        })?;
        let mut y = self.stepper.y;
        let n = y[DIM..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::TangentUnderflow { t: self.stepper.t });
        }
        let inc = n.ln();
        for v in &mut y[DIM..] {
            *v /= n;
        }
        self.stepper.reset_state(y);
        self.log.renorm_times.push(self.stepper.t);
        self.log.increments.push(inc);
        self.cum += inc;
        Ok(inc)
    }

    /// Hand back everything recorded so far.
    pub fn finish(mut self) -> (Trajectory, TangentLog) {
        self.traj.meta = self.stepper.stats;
        (self.traj, self.log)
    }
}

/// Integrate the state together with the linearized flow `d' = M d`.
///
/// Both halves share every adaptive step. The tangent is rescaled to unit
/// norm at each multiple of `cfg.renorm_interval`.
pub fn integrate_with_tangent(
    s0: &SystemState,
    d0: &TangentVector,
    r: &ReducedParams,
    cfg: &IntegratorConfig,
) -> Result<(Trajectory, TangentLog)> {
    let mut run = TangentRun::new(s0, d0, r, cfg)?;
    while !run.is_done() {
        run.next_interval()?;
    }
    Ok(run.finish())
}

fn push_sample(traj: &mut Trajectory, log: &mut TangentLog, t: f64, y: &[f64; AUG], cum: f64) {
    let mut s = [0.0; DIM];
    s.copy_from_slice(&y[..DIM]);
    traj.push(t, SystemState::from_array(s));
    log.ln_abs_d_i1.push(cum + linear_d_i1(y).abs().ln());
}

/// Uniform `n`-point slice of `traj` over `[t_a, t_b]`, endpoints included.
///
/// Points between stored samples are filled with the cubic Hermite
/// interpolant built from the neighbouring samples and the vector field.
pub fn resample(traj: &Trajectory, window: (f64, f64), n: usize) -> Result<Trajectory> {
    let (t_a, t_b) = window;
    if n < 2 {
        return Err(Error::InvalidInput(format!("resample needs at least 2 points, got {n}")));
    }
    if traj.len() < 2 {
        return Err(Error::InvalidInput("trajectory has fewer than 2 samples".into()));
    }
    let (min, max) = (traj.times[0], traj.times[traj.len() - 1]);
    let slack = 1e-12 * (max - min).abs().max(1.0);
    if !(t_a < t_b) || t_a < min - slack || t_b > max + slack {
        return Err(Error::Range { lo: t_a, hi: t_b, min, max });
    }
    let mut out = Trajectory::with_capacity(n, traj.params);
    out.meta = traj.meta;
    let step = (t_b - t_a) / (n - 1) as f64;
    for k in 0..n {
        let t = if k == n - 1 { t_b } else { t_a + k as f64 * step };
        let t = t.clamp(min, max);
        // Index of the first sample at or after t.
        let hi = traj.times.partition_point(|&s| s < t).min(traj.len() - 1);
        let tol = 1e-9 * traj.dt().max(f64::MIN_POSITIVE);
        let state = if (traj.times[hi] - t).abs() <= tol {
            out.times.push(traj.times[hi]);
            traj.states[hi]
        } else if hi > 0 && (traj.times[hi - 1] - t).abs() <= tol {
            out.times.push(traj.times[hi - 1]);
            traj.states[hi - 1]
        } else {
            let lo = hi - 1;
            let y0 = traj.states[lo].to_array();
            let y1 = traj.states[hi].to_array();
            let f0 = rhs(&y0, &traj.params);
            let f1 = rhs(&y1, &traj.params);
            let seg = Segment { t0: traj.times[lo], t1: traj.times[hi], y0: &y0, f0: &f0, y1: &y1, f1: &f1 };
            out.times.push(t);
            SystemState::from_array(seg.eval(t))
        };
        out.i1.push(state.i1());
        out.i2.push(state.i2());
        out.states.push(state);
    }
    Ok(out)
}
