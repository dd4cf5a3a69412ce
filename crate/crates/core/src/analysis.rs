//! Diagnostics computed from trajectories: power spectra, largest Lyapunov
//! exponent (two estimators), intensity-maxima bifurcation data and the
//! chaos onset time.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dynamics::{integrate, IntegratorConfig, TangentLog, TangentRun, Trajectory};
use crate::error::{Error, Result};
use crate::model::{linear_max_growth_rate, Control, ReducedParams, SystemState, TangentVector};
use crate::sweep::parallel_map;
use crate::units::TimeScale;

// ---------------------------------------------------------------------------
// Spectra

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Taper {
    #[default]
    Hann,
    Rectangular,
}

impl Taper {
    /// Window coefficients for `n` samples.
    pub fn weights(self, n: usize) -> Vec<f64> {
        match self {
            Taper::Rectangular => vec![1.0; n],
            // Periodic Hann window.
            Taper::Hann => (0..n).map(|k| 0.5 - 0.5 * (2.0 * PI * k as f64 / n as f64).cos()).collect(),
        }
    }
}

impl std::str::FromStr for Taper {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hann" => Ok(Taper::Hann),
            "rect" | "rectangular" | "none" => Ok(Taper::Rectangular),
            other => Err(Error::InvalidInput(format!("unknown taper `{other}`"))),
        }
    }
}

/// One-sided periodogram.
///
/// `frequencies` are angular frequencies in the inverse time unit of the
/// input (units of `gamma` for trajectories). Powers are normalized so that
/// their sum equals `sum((w x)^2) / sum(w^2)` for taper `w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub frequencies: Vec<f64>,
    pub power: Vec<f64>,
    /// Natural log of `power`, floored at the smallest positive double.
    pub log_power: Vec<f64>,
    pub dc_power: f64,
    pub taper: Taper,
    /// Bin spacing in angular frequency.
    pub resolution: f64,
}

impl SpectrumResult {
    /// Index of the strongest bin, ignoring DC.
    pub fn peak_bin(&self) -> usize {
        (1..self.power.len()).max_by(|&a, &b| self.power[a].total_cmp(&self.power[b])).unwrap_or(0)
    }

    pub fn peak_frequency(&self) -> f64 {
        self.frequencies[self.peak_bin()]
    }

    /// Frequencies divided by `unit` (e.g. `omega_m`).
    pub fn frequencies_in(&self, unit: f64) -> Vec<f64> {
        self.frequencies.iter().map(|w| w / unit).collect()
    }

    pub fn total_power(&self) -> f64 {
        self.power.iter().sum()
    }
}

pub const MIN_SPECTRUM_SAMPLES: usize = 64;

/// Mean-subtracted, tapered periodogram of a uniformly sampled series.
pub fn power_spectrum(series: &[f64], dt: f64, taper: Taper) -> Result<SpectrumResult> {
    let n = series.len();
    if n < MIN_SPECTRUM_SAMPLES {
        return Err(Error::InvalidInput(format!(
            "power spectrum needs at least {MIN_SPECTRUM_SAMPLES} samples, got {n}"
        )));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidInput(format!("sample interval must be positive, got {dt}")));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("series contains non-finite values".into()));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let w = taper.weights(n);
    let w2: f64 = w.iter().map(|v| v * v).sum();
    let mut buf: Vec<Complex<f64>> = series.iter().zip(&w).map(|(x, w)| Complex::new((x - mean) * w, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let half = n / 2;
    let norm = 1.0 / (n as f64 * w2);
    let resolution = 2.0 * PI / (n as f64 * dt);
    let mut frequencies = Vec::with_capacity(half + 1);
    let mut power = Vec::with_capacity(half + 1);
    for (k, z) in buf.iter().take(half + 1).enumerate() {
        // Bins other than DC and Nyquist stand in for their negative twins.
        let fold = if k == 0 || (n % 2 == 0 && k == half) { 1.0 } else { 2.0 };
        frequencies.push(k as f64 * resolution);
        power.push(fold * z.norm_sqr() * norm);
    }
    let log_power = power.iter().map(|p| p.max(f64::MIN_POSITIVE).ln()).collect();
    Ok(SpectrumResult { frequencies, dc_power: power[0], power, log_power, taper, resolution })
}

/// [`power_spectrum`] for explicitly timed samples; rejects non-uniform spacing.
pub fn power_spectrum_timed(times: &[f64], series: &[f64], taper: Taper) -> Result<SpectrumResult> {
    if times.len() != series.len() {
        return Err(Error::InvalidInput("times and series lengths differ".into()));
    }
    if times.len() < 2 {
        return Err(Error::InvalidInput("need at least two samples".into()));
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    for pair in times.windows(2) {
        if ((pair[1] - pair[0]) - dt).abs() > 1e-6 * dt {
            return Err(Error::InvalidInput(format!(
                "non-uniform sampling: step {} differs from mean step {dt}",
                pair[1] - pair[0]
            )));
        }
    }
    power_spectrum(series, dt, taper)
}

/// Spectrum of `I1` over `[t_a, t_b]` of a trajectory.
pub fn intensity_spectrum(traj: &Trajectory, window: (f64, f64), taper: Taper) -> Result<SpectrumResult> {
    let idx = traj.window_indices(window.0, window.1);
    power_spectrum_timed(&traj.times[idx.clone()], &traj.i1[idx], taper)
}

/// Geometric over arithmetic mean of the linear power in `lo < w <= hi`.
pub fn spectral_flatness(spec: &SpectrumResult, band: (f64, f64)) -> Result<f64> {
    let (lo, hi) = band;
    let top = *spec.frequencies.last().unwrap_or(&0.0);
    if !(lo < hi) || lo < 0.0 || lo > top {
        return Err(Error::Range { lo, hi, min: 0.0, max: top });
    }
    let bins: Vec<f64> = spec
        .frequencies
        .iter()
        .zip(&spec.power)
        .filter(|(w, _)| **w > lo && **w <= hi)
        .map(|(_, p)| *p)
        .collect();
    if bins.is_empty() {
        return Err(Error::Range { lo, hi, min: 0.0, max: top });
    }
    let n = bins.len() as f64;
    let arith = bins.iter().sum::<f64>() / n;
    if arith <= 0.0 {
        return Ok(0.0);
    }
    let log_geo = bins.iter().map(|p| p.max(f64::MIN_POSITIVE).ln()).sum::<f64>() / n;
    Ok((log_geo.exp() / arith).clamp(0.0, 1.0))
}

// ---------------------------------------------------------------------------
// Lyapunov exponents

/// Largest-exponent estimates over one analysis window, in units of `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovResult {
    /// Mean log-norm growth rate of the renormalized tangent.
    pub lambda_benettin: f64,
    /// Least-squares slope of `ln |delta I1|` against time.
    pub lambda_slope_d_i1: f64,
    pub window: (f64, f64),
    /// RMS residual of the `ln |delta I1|` fit.
    pub fit_residual: f64,
    /// Number of finite samples used in the fit.
    pub fit_points: usize,
}

impl LyapunovResult {
    pub fn benettin_per_us(&self, ts: &TimeScale) -> f64 {
        ts.rate_to_per_us(self.lambda_benettin)
    }

    pub fn slope_per_us(&self, ts: &TimeScale) -> f64 {
        ts.rate_to_per_us(self.lambda_slope_d_i1)
    }
}

/// Mean growth rate over the renormalization intervals lying inside `window`.
pub fn benettin_rate(log: &TangentLog, renorm_interval: f64, window: (f64, f64)) -> Result<f64> {
    let (t_a, t_b) = window;
    let slack = 1e-9 * renorm_interval;
    let mut sum = 0.0;
    let mut start = f64::NAN;
    let mut end = f64::NAN;
    let mut prev = 0.0;
    for (&t, &inc) in log.renorm_times.iter().zip(&log.increments) {
        if prev >= t_a - slack && t <= t_b + slack {
            if start.is_nan() {
                start = prev;
            }
            end = t;
            sum += inc;
        }
        prev = t;
    }
    if start.is_nan() || !(end > start) {
        return Err(Error::InvalidInput(format!(
            "window [{t_a}, {t_b}] contains no complete renormalization interval"
        )));
    }
    Ok(sum / (end - start))
}

/// Least-squares line through `(t, y)`: (slope, rms residual, R^2).
pub fn linear_fit(t: &[f64], y: &[f64]) -> Option<(f64, f64, f64)> {
    let n = t.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let nf = n as f64;
    let tm = t.iter().sum::<f64>() / nf;
    let ym = y.iter().sum::<f64>() / nf;
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in t.iter().zip(y) {
        stt += (a - tm) * (a - tm);
        sty += (a - tm) * (b - ym);
        syy += (b - ym) * (b - ym);
    }
    if stt <= 0.0 {
        return None;
    }
    let slope = sty / stt;
    let ss_res = (syy - slope * sty).max(0.0);
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Some((slope, (ss_res / nf).sqrt(), r2))
}

/// Both estimators from an already computed tangent run.
pub fn lyapunov_from_log(
    traj: &Trajectory,
    log: &TangentLog,
    renorm_interval: f64,
    window: (f64, f64),
) -> Result<LyapunovResult> {
    let lambda_benettin = benettin_rate(log, renorm_interval, window)?;
    let idx = traj.window_indices(window.0, window.1);
    let (t, y): (Vec<f64>, Vec<f64>) = idx
        .map(|k| (traj.times[k], log.ln_abs_d_i1[k]))
        .filter(|(_, v)| v.is_finite())
        .unzip();
    let (slope, resid, _) = linear_fit(&t, &y).ok_or_else(|| {
        Error::DegenerateFit(format!("delta I1 vanishes on the window [{}, {}]", window.0, window.1))
    })?;
    Ok(LyapunovResult {
        lambda_benettin,
        lambda_slope_d_i1: slope,
        window,
        fit_residual: resid,
        fit_points: t.len(),
    })
}

fn check_window(window: (f64, f64), cfg: &IntegratorConfig) -> Result<()> {
    let (t_a, t_b) = window;
    if !(t_a >= 0.0) || !(t_b > t_a) || t_b > cfg.t_end * (1.0 + 1e-12) {
        return Err(Error::Range { lo: t_a, hi: t_b, min: 0.0, max: cfg.t_end });
    }
    Ok(())
}

/// Integrate only as far as `window.1` and estimate both exponents.
pub fn lyapunov(
    s0: &SystemState,
    d0: &TangentVector,
    r: &ReducedParams,
    cfg: &IntegratorConfig,
    window: (f64, f64),
) -> Result<LyapunovResult> {
    check_window(window, cfg)?;
    let cfg = IntegratorConfig { t_end: window.1, ..*cfg };
    let (traj, log) = crate::dynamics::integrate_with_tangent(s0, d0, r, &cfg)?;
    lyapunov_from_log(&traj, &log, cfg.renorm_interval, window)
}

/// Largest exponent from tangent renormalizations over `window`.
pub fn lyapunov_benettin(
    s0: &SystemState,
    d0: &TangentVector,
    r: &ReducedParams,
    cfg: &IntegratorConfig,
    window: (f64, f64),
) -> Result<LyapunovResult> {
    lyapunov(s0, d0, r, cfg, window)
}

/// Largest exponent from the growth of the intensity perturbation over `window`.
pub fn lyapunov_slope_d_i1(
    s0: &SystemState,
    d0: &TangentVector,
    r: &ReducedParams,
    cfg: &IntegratorConfig,
    window: (f64, f64),
) -> Result<LyapunovResult> {
    lyapunov(s0, d0, r, cfg, window)
}

// ---------------------------------------------------------------------------
// Bifurcation data

/// Values at strict three-point local maxima.
pub fn local_maxima(series: &[f64]) -> Vec<f64> {
    series.windows(3).filter(|w| w[1] > w[0] && w[1] > w[2]).map(|w| w[1]).collect()
}

/// Number of groups after sorting and splitting wherever consecutive values
/// differ by more than `rel_tol` times the largest magnitude.
pub fn count_clusters(values: &[f64], rel_tol: f64) -> usize {
    if values.is_empty() {
        return 0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let gap = rel_tol * scale;
    1 + v.windows(2).filter(|w| w[1] - w[0] > gap).count()
}

/// Largest spread within a single cluster relative to the cluster mean.
pub fn max_cluster_spread(values: &[f64], rel_tol: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut worst: f64 = 0.0;
    let mut start = 0;
    for k in 1..=v.len() {
        if k == v.len() || v[k] - v[k - 1] > rel_tol * scale {
            let c = &v[start..k];
            let mean = c.iter().sum::<f64>() / c.len() as f64;
            if mean != 0.0 {
                worst = worst.max((c[c.len() - 1] - c[0]) / mean.abs());
            }
            start = k;
        }
    }
    worst
}

/// I1 maxima in the analysis window for each control value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationDiagram {
    pub control: Control,
    pub values: Vec<f64>,
    pub maxima: Vec<Vec<f64>>,
    /// Failure description for points whose integration did not complete.
    pub errors: Vec<Option<String>>,
    pub window: (f64, f64),
}

impl BifurcationDiagram {
    pub fn cluster_counts(&self, rel_tol: f64) -> Vec<usize> {
        self.maxima.iter().map(|m| count_clusters(m, rel_tol)).collect()
    }
}

/// I1 maxima inside `window` for every control value, scanned in parallel.
///
/// Values are sorted ascending in the result. Integration failures are
/// recorded per point and do not stop the scan.
pub fn bifurcation_scan(
    r_base: &ReducedParams,
    control: Control,
    values: &[f64],
    cfg: &IntegratorConfig,
    window: (f64, f64),
    workers: usize,
) -> Result<BifurcationDiagram> {
    check_window(window, cfg)?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("control values must be finite".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let cfg = IntegratorConfig { t_end: window.1, ..*cfg };
    let results = parallel_map(&sorted, workers, |_, &v| {
        let r = r_base.with(control, v);
        integrate(&SystemState::ZERO, &r, &cfg).map(|traj| {
            let idx = traj.window_indices(window.0, window.1);
            local_maxima(&traj.i1[idx])
        })
    });
    let mut maxima = Vec::with_capacity(sorted.len());
    let mut errors = Vec::with_capacity(sorted.len());
    for res in results {
        match res {
            Ok(m) => {
                maxima.push(m);
                errors.push(None);
            }
            Err(e) => {
                maxima.push(Vec::new());
                errors.push(Some(e.to_string()));
            }
        }
    }
    Ok(BifurcationDiagram { control, values: sorted, maxima, errors, window })
}

// ---------------------------------------------------------------------------
// Chaos onset

/// What the sliding-window exponent is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    /// Subtract the growth rate of the fastest linear supermode when it is
    /// positive, so plain exponential amplification by the gain cavity does
    /// not count as chaos.
    #[default]
    LinearGain,
    /// Compare the raw exponent with the threshold.
    Zero,
}

/// Sliding-window detector. Times and rates are in units of `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnsetDetector {
    pub window: f64,
    pub threshold: f64,
    pub baseline: Baseline,
    /// Stop integrating once the exponent has stayed above threshold for this
    /// long after the candidate onset. `None` always runs to the horizon.
    pub confirm: Option<f64>,
}

impl OnsetDetector {
    /// Window of `window_us` microseconds and threshold in inverse microseconds.
    pub fn from_us(ts: &TimeScale, window_us: f64, threshold_per_us: f64) -> Self {
        let window = ts.from_us(window_us);
        OnsetDetector {
            window,
            threshold: ts.rate_from_per_us(threshold_per_us),
            baseline: Baseline::LinearGain,
            confirm: Some(2.0 * window),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.window > 0.0) || !(self.threshold > 0.0) {
            return Err(Error::InvalidConfig("detector window and threshold must be positive".into()));
        }
        if let Some(c) = self.confirm {
            if !(c > 0.0) {
                return Err(Error::InvalidConfig("confirmation span must be positive".into()));
            }
        }
        Ok(())
    }
}

impl Default for OnsetDetector {
    /// 1 us window, 0.1 / us threshold at `gamma = 2 pi x 1 MHz`.
    fn default() -> Self {
        OnsetDetector::from_us(&TimeScale::default(), 1.0, 0.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HorizonEnd {
    /// Ran to the configured `t_end`.
    Complete,
    /// Stopped after the onset had been confirmed.
    Confirmed,
    /// The state blew up after the onset had been detected.
    DivergedAfterOnset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnsetResult {
    /// Estimated chaos start (end of the first qualifying window), in `1/gamma`.
    pub tau: Option<f64>,
    /// `(t, lambda_W(t))` at every renormalization instant once a full window
    /// is available; raw exponent, before baseline subtraction.
    pub trace: Vec<(f64, f64)>,
    pub detector: OnsetDetector,
    pub baseline_rate: f64,
    /// Time up to which the trace was computed.
    pub horizon: f64,
    pub horizon_end: HorizonEnd,
    /// Benettin estimate over the whole computed horizon.
    pub lambda_total: f64,
}

/// Earliest time after which the sliding-window exponent (minus the baseline)
/// stays above the threshold for the rest of the computed horizon.
pub fn chaos_onset_time(
    s0: &SystemState,
    r: &ReducedParams,
    cfg: &IntegratorConfig,
    detector: &OnsetDetector,
) -> Result<OnsetResult> {
    detector.validate()?;
    cfg.validate()?;
    if detector.window > cfg.t_end {
        return Err(Error::InvalidConfig(format!(
            "horizon {} is shorter than one detector window {}",
            cfg.t_end, detector.window
        )));
    }
    let baseline_rate = match detector.baseline {
        Baseline::LinearGain => linear_max_growth_rate(r).max(0.0),
        Baseline::Zero => 0.0,
    };
    let per_window = ((detector.window / cfg.renorm_interval).round() as usize).max(1);
    let span = per_window as f64 * cfg.renorm_interval;

    // Samples are not needed here; keep the run light.
    let run_cfg = IntegratorConfig { sample_dt: cfg.t_end, ..*cfg };
    let mut run = TangentRun::new(s0, &TangentVector::uniform(), r, &run_cfg)?;
    let mut incs: Vec<f64> = Vec::new();
    let mut trace = Vec::new();
    let mut window_sum = 0.0;
    let mut candidate: Option<f64> = None;
    let mut horizon_end = HorizonEnd::Complete;

    while !run.is_done() {
        let inc = match run.next_interval() {
            Ok(v) => v,
            Err(e @ (Error::Divergence { .. } | Error::StepSizeUnderflow { .. })) => {
                if candidate.is_some() {
                    horizon_end = HorizonEnd::DivergedAfterOnset;
                    break;
                }
                return Err(e);
            }
            Err(e) => return Err(e),
        };
        incs.push(inc);
        window_sum += inc;
        if incs.len() > per_window {
            window_sum -= incs[incs.len() - 1 - per_window];
        }
        if incs.len() >= per_window {
            let t = run.t();
            // Re-sum occasionally to stop rounding drift in the running sum.
            if incs.len() % 1024 == 0 {
                window_sum = incs[incs.len() - per_window..].iter().sum();
            }
            let lam = window_sum / span;
            trace.push((t, lam));
            if lam - baseline_rate > detector.threshold {
                if candidate.is_none() {
                    candidate = Some(t);
                }
            } else {
                candidate = None;
            }
            if let (Some(c), Some(confirm)) = (candidate, detector.confirm) {
                if t - c >= confirm {
                    horizon_end = HorizonEnd::Confirmed;
                    break;
                }
            }
        }
    }
    let horizon = run.t();
    let lambda_total = if horizon > 0.0 { incs.iter().sum::<f64>() / horizon } else { 0.0 };
    let tau = if lambda_total < 0.0 { None } else { candidate };
    Ok(OnsetResult {
        tau,
        trace,
        detector: *detector,
        baseline_rate,
        horizon,
        horizon_end,
        lambda_total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(n: usize, dt: f64, w: f64) -> Vec<f64> {
        (0..n).map(|k| (w * k as f64 * dt).sin()).collect()
    }

    #[test]
    fn tone_peak_lands_on_its_bin() {
        let dt = 0.01;
        let n = 1024;
        let w = 2.0 * PI * 37.0 / (n as f64 * dt);
        let spec = power_spectrum(&tone(n, dt, w), dt, Taper::Hann).unwrap();
        assert_eq!(spec.frequencies.len(), n / 2 + 1);
        assert_eq!(spec.peak_bin(), 37);
        assert!(spec.frequencies.windows(2).all(|p| p[1] > p[0]));
    }

    #[test]
    fn parseval_with_taper() {
        let dt = 0.05;
        let n = 777;
        let x: Vec<f64> = (0..n).map(|k| (0.3 * k as f64).sin() + 0.2 * (1.7 * k as f64).cos() + 0.01 * k as f64).collect();
        for taper in [Taper::Hann, Taper::Rectangular] {
            let spec = power_spectrum(&x, dt, taper).unwrap();
            let mean = x.iter().sum::<f64>() / n as f64;
            let w = taper.weights(n);
            let num: f64 = x.iter().zip(&w).map(|(v, w)| ((v - mean) * w).powi(2)).sum();
            let den: f64 = w.iter().map(|v| v * v).sum();
            assert!((spec.total_power() / (num / den) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn short_or_irregular_input_rejected() {
        assert!(power_spectrum(&[1.0; 10], 0.1, Taper::Hann).is_err());
        let mut t: Vec<f64> = (0..100).map(|k| k as f64 * 0.1).collect();
        t[50] += 0.03;
        assert!(matches!(power_spectrum_timed(&t, &[0.0; 100], Taper::Hann), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn flatness_extremes() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let noise: Vec<f64> = (0..4096).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let spec = power_spectrum(&noise, 1.0, Taper::Hann).unwrap();
        let top = *spec.frequencies.last().unwrap();
        assert!(spectral_flatness(&spec, (0.0, top)).unwrap() > 0.5);

        let n = 4096;
        let w = 2.0 * PI * 300.0 / n as f64;
        let spec = power_spectrum(&tone(n, 1.0, w), 1.0, Taper::Hann).unwrap();
        assert!(spectral_flatness(&spec, (0.0, top)).unwrap() < 0.01);
        assert!(matches!(spectral_flatness(&spec, (1.0, 1.0)), Err(Error::Range { .. })));
        assert!(spectral_flatness(&spec, (1.0, 1.0 + 1e-9)).is_err());
    }

    #[test]
    fn maxima_of_period_two_signal() {
        // sin(t) + 0.5 sin(t/2) has period 4 pi and two distinct maxima per period.
        let dt = 1e-3;
        let x: Vec<f64> = (0..200_000).map(|k| {
            let t = k as f64 * dt;
            t.sin() + 0.5 * (0.5 * t).sin()
        }).collect();
        let m = local_maxima(&x);
        assert_eq!(count_clusters(&m, 0.01), 2);
        assert!(max_cluster_spread(&m, 0.01) < 1e-6);
        assert_eq!(count_clusters(&local_maxima(&tone(10_000, 0.01, 3.0)), 0.01), 1);
        assert_eq!(count_clusters(&[], 0.01), 0);
    }

    #[test]
    fn fit_recovers_line() {
        let t: Vec<f64> = (0..50).map(|k| k as f64 * 0.1).collect();
        let y: Vec<f64> = t.iter().map(|t| 2.5 * t - 1.0).collect();
        let (s, res, r2) = linear_fit(&t, &y).unwrap();
        assert!((s - 2.5).abs() < 1e-12 && res < 1e-10 && (r2 - 1.0).abs() < 1e-12);
        assert!(linear_fit(&[1.0], &[1.0]).is_none());
    }
}
