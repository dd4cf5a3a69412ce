//! Browser bindings: phase classification, intensity trajectories and the
//! largest Lyapunov exponent for the reference parameter set with adjustable
//! `J`, `kappa` and drive amplitude (all in units of `gamma`).
//!
//! The plain functions are usable from Rust; the `#[wasm_bindgen]` wrappers
//! expose them to JavaScript.

use ptchaos::analysis::lyapunov;
use ptchaos::units::TimeScale;
use ptchaos::{integrate, resample, IntegratorConfig, ReducedParams, SystemState, TangentVector};
use wasm_bindgen::prelude::*;

fn params(j: f64, kappa: f64, omega_d: f64) -> Result<ReducedParams, String> {
    let r = ReducedParams { kappa, ..ReducedParams::fig2_with(j, omega_d) };
    r.validate().map_err(|e| e.to_string())?;
    Ok(r)
}

pub fn phase_label(j: f64, kappa: f64) -> String {
    ptchaos::classify_phase(j, 1.0, kappa, ptchaos::model::DEFAULT_EP_TOL).as_str().to_string()
}

/// `points` samples over `[0, t_end_us]`, packed as `[t_us.., I1.., I2..]`.
pub fn intensity_series(j: f64, kappa: f64, omega_d: f64, t_end_us: f64, points: usize) -> Result<Vec<f64>, String> {
    let ts = TimeScale::default();
    let r = params(j, kappa, omega_d)?;
    if !(t_end_us > 0.0) || points < 2 {
        return Err("need a positive duration and at least two points".into());
    }
    let t_end = ts.from_us(t_end_us);
    let traj = integrate(&SystemState::ZERO, &r, &IntegratorConfig::for_params(&r, t_end)).map_err(|e| e.to_string())?;
    let even = resample(&traj, (0.0, t_end), points).map_err(|e| e.to_string())?;
    let mut out: Vec<f64> = even.times.iter().map(|t| ts.to_us(*t)).collect();
    out.extend(&even.i1);
    out.extend(&even.i2);
    Ok(out)
}

/// Benettin estimate over `[from_us, to_us]`, in inverse microseconds.
pub fn lyapunov_per_us(j: f64, kappa: f64, omega_d: f64, from_us: f64, to_us: f64) -> Result<f64, String> {
    let ts = TimeScale::default();
    let r = params(j, kappa, omega_d)?;
    let window = (ts.from_us(from_us), ts.from_us(to_us));
    let cfg = IntegratorConfig::for_params(&r, window.1);
    let l = lyapunov(&SystemState::ZERO, &TangentVector::uniform(), &r, &cfg, window).map_err(|e| e.to_string())?;
    Ok(ts.rate_to_per_us(l.lambda_benettin))
}

#[wasm_bindgen(js_name = phaseLabel)]
pub fn js_phase_label(j: f64, kappa: f64) -> String {
    phase_label(j, kappa)
}

#[wasm_bindgen(js_name = intensitySeries)]
pub fn js_intensity_series(j: f64, kappa: f64, omega_d: f64, t_end_us: f64, points: usize) -> Result<Vec<f64>, JsError> {
    intensity_series(j, kappa, omega_d, t_end_us, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = lyapunovPerUs)]
pub fn js_lyapunov_per_us(j: f64, kappa: f64, omega_d: f64, from_us: f64, to_us: f64) -> Result<f64, JsError> {
    lyapunov_per_us(j, kappa, omega_d, from_us, to_us).map_err(|e| JsError::new(&e))
}
