//! Parameters, state layout, equations of motion and the closed-form linear
//! analysis of the gain/loss optomechanical dimer.
//!
//! All dynamics run in units of the passive-cavity decay rate `gamma`: rates
//! are divided by `gamma` and time is measured in `1/gamma`.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant in J·s (CODATA 2018).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Default half-width used when deciding that `J` sits on the exceptional point.
pub const DEFAULT_EP_TOL: f64 = 1e-9;

/// Number of real dynamical variables.
pub const DIM: usize = 6;

pub type Matrix6 = [[f64; DIM]; DIM];

/// How the coherent drive is specified. Only one of the two is authoritative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Drive {
    /// Input power in W.
    Power(f64),
    /// Drive amplitude `|Omega_d|` in rad/s.
    Amplitude(f64),
}

/// Dimensionful experimental parameters. Every rate is an angular rate in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub omega_c: f64,
    pub omega_m: f64,
    pub gamma: f64,
    /// Gain of the second cavity; negative values make it lossy.
    pub kappa: f64,
    pub gamma_m: f64,
    pub g0: f64,
    pub j: f64,
    /// Detuning `omega_c - omega_d`.
    pub delta_c: f64,
    pub drive: Drive,
    pub hbar: f64,
}

impl PhysicalParams {
    /// Microtoroid values used for the spectra and Lyapunov maps: `J = gamma`,
    /// 1 uW of drive power.
    pub fn fig2() -> Self {
        let gamma = 2.0 * PI * 1.0e6;
        let omega_m = 2.0 * PI * 23.0e6;
        PhysicalParams {
            omega_c: 190.0e12,
            omega_m,
            gamma,
            kappa: 0.8 * gamma,
            gamma_m: 0.038 * gamma,
            g0: 7.4e-5 * gamma,
            j: gamma,
            delta_c: omega_m,
            drive: Drive::Power(1.0e-6),
            hbar: HBAR,
        }
    }

    /// Frequency of the driving laser, `omega_c - delta_c`.
    pub fn omega_d(&self) -> f64 {
        self.omega_c - self.delta_c
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("omega_c", self.omega_c),
            ("omega_m", self.omega_m),
            ("gamma", self.gamma),
            ("kappa", self.kappa),
            ("gamma_m", self.gamma_m),
            ("g0", self.g0),
            ("J", self.j),
            ("delta_c", self.delta_c),
            ("hbar", self.hbar),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::invalid(name, format!("must be finite, got {v}")));
            }
        }
        if self.gamma <= 0.0 {
            return Err(Error::invalid("gamma", "must be positive"));
        }
        if self.omega_m <= 0.0 {
            return Err(Error::invalid("omega_m", "must be positive"));
        }
        for (name, v) in [("gamma_m", self.gamma_m), ("g0", self.g0), ("J", self.j)] {
            if v < 0.0 {
                return Err(Error::invalid(name, format!("must be non-negative, got {v}")));
            }
        }
        Ok(())
    }

    /// Drive amplitude in rad/s, converting from power when needed.
    pub fn drive_amplitude(&self) -> Result<f64> {
        match self.drive {
            Drive::Amplitude(a) if a.is_finite() => Ok(a),
            Drive::Amplitude(a) => Err(Error::invalid("omega_d_amp", format!("must be finite, got {a}"))),
            Drive::Power(p) => drive_amplitude_from_power(p, self.gamma, self.omega_d(), self.hbar),
        }
    }

    /// Drive power in W, converting from amplitude when needed.
    pub fn drive_power(&self) -> Result<f64> {
        match self.drive {
            Drive::Power(p) => Ok(p),
            Drive::Amplitude(a) => power_from_amplitude(a, self.gamma, self.omega_d(), self.hbar),
        }
    }
}

/// Dimensionless parameters in units of `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedParams {
    pub omega_m: f64,
    pub gamma_m: f64,
    pub g0: f64,
    pub j: f64,
    pub delta_c: f64,
    pub kappa: f64,
    pub omega_d_amp: f64,
}

/// Parameters that scans are allowed to vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Control {
    J,
    Kappa,
    OmegaDAmp,
}

impl Control {
    pub fn name(self) -> &'static str {
        match self {
            Control::J => "J",
            Control::Kappa => "kappa",
            Control::OmegaDAmp => "omega_d_amp",
        }
    }
}

impl std::str::FromStr for Control {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "J" | "j" => Ok(Control::J),
            "kappa" => Ok(Control::Kappa),
            "omega_d_amp" | "omega_d" | "drive" => Ok(Control::OmegaDAmp),
            other => Err(Error::invalid(
                "control",
                format!("unknown control parameter `{other}` (expected J, kappa or omega_d_amp)"),
            )),
        }
    }
}

impl ReducedParams {
    /// Reduced form of [`PhysicalParams::fig2`] with an explicit coupling and drive.
    pub fn fig2_with(j: f64, omega_d_amp: f64) -> Self {
        ReducedParams {
            omega_m: 23.0,
            gamma_m: 0.038,
            g0: 7.4e-5,
            j,
            delta_c: 23.0,
            kappa: 0.8,
            omega_d_amp,
        }
    }

    pub fn get(&self, c: Control) -> f64 {
        match c {
            Control::J => self.j,
            Control::Kappa => self.kappa,
            Control::OmegaDAmp => self.omega_d_amp,
        }
    }

    pub fn with(mut self, c: Control, value: f64) -> Self {
        match c {
            Control::J => self.j = value,
            Control::Kappa => self.kappa = value,
            Control::OmegaDAmp => self.omega_d_amp = value,
        }
        self
    }

    /// Phase of the linear cavity pair, with `gamma = 1`.
    pub fn phase(&self) -> PhaseLabel {
        classify_phase(self.j, 1.0, self.kappa, DEFAULT_EP_TOL)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega_m", self.omega_m),
            ("gamma_m", self.gamma_m),
            ("g0", self.g0),
            ("J", self.j),
            ("delta_c", self.delta_c),
            ("kappa", self.kappa),
            ("omega_d_amp", self.omega_d_amp),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::invalid(name, format!("must be finite, got {v}")));
            }
        }
        if self.omega_m <= 0.0 {
            return Err(Error::invalid("omega_m", "must be positive"));
        }
        for (name, v) in [("gamma_m", self.gamma_m), ("g0", self.g0), ("J", self.j)] {
            if v < 0.0 {
                return Err(Error::invalid(name, format!("must be non-negative, got {v}")));
            }
        }
        Ok(())
    }

    /// Scale back to rad/s. The result carries the drive as an amplitude.
    pub fn rescale(&self, gamma: f64, omega_c: f64, hbar: f64) -> PhysicalParams {
        PhysicalParams {
            omega_c,
            omega_m: self.omega_m * gamma,
            gamma,
            kappa: self.kappa * gamma,
            gamma_m: self.gamma_m * gamma,
            g0: self.g0 * gamma,
            j: self.j * gamma,
            delta_c: self.delta_c * gamma,
            drive: Drive::Amplitude(self.omega_d_amp * gamma),
            hbar,
        }
    }
}

/// Nondimensionalize every rate by `gamma`.
pub fn reduce_params(p: &PhysicalParams) -> Result<ReducedParams> {
    p.validate()?;
    let g = p.gamma;
    Ok(ReducedParams {
        omega_m: p.omega_m / g,
        gamma_m: p.gamma_m / g,
        g0: p.g0 / g,
        j: p.j / g,
        delta_c: p.delta_c / g,
        kappa: p.kappa / g,
        omega_d_amp: p.drive_amplitude()? / g,
    })
}

/// `|Omega_d| = sqrt(2 P gamma / (hbar omega_d))`.
pub fn drive_amplitude_from_power(power: f64, gamma: f64, omega_d: f64, hbar: f64) -> Result<f64> {
    if !(power >= 0.0) || !power.is_finite() {
        return Err(Error::invalid("P", format!("power must be a non-negative finite number, got {power}")));
    }
    check_conversion_inputs(gamma, omega_d, hbar)?;
    Ok((2.0 * power * gamma / (hbar * omega_d)).sqrt())
}

/// Inverse of [`drive_amplitude_from_power`].
pub fn power_from_amplitude(amplitude: f64, gamma: f64, omega_d: f64, hbar: f64) -> Result<f64> {
    if !amplitude.is_finite() {
        return Err(Error::invalid("omega_d_amp", format!("must be finite, got {amplitude}")));
    }
    check_conversion_inputs(gamma, omega_d, hbar)?;
    Ok(amplitude * amplitude * hbar * omega_d / (2.0 * gamma))
}

fn check_conversion_inputs(gamma: f64, omega_d: f64, hbar: f64) -> Result<()> {
    if !(gamma > 0.0) {
        return Err(Error::invalid("gamma", "must be positive"));
    }
    if !(omega_d > 0.0) {
        return Err(Error::invalid("omega_d", "drive frequency must be positive"));
    }
    if !(hbar > 0.0) {
        return Err(Error::invalid("hbar", "must be positive"));
    }
    Ok(())
}

/// Mechanical quadratures and the two complex cavity amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SystemState {
    pub x: f64,
    pub p: f64,
    pub a1_re: f64,
    pub a1_im: f64,
    pub a2_re: f64,
    pub a2_im: f64,
}

impl SystemState {
    pub const ZERO: SystemState = SystemState {
        x: 0.0,
        p: 0.0,
        a1_re: 0.0,
        a1_im: 0.0,
        a2_re: 0.0,
        a2_im: 0.0,
    };

    pub fn from_array(v: [f64; DIM]) -> Self {
        SystemState {
            x: v[0],
            p: v[1],
            a1_re: v[2],
            a1_im: v[3],
            a2_re: v[4],
            a2_im: v[5],
        }
    }

    pub fn to_array(self) -> [f64; DIM] {
        [self.x, self.p, self.a1_re, self.a1_im, self.a2_re, self.a2_im]
    }

    /// Passive-cavity intensity `|a1|^2`.
    pub fn i1(&self) -> f64 {
        self.a1_re * self.a1_re + self.a1_im * self.a1_im
    }

    /// Active-cavity intensity `|a2|^2`.
    pub fn i2(&self) -> f64 {
        self.a2_re * self.a2_re + self.a2_im * self.a2_im
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Perturbation in the same component order as [`SystemState`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangentVector(pub [f64; DIM]);

impl TangentVector {
    /// Equal weight on every component, unit norm.
    pub fn uniform() -> Self {
        TangentVector([1.0 / (DIM as f64).sqrt(); DIM])
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, c: f64) -> Self {
        TangentVector(self.0.map(|v| v * c))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PhaseLabel {
    PtSymmetric,
    PtBroken,
    PassivePassive,
    ExceptionalPoint,
}

impl PhaseLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            PhaseLabel::PtSymmetric => "PT_SYMMETRIC",
            PhaseLabel::PtBroken => "PT_BROKEN",
            PhaseLabel::PassivePassive => "PASSIVE_PASSIVE",
            PhaseLabel::ExceptionalPoint => "EXCEPTIONAL_POINT",
        }
    }
}

impl std::fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Right-hand side of the semiclassical equations of motion on a raw array.
#[inline]
pub fn rhs(s: &[f64; DIM], r: &ReducedParams) -> [f64; DIM] {
    let [x, p, a1r, a1i, a2r, a2i] = *s;
    let c = SQRT_2 * r.g0;
    let i1 = a1r * a1r + a1i * a1i;
    // Effective detuning of the passive cavity, shifted by the displacement.
    let det1 = r.delta_c - c * x;
    [
        r.omega_m * p,
        -0.5 * r.gamma_m * p - r.omega_m * x + c * i1,
        -0.5 * a1r + det1 * a1i - r.j * a2i + r.omega_d_amp,
        -det1 * a1r - 0.5 * a1i + r.j * a2r,
        0.5 * r.kappa * a2r + r.delta_c * a2i - r.j * a1i,
        -r.delta_c * a2r + 0.5 * r.kappa * a2i + r.j * a1r,
    ]
}

/// Time derivative of every state component (per unit `1/gamma`).
pub fn vector_field(s: &SystemState, r: &ReducedParams) -> [f64; DIM] {
    rhs(&s.to_array(), r)
}

/// Coefficient matrix of the linearized flow around `s`.
pub fn jacobian_array(s: &[f64; DIM], r: &ReducedParams) -> Matrix6 {
    let [x, _, a1r, a1i, _, _] = *s;
    let c = SQRT_2 * r.g0;
    let (d, j, hk, hm) = (r.delta_c, r.j, 0.5 * r.kappa, 0.5 * r.gamma_m);
    let det1 = d - c * x;
    [
        [0.0, r.omega_m, 0.0, 0.0, 0.0, 0.0],
        [-r.omega_m, -hm, 2.0 * c * a1r, 2.0 * c * a1i, 0.0, 0.0],
        [-c * a1i, 0.0, -0.5, det1, 0.0, -j],
        [c * a1r, 0.0, -det1, -0.5, j, 0.0],
        [0.0, 0.0, 0.0, -j, hk, d],
        [0.0, 0.0, j, 0.0, -d, hk],
    ]
}

pub fn jacobian(s: &SystemState, r: &ReducedParams) -> Matrix6 {
    jacobian_array(&s.to_array(), r)
}

/// `M * v` without materializing `M`.
#[inline]
pub fn jacobian_apply(s: &[f64; DIM], r: &ReducedParams, v: &[f64; DIM]) -> [f64; DIM] {
    let [x, _, a1r, a1i, _, _] = *s;
    let c = SQRT_2 * r.g0;
    let det1 = r.delta_c - c * x;
    let (hk, j, d) = (0.5 * r.kappa, r.j, r.delta_c);
    [
        r.omega_m * v[1],
        -r.omega_m * v[0] - 0.5 * r.gamma_m * v[1] + 2.0 * c * (a1r * v[2] + a1i * v[3]),
        -c * a1i * v[0] - 0.5 * v[2] + det1 * v[3] - j * v[5],
        c * a1r * v[0] - det1 * v[2] - 0.5 * v[3] + j * v[4],
        -j * v[3] + hk * v[4] + d * v[5],
        j * v[2] - d * v[4] + hk * v[5],
    ]
}

/// Eigenvalues of the driven-free coupled-cavity matrix, in units of `gamma`,
/// sorted by real part (descending) and then imaginary part (descending).
pub fn linear_cavity_eigenvalues(r: &ReducedParams) -> [Complex64; 2] {
    let centre = Complex64::new(0.25 * (r.kappa - 1.0), -r.delta_c);
    let half_loss = 0.25 * (1.0 + r.kappa);
    let root = Complex64::new(half_loss * half_loss - r.j * r.j, 0.0).sqrt();
    let mut pair = [centre + root, centre - root];
    pair.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    pair
}

/// Eigenvalues of the 2x2 mechanical block `[[0, w], [-w, -gm/2]]`.
pub fn mechanical_eigenvalues(r: &ReducedParams) -> [Complex64; 2] {
    let h = 0.25 * r.gamma_m;
    let root = Complex64::new(h * h - r.omega_m * r.omega_m, 0.0).sqrt();
    [Complex64::new(-h, 0.0) + root, Complex64::new(-h, 0.0) - root]
}

/// Largest real part over both decoupled blocks; the asymptotic tangent growth
/// rate when `g0 = 0`.
pub fn linear_max_growth_rate(r: &ReducedParams) -> f64 {
    linear_cavity_eigenvalues(r)
        .iter()
        .chain(mechanical_eigenvalues(r).iter())
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Coupling at which the two supermodes coalesce, `(gamma + kappa) / 4`.
pub fn exceptional_point_coupling(gamma: f64, kappa: f64) -> f64 {
    0.25 * (gamma + kappa)
}

/// Supermode frequency splitting `sqrt(16 J^2 - (gamma + kappa)^2) / 2`, or
/// `None` where the spectrum is not split.
pub fn normal_mode_splitting(j: f64, gamma: f64, kappa: f64) -> Option<f64> {
    let loss = (gamma + kappa).powi(2);
    let arg = 16.0 * j * j - loss;
    // Rounding noise at the exceptional point itself counts as coalescence.
    let eps = 4.0 * f64::EPSILON * loss;
    if arg > eps {
        Some(0.5 * arg.sqrt())
    } else if arg >= -eps {
        Some(0.0)
    } else {
        None
    }
}

pub fn classify_phase(j: f64, gamma: f64, kappa: f64, tol: f64) -> PhaseLabel {
    let ep = exceptional_point_coupling(gamma, kappa);
    if kappa < 0.0 {
        PhaseLabel::PassivePassive
    } else if (j - ep).abs() <= tol {
        PhaseLabel::ExceptionalPoint
    } else if j > ep {
        PhaseLabel::PtSymmetric
    } else {
        PhaseLabel::PtBroken
    }
}
