//! Layered run configuration.
//!
//! Values are strings with an optional unit suffix. Layers apply in order:
//! built-in defaults, preset, config file, `--set` flags and dedicated flags.
//! Resolution converts everything to units of `gamma` and produces a
//! canonical key/value map that reproduces the same run when fed back in.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use ptchaos::analysis::{Baseline, OnsetDetector, Taper};
use ptchaos::model::HBAR;
use ptchaos::sweep::Axis;
use ptchaos::units::TimeScale;
use ptchaos::{drive_amplitude_from_power, Control, Drive, IntegratorConfig, PhysicalParams, ReducedParams, SystemState};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

type Res<T> = Result<T, ConfigError>;

fn err<T>(msg: impl Into<String>) -> Res<T> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    /// Rate relative to gamma. Bare numbers and `g` are gamma units.
    Rate,
    /// Absolute angular frequency. Bare numbers are rad/s.
    Angular,
    Power,
    /// Bare numbers are `1/gamma`.
    Time,
    /// Rate given per unit time; bare numbers are gamma units.
    InverseTime,
    Number,
    TimeRange,
    RateRange,
    RateList,
    Grid,
    Scan,
    Axes,
    Word(&'static [&'static str]),
}

struct KeySpec {
    name: &'static str,
    kind: Kind,
    default: &'static str,
    help: &'static str,
}

const KEYS: &[KeySpec] = &[
    KeySpec { name: "gamma", kind: Kind::Angular, default: "1MHz", help: "passive-cavity decay rate" },
    KeySpec { name: "omega_c", kind: Kind::Angular, default: "190e12rad/s", help: "cavity resonance" },
    KeySpec { name: "omega_m", kind: Kind::Rate, default: "23g", help: "mechanical frequency" },
    KeySpec { name: "gamma_m", kind: Kind::Rate, default: "0.038g", help: "mechanical damping" },
    KeySpec { name: "g0", kind: Kind::Rate, default: "7.4e-5g", help: "single-photon optomechanical coupling" },
    KeySpec { name: "j", kind: Kind::Rate, default: "1g", help: "tunnelling rate J" },
    KeySpec { name: "delta_c", kind: Kind::Rate, default: "23g", help: "detuning omega_c - omega_d" },
    KeySpec { name: "kappa", kind: Kind::Rate, default: "0.8g", help: "gain of the second cavity (negative: loss)" },
    KeySpec { name: "power", kind: Kind::Power, default: "1uW", help: "drive power (exclusive with omega_d)" },
    KeySpec { name: "omega_d", kind: Kind::Rate, default: "", help: "drive amplitude (exclusive with power)" },
    KeySpec { name: "x0", kind: Kind::Number, default: "0", help: "initial displacement" },
    KeySpec { name: "p0", kind: Kind::Number, default: "0", help: "initial momentum" },
    KeySpec { name: "a1_re0", kind: Kind::Number, default: "0", help: "initial Re a1" },
    KeySpec { name: "a1_im0", kind: Kind::Number, default: "0", help: "initial Im a1" },
    KeySpec { name: "a2_re0", kind: Kind::Number, default: "0", help: "initial Re a2" },
    KeySpec { name: "a2_im0", kind: Kind::Number, default: "0", help: "initial Im a2" },
    KeySpec { name: "t_end", kind: Kind::Time, default: "9us", help: "integration horizon" },
    KeySpec { name: "sample_dt", kind: Kind::Time, default: "auto", help: "output sampling interval" },
    KeySpec { name: "rel_tol", kind: Kind::Number, default: "1e-9", help: "relative error tolerance" },
    KeySpec { name: "abs_tol", kind: Kind::Number, default: "1e-9", help: "absolute error tolerance" },
    KeySpec { name: "max_step", kind: Kind::Time, default: "1", help: "largest integrator step" },
    KeySpec { name: "renorm_interval", kind: Kind::Time, default: "0.1", help: "tangent renormalisation interval" },
    KeySpec { name: "window", kind: Kind::TimeRange, default: "auto", help: "analysis window t_a:t_b (default: last microsecond)" },
    KeySpec { name: "taper", kind: Kind::Word(&["hann", "rectangular"]), default: "hann", help: "spectral taper" },
    KeySpec { name: "band", kind: Kind::RateRange, default: "auto", help: "flatness band (default 0:2 omega_m)" },
    KeySpec { name: "cluster_tol", kind: Kind::Number, default: "0.01", help: "relative tolerance for grouping maxima" },
    KeySpec { name: "lyapunov_scan", kind: Kind::Scan, default: "", help: "optional control scan for `lyapunov`" },
    KeySpec { name: "bifurcation_scan", kind: Kind::Scan, default: "j=0.6:0.1:26", help: "control scan for `bifurcation`" },
    KeySpec { name: "j_grid", kind: Kind::Grid, default: "0:2:50", help: "J/gamma values for `phase`" },
    KeySpec { name: "kappa_grid", kind: Kind::Grid, default: "-1:1:50", help: "kappa/gamma values for `phase`" },
    KeySpec { name: "ep_tol", kind: Kind::Number, default: "1e-9", help: "exceptional-point tolerance (gamma units)" },
    KeySpec { name: "drives", kind: Kind::RateList, default: "0.5,5,50,500", help: "drive amplitudes for `onset`" },
    KeySpec { name: "onset_window", kind: Kind::Time, default: "1us", help: "sliding window of the onset detector" },
    KeySpec { name: "onset_threshold", kind: Kind::InverseTime, default: "0.1/us", help: "onset exponent threshold" },
    KeySpec {
        name: "onset_baseline",
        kind: Kind::Word(&["linear_gain", "zero"]),
        default: "linear_gain",
        help: "what the windowed exponent is compared against",
    },
    KeySpec { name: "horizon_cap", kind: Kind::Time, default: "200us", help: "longest horizon tried by `onset`" },
    KeySpec { name: "sweep_axes", kind: Kind::Axes, default: "j=0.2,0.46,1", help: "one or two axes for `sweep`" },
    KeySpec { name: "sweep_onset", kind: Kind::Word(&["false", "true"]), default: "false", help: "run the onset detector in `sweep`" },
];

pub const PRESETS: &[(&str, &[(&str, &str)])] = &[
    ("fig2", &[]),
    ("fig3", &[("omega_d", "0.5g"), ("t_end", "10us")]),
    ("fig4", &[("omega_d", "0.5g"), ("j", "0.2g"), ("t_end", "12us")]),
    ("fig5ab", &[("omega_d", "0.5g"), ("kappa", "-0.8g"), ("t_end", "10us")]),
    ("fig5c", &[("omega_d", "0.5g"), ("j", "0.2g"), ("t_end", "10us")]),
];

fn spec(key: &str) -> Option<&'static KeySpec> {
    KEYS.iter().find(|k| k.name == key)
}

/// Key listing for `--help` style output.
pub fn key_help() -> String {
    KEYS.iter().map(|k| format!("  {:<18} {} [default: {}]\n", k.name, k.help, k.default)).collect()
}

/// Raw string values, merged layer by layer.
#[derive(Debug, Clone)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn new(preset: Option<&str>) -> Res<Self> {
        let mut s = Settings {
            values: KEYS.iter().filter(|k| !k.default.is_empty()).map(|k| (k.name.to_string(), k.default.to_string())).collect(),
        };
        if let Some(name) = preset {
            let Some((_, entries)) = PRESETS.iter().find(|(n, _)| *n == name) else {
                let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
                return err(format!("unknown preset `{name}` (available: {})", names.join(", ")));
            };
            s.apply(entries.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(), &format!("preset {name}"))?;
        }
        Ok(s)
    }

    /// Overlay a layer. Setting one drive key in a layer clears the other
    /// from earlier layers; setting both in one layer is checked for
    /// consistency at resolution.
    pub fn apply(&mut self, layer: BTreeMap<String, String>, source: &str) -> Res<()> {
        for key in layer.keys() {
            if spec(key).is_none() {
                return err(format!("unknown key `{key}` in {source}"));
            }
        }
        let has = |k: &str| layer.contains_key(k);
        if has("power") && !has("omega_d") {
            self.values.remove("omega_d");
        }
        if has("omega_d") && !has("power") {
            self.values.remove("power");
        }
        self.values.extend(layer);
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str, source: &str) -> Res<()> {
        self.apply(BTreeMap::from([(key.to_string(), value.to_string())]), source)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }
}

/// Parse `key=value` pairs from `--set`.
pub fn parse_assignment(s: &str) -> Res<(String, String)> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => err(format!("expected key=value, got `{s}`")),
    }
}

/// Read a JSON config file: either a flat object of key/value pairs or a run
/// manifest, whose `config` member is used.
pub fn read_config_file(path: &std::path::Path) -> Res<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    let json: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| ConfigError(format!("{} is not valid JSON: {e}", path.display())))?;
    let obj = match json.get("config") {
        Some(inner) if json.get("tool_version").is_some() => inner,
        _ => &json,
    };
    let Some(map) = obj.as_object() else {
        return err(format!("{}: expected a JSON object of key/value pairs", path.display()));
    };
    map.iter()
        .map(|(k, v)| {
            let text = match v {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Number(n) => n.to_string(),
                serde_json::Value::Bool(b) => b.to_string(),
                other => return err(format!("key `{k}`: unsupported value {other}")),
            };
            Ok((k.clone(), text))
        })
        .collect()
}

fn split_unit(s: &str) -> (&str, &str) {
    let s = s.trim();
    let cut = s.char_indices().rev().find(|(_, c)| c.is_ascii_digit() || *c == '.').map_or(0, |(i, c)| i + c.len_utf8());
    (s[..cut].trim(), s[cut..].trim())
}

fn number(key: &str, text: &str) -> Res<f64> {
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => err(format!("key `{key}`: `{text}` is not a finite number")),
    }
}

fn hz_scale(unit: &str) -> Option<f64> {
    Some(match unit {
        "Hz" => 1.0,
        "kHz" => 1e3,
        "MHz" => 1e6,
        "GHz" => 1e9,
        "THz" => 1e12,
        _ => return None,
    })
}

fn seconds(unit: &str) -> Option<f64> {
    Some(match unit {
        "s" => 1.0,
        "ms" => 1e-3,
        "us" | "μs" | "µs" => 1e-6,
        "ns" => 1e-9,
        _ => return None,
    })
}

fn mismatch<T>(key: &str, unit: &str, expected: &str) -> Res<T> {
    err(format!("key `{key}`: unit `{unit}` does not fit this quantity (expected {expected})"))
}

struct Converter {
    gamma: f64,
}

impl Converter {
    fn scalar(&self, key: &str, kind: Kind, text: &str) -> Res<f64> {
        let (num, unit) = split_unit(text);
        let v = number(key, num)?;
        match kind {
            Kind::Rate => match unit {
                "" | "g" => Ok(v),
                "rad/s" => Ok(v / self.gamma),
                u => hz_scale(u).map(|s| 2.0 * PI * v * s / self.gamma).map_or_else(|| mismatch(key, u, "g, rad/s or Hz..THz"), Ok),
            },
            Kind::Angular => match unit {
                "" | "rad/s" => Ok(v),
                "g" => Ok(v * self.gamma),
                u => hz_scale(u).map(|s| 2.0 * PI * v * s).map_or_else(|| mismatch(key, u, "rad/s, g or Hz..THz"), Ok),
            },
            Kind::Power => {
                let scale = match unit {
                    "" | "W" => 1.0,
                    "mW" => 1e-3,
                    "uW" | "μW" | "µW" => 1e-6,
                    "nW" => 1e-9,
                    "pW" => 1e-12,
                    "fW" => 1e-15,
                    u => return mismatch(key, u, "W, mW, uW, nW, pW or fW"),
                };
                Ok(v * scale)
            }
            Kind::Time => match unit {
                "" | "/g" => Ok(v),
                u => seconds(u).map(|s| v * s * self.gamma).map_or_else(|| mismatch(key, u, "s, ms, us or ns"), Ok),
            },
            Kind::InverseTime => match unit {
                "" | "g" => Ok(v),
                u => u
                    .strip_prefix('/')
                    .and_then(seconds)
                    .map(|s| v / (s * self.gamma))
                    .map_or_else(|| mismatch(key, u, "/s, /ms, /us or /ns"), Ok),
            },
            Kind::Number => match unit {
                "" => Ok(v),
                u => mismatch(key, u, "a plain number"),
            },
            _ => unreachable!("not a scalar kind"),
        }
    }

    fn range(&self, key: &str, kind: Kind, text: &str) -> Res<(f64, f64)> {
        let Some((a, b)) = text.split_once(':') else {
            return err(format!("key `{key}`: expected a range a:b, got `{text}`"));
        };
        let (a, b) = (self.scalar(key, kind, a)?, self.scalar(key, kind, b)?);
        if !(b > a) {
            return err(format!("key `{key}`: range end must exceed its start, got `{text}`"));
        }
        Ok((a, b))
    }

    /// `a,b,c` or `start:stop:count` (inclusive, evenly spaced).
    fn list(&self, key: &str, text: &str) -> Res<Vec<f64>> {
        let parts: Vec<&str> = text.split(':').collect();
        let values = match parts.as_slice() {
            [start, stop, count] => {
                let (a, b) = (self.scalar(key, Kind::Rate, start)?, self.scalar(key, Kind::Rate, stop)?);
                let n = match count.trim().parse::<usize>() {
                    Ok(n) if n >= 1 => n,
                    _ => return err(format!("key `{key}`: point count must be a positive integer, got `{count}`")),
                };
                if n == 1 {
                    vec![a]
                } else {
                    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
                }
            }
            [single] => single.split(',').map(|v| self.scalar(key, Kind::Rate, v)).collect::<Res<Vec<f64>>>()?,
            _ => return err(format!("key `{key}`: expected a list a,b,c or start:stop:count, got `{text}`")),
        };
        if values.is_empty() {
            return err(format!("key `{key}`: no values"));
        }
        Ok(values)
    }

    fn axis(&self, key: &str, text: &str) -> Res<Axis> {
        let Some((name, values)) = text.split_once('=') else {
            return err(format!("key `{key}`: expected control=values, got `{text}`"));
        };
        let control = name.trim().parse::<Control>().map_err(|e| ConfigError(format!("key `{key}`: {e}")))?;
        Ok(Axis { control, values: self.list(key, values)? })
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn fmt_list(values: &[f64]) -> String {
    values.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(",")
}

fn fmt_axis(a: &Axis) -> String {
    format!("{}={}", a.control.name(), fmt_list(&a.values))
}

/// A fully resolved run. Every time and rate is in units of `gamma`.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub physical: PhysicalParams,
    pub reduced: ReducedParams,
    pub integrator: IntegratorConfig,
    pub initial_state: SystemState,
    pub window: (f64, f64),
    pub taper: Taper,
    pub band: (f64, f64),
    pub cluster_tol: f64,
    pub lyapunov_scan: Option<Axis>,
    pub bifurcation_scan: Axis,
    pub j_grid: Vec<f64>,
    pub kappa_grid: Vec<f64>,
    pub ep_tol: f64,
    pub drives: Vec<f64>,
    pub detector: OnsetDetector,
    pub horizon_cap: f64,
    pub sweep_axes: Vec<Axis>,
    pub sweep_onset: bool,
    /// Canonical form: feeding this map back in reproduces the run exactly.
    pub canonical: BTreeMap<String, String>,
}

impl Resolved {
    pub fn time_scale(&self) -> TimeScale {
        TimeScale { gamma: self.physical.gamma }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolvedSummary<'a> {
    pub physical: &'a PhysicalParams,
    pub reduced: &'a ReducedParams,
    pub integrator: &'a IntegratorConfig,
}

pub fn resolve(s: &Settings) -> Res<Resolved> {
    let raw = |k: &str| s.get(k).unwrap_or("");
    let mut canonical = BTreeMap::new();
    let mut put = |k: &str, v: String| {
        canonical.insert(k.to_string(), v);
    };

    let gamma = Converter { gamma: 1.0 }.scalar("gamma", Kind::Angular, raw("gamma"))?;
    if !(gamma > 0.0) {
        return err("key `gamma`: must be positive");
    }
    let c = Converter { gamma };
    let scalar = |k: &str| c.scalar(k, spec(k).expect("known key").kind, raw(k));
    put("gamma", fmt_f64(gamma));
    let omega_c = scalar("omega_c")?;
    put("omega_c", fmt_f64(omega_c));

    let mut r = ReducedParams { omega_m: 0.0, gamma_m: 0.0, g0: 0.0, j: 0.0, delta_c: 0.0, kappa: 0.0, omega_d_amp: 0.0 };
    for (k, slot) in [
        ("omega_m", &mut r.omega_m),
        ("gamma_m", &mut r.gamma_m),
        ("g0", &mut r.g0),
        ("j", &mut r.j),
        ("delta_c", &mut r.delta_c),
        ("kappa", &mut r.kappa),
    ] {
        *slot = scalar(k)?;
        put(k, fmt_f64(*slot));
    }

    let omega_d_laser = omega_c - r.delta_c * gamma;
    let from_power = |p: f64| {
        drive_amplitude_from_power(p, gamma, omega_d_laser, HBAR)
            .map(|a| a / gamma)
            .map_err(|e| ConfigError(format!("key `power`: {e}")))
    };
    let drive = match (s.get("power"), s.get("omega_d")) {
        (Some(_), Some(_)) => {
            let (p, amp) = (scalar("power")?, scalar("omega_d")?);
            let implied = from_power(p)?;
            if (implied - amp).abs() > 1e-9 * amp.abs().max(implied.abs()) {
                return err(format!(
                    "conflicting drive: `power` = {} implies omega_d = {} g, but `omega_d` = {} g; set only one of `power` and `omega_d`",
                    raw("power"),
                    fmt_f64(implied),
                    fmt_f64(amp)
                ));
            }
            put("omega_d", fmt_f64(amp));
            r.omega_d_amp = amp;
            Drive::Amplitude(amp * gamma)
        }
        (Some(_), None) => {
            let p = scalar("power")?;
            r.omega_d_amp = from_power(p)?;
            put("power", fmt_f64(p));
            Drive::Power(p)
        }
        (None, Some(_)) => {
            r.omega_d_amp = scalar("omega_d")?;
            put("omega_d", fmt_f64(r.omega_d_amp));
            Drive::Amplitude(r.omega_d_amp * gamma)
        }
        (None, None) => return err("no drive given: set `power` or `omega_d`"),
    };
    r.validate().map_err(|e| ConfigError(e.to_string()))?;
    let physical = PhysicalParams { drive, ..r.rescale(gamma, omega_c, HBAR) };

    let mut init = [0.0; 6];
    for (slot, k) in init.iter_mut().zip(["x0", "p0", "a1_re0", "a1_im0", "a2_re0", "a2_im0"]) {
        *slot = scalar(k)?;
        put(k, fmt_f64(*slot));
    }

    let t_end = scalar("t_end")?;
    let sample_dt = if raw("sample_dt") == "auto" { IntegratorConfig::default_sample_dt(&r) } else { scalar("sample_dt")? };
    let integrator = IntegratorConfig {
        rel_tol: scalar("rel_tol")?,
        abs_tol: scalar("abs_tol")?,
        max_step: scalar("max_step")?,
        sample_dt,
        t_end,
        renorm_interval: scalar("renorm_interval")?,
    };
    integrator.validate().map_err(|e| ConfigError(e.to_string()))?;
    for (k, v) in [
        ("t_end", t_end),
        ("sample_dt", sample_dt),
        ("rel_tol", integrator.rel_tol),
        ("abs_tol", integrator.abs_tol),
        ("max_step", integrator.max_step),
        ("renorm_interval", integrator.renorm_interval),
    ] {
        put(k, fmt_f64(v));
    }

    let window = if raw("window") == "auto" {
        ((t_end - c.scalar("window", Kind::Time, "1us")?).max(0.0), t_end)
    } else {
        c.range("window", Kind::Time, raw("window"))?
    };
    if window.1 > t_end {
        return err(format!("key `window`: ends at {} but `t_end` is {}", fmt_f64(window.1), fmt_f64(t_end)));
    }
    put("window", format!("{}:{}", fmt_f64(window.0), fmt_f64(window.1)));

    let taper = match raw("taper") {
        "hann" => Taper::Hann,
        "rectangular" => Taper::Rectangular,
        other => return err(format!("key `taper`: expected hann or rectangular, got `{other}`")),
    };
    put("taper", raw("taper").to_string());
    let band = if raw("band") == "auto" { (0.0, 2.0 * r.omega_m) } else { c.range("band", Kind::Rate, raw("band"))? };
    put("band", format!("{}:{}", fmt_f64(band.0), fmt_f64(band.1)));
    let cluster_tol = scalar("cluster_tol")?;
    put("cluster_tol", fmt_f64(cluster_tol));

    let lyapunov_scan = match raw("lyapunov_scan") {
        "" => None,
        text => Some(c.axis("lyapunov_scan", text)?),
    };
    put("lyapunov_scan", lyapunov_scan.as_ref().map_or(String::new(), fmt_axis));
    let bifurcation_scan = c.axis("bifurcation_scan", raw("bifurcation_scan"))?;
    put("bifurcation_scan", fmt_axis(&bifurcation_scan));

    let j_grid = c.list("j_grid", raw("j_grid"))?;
    let kappa_grid = c.list("kappa_grid", raw("kappa_grid"))?;
    let ep_tol = scalar("ep_tol")?;
    put("j_grid", fmt_list(&j_grid));
    put("kappa_grid", fmt_list(&kappa_grid));
    put("ep_tol", fmt_f64(ep_tol));

    let drives = c.list("drives", raw("drives"))?;
    put("drives", fmt_list(&drives));
    let onset_window = scalar("onset_window")?;
    let threshold = scalar("onset_threshold")?;
    let baseline = match raw("onset_baseline") {
        "linear_gain" => Baseline::LinearGain,
        "zero" => Baseline::Zero,
        other => return err(format!("key `onset_baseline`: expected linear_gain or zero, got `{other}`")),
    };
    let detector = OnsetDetector { window: onset_window, threshold, baseline, confirm: Some(2.0 * onset_window) };
    detector.validate().map_err(|e| ConfigError(format!("onset detector: {e}")))?;
    put("onset_window", fmt_f64(onset_window));
    put("onset_threshold", fmt_f64(threshold));
    put("onset_baseline", raw("onset_baseline").to_string());
    let horizon_cap = scalar("horizon_cap")?;
    put("horizon_cap", fmt_f64(horizon_cap));

    let sweep_axes = raw("sweep_axes").split(';').map(|a| c.axis("sweep_axes", a)).collect::<Res<Vec<Axis>>>()?;
    if sweep_axes.len() > 2 {
        return err("key `sweep_axes`: at most two axes");
    }
    put("sweep_axes", sweep_axes.iter().map(fmt_axis).collect::<Vec<_>>().join(";"));
    let sweep_onset = match raw("sweep_onset") {
        "true" => true,
        "false" => false,
        other => return err(format!("key `sweep_onset`: expected true or false, got `{other}`")),
    };
    put("sweep_onset", sweep_onset.to_string());

    Ok(Resolved {
        physical,
        reduced: r,
        integrator,
        initial_state: SystemState::from_array(init),
        window,
        taper,
        band,
        cluster_tol,
        lyapunov_scan,
        bifurcation_scan,
        j_grid,
        kappa_grid,
        ep_tol,
        drives,
        detector,
        horizon_cap,
        sweep_axes,
        sweep_onset,
        canonical,
    })
}
