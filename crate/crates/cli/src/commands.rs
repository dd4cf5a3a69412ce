use std::collections::BTreeMap;
use std::path::Path;

use ptchaos::analysis::{
    bifurcation_scan, intensity_spectrum, lyapunov_from_log, power_spectrum_timed, spectral_flatness, LyapunovResult,
    SpectrumResult,
};
use ptchaos::sweep::{onset_curve, parallel_map, phase_diagram_scan, run_sweep, AnalysisRecipe, FlatnessRecipe, SweepGrid};
use ptchaos::{integrate, integrate_with_tangent, IntegratorConfig, PhaseLabel, TangentVector};
use serde::Serialize;

use crate::config::Resolved;
use crate::output::{Cell, Column, Format, OutputDir, Table};

pub type CmdResult = Result<String, Box<dyn std::error::Error>>;

pub struct Ctx<'a> {
    pub run: &'a Resolved,
    pub out: &'a mut OutputDir,
    pub format: Format,
    pub workers: usize,
}

/// Every control parameter is a rate in units of gamma.
const CONTROL_UNIT: &str = "gamma";

fn window_note(run: &Resolved) -> String {
    let ts = run.time_scale();
    format!("analysis window {} to {} us", ts.to_us(run.window.0), ts.to_us(run.window.1))
}

fn window_cfg(run: &Resolved) -> IntegratorConfig {
    IntegratorConfig { t_end: run.window.1, ..run.integrator }
}

pub fn simulate(ctx: Ctx) -> CmdResult {
    let run = ctx.run;
    let ts = run.time_scale();
    let traj = integrate(&run.initial_state, &run.reduced, &run.integrator)?;
    let comp = |k: usize| traj.component(k);
    let table = Table::new(
        "trajectory",
        vec![
            Column::num("t", "1/gamma", traj.times.clone()),
            Column::num("t_us", "us", traj.times.iter().map(|t| ts.to_us(*t))),
            Column::num("x", "dimensionless", comp(0)),
            Column::num("p", "dimensionless", comp(1)),
            Column::num("a1_re", "sqrt(photon number)", comp(2)),
            Column::num("a1_im", "sqrt(photon number)", comp(3)),
            Column::num("a2_re", "sqrt(photon number)", comp(4)),
            Column::num("a2_im", "sqrt(photon number)", comp(5)),
            Column::num("I1", "photon number", traj.i1.clone()),
            Column::num("I2", "photon number", traj.i2.clone()),
        ],
    )
    .note(format!("phase {}", run.reduced.phase()));
    ctx.out.table("trajectory", &table, ctx.format)?;
    let max_i1 = traj.i1.iter().cloned().fold(0.0, f64::max);
    Ok(format!(
        "simulated {} samples to {:.4} us ({}), max I1 = {max_i1:.4e}",
        traj.len(),
        ts.to_us(run.integrator.t_end),
        run.reduced.phase()
    ))
}

#[derive(Serialize)]
struct SpectrumSummary {
    source: String,
    peak_frequency: f64,
    resolution: f64,
    band: (f64, f64),
    flatness: f64,
    frequency_unit: &'static str,
}

/// Two numeric columns (time in `1/gamma`, value) from a CSV file.
fn read_series(path: &Path) -> Result<(Vec<f64>, Vec<f64>), String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut t = Vec::new();
    let mut v = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Option<Vec<f64>> = fields.iter().take(2).map(|f| f.parse().ok()).collect();
        match parsed {
            Some(p) if p.len() == 2 => {
                t.push(p[0]);
                v.push(p[1]);
            }
            // A column-name row before the first data row.
            _ if t.is_empty() => continue,
            _ => return Err(format!("{}:{}: expected two numeric columns", path.display(), n + 1)),
        }
    }
    Ok((t, v))
}

pub fn spectrum(ctx: Ctx, input: Option<&Path>) -> CmdResult {
    let run = ctx.run;
    let (spec, source): (SpectrumResult, String) = match input {
        Some(path) => {
            let (t, v) = read_series(path)?;
            (power_spectrum_timed(&t, &v, run.taper)?, path.display().to_string())
        }
        None => {
            let traj = integrate(&run.initial_state, &run.reduced, &window_cfg(run))?;
            (intensity_spectrum(&traj, run.window, run.taper)?, "I1 of the configured run".into())
        }
    };
    let flatness = spectral_flatness(&spec, run.band)?;
    let mut table = Table::new(
        "power spectrum",
        vec![
            Column::num("omega", "gamma", spec.frequencies.clone()),
            Column::num("power", "signal^2 (one-sided, mean removed)", spec.power.clone()),
            Column::num("ln_power", "ln(signal^2)", spec.log_power.clone()),
        ],
    )
    .note(format!("source {source}"));
    if input.is_none() {
        table = table.note(window_note(run));
    }
    ctx.out.table("spectrum", &table, ctx.format)?;
    let summary = SpectrumSummary {
        source,
        peak_frequency: spec.peak_frequency(),
        resolution: spec.resolution,
        band: run.band,
        flatness,
        frequency_unit: "gamma",
    };
    ctx.out.json("spectrum_summary.json", &summary)?;
    Ok(format!("peak at omega = {:.4} gamma, flatness = {flatness:.3e}", summary.peak_frequency))
}

#[derive(Serialize)]
struct LyapunovSummary {
    lambda_benettin: f64,
    lambda_slope_d_i1: f64,
    lambda_benettin_per_us: f64,
    lambda_slope_d_i1_per_us: f64,
    window: (f64, f64),
    fit_residual: f64,
    fit_points: usize,
    rate_unit: &'static str,
}

pub fn lyapunov(ctx: Ctx) -> CmdResult {
    let run = ctx.run;
    let ts = run.time_scale();
    let cfg = window_cfg(run);
    if let Some(axis) = &run.lyapunov_scan {
        let results: Vec<Result<LyapunovResult, String>> = parallel_map(&axis.values, ctx.workers, |_, v| {
            let r = run.reduced.with(axis.control, *v);
            ptchaos::analysis::lyapunov(&run.initial_state, &TangentVector::uniform(), &r, &cfg, run.window)
                .map_err(|e| e.to_string())
        });
        let pick = |f: &dyn Fn(&LyapunovResult) -> f64| -> Vec<Cell> {
            results.iter().map(|r| r.as_ref().ok().map(f).into()).collect()
        };
        let table = Table::new(
            "lyapunov scan",
            vec![
                Column::num(axis.control.name(), CONTROL_UNIT, axis.values.clone()),
                Column::cells("lambda_benettin", "gamma", pick(&|l| l.lambda_benettin)),
                Column::cells("lambda_slope_d_i1", "gamma", pick(&|l| l.lambda_slope_d_i1)),
                Column::cells("lambda_benettin_per_us", "1/us", pick(&|l| l.benettin_per_us(&ts))),
                Column::cells(
                    "error",
                    "text",
                    results.iter().map(|r| r.as_ref().err().map_or(Cell::Missing, |e| Cell::Text(csv_safe(e)))).collect(),
                ),
            ],
        )
        .note(window_note(run));
        ctx.out.table("lyapunov_scan", &table, ctx.format)?;
        let ok: Vec<f64> = results.iter().filter_map(|r| r.as_ref().ok().map(|l| l.lambda_benettin)).collect();
        let positive = ok.iter().filter(|l| **l > 0.0).count();
        return Ok(format!(
            "{} points, {positive} with lambda > 0, {} failed",
            axis.values.len(),
            results.len() - ok.len()
        ));
    }
    let (traj, log) = integrate_with_tangent(&run.initial_state, &TangentVector::uniform(), &run.reduced, &cfg)?;
    let l = lyapunov_from_log(&traj, &log, cfg.renorm_interval, run.window)?;
    let table = Table::new(
        "intensity perturbation",
        vec![
            Column::num("t", "1/gamma", traj.times.clone()),
            Column::num("t_us", "us", traj.times.iter().map(|t| ts.to_us(*t))),
            Column::cells(
                "ln_abs_d_i1",
                "ln(photon number)",
                log.ln_abs_d_i1.iter().map(|v| if v.is_finite() { Cell::Num(*v) } else { Cell::Missing }).collect(),
            ),
        ],
    )
    .note(window_note(run));
    ctx.out.table("perturbation", &table, ctx.format)?;
    let summary = LyapunovSummary {
        lambda_benettin: l.lambda_benettin,
        lambda_slope_d_i1: l.lambda_slope_d_i1,
        lambda_benettin_per_us: l.benettin_per_us(&ts),
        lambda_slope_d_i1_per_us: l.slope_per_us(&ts),
        window: l.window,
        fit_residual: l.fit_residual,
        fit_points: l.fit_points,
        rate_unit: "gamma",
    };
    ctx.out.json("lyapunov.json", &summary)?;
    Ok(format!("lambda = {:+.3e} /us (slope of ln|dI1|: {:+.3e} /us)", summary.lambda_benettin_per_us, summary.lambda_slope_d_i1_per_us))
}

fn csv_safe(s: &str) -> String {
    s.replace([',', '\n'], ";")
}

pub fn bifurcation(ctx: Ctx) -> CmdResult {
    let run = ctx.run;
    let axis = &run.bifurcation_scan;
    let d = bifurcation_scan(&run.reduced, axis.control, &axis.values, &window_cfg(run), run.window, ctx.workers)?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (v, maxima) in d.values.iter().zip(&d.maxima) {
        for m in maxima {
            xs.push(*v);
            ys.push(*m);
        }
    }
    let table = Table::new(
        "bifurcation diagram: local maxima of I1",
        vec![Column::num(axis.control.name(), CONTROL_UNIT, xs), Column::num("I1_max", "photon number", ys)],
    )
    .note(window_note(run));
    ctx.out.table("bifurcation", &table, ctx.format)?;
    let counts = d.cluster_counts(run.cluster_tol);
    let clusters = Table::new(
        "distinct maxima per control value",
        vec![
            Column::num(axis.control.name(), CONTROL_UNIT, d.values.clone()),
            Column::num("clusters", "count", counts.iter().map(|c| *c as f64)),
            Column::num("maxima", "count", d.maxima.iter().map(|m| m.len() as f64)),
            Column::cells(
                "error",
                "text",
                d.errors.iter().map(|e| e.as_deref().map_or(Cell::Missing, |e| Cell::Text(csv_safe(e)))).collect(),
            ),
        ],
    )
    .note(format!("relative cluster tolerance {}", run.cluster_tol));
    ctx.out.table("bifurcation_clusters", &clusters, ctx.format)?;
    let failed = d.errors.iter().filter(|e| e.is_some()).count();
    Ok(format!(
        "{} control values, {} maxima, cluster counts {}..{}, {failed} failed",
        d.values.len(),
        d.maxima.iter().map(Vec::len).sum::<usize>(),
        counts.iter().min().unwrap_or(&0),
        counts.iter().max().unwrap_or(&0)
    ))
}

pub fn phase(ctx: Ctx) -> CmdResult {
    let run = ctx.run;
    let grid = phase_diagram_scan(&run.j_grid, &run.kappa_grid, 1.0, run.ep_tol)?;
    let (mut j, mut k, mut labels) = (Vec::new(), Vec::new(), Vec::new());
    let mut tally: BTreeMap<&str, usize> = BTreeMap::new();
    for (ki, kappa) in grid.kappa_values.iter().enumerate() {
        for (ji, jv) in grid.j_values.iter().enumerate() {
            let label: PhaseLabel = grid.labels[ki][ji];
            j.push(*jv);
            k.push(*kappa);
            labels.push(Cell::Text(label.as_str().to_string()));
            *tally.entry(label.as_str()).or_default() += 1;
        }
    }
    let table = Table::new(
        "phase diagram",
        vec![Column::num("J", "gamma", j), Column::num("kappa", "gamma", k), Column::cells("phase", "label", labels)],
    )
    .note(format!("exceptional point tolerance {} gamma", run.ep_tol));
    ctx.out.table("phase", &table, ctx.format)?;
    let parts: Vec<String> = tally.iter().map(|(l, n)| format!("{l} {n}")).collect();
    Ok(format!("{}x{} grid: {}", grid.j_values.len(), grid.kappa_values.len(), parts.join(", ")))
}

pub fn onset(ctx: Ctx) -> CmdResult {
    let run = ctx.run;
    let ts = run.time_scale();
    let curve = onset_curve(&run.drives, &run.reduced, &run.integrator, &run.detector, run.horizon_cap, ctx.workers)?;
    let table = Table::new(
        "chaos onset time versus drive",
        vec![
            Column::num("omega_d", "gamma", curve.iter().map(|p| p.omega_d_amp)),
            Column::cells("tau", "1/gamma", curve.iter().map(|p| p.tau.into()).collect()),
            Column::cells("tau_us", "us", curve.iter().map(|p| p.tau.map(|t| ts.to_us(t)).into()).collect()),
            Column::num("horizon_us", "us", curve.iter().map(|p| ts.to_us(p.horizon))),
            Column::cells(
                "horizon_end",
                "label",
                curve
                    .iter()
                    .map(|p| {
                        p.horizon_end.map_or(Cell::Missing, |h| {
                            Cell::Text(serde_json::to_value(h).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default())
                        })
                    })
                    .collect(),
            ),
            Column::cells(
                "error",
                "text",
                curve.iter().map(|p| p.error.as_deref().map_or(Cell::Missing, |e| Cell::Text(csv_safe(e)))).collect(),
            ),
        ],
    )
    .note(format!(
        "detector window {} us, threshold {} /us",
        ts.to_us(run.detector.window),
        ts.rate_to_per_us(run.detector.threshold)
    ));
    ctx.out.table("onset", &table, ctx.format)?;
    let parts: Vec<String> = curve
        .iter()
        .map(|p| format!("{}: {}", p.omega_d_amp, p.tau.map_or("none".to_string(), |t| format!("{:.3} us", ts.to_us(t)))))
        .collect();
    Ok(format!("tau {}", parts.join(", ")))
}

pub fn sweep(ctx: Ctx) -> CmdResult {
    let run = ctx.run;
    let grid = SweepGrid {
        base: run.reduced,
        axes: run.sweep_axes.clone(),
        recipe: AnalysisRecipe {
            lyapunov_window: Some(run.window),
            flatness: Some(FlatnessRecipe { window: run.window, band: run.band }),
            onset: run.sweep_onset.then_some(run.detector),
        },
        integrator: run.integrator,
        initial_state: run.initial_state,
        workers: ctx.workers,
    };
    let res = run_sweep(&grid)?;
    ctx.out.write("sweep.json", &res.to_json())?;
    let mut columns: Vec<Column> = grid
        .axes
        .iter()
        .enumerate()
        .map(|(i, a)| Column::num(a.control.name(), CONTROL_UNIT, res.outcomes.iter().map(|o| o.coords[i])))
        .collect();
    let o = &res.outcomes;
    columns.push(Column::cells("phase", "label", o.iter().map(|p| Cell::Text(p.phase.as_str().into())).collect()));
    columns.push(Column::cells("lambda_benettin", "gamma", o.iter().map(|p| p.lambda_benettin.into()).collect()));
    columns.push(Column::cells("lambda_slope_d_i1", "gamma", o.iter().map(|p| p.lambda_slope_d_i1.into()).collect()));
    columns.push(Column::cells("flatness", "dimensionless", o.iter().map(|p| p.flatness.into()).collect()));
    columns.push(Column::cells("tau", "1/gamma", o.iter().map(|p| p.tau.into()).collect()));
    columns.push(Column::cells(
        "error",
        "text",
        o.iter().map(|p| p.error.as_deref().map_or(Cell::Missing, |e| Cell::Text(csv_safe(e)))).collect(),
    ));
    let table = Table::new("sweep", columns).note(window_note(run)).note(format!("config hash {}", res.provenance.config_hash));
    ctx.out.table("sweep_points", &table, ctx.format)?;
    Ok(format!("{} points, {} failed, config hash {}", o.len(), res.failures().count(), &res.provenance.config_hash[..12]))
}
