//! End-to-end acceptance checks. Runs as a plain binary so that every
//! criterion prints its verdict line and a final tally.
//!
//! Failed criteria are reported but only change the exit status when
//! `PTCHAOS_ACCEPTANCE_STRICT=1` is set; a panic always fails the run.
//! Pass criterion numbers as arguments to run a subset:
//! `cargo test --test acceptance -- 5 9`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use ptchaos::analysis::*;
use ptchaos::model::{jacobian_array, rhs, DIM};
use ptchaos::sweep::*;
use ptchaos::units::TimeScale;
use ptchaos::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict { pass, detail: detail.into() }
    }
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Verdict,
}

fn ts() -> TimeScale {
    TimeScale::default()
}

fn us(t: f64) -> f64 {
    ts().from_us(t)
}

fn per_us(rate: f64) -> f64 {
    ts().rate_to_per_us(rate)
}

/// Drive amplitude of the 1 uW reference configuration, in units of gamma.
fn reference_drive() -> f64 {
    let p = PhysicalParams::fig2();
    p.drive_amplitude().unwrap() / p.gamma
}

fn benettin(r: &ReducedParams, window: (f64, f64)) -> Result<LyapunovResult> {
    let cfg = IntegratorConfig::for_params(r, window.1);
    lyapunov(&SystemState::ZERO, &TangentVector::uniform(), r, &cfg, window)
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::INFINITY, f64::min)
}

// 1 ------------------------------------------------------------------------

fn jacobian_vs_finite_differences() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let r = ReducedParams {
            omega_m: rng.gen_range(0.5..40.0),
            gamma_m: rng.gen_range(0.0..1.0),
            g0: rng.gen_range(0.0..0.1),
            j: rng.gen_range(0.0..3.0),
            delta_c: rng.gen_range(-40.0..40.0),
            kappa: rng.gen_range(-2.0..2.0),
            omega_d_amp: rng.gen_range(0.0..1e3),
        };
        let s: [f64; DIM] = std::array::from_fn(|_| rng.gen_range(-100.0..100.0));
        let exact = jacobian_array(&s, &r);
        let scale = exact.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        for col in 0..DIM {
            let h = 1e-6 * s[col].abs().max(1.0);
            let (mut up, mut dn) = (s, s);
            up[col] += h;
            dn[col] -= h;
            let (fu, fd) = (rhs(&up, &r), rhs(&dn, &r));
            for row in 0..DIM {
                let approx = (fu[row] - fd[row]) / (2.0 * h);
                worst = worst.max((exact[row][col] - approx).abs() / scale);
            }
        }
    }
    Verdict::new(worst <= 1e-5, format!("max relative entry error {worst:.2e} (limit 1e-5)"))
}

// 2 ------------------------------------------------------------------------

fn ep_and_splitting() -> Verdict {
    let mut worst_gap: f64 = 0.0;
    let mut worst_split: f64 = 0.0;
    for kappa in [-0.8, 0.0, 0.8, 1.0] {
        let base = ReducedParams { kappa, ..ReducedParams::fig2_with(0.0, 0.0) };
        let ep = exceptional_point_coupling(1.0, kappa);
        let [a, b] = linear_cavity_eigenvalues(&base.with(Control::J, ep));
        worst_gap = worst_gap.max((a - b).norm());
        for excess in [0.01, 0.1, 0.5, 2.0] {
            let j = ep + excess;
            let [a, b] = linear_cavity_eigenvalues(&base.with(Control::J, j));
            let expected = (16.0 * j * j - (1.0 + kappa).powi(2)).sqrt() / 2.0;
            worst_split = worst_split.max(((a.im - b.im).abs() - expected).abs() / expected);
        }
    }
    Verdict::new(
        worst_gap < 1e-10 && worst_split <= 1e-10,
        format!("EP gap {worst_gap:.2e} (limit 1e-10), splitting rel. error {worst_split:.2e} (limit 1e-10)"),
    )
}

// 3 ------------------------------------------------------------------------

fn drive_conversion() -> Verdict {
    let ratio = |power: f64| {
        let p = PhysicalParams { drive: Drive::Power(power), ..PhysicalParams::fig2() };
        p.drive_amplitude().unwrap() / p.gamma
    };
    let strong = ratio(1e-6);
    let weak = ratio(0.02e-12);
    let strong_err = (strong / 4000.0 - 1.0).abs();
    let weak_err = (weak / 0.5 - 1.0).abs();
    Verdict::new(
        strong_err <= 0.05 && weak_err <= 0.10,
        format!(
            "1 uW -> {strong:.1} ({:.1}% from 4000, limit 5%); 0.02 pW -> {weak:.4} ({:.1}% from 0.5, limit 10%)",
            100.0 * strong_err,
            100.0 * weak_err
        ),
    )
}

// 4 ------------------------------------------------------------------------

fn linear_lyapunov_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let mut draws = 0;
    let window = (100.0, 1100.0);
    while draws < 20 {
        let r = ReducedParams {
            omega_m: rng.gen_range(1.0..30.0),
            gamma_m: rng.gen_range(0.01..1.0),
            g0: 0.0,
            j: rng.gen_range(0.0..2.0),
            delta_c: rng.gen_range(-30.0..30.0),
            kappa: rng.gen_range(-2.0..1.0),
            omega_d_amp: rng.gen_range(0.0..100.0),
        };
        // Stable draws away from the exceptional point, where the Jordan block
        // adds a polynomial factor to the growth.
        let expected = linear_max_growth_rate(&r);
        if expected >= 0.0 || (r.j - exceptional_point_coupling(1.0, r.kappa)).abs() < 0.05 {
            continue;
        }
        draws += 1;
        match benettin(&r, window) {
            Ok(l) => worst = worst.max((l.lambda_benettin - expected).abs()),
            Err(e) => return Verdict::new(false, format!("integration failed for {r:?}: {e}")),
        }
    }
    Verdict::new(worst <= 1e-3, format!("max |lambda - max Re(eig)| = {worst:.2e} gamma over 20 draws (limit 1e-3)"))
}

// 5 ------------------------------------------------------------------------

fn phase_controlled_chaos() -> Verdict {
    let omega = reference_drive();
    let window = (us(8.0), us(9.0));
    let lam = |j: f64| benettin(&ReducedParams::fig2_with(j, omega), window).map(|l| l.lambda_benettin);
    let (at_one, at_fifth) = match (lam(1.0), lam(0.2)) {
        (Ok(a), Ok(b)) => (a, b),
        (a, b) => return Verdict::new(false, format!("integration failed: {a:?} {b:?}")),
    };
    let js: Vec<f64> = (0..20).map(|k| 1.0 - 0.9 * k as f64 / 19.0).collect();
    let mut scan = Vec::new();
    for &j in &js {
        match lam(j) {
            Ok(v) => scan.push(v),
            Err(e) => return Verdict::new(false, format!("integration failed at J = {j}: {e}")),
        }
    }
    // First positive exponent met while lowering J.
    let first_positive = js.iter().zip(&scan).find(|(_, l)| **l > 0.0).map(|(j, _)| *j);
    let regular_above = js.iter().zip(&scan).filter(|(j, _)| **j >= 0.46).all(|(_, l)| *l <= 0.0);
    let pass = at_one <= 0.0 && at_fifth > 0.0 && regular_above && first_positive.is_some_and(|j| j < 0.46);
    Verdict::new(
        pass,
        format!(
            "lambda(J=1) = {:+.3e} /us, lambda(J=0.2) = {:+.3e} /us, first positive at J = {}",
            per_us(at_one),
            per_us(at_fifth),
            first_positive.map_or("none".into(), |j| format!("{j:.4}"))
        ),
    )
}

// 6 ------------------------------------------------------------------------

fn spectrum_contrast() -> Verdict {
    let omega = reference_drive();
    let window = (us(8.0), us(9.0));
    let spectrum = |j: f64| -> Result<SpectrumResult> {
        let r = ReducedParams::fig2_with(j, omega);
        let traj = integrate(&SystemState::ZERO, &r, &IntegratorConfig::for_params(&r, window.1))?;
        intensity_spectrum(&traj, window, Taper::Hann)
    };
    let (broken, symmetric, near_ep) = match (spectrum(0.2), spectrum(1.0), spectrum(0.46)) {
        (Ok(a), Ok(b), Ok(c)) => (a, b, c),
        (a, b, c) => return Verdict::new(false, format!("run failed: {:?} {:?} {:?}", a.err(), b.err(), c.err())),
    };
    let band = (0.0, 2.0 * 23.0);
    let fb = spectral_flatness(&broken, band).unwrap();
    let fs = spectral_flatness(&symmetric, band).unwrap();
    let peak = near_ep.peak_frequency();
    let pass = fb >= 5.0 * fs && (peak - 23.0).abs() <= near_ep.resolution;
    Verdict::new(
        pass,
        format!(
            "flatness J=0.2: {fb:.3e}, J=1: {fs:.3e} (ratio {:.1}, need >= 5); J=0.46 peak at {peak:.2} gamma (omega_m = 23, bin {:.2})",
            fb / fs,
            near_ep.resolution
        ),
    )
}

// 7 ------------------------------------------------------------------------

fn period_doubling_route() -> Verdict {
    let omega = reference_drive();
    let window = (us(8.0), us(9.0));
    let base = ReducedParams::fig2_with(1.0, omega);
    let js: Vec<f64> = (0..=25).map(|k| 0.6 - 0.02 * k as f64).collect();
    let cfg = IntegratorConfig::for_params(&base, window.1);
    let diagram = match bifurcation_scan(&base, Control::J, &js, &cfg, window, 0) {
        Ok(d) => d,
        Err(e) => return Verdict::new(false, format!("scan failed: {e}")),
    };
    // Ordered from the symmetric side (large J) into the broken side.
    let rel_tol = 0.01;
    let counts: Vec<usize> = diagram.cluster_counts(rel_tol).into_iter().rev().collect();
    let sizes: Vec<usize> = diagram.maxima.iter().rev().map(Vec::len).collect();
    let dense = |k: usize| counts[k] >= 8.max(sizes[k] / 2);
    let first_dense = (0..counts.len()).find(|&k| dense(k)).unwrap_or(counts.len());
    let monotone = counts.windows(2).all(|w| w[1] >= w[0]);
    let doubling = (1..first_dense).any(|k| counts[k - 1] > 0 && counts[k] == 2 * counts[k - 1]);
    let listing: Vec<String> = diagram
        .values
        .iter()
        .rev()
        .zip(&counts)
        .map(|(j, c)| format!("{j:.2}:{c}"))
        .collect();
    Verdict::new(
        monotone && doubling,
        format!(
            "clusters (J:count) {}; non-decreasing = {monotone}, doubling before dense regime = {doubling}",
            listing.join(" ")
        ),
    )
}

// 8 ------------------------------------------------------------------------

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    sab / (saa * sbb).sqrt()
}

fn trajectory_morphology() -> Verdict {
    let horizon = us(12.0);

    let r = ReducedParams::fig2_with(1.0, 0.5);
    let sym = match integrate(&SystemState::ZERO, &r, &IntegratorConfig::for_params(&r, horizon)) {
        Ok(t) => t,
        Err(e) => return Verdict::new(false, format!("J = 1 run failed: {e}")),
    };
    let early = sym.window_indices(0.0, us(2.0));
    let exchange = correlation(&sym.i1[early.clone()], &sym.i2[early]);
    let late = sym.window_indices(horizon - us(2.0), horizon);
    let bounded_sym = max_of(&sym.i1[late.clone()]) <= max_of(&sym.i1) && max_of(&sym.i2[late]) <= max_of(&sym.i2);
    let sym_ok = bounded_sym && exchange < 0.0;

    let r = ReducedParams::fig2_with(0.2, 0.5);
    let brk = match integrate(&SystemState::ZERO, &r, &IntegratorConfig::for_params(&r, horizon)) {
        Ok(t) => t,
        Err(e) => return Verdict::new(false, format!("J = 0.2 run failed: {e}")),
    };
    // Exponential stage: a 2 us window where ln I1 is a straight rising line.
    let mut growth: Option<(f64, f64, f64)> = None;
    let mut start = 0.0;
    while start + 2.0 <= ts().to_us(horizon) {
        let idx = brk.window_indices(us(start), us(start + 2.0));
        let t: Vec<f64> = brk.times[idx.clone()].to_vec();
        let y: Vec<f64> = brk.i1[idx].iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).collect();
        if let Some((slope, _, r2)) = linear_fit(&t, &y) {
            if slope > 0.0 && r2 > 0.99 {
                growth = Some((start + 2.0, slope, r2));
            }
        }
        start += 0.25;
    }
    let Some((growth_end, growth_rate, r2)) = growth else {
        return Verdict::new(false, format!("no 2 us interval with log-linear growth (R^2 > 0.99); exchange corr {exchange:.3}"));
    };
    // After the growth stage the motion should be irregular and bounded: the
    // I1 envelope may not keep climbing.
    let chunk = us(0.25);
    let mut env_t = Vec::new();
    let mut env = Vec::new();
    let mut t0 = us(growth_end);
    while t0 + chunk <= horizon + 1e-9 {
        let idx = brk.window_indices(t0, t0 + chunk);
        env_t.push(t0 + 0.5 * chunk);
        env.push(max_of(&brk.i1[idx]).ln());
        t0 += chunk;
    }
    let tail = if env.len() >= 4 { linear_fit(&env_t, &env).map(|f| f.0) } else { None };
    let after = brk.window_indices(us(growth_end), horizon);
    let clusters = count_clusters(&local_maxima(&brk.i1[after]), 0.01);
    let bounded = tail.is_some_and(|s| s <= 0.1 * growth_rate);
    let irregular = clusters >= 4;
    Verdict::new(
        sym_ok && bounded && irregular,
        format!(
            "J=1: bounded = {bounded_sym}, I1/I2 corr (0-2 us) {exchange:+.3}; J=0.2: growth until {growth_end:.2} us at {:.2} /us (R^2 {r2:.4}), later envelope trend {} /us (limit 10% of growth), {clusters} maxima clusters",
            per_us(growth_rate),
            tail.map_or("n/a".into(), |s| format!("{:.2}", per_us(s)))
        ),
    )
}

// 9 ------------------------------------------------------------------------

fn onset_monotonicity() -> Verdict {
    let base = ReducedParams::fig2_with(0.2, 0.5);
    let cfg = IntegratorConfig::for_params(&base, us(10.0));
    let drives = [0.5, 5.0, 50.0, 500.0];
    let curve = match onset_curve(&drives, &base, &cfg, &OnsetDetector::default(), us(200.0), 0) {
        Ok(c) => c,
        Err(e) => return Verdict::new(false, format!("onset curve failed: {e}")),
    };
    let taus: Vec<Option<f64>> = curve.iter().map(|p| p.tau.map(|t| ts().to_us(t))).collect();
    let all = taus.iter().all(Option::is_some);
    let ordered = taus.windows(2).all(|w| matches!((w[0], w[1]), (Some(a), Some(b)) if b <= a));
    let listing: Vec<String> = drives
        .iter()
        .zip(&taus)
        .map(|(d, t)| format!("{d}:{}", t.map_or("none".into(), |v| format!("{v:.2}"))))
        .collect();
    Verdict::new(all && ordered, format!("tau (drive:us) {}", listing.join(" ")))
}

// 10 -----------------------------------------------------------------------

fn passive_passive_contrast() -> Verdict {
    let weak = ReducedParams { kappa: -0.8, ..ReducedParams::fig2_with(1.0, 0.5) };
    let strong = weak.with(Control::OmegaDAmp, 3e6);
    let weak_lam = match benettin(&weak, (us(8.0), us(9.0))) {
        Ok(l) => l.lambda_benettin,
        Err(e) => return Verdict::new(false, format!("weak-drive run failed: {e}")),
    };
    let traj = match integrate(&SystemState::ZERO, &weak, &IntegratorConfig::for_params(&weak, us(10.0))) {
        Ok(t) => t,
        Err(e) => return Verdict::new(false, format!("weak-drive run failed: {e}")),
    };
    let last = traj.window_indices(us(9.0), us(10.0));
    let tail = &traj.i1[last];
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let spread = (max_of(tail) - min_of(tail)) / mean;
    let steady = spread <= 0.05;

    let early = benettin(&strong, (0.0, us(1.0))).map(|l| l.lambda_benettin);
    let late = benettin(&strong, (us(40.0), us(60.0))).map(|l| l.lambda_benettin);
    let (early, late) = match (early, late) {
        (Ok(a), Ok(b)) => (a, b),
        (a, b) => return Verdict::new(false, format!("strong-drive run failed: {a:?} {b:?}")),
    };
    Verdict::new(
        weak_lam < 0.0 && steady && early > 0.0 && late < 0.0,
        format!(
            "drive 0.5: lambda {:+.3e} /us, I1 spread over 9-10 us {:.2e} (limit 5%); drive 3e6: lambda 0-1 us {:+.3e} /us, 40-60 us {:+.3e} /us",
            per_us(weak_lam),
            spread,
            per_us(early),
            per_us(late)
        ),
    )
}

// 11 -----------------------------------------------------------------------

fn sweep_determinism() -> Verdict {
    let base = ReducedParams::fig2_with(1.0, 50.0);
    let grid = |workers: usize| SweepGrid {
        base,
        axes: vec![
            Axis { control: Control::J, values: vec![0.2, 0.35, 0.5, 0.75, 1.0] },
            Axis { control: Control::OmegaDAmp, values: vec![5.0, 500.0] },
        ],
        recipe: AnalysisRecipe {
            lyapunov_window: Some((us(2.0), us(3.0))),
            flatness: Some(FlatnessRecipe { window: (us(2.0), us(3.0)), band: (0.0, 46.0) }),
            onset: Some(OnsetDetector::default()),
        },
        integrator: IntegratorConfig::for_params(&base, us(3.0)),
        initial_state: SystemState::ZERO,
        workers,
    };
    let dir = std::env::temp_dir().join(format!("ptchaos-acceptance-{}", std::process::id()));
    if let Err(e) = std::fs::create_dir_all(&dir) {
        return Verdict::new(false, format!("cannot create {}: {e}", dir.display()));
    }
    let mut files = Vec::new();
    for workers in [1, 2, 4, 8] {
        let res = match run_sweep(&grid(workers)) {
            Ok(r) => r,
            Err(e) => return Verdict::new(false, format!("sweep failed: {e}")),
        };
        let path = dir.join(format!("sweep-{workers}.json"));
        if let Err(e) = std::fs::write(&path, res.to_json()) {
            return Verdict::new(false, format!("write failed: {e}"));
        }
        files.push(std::fs::read(&path).unwrap_or_default());
    }
    let _ = std::fs::remove_dir_all(&dir);
    let identical = files.windows(2).all(|w| w[0] == w[1]) && !files[0].is_empty();
    Verdict::new(identical, format!("10-point sweep at 1, 2, 4, 8 workers: {} bytes each, identical = {identical}", files[0].len()))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "Jacobian vs finite differences", limit: Duration::from_secs(5), run: jacobian_vs_finite_differences },
        Criterion { id: 2, name: "EP coalescence and splitting", limit: Duration::from_secs(1), run: ep_and_splitting },
        Criterion { id: 3, name: "drive power conversion", limit: Duration::from_secs(1), run: drive_conversion },
        Criterion { id: 4, name: "linear Lyapunov oracle", limit: Duration::from_secs(30), run: linear_lyapunov_oracle },
        Criterion { id: 5, name: "phase-controlled chaos", limit: Duration::from_secs(300), run: phase_controlled_chaos },
        Criterion { id: 6, name: "spectrum contrast", limit: Duration::from_secs(120), run: spectrum_contrast },
        Criterion { id: 7, name: "period-doubling route", limit: Duration::from_secs(600), run: period_doubling_route },
        Criterion { id: 8, name: "trajectory morphology", limit: Duration::from_secs(300), run: trajectory_morphology },
        Criterion { id: 9, name: "onset-time monotonicity", limit: Duration::from_secs(600), run: onset_monotonicity },
        Criterion { id: 10, name: "passive-passive contrast", limit: Duration::from_secs(600), run: passive_passive_contrast },
        Criterion { id: 11, name: "sweep determinism", limit: Duration::from_secs(120), run: sweep_determinism },
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    let mut ran = 0;
    for c in criteria.iter().filter(|c| selected.is_empty() || selected.contains(&c.id)) {
        let start = Instant::now();
        let v = (c.run)();
        let elapsed = start.elapsed();
        let in_time = elapsed <= c.limit;
        let pass = v.pass && in_time;
        ran += 1;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<32} {}  [{:.1}s / {}s{}] {}",
            c.id,
            c.name,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            c.limit.as_secs(),
            if in_time { "" } else { ", over time limit" },
            v.detail
        );
    }
    println!("acceptance: {} of {ran} criteria passed, {failed} failed", ran - failed);
    let strict = std::env::var("PTCHAOS_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if failed > 0 && strict {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
