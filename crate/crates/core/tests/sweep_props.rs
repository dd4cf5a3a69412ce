use ptchaos::analysis::{intensity_spectrum, lyapunov_from_log, spectral_flatness, OnsetDetector, Taper};
use ptchaos::sweep::*;
use ptchaos::units::TimeScale;
use ptchaos::*;

fn grid(axes: Vec<Axis>, workers: usize) -> SweepGrid {
    let base = ReducedParams::fig2_with(1.0, 50.0);
    SweepGrid {
        base,
        axes,
        recipe: AnalysisRecipe {
            lyapunov_window: Some((10.0, 20.0)),
            flatness: Some(FlatnessRecipe { window: (10.0, 20.0), band: (0.0, 46.0) }),
            onset: None,
        },
        integrator: IntegratorConfig::for_params(&base, 20.0),
        initial_state: SystemState::ZERO,
        workers,
    }
}

#[test]
fn single_point_sweep_equals_a_direct_run() {
    let g = grid(vec![Axis { control: Control::J, values: vec![0.3] }], 1);
    let res = run_sweep(&g).unwrap();
    let r = ReducedParams::fig2_with(0.3, 50.0);
    let (traj, log) = integrate_with_tangent(&SystemState::ZERO, &TangentVector::uniform(), &r, &g.integrator).unwrap();
    let l = lyapunov_from_log(&traj, &log, g.integrator.renorm_interval, (10.0, 20.0)).unwrap();
    let f = spectral_flatness(&intensity_spectrum(&traj, (10.0, 20.0), Taper::Hann).unwrap(), (0.0, 46.0)).unwrap();
    let o = &res.outcomes[0];
    assert_eq!(o.lambda_benettin.map(f64::to_bits), Some(l.lambda_benettin.to_bits()));
    assert_eq!(o.lambda_slope_d_i1.map(f64::to_bits), Some(l.lambda_slope_d_i1.to_bits()));
    assert_eq!(o.flatness.map(f64::to_bits), Some(f.to_bits()));
    assert_eq!(o.phase, PhaseLabel::PtBroken);
    assert_eq!(res.wall_times.len(), 1);
}

#[test]
fn worker_count_does_not_change_the_payload() {
    let axes = vec![
        Axis { control: Control::J, values: vec![0.2, 0.45, 0.7, 1.0] },
        Axis { control: Control::Kappa, values: vec![-0.5, 0.8] },
    ];
    let reference = run_sweep(&grid(axes.clone(), 1)).unwrap().to_json();
    for workers in [2, 3, 8] {
        assert_eq!(run_sweep(&grid(axes.clone(), workers)).unwrap().to_json(), reference);
    }
}

#[test]
fn one_outcome_per_point_and_failures_are_recorded() {
    let mut g = grid(vec![Axis { control: Control::OmegaDAmp, values: vec![1.0, 1e200] }], 2);
    g.recipe.flatness = None;
    let res = run_sweep(&g).unwrap();
    assert_eq!(res.outcomes.len(), 2);
    assert!(res.outcomes[0].error.is_none());
    assert!(res.outcomes[1].error.is_some());
    assert_eq!(res.failures().count(), 1);
}

#[test]
fn config_hash_ignores_worker_count_but_not_parameters() {
    let axes = vec![Axis { control: Control::J, values: vec![0.5] }];
    assert_eq!(grid(axes.clone(), 1).config_hash(), grid(axes.clone(), 4).config_hash());
    let mut other = grid(axes, 1);
    other.base.kappa = 0.7;
    assert_ne!(other.config_hash(), grid(vec![Axis { control: Control::J, values: vec![0.5] }], 1).config_hash());
}

#[test]
fn phase_diagram_rows() {
    let js: Vec<f64> = (0..50).map(|k| 0.04 * k as f64).collect();
    let ks: Vec<f64> = (0..50).map(|k| -1.0 + 0.04 * k as f64).collect();
    let g = phase_diagram_scan(&js, &ks, 1.0, 1e-9).unwrap();
    for (i, k) in ks.iter().enumerate() {
        if *k < 0.0 {
            assert!(g.labels[i].iter().all(|l| *l == PhaseLabel::PassivePassive));
        }
    }
    let row = phase_diagram_scan(&js, &[0.8], 1.0, 1e-9).unwrap();
    let t = &row.transitions()[0];
    assert_eq!(t.len(), 1);
    assert!((t[0] - 0.45).abs() <= 0.02 + 1e-12);
    let ep = phase_diagram_scan(&[0.45], &[0.8], 1.0, 1e-9).unwrap();
    assert_eq!(ep.labels[0][0], PhaseLabel::ExceptionalPoint);
}

#[test]
fn onset_curve_orders_drives() {
    let ts = TimeScale::default();
    let base = ReducedParams::fig2_with(0.2, 1.0);
    let cfg = IntegratorConfig::for_params(&base, ts.from_us(5.0));
    let curve = onset_curve(&[0.5, 5.0, 50.0], &base, &cfg, &OnsetDetector::default(), ts.from_us(200.0), 0).unwrap();
    let taus: Vec<f64> = curve.iter().map(|p| p.tau.expect("onset expected")).collect();
    assert!(taus[0] > taus[1] && taus[1] > taus[2], "{taus:?}");
    // The short starting horizon had to be extended for every drive.
    assert!(curve.iter().all(|p| p.horizon > ts.from_us(5.0)));
}
