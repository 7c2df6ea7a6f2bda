mod common;

use std::f64::consts::PI;

use echo_area::area::{primary_echo_closed, theta1_closed, MediumConfig};
use echo_area::mb::{
    compare_with_area_theorem, extract_echo_areas, propagate, window_area, CascadeSettings, EnsembleGrid, FieldGrid,
    GridResolution, PulseSpec, DEFAULT_NODES, THREADS_ENV,
};
use echo_area::phasing::PulseLabel;

const WIDTH: f64 = 1.0 / 40.0;
const LINE: f64 = 10.0 / WIDTH;

fn medium(alpha_z_max: f64) -> MediumConfig {
    MediumConfig {
        alpha_z_max,
        dz: 0.01,
        gamma_tau: 1.0,
        initial_inversion: -1.0,
    }
}

fn run(pulses: &[PulseSpec], alpha_z: f64, res: GridResolution) -> FieldGrid {
    let ensemble = EnsembleGrid::for_time_span(LINE, DEFAULT_NODES, res.t_end - res.t_start).unwrap();
    propagate(pulses, &ensemble, &medium(alpha_z), &res).unwrap()
}

fn single_window(t_start: f64, t_end: f64) -> GridResolution {
    GridResolution {
        dt: WIDTH / 40.0,
        dz: 0.02,
        t_start,
        t_end,
    }
}

fn energy(field: &FieldGrid, i: usize) -> f64 {
    let h = field.t_grid[1] - field.t_grid[0];
    field.omega[i].iter().map(|x| x * x * h).sum()
}

#[test]
fn zero_input_leaves_field_and_atoms_untouched() {
    let f = run(&[PulseSpec::sech(0.0, 0.0, WIDTH)], 1.0, single_window(-0.5, 0.5));
    assert!(f.omega.iter().flatten().all(|x| *x == 0.0));
    assert_eq!(f.diagnostics.max_norm_error, 0.0);
}

#[test]
fn weak_pulse_energy_decays_monotonically_and_area_follows_beer() {
    let f = run(&[PulseSpec::sech(0.01 * PI, 0.0, WIDTH)], 2.0, single_window(-0.5, 0.5));
    for i in 1..f.z_grid.len() {
        assert!(energy(&f, i) < energy(&f, i - 1));
    }
    let last = f.z_grid.len() - 1;
    let (area, _) = window_area(&f.t_grid, &f.omega[last], -0.5, 0.5).unwrap();
    let want = 0.01 * PI * (-1.0f64).exp();
    assert!((area / want - 1.0).abs() < 0.01, "{area} vs {want}");
}

#[test]
fn over_pi_pulse_reshapes_toward_two_pi() {
    // the reshaped pulse lags by about τ at this depth
    let f = run(&[PulseSpec::sech(1.2 * PI, 0.0, WIDTH)], 20.0, single_window(-0.5, 3.5));
    let last = f.z_grid.len() - 1;
    let (area, _) = window_area(&f.t_grid, &f.omega[last], -0.5, 3.5).unwrap();
    let want = theta1_closed(1.2 * PI, 20.0);
    assert!((area - want).abs() < 0.03 * want, "{} π vs {} π", area / PI, want / PI);
    assert!(f.diagnostics.max_norm_error < 1e-6);
}

#[test]
fn result_is_independent_of_thread_count() {
    let pulses = [
        PulseSpec::sech(0.3 * PI, 0.0, WIDTH),
        PulseSpec::sech(0.8 * PI, 1.0, WIDTH),
    ];
    let res = GridResolution::for_pulses(&pulses, 1);
    let prior = std::env::var(THREADS_ENV).ok();
    std::env::set_var(THREADS_ENV, "1");
    let a = run(&pulses, 0.4, res);
    std::env::set_var(THREADS_ENV, "4");
    let b = run(&pulses, 0.4, res);
    match prior {
        Some(v) => std::env::set_var(THREADS_ENV, v),
        None => std::env::remove_var(THREADS_ENV),
    }
    assert_eq!(a, b);
}

#[test]
fn echo_emerges_at_twice_the_delay_with_even_line_symmetry() {
    let pulses = [
        PulseSpec::sech(0.1 * PI, 0.0, WIDTH),
        PulseSpec::sech(0.5 * PI, 1.0, WIDTH),
    ];
    let f = run(&pulses, 1.0, GridResolution::for_pulses(&pulses, 1));
    let last = f.z_grid.len() - 1;
    let (n_peak, _) = f
        .t_grid
        .iter()
        .enumerate()
        .filter(|(_, &t)| t > 1.5 && t < 2.5)
        .map(|(n, _)| (n, f.omega[last][n].abs()))
        .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
    assert!((f.t_grid[n_peak] - 2.0).abs() < WIDTH, "peak at {}", f.t_grid[n_peak]);
    assert!(f.diagnostics.u_source_ratio < 1e-9, "{}", f.diagnostics.u_source_ratio);
    assert!(f.diagnostics.max_norm_error < 1e-6);
}

#[test]
fn primary_echo_is_converged_in_time_and_depth_steps() {
    let pulses = [
        PulseSpec::sech(0.1 * PI, 0.0, WIDTH),
        PulseSpec::sech(0.999 * PI, 1.0, WIDTH),
    ];
    let coarse = GridResolution::for_pulses(&pulses, 1);
    let fine = GridResolution {
        dt: coarse.dt / 2.0,
        dz: coarse.dz / 2.0,
        ..coarse
    };
    let e1 = |res: GridResolution| {
        let f = run(&pulses, 1.0, res);
        let areas = extract_echo_areas(&f, 1.0, 1).unwrap();
        *areas.series(PulseLabel::Echo(1)).unwrap().last().unwrap()
    };
    let (a, b) = (e1(coarse), e1(fine));
    assert!((a - b).abs() < 0.005 * b.abs(), "{a} vs {b}");
}

#[test]
fn synthetic_sech_area_is_recovered() {
    let pulse = PulseSpec::sech(0.4 * PI, 2.0, WIDTH);
    let res = single_window(-0.5, 3.5);
    let t = res.time_grid();
    let row: Vec<f64> = t.iter().map(|&x| pulse.omega(x)).collect();
    let f = FieldGrid::from_samples(t, vec![0.0], vec![row]).unwrap();
    let areas = extract_echo_areas(&f, 1.0, 2).unwrap();
    let e1 = areas.series(PulseLabel::Echo(1)).unwrap()[0];
    assert!((e1 - 0.4 * PI).abs() < 1e-7, "{e1}");
    assert!(areas.series(PulseLabel::Echo(2)).unwrap()[0].abs() < 1e-7);
}

#[test]
fn weak_two_pulse_regime_agrees_with_cascade() {
    let (t1, t2) = (0.05 * PI, 0.05 * PI);
    let pulses = [PulseSpec::sech(t1, 0.0, WIDTH), PulseSpec::sech(t2, 1.0, WIDTH)];
    let res = GridResolution::for_pulses(&pulses, 1);
    let ensemble = EnsembleGrid::for_time_span(LINE, DEFAULT_NODES, res.t_end - res.t_start).unwrap();
    let oracle = medium(2.0);
    let cascade = CascadeSettings {
        theta1: t1,
        theta2: t2,
        medium: MediumConfig { dz: 1e-3, ..oracle },
        max_echo_order: 1,
    };
    let report = compare_with_area_theorem(&pulses, &ensemble, &oracle, &res, &cascade).unwrap();
    let e1 = report.labels.iter().position(|l| *l == PulseLabel::Echo(1)).unwrap();
    let last = report.z_grid.len() - 1;
    let (got, want) = (report.oracle[e1][last], report.reference[e1][last]);
    // the cascade's echo itself is a closed form in this regime
    let (_, t2z) = common::input_areas_rk4(t1, t2, 2.0);
    assert!((want - primary_echo_closed(t1, t2z, 1.0, 2.0)).abs() < 1e-6);
    assert!((got / want - 1.0).abs() < 0.01, "{got} vs {want}");
    assert!(report.max_relative < 0.01, "{}", report.max_relative);
}

#[test]
fn mismatched_survival_is_rejected() {
    let pulses = [PulseSpec::sech(0.1, 0.0, WIDTH), PulseSpec::sech(0.2, 1.0, WIDTH)];
    let res = GridResolution::for_pulses(&pulses, 1);
    let ensemble = EnsembleGrid::for_time_span(LINE, 21, res.t_end - res.t_start).unwrap();
    let oracle = medium(0.1);
    let cascade = CascadeSettings {
        theta1: 0.1,
        theta2: 0.2,
        medium: MediumConfig {
            gamma_tau: 0.9,
            ..oracle
        },
        max_echo_order: 1,
    };
    let err = compare_with_area_theorem(&pulses, &ensemble, &oracle, &res, &cascade).unwrap_err();
    assert!(err.to_string().contains("gamma_tau"));
}

#[test]
fn band_narrower_than_the_pulse_spectrum_is_rejected() {
    let pulses = [PulseSpec::sech(0.1, 0.0, WIDTH), PulseSpec::sech(0.2, 1.0, WIDTH)];
    let res = GridResolution::for_pulses(&pulses, 6);
    let span = res.t_end - res.t_start;
    let narrow = EnsembleGrid::for_time_span(LINE, DEFAULT_NODES, span).unwrap();
    let err = propagate(&pulses, &narrow, &medium(0.02), &res).unwrap_err();
    assert!(err.to_string().contains("nodes"), "{err}");
    let wide = EnsembleGrid::for_time_span(LINE, EnsembleGrid::min_nodes(span, WIDTH), span).unwrap();
    assert!(wide.half_span() * WIDTH >= echo_area::mb::MIN_BAND_PRODUCT);
}
