mod common;

use std::f64::consts::PI;

use echo_area::area::{
    cascade_solve, eta_step, fit_gamma_tau, primary_echo_closed, theta1_closed, theta2_closed, total_echo_area,
    Measurement, MediumConfig,
};
use echo_area::phasing::PulseLabel;
use proptest::prelude::*;

const E1: PulseLabel = PulseLabel::Echo(1);

fn medium(alpha_z_max: f64, dz: f64, gamma_tau: f64) -> MediumConfig {
    MediumConfig {
        alpha_z_max,
        dz,
        gamma_tau,
        ..Default::default()
    }
}

#[test]
fn input_closed_forms_match_rk4() {
    let mut rng = common::rng(3);
    let mut worst: f64 = 0.0;
    for _ in 0..40 {
        let t1 = common::uniform(&mut rng, 0.01, 2.0 * PI - 0.01);
        let t2 = common::uniform(&mut rng, 0.01, 2.0 * PI - 0.01);
        let z = common::uniform(&mut rng, 0.5, 25.0);
        let (r1, r2) = common::input_areas_rk4(t1, t2, z);
        worst = worst.max((theta1_closed(t1, z) - r1).abs());
        worst = worst.max((theta2_closed(t1, t2, z) - r2).abs());
    }
    assert!(worst < 1e-6, "worst deviation {worst}");
}

#[test]
fn eta_step_is_exact_for_frozen_sources() {
    for (eta, v0, w0) in [(0.2, 0.3, -0.9), (-1.5, 0.0, 0.4), (0.0, 1.0, 1e-9)] {
        let want = common::rk4(|_, y: &[f64; 1]| [0.5 * (v0 + w0 * y[0])], [eta], 0.7, 2000)[0];
        assert!((eta_step(eta, v0, w0, 0.7) - want).abs() < 1e-12);
    }
}

#[test]
fn primary_echo_closed_form_matches_direct_integration() {
    for gamma in [1.0, 0.8, 0.5] {
        for (t1, t2) in [(0.1 * PI, 0.999 * PI), (0.4, 2.0), (1.3, 0.9)] {
            for z in [1.0, 4.1, 9.0] {
                let (_, t2z) = common::input_areas_rk4(t1, t2, z);
                let closed = primary_echo_closed(t1, t2z, gamma, z);
                let direct = common::primary_echo_rk4(t1, t2, gamma, z, 20_000);
                assert!(
                    (closed - direct).abs() < 1e-8,
                    "Γ={gamma} ({t1},{t2}) z={z}: {closed} vs {direct}"
                );
            }
        }
    }
}

#[test]
fn cascade_primary_echo_tracks_closed_form_below_unit_survival() {
    let m = medium(10.0, 1e-3, 0.7);
    let traj = cascade_solve(&m, 0.1 * PI, 0.999 * PI, 2, 0.0).unwrap();
    let e1 = traj.series(E1).unwrap();
    let t2 = traj.series(PulseLabel::Input(2)).unwrap();
    let worst = traj
        .z_grid
        .iter()
        .enumerate()
        .map(|(j, &z)| (e1[j] - primary_echo_closed(0.1 * PI, t2[j], 0.7, z)).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-6, "worst {worst}");
}

#[test]
fn cascade_converges_under_step_halving() {
    let coarse = cascade_solve(&medium(20.0, 4e-3, 1.0), 0.1 * PI, 0.999 * PI, 4, 0.0).unwrap();
    let fine = cascade_solve(&medium(20.0, 2e-3, 1.0), 0.1 * PI, 0.999 * PI, 4, 0.0).unwrap();
    let finest = cascade_solve(&medium(20.0, 1e-3, 1.0), 0.1 * PI, 0.999 * PI, 4, 0.0).unwrap();
    let gap = |a: &echo_area::area::AreaTrajectory, b: &echo_area::area::AreaTrajectory| {
        let mut worst: f64 = 0.0;
        for (i, za) in a.z_grid.iter().enumerate() {
            let j = b.index_of_z(*za);
            for (sa, sb) in a.theta.iter().zip(&b.theta) {
                worst = worst.max((sa[i] - sb[j]).abs());
            }
        }
        worst
    };
    let (d1, d2) = (gap(&coarse, &finest), gap(&fine, &finest));
    assert!(d2 < 1e-3, "fine vs finest {d2}");
    // second order: halving the step cuts the error by about four (3 for the
    // Richardson-style comparison against the finest run)
    assert!(d1 / d2 > 2.5, "ratio {}", d1 / d2);
}

#[test]
fn first_pulse_area_moves_monotonically_to_nearest_stable_point() {
    for t1 in [0.3, 1.2 * PI, 1.7 * PI, 0.99 * PI] {
        let zs: Vec<f64> = (0..400).map(|i| i as f64 * 0.1).collect();
        let vals: Vec<f64> = zs.iter().map(|&z| theta1_closed(t1, z)).collect();
        let target = if t1 < PI { 0.0 } else { 2.0 * PI };
        for w in vals.windows(2) {
            assert!((w[1] - target).abs() <= (w[0] - target).abs() + 1e-15);
        }
    }
}

#[test]
fn second_regime_echo_peaks_alternate_in_sign() {
    let traj = cascade_solve(&medium(40.0, 1e-3, 1.0), 0.1 * PI, 1.001 * PI, 5, 0.0).unwrap();
    let peaks: Vec<f64> = traj
        .echo_labels()
        .map(|l| {
            let s = traj.series(l).unwrap();
            s.iter()
                .copied()
                .fold(0.0, |a: f64, x| if x.abs() > a.abs() { x } else { a })
        })
        .collect();
    for w in peaks.windows(2) {
        assert!(w[0] * w[1] < 0.0, "peaks {peaks:?}");
    }
}

#[test]
fn echo_total_matches_closed_form_in_both_regimes() {
    for t2 in [0.999 * PI, 1.001 * PI] {
        let traj = cascade_solve(&medium(40.0, 1e-3, 1.0), 0.1 * PI, t2, 6, 0.0).unwrap();
        let mut worst: f64 = 0.0;
        for (j, &z) in traj.z_grid.iter().enumerate() {
            worst = worst.max((traj.echo_sum(j) - total_echo_area(0.1 * PI, t2, z)).abs());
        }
        assert!(worst < 0.02, "θ₂ = {t2}: {worst}");
    }
}

#[test]
fn fit_recovers_survival_from_noiseless_data() {
    let (t1, t2, z) = (0.3 * PI, 0.8 * PI, 3.0);
    let (_, t2z) = common::input_areas_rk4(t1, t2, z);
    for gamma_tau in [0.9f64, 1.0] {
        let data: Vec<Measurement> = [1.0, 1.5, 2.0, 3.0]
            .iter()
            .map(|&m| Measurement {
                tau_multiple: m,
                echo_area: primary_echo_closed(t1, t2z, gamma_tau.powf(m), z),
            })
            .collect();
        let report = fit_gamma_tau(&data, t1, t2, z).unwrap();
        assert!((report.gamma_tau - gamma_tau).abs() < 1e-6, "{report:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn echoes_never_exceed_pi(
        t1 in 0.01f64..(2.0 * PI - 0.01),
        t2 in 0.01f64..(2.0 * PI - 0.01),
        gamma in prop::sample::select(vec![0.5, 0.9, 1.0]),
    ) {
        let traj = cascade_solve(&medium(30.0, 1e-2, gamma), t1, t2, 5, 0.0).unwrap();
        for l in traj.echo_labels() {
            for x in traj.series(l).unwrap() {
                prop_assert!(x.abs() < PI);
            }
        }
    }
}
