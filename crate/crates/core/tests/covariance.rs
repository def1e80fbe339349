mod common;

use chirpcool::covariance::{
    build_m_matrix, initial_covariance, linearization_check, propagate_covariance, propagate_via_green,
    propagator_determinant_modulus, Coupling, SecondMomentMatrix,
};
use chirpcool::model::{mean_field_solve, PulseParams, SystemParams};
use chirpcool::numerics::{TimeGrid, C64};
use common::{expm, lab_frame_phonons};
use proptest::prelude::*;

struct Frozen {
    chi: f64,
    phi_dot: f64,
}

impl Coupling for Frozen {
    fn amplitude(&self, _: f64) -> f64 {
        self.chi
    }
    fn phase_rate(&self, _: f64) -> f64 {
        self.phi_dot
    }
}

fn acceptance_sets() -> Vec<(SystemParams, PulseParams)> {
    let sp = SystemParams::reference();
    let p = PulseParams::reference();
    vec![
        (sp, p),
        (SystemParams { gamma_c: 0.00435, ..sp }, p),
        (SystemParams { gamma_c: 0.001, ..sp }, p),
        (SystemParams { delta_c: 1.02, ..sp }, p.with_beta(0.3, true)),
        (sp, PulseParams { delta_dev: 0.1, ..p.with_beta(0.0, true) }),
    ]
}

fn max_entry_diff(a: &SecondMomentMatrix, b: &SecondMomentMatrix) -> f64 {
    (a.0 - b.0).max_abs()
}

fn assert_invariants(rseq: &[SecondMomentMatrix]) {
    for (k, r) in rseq.iter().enumerate() {
        assert!(r.commutator_drift() < 1e-6, "node {k}: commutator drift {}", r.commutator_drift());
        assert!(r.swap_symmetry_error() < 1e-8, "node {k}: swap error {}", r.swap_symmetry_error());
        assert!(r.phonon() >= -1e-9 && r.photon() >= -1e-9, "node {k}: negative number");
    }
}

#[test]
fn invariants_hold_on_both_routes() {
    let sp = SystemParams::reference();
    let p = PulseParams::reference();
    let grid = TimeGrid::new(0.0, 80.0, 1e-3).unwrap();
    assert_invariants(&propagate_covariance(&sp, &p, &grid, false).unwrap());
    assert_invariants(&propagate_via_green(&sp, &p, &grid, false).unwrap());
}

#[test]
fn lossless_rwa_conserves_total_number() {
    let sp = SystemParams::reference().lossless();
    let p = PulseParams::reference();
    let grid = TimeGrid::new(0.0, 80.0, 1e-3).unwrap();
    for r in propagate_covariance(&sp, &p, &grid, true).unwrap() {
        let total = r.phonon() + r.photon();
        assert!((total / sp.n_bar_m - 1.0).abs() < 1e-6, "total {total}");
    }
}

#[test]
fn green_route_matches_moment_equation() {
    for (sp, p) in acceptance_sets() {
        let grid = TimeGrid::new(0.0, p.final_time().min(80.0), 1e-3).unwrap();
        let moment = propagate_covariance(&sp, &p, &grid, false).unwrap();
        let green = propagate_via_green(&sp, &p, &grid, false).unwrap();
        let worst = moment
            .iter()
            .zip(&green)
            .map(|(a, b)| max_entry_diff(a, b))
            .fold(0.0, f64::max);
        assert!(worst < 1e-5, "entrywise gap {worst:e} for {sp:?} {p:?}");
    }
}

#[test]
fn frozen_drift_matches_matrix_exponential() {
    let sp = SystemParams::reference().lossless();
    let coupling = Frozen { chi: 0.07, phi_dot: 0.03 };
    let grid = TimeGrid::new(0.0, 30.0, 1e-3).unwrap();
    let green = propagate_via_green(&sp, &coupling, &grid, true).unwrap();
    let m = build_m_matrix(0.0, &sp, &coupling, true);
    let r0 = initial_covariance(sp.n_bar_m).0;
    for k in [0, 7_000, 15_000, grid.n_steps] {
        let g = expm(&m.scale(C64::new(grid.time(k), 0.0)));
        let exact = SecondMomentMatrix(g * r0 * g.transpose());
        let gap = max_entry_diff(&exact, &green[k]) / sp.n_bar_m;
        assert!(gap < 1e-8, "t = {}: {gap:e}", grid.time(k));
    }
}

#[test]
fn lab_frame_oracle_agrees() {
    let sp = SystemParams::reference();
    let p = PulseParams::reference();
    let grid = TimeGrid::new(0.0, 80.0, 1e-3).unwrap();
    let traj = mean_field_solve(&sp, &p, &grid).unwrap();
    let lab = lab_frame_phonons(&sp, &traj);
    let engine = propagate_covariance(&sp, &p, &grid, false).unwrap();
    for (j, n) in lab.iter().enumerate().step_by(500) {
        let gap = (n.re - engine[2 * j].phonon()).abs();
        assert!(gap < 1e-4, "t = {}: lab {} engine {}", grid.time(2 * j), n.re, engine[2 * j].phonon());
    }
    let last = lab.last().unwrap().re;
    assert!((last - engine.last().unwrap().phonon()).abs() < 1e-4);
}

#[test]
fn step_doubling_changes_final_phonon_little() {
    let sp = SystemParams::reference();
    let p = PulseParams::reference();
    let fine = propagate_covariance(&sp, &p, &TimeGrid::new(0.0, 80.0, 1e-3).unwrap(), false).unwrap();
    let coarse = propagate_covariance(&sp, &p, &TimeGrid::new(0.0, 80.0, 2e-3).unwrap(), false).unwrap();
    let (a, b) = (fine.last().unwrap().phonon(), coarse.last().unwrap().phonon());
    assert!(((a - b) / a).abs() < 1e-3, "{a} vs {b}");
}

#[test]
fn linearization_holds_through_the_pulse_body() {
    let sp = SystemParams::reference();
    let p = PulseParams::reference();
    let grid = TimeGrid::new(0.0, 80.0, 1e-3).unwrap();
    let traj = mean_field_solve(&sp, &p, &grid).unwrap();
    let rseq = propagate_covariance(&sp, &p, &grid, false).unwrap();
    let report = linearization_check(&traj, &rseq);
    assert_eq!(report.flags_within(10.0, 70.0), 0);
    assert!(report.worst_ratio > 0.0);
}

#[test]
fn linearization_flags_the_long_tail() {
    let sp = SystemParams::reference();
    let p = PulseParams::reference();
    let grid = TimeGrid::new(0.0, 300.0, 1e-3).unwrap();
    let traj = mean_field_solve(&sp, &p, &grid).unwrap();
    let rseq = propagate_covariance(&sp, &p, &grid, false).unwrap();
    let report = linearization_check(&traj, &rseq);
    assert!(report.flags_within(200.0, 300.0) > 0);
    assert!(report.worst_time > p.final_time());
}

#[test]
fn free_evolution_keeps_the_thermal_state() {
    let sp = SystemParams::reference();
    let p = PulseParams {
        chi0: 0.0,
        ..PulseParams::reference()
    };
    let grid = TimeGrid::new(0.0, 80.0, 1e-2).unwrap();
    for r in propagate_covariance(&sp, &p, &grid, false).unwrap() {
        assert!((r.phonon() - sp.n_bar_m).abs() < 1e-9);
    }
    let lossless = sp.lossless();
    let r0 = initial_covariance(sp.n_bar_m);
    for r in propagate_via_green(&lossless, &p, &grid, false).unwrap() {
        assert!(max_entry_diff(&r, &r0) < 1e-12);
    }
    assert_eq!(propagator_determinant_modulus(&lossless, 80.0), 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn invariants_on_random_short_runs(
        alpha in 0.2f64..1.0,
        beta in -0.5f64..0.5,
        t0 in 4.0f64..10.0,
        delta_c in 0.9f64..1.1,
        gamma_c in 0.0f64..0.1,
        gamma_m in 0.0f64..1e-3,
        n_bar in 0.0f64..2000.0,
        rwa: bool,
    ) {
        let sp = SystemParams { delta_c, gamma_c, gamma_m, n_bar_m: n_bar, ..SystemParams::reference() };
        let p = PulseParams::optimal(alpha, beta, t0);
        let grid = TimeGrid::new(0.0, 2.0 * t0, 5e-3).unwrap();
        let moment = propagate_covariance(&sp, &p, &grid, rwa).unwrap();
        let green = propagate_via_green(&sp, &p, &grid, rwa).unwrap();
        for (a, b) in moment.iter().zip(&green) {
            prop_assert!(a.commutator_drift() < 1e-6);
            prop_assert!(b.commutator_drift() < 1e-6);
            prop_assert!(a.swap_symmetry_error() < 1e-8 * n_bar.max(1.0));
            prop_assert!(b.swap_symmetry_error() < 1e-8 * n_bar.max(1.0));
            prop_assert!(max_entry_diff(a, b) < 1e-5 * n_bar.max(1.0));
        }
    }
}
