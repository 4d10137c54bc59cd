mod common;

use common::*;
use proptest::prelude::*;
use std::f64::consts::PI;
use trimode::propagator::{compute_coefficients, special_times, CouplingConfig};
use trimode::Error;

#[test]
fn matches_heisenberg_integration() {
    let mut r = rng(11);
    for _ in 0..60 {
        let config = random_config(&mut r);
        let t = rand::Rng::gen_range(&mut r, 0.0..10.0);
        let closed = compute_coefficients(&config, t).unwrap().lab_frame();
        let numeric = heisenberg_matrix(&config, t);
        let d = max_diff3(&closed, &numeric);
        assert!(d < 1e-8, "{config:?} t={t}: {d:e}");
    }
}

#[test]
fn composition_in_the_resonant_frame() {
    // With Ω = 0 the generator is time independent, so M(t1+t2) = M(t2) M(t1).
    let mut r = rng(12);
    for _ in 0..50 {
        let config = random_resonant(&mut r);
        let (t1, t2) = (rand::Rng::gen_range(&mut r, -5.0..5.0), rand::Rng::gen_range(&mut r, -5.0..5.0));
        let m = |t| compute_coefficients(&config, t).unwrap().entries;
        assert!(max_diff3(&m(t1 + t2), &(m(t2) * m(t1))) < 1e-10);
    }
}

#[test]
fn negative_time_inverts() {
    let mut r = rng(13);
    for _ in 0..50 {
        let config = random_resonant(&mut r);
        let t = rand::Rng::gen_range(&mut r, 0.0..10.0);
        let fwd = compute_coefficients(&config, t).unwrap().entries;
        let back = compute_coefficients(&config, -t).unwrap().entries;
        assert!(max_diff3(&(back * fwd), &nalgebra::Matrix3::identity()) < 1e-12);
        assert!(max_diff3(&back, &fwd.adjoint()) < 1e-12);
    }
}

#[test]
fn special_times_schedule() {
    let config = CouplingConfig::resonant(1.0, 1.0, 0.0, 0.0);
    let st = special_times(&config, 2).unwrap();
    let a = 2f64.sqrt();
    assert!((st.conversion_times[0] - PI / (2.0 * a)).abs() < 1e-15);
    assert!((st.recurrence_times[1] - 4.0 * PI / a).abs() < 1e-14);
    for &t in &st.conversion_times {
        let u1 = compute_coefficients(&config, t).unwrap().entries[(0, 0)];
        assert!(u1.norm() < 1e-15);
    }
    let detuned = CouplingConfig::detuned(1.0, 1.0, 0.3, 0.0, 0.0);
    assert!(matches!(special_times(&detuned, 1), Err(Error::NotResonant { .. })));
}

#[test]
fn mismatched_detunings_rejected() {
    let mut config = CouplingConfig::detuned(1.0, 0.5, 0.4, 0.0, 0.0);
    config.mu += 1e-6;
    assert!(compute_coefficients(&config, 1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn always_unitary(
        lambda in 0.0f64..2.0, kappa in 0.0f64..2.0, omega in -3.0f64..3.0,
        phi in -PI..PI, theta in -PI..PI, t in -20.0f64..20.0,
    ) {
        prop_assume!(lambda + kappa > 1e-6);
        let config = CouplingConfig::detuned(lambda, kappa, omega, phi, theta);
        let p = compute_coefficients(&config, t).unwrap();
        prop_assert!(p.unitarity_residual() < 1e-12);
        prop_assert!(trimode::propagator::unitarity_residual(&p.lab_frame()) < 1e-12);
    }
}
