mod common;

use common::*;
use proptest::prelude::*;
use std::f64::consts::PI;
use trimode::branch::{evolve, gram_matrix, make_state, reduced_spectrum, BranchState, CatSpec, ModeSpec};
use trimode::modes::{Cut, ModeSet};
use trimode::propagator::{compute_coefficients, CouplingConfig};
use trimode::Error;

fn mode_strategy() -> impl Strategy<Value = ModeSpec> {
    prop_oneof![
        (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(re, im)| ModeSpec::Coherent(c(re, im))),
        (0.3f64..2.0, -2.0f64..2.0, 0.0f64..(2.0 * PI))
            .prop_map(|(re, im, ph)| ModeSpec::Cat(CatSpec::new(c(re, im), ph))),
    ]
}

fn state_strategy() -> impl Strategy<Value = BranchState<3>> {
    [mode_strategy(), mode_strategy(), mode_strategy()].prop_map(|m| make_state(m).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn evolution_preserves_norm(
        state in state_strategy(),
        lambda in 0.1f64..2.0, kappa in 0.1f64..2.0, omega in -3.0f64..3.0, t in 0.0f64..10.0,
    ) {
        let config = CouplingConfig::detuned(lambda, kappa, omega, 0.3, -0.8);
        let out = evolve(&state, &compute_coefficients(&config, t).unwrap());
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
        prop_assert!((out.total_mean_photons() - state.total_mean_photons()).abs() < 1e-9);
    }

    #[test]
    fn gram_is_psd(state in state_strategy(), side in 1u8..7) {
        let g = gram_matrix(&state, ModeSet::from_modes(&(0..3).filter(|m| side & (1 << m) != 0).collect::<Vec<_>>()));
        let eig = nalgebra::SymmetricEigen::new((g.clone() + g.adjoint()) * c(0.5, 0.0));
        prop_assert!(eig.eigenvalues.iter().all(|&e| e > -1e-12));
        for i in 0..g.nrows() {
            prop_assert!((g[(i, i)] - c(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn schmidt_spectra_agree_across_a_cut(state in state_strategy(), t in 0.0f64..6.0) {
        let config = CouplingConfig::resonant(1.0, 0.7, 0.2, 0.0);
        let out = evolve(&state, &compute_coefficients(&config, t).unwrap());
        for cut in Cut::ALL {
            let one = reduced_spectrum(&out, cut.side());
            let rest = reduced_spectrum(&out, cut.side().complement(3));
            let n = one.len().min(rest.len());
            for k in 0..n {
                prop_assert!((one[k] - rest[k]).abs() < 1e-10, "{:?} vs {:?}", one, rest);
            }
            prop_assert!(one[n..].iter().chain(&rest[n..]).all(|&x| x < 1e-10));
            prop_assert!((one.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn coherent_maps_linearly() {
    let config = CouplingConfig::resonant(0.8, 1.2, 0.5, -0.3);
    let p = compute_coefficients(&config, 1.7).unwrap();
    let amps = [c(1.0, 0.5), c(-0.2, 0.1), c(0.0, -0.7)];
    let out = evolve(&BranchState::coherent(amps), &p);
    let m = p.lab_frame();
    for x in 0..3 {
        let expected: C64 = (0..3).map(|y| m[(x, y)] * amps[y]).sum();
        assert!((out.branches()[0].amps[x] - expected).norm() < 1e-15);
    }
}

#[test]
fn cat_norm_and_overlaps() {
    let cat = make_state([ModeSpec::Cat(CatSpec::new(c(1.3, 0.0), PI / 2.0)), ModeSpec::vacuum(), ModeSpec::vacuum()]).unwrap();
    assert!((cat.norm_sqr() - 1.0).abs() < 1e-14);
    let g = gram_matrix(&cat, ModeSet::single(0));
    assert!((g[(0, 1)].re - (-2.0 * 1.69f64).exp()).abs() < 1e-15);
}

#[test]
fn degenerate_and_capped_inputs() {
    let odd_vacuum = ModeSpec::Cat(CatSpec::new(c(0.0, 0.0), PI));
    assert!(matches!(
        make_state([odd_vacuum, ModeSpec::vacuum(), ModeSpec::vacuum()]),
        Err(Error::DegenerateCat { .. })
    ));
    assert!(matches!(
        make_state([ModeSpec::Coherent(c(25.0, 0.0)), ModeSpec::vacuum(), ModeSpec::vacuum()]),
        Err(Error::AmplitudeCap { .. })
    ));
}
