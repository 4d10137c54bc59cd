mod common;

use common::*;
use rand::Rng;
use std::f64::consts::PI;
use trimode::branch::{evolve, make_state, CatSpec, ModeSpec};
use trimode::fock::{
    branch_to_fock, branch_to_fock_with, build_hamiltonian, evolve_fock, fock_fidelity, sector_dimension,
    FockCutoff, FockStateVector,
};
use trimode::propagator::{compute_coefficients, CouplingConfig};
use trimode::Error;

#[test]
fn branch_and_number_basis_agree() {
    let mut r = rng(31);
    for k in 0..12 {
        let config = if k % 2 == 0 { random_resonant(&mut r) } else { random_config(&mut r) };
        let state = cat_in_a(complex_in_disk(&mut r, 1.5), r.gen_range(0.0..3.0), complex_in_disk(&mut r, 1.0), complex_in_disk(&mut r, 1.0));
        let cutoff = FockCutoff::auto(state.total_mean_photons());
        let psi0 = branch_to_fock(&state, cutoff).unwrap();
        let t = r.gen_range(0.0..6.0);
        let numeric = evolve_fock(&psi0, &config, t).unwrap();
        let analytic = branch_to_fock(&evolve(&state, &compute_coefficients(&config, t).unwrap()), cutoff).unwrap();
        let f = fock_fidelity(&analytic, &numeric).unwrap();
        assert!(f > 1.0 - 1e-8, "draw {k}: fidelity {f}");
    }
}

#[test]
fn hamiltonian_conserves_photon_number() {
    let config = CouplingConfig::resonant(0.9, 1.3, 0.2, 0.5);
    let h = build_hamiltonian(&config, FockCutoff::new(6)).unwrap();
    let dense = h.to_dense();
    assert!((dense.clone() - dense.adjoint()).iter().all(|z| z.norm() < 1e-14));
    // Block sizes follow the number of ways to share n photons over 3 modes.
    for n in 0..=6 {
        assert_eq!(h.sector_block(n).unwrap().nrows(), sector_dimension(3, n));
    }
}

#[test]
fn single_photon_sector_reproduces_the_propagator() {
    // One photon in mode y evolves into Σ_x M_xy |1_x⟩.
    let config = CouplingConfig::detuned(0.7, 1.1, 0.0, 0.3, -0.6);
    let t = 1.3;
    let m = compute_coefficients(&config, t).unwrap().lab_frame();
    for y in 0..3 {
        let mut occ = [0usize; 3];
        occ[y] = 1;
        let psi = evolve_fock(&FockStateVector::number_state(FockCutoff::new(1), occ).unwrap(), &config, t).unwrap();
        for x in 0..3 {
            let mut o = [0usize; 3];
            o[x] = 1;
            assert!((psi.amplitude(o) - m[(x, y)]).norm() < 1e-12);
        }
    }
}

#[test]
fn vacuum_is_exact() {
    let config = CouplingConfig::resonant(1.0, 1.0, 0.0, 0.0);
    let psi0 = FockStateVector::vacuum(FockCutoff::new(5)).unwrap();
    let out = evolve_fock(&psi0, &config, 3.0).unwrap();
    assert_eq!(fock_fidelity(&psi0, &out).unwrap(), 1.0);
}

#[test]
fn truncation_is_certified() {
    let cat = make_state([ModeSpec::Cat(CatSpec::new(c(6.0, 0.0), 0.0)), ModeSpec::vacuum(), ModeSpec::vacuum()]).unwrap();
    assert!(matches!(
        branch_to_fock_with(&cat, FockCutoff::new(10), 1e-8),
        Err(Error::TruncationBreach { n_max: 10, .. })
    ));
    let ok = branch_to_fock(&cat, FockCutoff::auto(cat.total_mean_photons())).unwrap();
    assert!(ok.deficiency() < 1e-8);
    assert!(matches!(FockCutoff::new(400).validate(3), Err(Error::CutoffTooLarge { .. })));
}

#[test]
fn marginal_purities_match_branch_picture() {
    let config = CouplingConfig::resonant(1.0, 1.0, 0.0, 0.0);
    let state = cat_in_a(c(2.0, 0.0), 0.0, c(0.0, 0.0), c(0.0, 0.0));
    let t = PI / (4.0 * config.rabi());
    let out = evolve(&state, &compute_coefficients(&config, t).unwrap());
    let psi = evolve_fock(&branch_to_fock(&state, FockCutoff::new(30)).unwrap(), &config, t).unwrap();
    for m in 0..3 {
        let branch = trimode::entanglement::marginal_purity(&out, m);
        assert!((branch - psi.marginal_purity(m)).abs() < 1e-10);
    }
}
