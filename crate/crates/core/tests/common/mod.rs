#![allow(dead_code)]

use nalgebra::{Matrix3, Matrix4};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::f64::consts::PI;

use trimode::branch::{make_state, BranchState, CatSpec, ModeSpec};
use trimode::fock::{FockBasis, FockStateVector};
use trimode::ode::{integrate, Tolerance};
use trimode::propagator::CouplingConfig;

pub type C64 = Complex64;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn complex_in_disk(rng: &mut StdRng, radius: f64) -> C64 {
    C64::from_polar(radius * rng.gen::<f64>().sqrt(), rng.gen_range(-PI..PI))
}

/// λ, κ ∈ [0, 2], Ω = Γ ∈ [-3, 3], random phases and mode frequencies.
pub fn random_config(rng: &mut StdRng) -> CouplingConfig {
    let omega = rng.gen_range(-3.0..3.0);
    let (wa, wb, wc) = (
        rng.gen_range(-2.0..2.0),
        rng.gen_range(-2.0..2.0),
        rng.gen_range(-2.0..2.0),
    );
    CouplingConfig {
        omega_a: wa,
        omega_b: wb,
        omega_c: wc,
        lambda: rng.gen_range(0.0..2.0),
        kappa: rng.gen_range(0.0..2.0),
        nu: wa - wb - omega,
        mu: wa - wc - omega,
        phi: rng.gen_range(-PI..PI),
        theta: rng.gen_range(-PI..PI),
    }
}

pub fn random_resonant(rng: &mut StdRng) -> CouplingConfig {
    CouplingConfig::resonant(
        rng.gen_range(0.2..2.0),
        rng.gen_range(0.2..2.0),
        rng.gen_range(-PI..PI),
        rng.gen_range(-PI..PI),
    )
}

/// Lab-frame mode matrix from the Heisenberg equations
/// `i d a_x/dt = Σ_y K_xy(t) a_y`, integrated numerically.
pub fn heisenberg_matrix(config: &CouplingConfig, t: f64) -> Matrix3<C64> {
    let k = |time: f64| -> Matrix3<C64> {
        let gb = C64::from_polar(config.lambda, config.phi - config.nu * time);
        let gc = C64::from_polar(config.kappa, config.theta - config.mu * time);
        Matrix3::new(
            c(config.omega_a, 0.0), gb, gc,
            gb.conj(), c(config.omega_b, 0.0), c(0.0, 0.0),
            gc.conj(), c(0.0, 0.0), c(config.omega_c, 0.0),
        )
    };
    let y0: Vec<C64> = Matrix3::<C64>::identity().iter().copied().collect();
    let tol = Tolerance {
        atol: 1e-13,
        rtol: 1e-13,
        max_steps: 5_000_000,
    };
    let y = integrate(
        |time, y, dy| {
            let m = Matrix3::from_column_slice(y);
            let d = k(time) * m * -C64::i();
            dy.copy_from_slice(d.as_slice());
        },
        0.0,
        t,
        &y0,
        tol,
    )
    .unwrap();
    Matrix3::from_column_slice(&y)
}

pub fn max_diff3(a: &Matrix3<C64>, b: &Matrix3<C64>) -> f64 {
    (a - b).iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn unitarity4(m: &Matrix4<C64>) -> f64 {
    (m.adjoint() * m - Matrix4::identity())
        .iter()
        .fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn binary_entropy(p: f64) -> f64 {
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

/// Larger Schmidt weight of `(|b,c⟩ + |-b,-c⟩)/N` given the single-mode
/// overlaps `s_b = ⟨b|-b⟩` and `s_c = ⟨c|-c⟩`.
pub fn even_pair_weight(s_b: f64, s_c: f64) -> f64 {
    (1.0 + s_b) * (1.0 + s_c) / (2.0 * (1.0 + s_b * s_c))
}

pub fn cat_in_a(alpha: C64, phase: f64, beta: C64, gamma: C64) -> BranchState<3> {
    make_state([
        ModeSpec::Cat(CatSpec::new(alpha, phase)),
        ModeSpec::Coherent(beta),
        ModeSpec::Coherent(gamma),
    ])
    .unwrap()
}

/// Applies `exp(z a_m)` to number-basis amplitudes. Lowering never leaves
/// the retained space, so the series terminates exactly.
pub fn exp_lower<const M: usize>(basis: &FockBasis<M>, amps: &[C64], mode: usize, z: C64) -> Vec<C64> {
    let lowered: Vec<Option<(usize, f64)>> = basis
        .states()
        .map(|occ| {
            if occ[mode] == 0 {
                return None;
            }
            let mut lower = occ;
            lower[mode] -= 1;
            basis.index_of(lower).map(|j| (j, (occ[mode] as f64).sqrt()))
        })
        .collect();
    let mut out = amps.to_vec();
    let mut term = amps.to_vec();
    let mut k = 1.0;
    while term.iter().any(|x| *x != c(0.0, 0.0)) {
        let mut next = vec![c(0.0, 0.0); term.len()];
        for (idx, low) in lowered.iter().enumerate() {
            if let Some((j, f)) = *low {
                next[j] += term[idx] * f * z / k;
            }
        }
        for (o, n) in out.iter_mut().zip(&next) {
            *o += n;
        }
        term = next;
        k += 1.0;
    }
    out
}

/// `⟨ψ| Π e^{p_m a_m†} e^{-p_m* a_m} |ψ⟩ / ⟨ψ|ψ⟩` in the number basis.
pub fn fock_chi_normal<const M: usize>(psi: &FockStateVector<M>, p: &[C64; M]) -> C64 {
    let apply = |sign: f64| -> Vec<C64> {
        let mut cur = psi.amps().to_vec();
        for m in 0..M {
            cur = exp_lower(psi.basis(), &cur, m, sign * p[m].conj());
        }
        cur
    };
    let left = apply(1.0);
    let right = apply(-1.0);
    let num: C64 = left.iter().zip(&right).map(|(l, r)| l.conj() * r).sum();
    num / psi.norm_sqr()
}
