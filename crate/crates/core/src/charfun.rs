//! Normal-ordered and symmetric characteristic functions of branch states.

use num_complex::Complex64;

use crate::branch::{log_overlap, BranchState};
use crate::error::{Error, Result};
use crate::propagator::PropagatorMatrix;

type C64 = Complex64;

/// Largest accepted argument magnitude.
pub const ARG_GUARD: f64 = 50.0;
/// Largest accepted real part of an accumulated exponent.
pub const EXPONENT_GUARD: f64 = 700.0;

/// Arguments `(η, ζ, ξ)` for modes A, B and C.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub eta: C64,
    pub zeta: C64,
    pub xi: C64,
}

impl PhasePoint {
    pub fn new(eta: C64, zeta: C64, xi: C64) -> Result<Self> {
        let p = Self { eta, zeta, xi };
        for z in p.as_array() {
            if !z.norm().is_finite() || z.norm() > ARG_GUARD {
                return Err(Error::InvalidArgument(format!(
                    "phase-point argument {z} outside |z| <= {ARG_GUARD}"
                )));
            }
        }
        Ok(p)
    }

    pub fn as_array(&self) -> [C64; 3] {
        [self.eta, self.zeta, self.xi]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.as_array().iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Arguments pulled back to the initial time, `(η̄, ζ̄, ξ̄)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatedArgs {
    pub eta_bar: C64,
    pub zeta_bar: C64,
    pub xi_bar: C64,
}

impl RotatedArgs {
    pub fn as_array(&self) -> [C64; 3] {
        [self.eta_bar, self.zeta_bar, self.xi_bar]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.as_array().iter().map(|z| z.norm_sqr()).sum()
    }
}

/// `η̄ = η u1* + ζ u2* + ξ u3*` and likewise with the `v` and `w` columns.
/// Uses the lab-frame coefficients, so it pairs with
/// [`evolve`](crate::branch::evolve).
pub fn rotate_args(propagator: &PropagatorMatrix, p: &PhasePoint) -> RotatedArgs {
    let m = propagator.lab_frame();
    let args = p.as_array();
    let col = |c: usize| -> C64 { (0..3).map(|r| args[r] * m[(r, c)].conj()).sum() };
    RotatedArgs {
        eta_bar: col(0),
        zeta_bar: col(1),
        xi_bar: col(2),
    }
}

/// `Tr[ρ Π_m e^{p_m a_m†} e^{-p_m* a_m}]` for any number of modes.
///
/// Each branch pair contributes
/// `c_j c_k* Π_m ⟨a_km|a_jm⟩ exp(p_m a_km* - p_m* a_jm)`; the exponents are
/// summed before exponentiation.
pub fn chi_normal_modes<const M: usize>(state: &BranchState<M>, args: &[C64; M]) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for bj in state.branches() {
        for bk in state.branches() {
            let w = bj.coeff * bk.coeff.conj();
            if w == C64::new(0.0, 0.0) {
                continue;
            }
            let exponent: C64 = (0..M)
                .map(|m| {
                    log_overlap(bk.amps[m], bj.amps[m]) + args[m] * bk.amps[m].conj()
                        - args[m].conj() * bj.amps[m]
                })
                .sum();
            if exponent.re > EXPONENT_GUARD {
                return Err(Error::OverflowGuard {
                    exponent: exponent.re,
                });
            }
            acc += w * exponent.exp();
        }
    }
    Ok(acc / state.norm_sqr())
}

pub fn chi_normal(state: &BranchState<3>, p: &PhasePoint) -> Result<C64> {
    chi_normal_modes(state, &p.as_array())
}

/// `χ_S = χ_N · exp(-(|η|² + |ζ|² + |ξ|²)/2)`.
pub fn chi_symmetric(state: &BranchState<3>, p: &PhasePoint) -> Result<C64> {
    Ok(chi_normal(state, p)? * (-0.5 * p.norm_sqr()).exp())
}
