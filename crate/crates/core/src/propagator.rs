//! Closed-form Heisenberg propagator of the three-mode bilinear coupling.
//!
//! The effective Hamiltonian (with ħ = 1) is
//!
//! ```text
//! H = ω_a a†a + ω_b b†b + ω_c c†c
//!   + λ [e^{-i(νt-φ)} a†b + h.c.] + κ [e^{-i(μt-θ)} a†c + h.c.]
//! ```
//!
//! With the detunings `Ω = ω_a - ω_b - ν` and `Γ = ω_a - ω_c - μ` equal, the
//! mode operators evolve as `a_x(t) = e^{-iω_x t} Σ_y M_xy(t) a_y(0)` where
//! `M(t)` is the unitary matrix returned by [`compute_coefficients`].

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

type C64 = Complex64;

/// Relative tolerance used when comparing the two detunings.
pub const DETUNING_TOL: f64 = 1e-12;

/// Physical parameters of the coupled system. Frequencies, couplings and pump
/// frequencies share one angular-frequency unit; phases are in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    #[serde(default)]
    pub omega_a: f64,
    #[serde(default)]
    pub omega_b: f64,
    #[serde(default)]
    pub omega_c: f64,
    pub lambda: f64,
    pub kappa: f64,
    #[serde(default)]
    pub nu: f64,
    #[serde(default)]
    pub mu: f64,
    #[serde(default)]
    pub phi: f64,
    #[serde(default)]
    pub theta: f64,
}

impl CouplingConfig {
    /// Resonant configuration with all mode and pump frequencies zero.
    pub fn resonant(lambda: f64, kappa: f64, phi: f64, theta: f64) -> Self {
        Self {
            omega_a: 0.0,
            omega_b: 0.0,
            omega_c: 0.0,
            lambda,
            kappa,
            nu: 0.0,
            mu: 0.0,
            phi,
            theta,
        }
    }

    /// Configuration with common detuning `omega` on both pumps and zero mode
    /// frequencies.
    pub fn detuned(lambda: f64, kappa: f64, omega: f64, phi: f64, theta: f64) -> Self {
        Self {
            nu: -omega,
            mu: -omega,
            ..Self::resonant(lambda, kappa, phi, theta)
        }
    }

    /// `Ω = ω_a - ω_b - ν`.
    pub fn detuning_ab(&self) -> f64 {
        self.omega_a - self.omega_b - self.nu
    }

    /// `Γ = ω_a - ω_c - μ`.
    pub fn detuning_ac(&self) -> f64 {
        self.omega_a - self.omega_c - self.mu
    }

    /// Common detuning; meaningful once [`validate`](Self::validate) passes.
    pub fn detuning(&self) -> f64 {
        self.detuning_ab()
    }

    /// `A = sqrt(Ω² + 4(κ² + λ²)) / 2`.
    pub fn rabi(&self) -> f64 {
        let omega = self.detuning();
        (omega * omega + 4.0 * (self.kappa * self.kappa + self.lambda * self.lambda)).sqrt() / 2.0
    }

    fn frequency_scale(&self) -> f64 {
        [self.omega_a, self.omega_b, self.omega_c, self.nu, self.mu]
            .iter()
            .fold(1.0_f64, |acc, x| acc.max(x.abs()))
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.omega_a,
            self.omega_b,
            self.omega_c,
            self.lambda,
            self.kappa,
            self.nu,
            self.mu,
            self.phi,
            self.theta,
        ];
        if fields.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig("non-finite parameter".into()));
        }
        if self.lambda < 0.0 || self.kappa < 0.0 {
            return Err(Error::InvalidConfig(
                "couplings lambda and kappa must be non-negative".into(),
            ));
        }
        if self.lambda == 0.0 && self.kappa == 0.0 {
            return Err(Error::InvalidConfig(
                "lambda and kappa cannot both be zero".into(),
            ));
        }
        let (omega, gamma) = (self.detuning_ab(), self.detuning_ac());
        if (omega - gamma).abs() > DETUNING_TOL * self.frequency_scale() {
            return Err(Error::InvalidConfig(format!(
                "detunings differ (Omega = {omega}, Gamma = {gamma}); the closed form needs Omega = Gamma"
            )));
        }
        Ok(())
    }

    /// True when the common detuning vanishes within tolerance.
    pub fn is_resonant(&self) -> bool {
        self.detuning().abs() <= DETUNING_TOL * self.frequency_scale()
    }
}

/// Interaction-frame coefficient matrix `[[u1,v1,w1],[u2,v2,w2],[u3,v3,w3]]`
/// at time `t`, with the free-evolution phases kept separately.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorMatrix {
    pub entries: Matrix3<C64>,
    pub t: f64,
    pub free_phases: [C64; 3],
}

impl PropagatorMatrix {
    pub fn identity() -> Self {
        Self {
            entries: Matrix3::identity(),
            t: 0.0,
            free_phases: [C64::new(1.0, 0.0); 3],
        }
    }

    /// Matrix with the free phases folded in: `diag(e^{-iω_x t}) · entries`.
    pub fn lab_frame(&self) -> Matrix3<C64> {
        let mut m = self.entries;
        for (r, phase) in self.free_phases.iter().enumerate() {
            for c in 0..3 {
                m[(r, c)] *= phase;
            }
        }
        m
    }

    /// Same coefficients with the free phases dropped.
    pub fn without_free_phases(&self) -> Self {
        Self {
            free_phases: [C64::new(1.0, 0.0); 3],
            ..*self
        }
    }

    pub fn unitarity_residual(&self) -> f64 {
        unitarity_residual(&self.entries)
    }
}

/// `max |(M†M - I)_jk|`.
pub fn unitarity_residual(m: &Matrix3<C64>) -> f64 {
    let gram = m.adjoint() * m - Matrix3::<C64>::identity();
    gram.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Evaluates the nine time-dependent coefficients at time `t`. Negative
/// times give the inverse propagator.
pub fn compute_coefficients(config: &CouplingConfig, t: f64) -> Result<PropagatorMatrix> {
    config.validate()?;
    if !t.is_finite() {
        return Err(Error::InvalidArgument(format!("time must be finite, got {t}")));
    }
    let omega = config.detuning();
    let a = config.rabi();
    let (lambda, kappa) = (config.lambda, config.kappa);
    let g2 = lambda * lambda + kappa * kappa;
    let i = C64::i();

    let (sin, cos) = (a * t).sin_cos();
    let f = C64::new(cos, omega / (2.0 * a) * sin);
    let half = C64::from_polar(1.0, omega * t / 2.0);
    let half_conj = half.conj();
    let e_phi = C64::from_polar(1.0, config.phi);
    let e_theta = C64::from_polar(1.0, config.theta);
    let s = sin / a;
    let shifted = half_conj * f - 1.0;

    let u1 = half * f.conj();
    let v1 = -i * lambda * e_phi * half * s;
    let w1 = -i * kappa * e_theta * half * s;
    let u2 = -i * lambda * e_phi.conj() * half_conj * s;
    let v2 = 1.0 + lambda * lambda / g2 * shifted;
    let w2 = lambda * kappa / g2 * e_theta * e_phi.conj() * shifted;
    let u3 = -i * kappa * e_theta.conj() * half_conj * s;
    let v3 = lambda * kappa / g2 * e_theta.conj() * e_phi * shifted;
    let w3 = 1.0 + kappa * kappa / g2 * shifted;

    let entries = Matrix3::new(u1, v1, w1, u2, v2, w2, u3, v3, w3);
    let free_phases = [config.omega_a, config.omega_b, config.omega_c]
        .map(|w| C64::from_polar(1.0, -w * t));
    Ok(PropagatorMatrix {
        entries,
        t,
        free_phases,
    })
}

/// Recurrence and conversion times of the resonant regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecialTimes {
    /// `2nπ/A`, when the joint state returns to its initial product form.
    pub recurrence_times: Vec<f64>,
    /// `(n - 1/2)π/A`, when mode A is left in a coherent state.
    pub conversion_times: Vec<f64>,
}

pub fn special_times(config: &CouplingConfig, n_max: usize) -> Result<SpecialTimes> {
    config.validate()?;
    if !config.is_resonant() {
        return Err(Error::NotResonant {
            omega: config.detuning(),
        });
    }
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let a = config.rabi();
    let pi = std::f64::consts::PI;
    Ok(SpecialTimes {
        recurrence_times: (1..=n_max).map(|n| 2.0 * n as f64 * pi / a).collect(),
        conversion_times: (1..=n_max).map(|n| (n as f64 - 0.5) * pi / a).collect(),
    })
}
