//! Coherent-branch states: finite superpositions of products of coherent
//! states.
//!
//! Passive linear evolution maps a product of coherent states to another
//! product of coherent states, so a state written as
//! `Σ_j c_j |a_j1⟩ ⊗ … ⊗ |a_jM⟩` stays in that form exactly. All reductions
//! (norms, marginals, Schmidt spectra) are then computed from branch Gram
//! matrices of size `k × k`, independent of any Fock truncation.

use nalgebra::{DMatrix, SMatrix};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::modes::ModeSet;
use crate::propagator::PropagatorMatrix;

type C64 = Complex64;

pub const DEFAULT_AMPLITUDE_CAP: f64 = 20.0;
pub const DEFAULT_BRANCH_CAP: usize = 64;

/// Normalization tolerance on `⟨ψ|ψ⟩`.
pub const NORM_TOL: f64 = 1e-12;

/// Limits on branch amplitudes and branch counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Caps {
    pub amplitude: f64,
    pub branches: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            amplitude: DEFAULT_AMPLITUDE_CAP,
            branches: DEFAULT_BRANCH_CAP,
        }
    }
}

/// `⟨a|b⟩ = exp(-|a|²/2 - |b|²/2 + a* b)`.
pub fn coherent_overlap(a: C64, b: C64) -> C64 {
    log_overlap(a, b).exp()
}

#[inline]
pub(crate) fn log_overlap(a: C64, b: C64) -> C64 {
    -0.5 * (a.norm_sqr() + b.norm_sqr()) + a.conj() * b
}

/// Even/odd/Yurke–Stoler cat `(|α⟩ + e^{iΦ}|−α⟩) / N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatSpec {
    pub alpha: C64,
    pub phase: f64,
}

impl CatSpec {
    pub fn new(alpha: C64, phase: f64) -> Self {
        Self { alpha, phase }
    }

    /// `N = sqrt(2 + 2 cos Φ e^{-2|α|²})`.
    pub fn normalization(&self) -> f64 {
        (2.0 + 2.0 * self.phase.cos() * (-2.0 * self.alpha.norm_sqr()).exp()).sqrt()
    }
}

/// Initial preparation of a single mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeSpec {
    Coherent(C64),
    Cat(CatSpec),
}

impl ModeSpec {
    pub fn vacuum() -> Self {
        ModeSpec::Coherent(C64::new(0.0, 0.0))
    }

    /// `(coefficient, amplitude)` pairs of the single-mode superposition.
    fn components(&self) -> Result<Vec<(C64, C64)>> {
        match *self {
            ModeSpec::Coherent(a) => Ok(vec![(C64::new(1.0, 0.0), a)]),
            ModeSpec::Cat(cat) => {
                let n = cat.normalization();
                // Below this the two branches cancel to within rounding.
                if !(n * n > 1e-12) {
                    return Err(Error::DegenerateCat {
                        alpha_abs: cat.alpha.norm(),
                        phase: cat.phase,
                    });
                }
                Ok(vec![
                    (C64::new(1.0 / n, 0.0), cat.alpha),
                    (C64::from_polar(1.0 / n, cat.phase), -cat.alpha),
                ])
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch<const M: usize> {
    pub coeff: C64,
    pub amps: [C64; M],
}

/// Superposition of products of `M` coherent states.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchState<const M: usize = 3> {
    branches: Vec<Branch<M>>,
    normalized: bool,
}

impl<const M: usize> BranchState<M> {
    pub fn new(branches: Vec<Branch<M>>) -> Result<Self> {
        Self::with_caps(branches, Caps::default())
    }

    pub fn with_caps(branches: Vec<Branch<M>>, caps: Caps) -> Result<Self> {
        if branches.is_empty() || branches.len() > caps.branches {
            return Err(Error::BranchCount {
                count: branches.len(),
                cap: caps.branches,
            });
        }
        for b in &branches {
            if !b.coeff.re.is_finite() || !b.coeff.im.is_finite() {
                return Err(Error::InvalidArgument("non-finite branch coefficient".into()));
            }
            for a in &b.amps {
                let value = a.norm();
                if !value.is_finite() || value > caps.amplitude {
                    return Err(Error::AmplitudeCap {
                        value,
                        cap: caps.amplitude,
                    });
                }
            }
        }
        let mut state = Self {
            branches,
            normalized: false,
        };
        state.normalized = (state.norm_sqr() - 1.0).abs() < NORM_TOL;
        Ok(state)
    }

    /// Single product of coherent states.
    pub fn coherent(amps: [C64; M]) -> Self {
        Self {
            branches: vec![Branch {
                coeff: C64::new(1.0, 0.0),
                amps,
            }],
            normalized: true,
        }
    }

    pub fn vacuum() -> Self {
        Self::coherent([C64::new(0.0, 0.0); M])
    }

    pub fn branches(&self) -> &[Branch<M>] {
        &self.branches
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// `⟨ψ|ψ⟩ = Σ_jk c_j* c_k Π_m ⟨a_jm|a_km⟩`.
    pub fn norm_sqr(&self) -> f64 {
        self.inner(self).re
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for bj in &self.branches {
            for bk in &other.branches {
                let log: C64 = (0..M).map(|m| log_overlap(bj.amps[m], bk.amps[m])).sum();
                acc += bj.coeff.conj() * bk.coeff * log.exp();
            }
        }
        acc
    }

    /// `|⟨self|other⟩|²` for normalized states.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn normalize(mut self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if !(n2 > 0.0) || !n2.is_finite() {
            return Err(Error::NotNormalized { norm_sqr: n2 });
        }
        let scale = 1.0 / n2.sqrt();
        for b in &mut self.branches {
            b.coeff *= scale;
        }
        self.normalized = true;
        Ok(self)
    }

    /// Drops branches whose coefficient magnitude is below `threshold`.
    /// The result is not renormalized.
    pub fn compact(&self, threshold: f64) -> Result<Self> {
        let kept: Vec<_> = self
            .branches
            .iter()
            .copied()
            .filter(|b| b.coeff.norm() >= threshold)
            .collect();
        Self::new(kept)
    }

    /// Maps every branch amplitude vector through `matrix`.
    pub fn transform(&self, matrix: &SMatrix<C64, M, M>) -> Self {
        let branches = self
            .branches
            .iter()
            .map(|b| {
                let mut amps = [C64::new(0.0, 0.0); M];
                for (r, out) in amps.iter_mut().enumerate() {
                    *out = (0..M).map(|c| matrix[(r, c)] * b.amps[c]).sum();
                }
                Branch {
                    coeff: b.coeff,
                    amps,
                }
            })
            .collect();
        Self {
            branches,
            normalized: self.normalized,
        }
    }

    /// Mean photon number of every mode.
    pub fn mean_photons(&self) -> [f64; M] {
        let mut out = [0.0; M];
        let norm = self.norm_sqr();
        for bj in &self.branches {
            for bk in &self.branches {
                let log: C64 = (0..M).map(|m| log_overlap(bj.amps[m], bk.amps[m])).sum();
                let w = bj.coeff.conj() * bk.coeff * log.exp();
                for (m, o) in out.iter_mut().enumerate() {
                    *o += (w * bj.amps[m].conj() * bk.amps[m]).re;
                }
            }
        }
        out.map(|x| x / norm)
    }

    pub fn total_mean_photons(&self) -> f64 {
        self.mean_photons().iter().sum()
    }
}

/// Builds the product of per-mode preparations. Each cat contributes two
/// branches; coefficients multiply.
pub fn make_state<const M: usize>(modes: [ModeSpec; M]) -> Result<BranchState<M>> {
    let mut branches = vec![Branch {
        coeff: C64::new(1.0, 0.0),
        amps: [C64::new(0.0, 0.0); M],
    }];
    for (m, spec) in modes.iter().enumerate() {
        let comps = spec.components()?;
        branches = branches
            .iter()
            .flat_map(|b| {
                comps.iter().map(move |&(c, a)| {
                    let mut next = *b;
                    next.coeff *= c;
                    next.amps[m] = a;
                    next
                })
            })
            .collect();
    }
    let state = BranchState::new(branches)?;
    if !state.is_normalized() {
        return Err(Error::NotNormalized {
            norm_sqr: state.norm_sqr(),
        });
    }
    Ok(state)
}

/// Evolves a three-mode state under the propagator, free phases included.
pub fn evolve(state: &BranchState<3>, propagator: &PropagatorMatrix) -> BranchState<3> {
    state.transform(&propagator.lab_frame())
}

/// `G_jk = Π_{m ∈ modes} ⟨a_jm|a_km⟩`.
pub fn gram_matrix<const M: usize>(state: &BranchState<M>, modes: ModeSet) -> DMatrix<C64> {
    let k = state.len();
    let br = state.branches();
    DMatrix::from_fn(k, k, |j, l| {
        let log: C64 = modes
            .iter()
            .filter(|&m| m < M)
            .map(|m| log_overlap(br[j].amps[m], br[l].amps[m]))
            .sum();
        log.exp()
    })
}

/// Eigenvalues of the reduced density operator on `side`, sorted
/// descending, clamped at zero and scaled by the state norm.
///
/// The reduced operator is `Σ_jk B_jk |S_j⟩⟨S_k|` with
/// `B_jk = c_j c_k* ⟨R_k|R_j⟩`; its nonzero spectrum equals that of the
/// Hermitian `k × k` matrix `G_S^{1/2} B G_S^{1/2}`.
pub fn reduced_spectrum<const M: usize>(state: &BranchState<M>, side: ModeSet) -> Vec<f64> {
    let rest = side.complement(M);
    let g_side = gram_matrix(state, side);
    let g_rest = gram_matrix(state, rest);
    let br = state.branches();
    let k = state.len();
    let b = DMatrix::from_fn(k, k, |j, l| br[j].coeff * br[l].coeff.conj() * g_rest[(l, j)]);
    let root = linalg::psd_sqrt(&g_side);
    let h = &root * b * &root;
    let norm = state.norm_sqr();
    linalg::hermitian_eigenvalues(&h)
        .into_iter()
        .map(|v| (v / norm).max(0.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::{MODE_A, MODE_B, MODE_C};
    use crate::propagator::{compute_coefficients, CouplingConfig};
    use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn cat_a(alpha: f64, phase: f64) -> BranchState<3> {
        make_state([
            ModeSpec::Cat(CatSpec::new(c(alpha, 0.0), phase)),
            ModeSpec::vacuum(),
            ModeSpec::vacuum(),
        ])
        .unwrap()
    }

    #[test]
    fn overlap_values() {
        let a = c(0.3, -1.2);
        assert!((coherent_overlap(a, a) - 1.0).norm() < 1e-15);
        let v = coherent_overlap(c(2.0, 0.0), c(-2.0, 0.0));
        assert!((v.re - (-8f64).exp()).abs() < 1e-18);
        assert!((v.re - 3.3546e-4).abs() < 1e-8);
        let w = coherent_overlap(c(0.0, -SQRT_2), c(0.0, SQRT_2));
        assert!((w - c((-4f64).exp(), 0.0)).norm() < 1e-16);
    }

    #[test]
    fn coherent_product_is_single_branch() {
        let s = make_state([
            ModeSpec::Coherent(c(1.0, 0.5)),
            ModeSpec::Coherent(c(0.0, -1.0)),
            ModeSpec::vacuum(),
        ])
        .unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.branches()[0].coeff, c(1.0, 0.0));
        assert!(s.is_normalized());
    }

    #[test]
    fn even_cat_coefficients() {
        let s = cat_a(2.0, 0.0);
        let n = (2.0 + 2.0 * (-8f64).exp()).sqrt();
        assert_eq!(s.len(), 2);
        for b in s.branches() {
            assert!((b.coeff - c(1.0 / n, 0.0)).norm() < 1e-15);
        }
        assert!((s.norm_sqr() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_odd_cat() {
        let r = make_state([
            ModeSpec::Cat(CatSpec::new(c(0.0, 0.0), PI)),
            ModeSpec::vacuum(),
            ModeSpec::vacuum(),
        ]);
        assert!(matches!(r, Err(Error::DegenerateCat { .. })));
    }

    #[test]
    fn caps_are_enforced() {
        let r = BranchState::<3>::new(vec![Branch {
            coeff: c(1.0, 0.0),
            amps: [c(25.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        }]);
        assert!(matches!(r, Err(Error::AmplitudeCap { .. })));
        assert!(matches!(
            BranchState::<3>::new(vec![]),
            Err(Error::BranchCount { .. })
        ));
    }

    #[test]
    fn evolve_coherent_at_conversion() {
        let cfg = CouplingConfig::resonant(1.0, 1.0, 0.0, 0.0);
        let m = compute_coefficients(&cfg, PI / (2.0 * SQRT_2)).unwrap();
        let s = BranchState::coherent([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let out = evolve(&s, &m);
        let amps = out.branches()[0].amps;
        assert!(amps[0].norm() < 1e-15);
        assert!((amps[1] - c(0.0, -FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!((amps[2] - c(0.0, -FRAC_1_SQRT_2)).norm() < 1e-15);
    }

    #[test]
    fn evolve_cat_factors_out_mode_a() {
        let cfg = CouplingConfig::resonant(1.0, 1.0, 0.0, 0.0);
        let m = compute_coefficients(&cfg, PI / (2.0 * SQRT_2)).unwrap();
        let out = evolve(&cat_a(2.0, 0.0), &m);
        let b = out.branches();
        assert!(b[0].amps[0].norm() < 1e-14 && b[1].amps[0].norm() < 1e-14);
        assert!((b[0].amps[1] - c(0.0, -SQRT_2)).norm() < 1e-14);
        assert!((b[0].amps[2] - c(0.0, -SQRT_2)).norm() < 1e-14);
        assert!((b[1].amps[1] - c(0.0, SQRT_2)).norm() < 1e-14);
        assert!((b[1].amps[2] - c(0.0, SQRT_2)).norm() < 1e-14);
        assert_eq!(b[0].coeff, b[1].coeff);
    }

    #[test]
    fn identity_evolution_is_noop() {
        let s = cat_a(1.3, 0.4);
        assert_eq!(evolve(&s, &PropagatorMatrix::identity()), s);
    }

    #[test]
    fn cat_gram_matrix() {
        let g = gram_matrix(&cat_a(2.0, 0.0), ModeSet::single(MODE_A));
        let e8 = (-8f64).exp();
        assert!((g[(0, 1)] - c(e8, 0.0)).norm() < 1e-18);
        assert!((g[(1, 0)] - c(e8, 0.0)).norm() < 1e-18);
        assert!((g[(0, 0)] - 1.0).norm() < 1e-15);
        let single = BranchState::coherent([c(0.5, 0.0); 3]);
        assert_eq!(gram_matrix(&single, ModeSet::all(3)).shape(), (1, 1));
    }

    #[test]
    fn bell_cat_gram_and_spectrum() {
        let cfg = CouplingConfig::resonant(1.0, 1.0, 0.0, 0.0);
        let m = compute_coefficients(&cfg, PI / (2.0 * SQRT_2)).unwrap();
        let out = evolve(&cat_a(2.0, 0.0), &m);
        let g = gram_matrix(&out, ModeSet::from_modes(&[MODE_B, MODE_C]));
        assert!((g[(0, 1)].re - (-8f64).exp()).abs() < 1e-17);

        let s = (-4f64).exp();
        let p_plus = (1.0 + s).powi(2) / (2.0 * (1.0 + s * s));
        let p_minus = (1.0 - s).powi(2) / (2.0 * (1.0 + s * s));
        let spec = reduced_spectrum(&out, ModeSet::single(MODE_B));
        assert!((spec[0] - p_plus).abs() < 1e-12);
        assert!((spec[1] - p_minus).abs() < 1e-12);
        assert!((p_plus - 0.51831).abs() < 1e-5);
    }

    #[test]
    fn product_spectrum_is_pure() {
        let s = BranchState::coherent([c(0.3, 0.1), c(-1.0, 0.0), c(0.0, 2.0)]);
        for m in 0..3 {
            let spec = reduced_spectrum(&s, ModeSet::single(m));
            assert_eq!(spec.len(), 1);
            assert!((spec[0] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn large_cat_ghz_limit() {
        let cfg = CouplingConfig::resonant(1.0, 1.0, 0.0, 0.0);
        let t = PI / (4.0 * cfg.rabi());
        let out = evolve(&cat_a(6.0, 0.0), &compute_coefficients(&cfg, t).unwrap());
        for m in 0..3 {
            let spec = reduced_spectrum(&out, ModeSet::single(m));
            assert!((spec[0] - 0.5).abs() < 1e-6 && (spec[1] - 0.5).abs() < 1e-6);
        }
    }

    #[test]
    fn mean_photons_of_cat() {
        let s = cat_a(2.0, 0.0);
        let e = (-8f64).exp();
        let expected = 4.0 * (1.0 - e) / (1.0 + e);
        assert!((s.mean_photons()[0] - expected).abs() < 1e-12);
        assert!(s.mean_photons()[1].abs() < 1e-15);
    }

    #[test]
    fn compaction_drops_small_branches() {
        let s = BranchState::<3>::new(vec![
            Branch {
                coeff: c(1.0, 0.0),
                amps: [c(0.0, 0.0); 3],
            },
            Branch {
                coeff: c(1e-16, 0.0),
                amps: [c(1.0, 0.0); 3],
            },
        ])
        .unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.compact(1e-15).unwrap().len(), 1);
    }
}
