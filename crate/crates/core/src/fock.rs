//! Truncated Fock-space oracle.
//!
//! States are stored on every occupation tuple whose total photon number is
//! at most `n_max`, grouped into sectors of fixed total number. A passive
//! bilinear Hamiltonian conserves the total photon number, so every retained
//! sector is closed under the dynamics and is evolved without any further
//! truncation error; the only approximation is the norm lost when the initial
//! state is projected onto the retained space (the truncation deficiency).

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::branch::BranchState;
use crate::error::{Error, Result};
use crate::krylov::{self, KrylovOptions};
use crate::linalg;
use crate::ode::{self, Tolerance};
use crate::propagator::CouplingConfig;

type C64 = Complex64;

/// Upper bound on `(n_max + 1)^modes`.
pub const DIMENSION_GUARD: u64 = 10_000_000;
/// Largest accepted truncation deficiency for certified results.
pub const DEFAULT_TRUNCATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockCutoff {
    pub n_max: usize,
    /// Keep only the sector with this total photon number.
    pub sector_total: Option<usize>,
}

impl FockCutoff {
    pub fn new(n_max: usize) -> Self {
        Self {
            n_max,
            sector_total: None,
        }
    }

    pub fn sector(n_max: usize, total: usize) -> Self {
        Self {
            n_max,
            sector_total: Some(total),
        }
    }

    /// `n_max = ceil(μ + 8√μ + 10)` for mean photon number `μ`.
    pub fn auto(mean_photons: f64) -> Self {
        let mu = mean_photons.max(0.0);
        Self::new((mu + 8.0 * mu.sqrt() + 10.0).ceil() as usize)
    }

    pub fn validate(&self, modes: usize) -> Result<()> {
        if self.n_max < 1 {
            return Err(Error::InvalidArgument("cutoff n_max must be at least 1".into()));
        }
        let dim = (self.n_max as u64 + 1)
            .checked_pow(modes as u32)
            .unwrap_or(u64::MAX);
        if dim > DIMENSION_GUARD {
            return Err(Error::CutoffTooLarge {
                dim,
                limit: DIMENSION_GUARD,
            });
        }
        if let Some(total) = self.sector_total {
            if total > self.n_max {
                return Err(Error::InvalidArgument(format!(
                    "sector total {total} exceeds n_max {}",
                    self.n_max
                )));
            }
        }
        Ok(())
    }

    fn totals(&self) -> Vec<usize> {
        match self.sector_total {
            Some(n) => vec![n],
            None => (0..=self.n_max).collect(),
        }
    }
}

/// Number of occupation tuples of `modes` modes with total `n`.
pub fn sector_dimension(modes: usize, n: usize) -> usize {
    // binomial(n + modes - 1, modes - 1)
    let k = modes.saturating_sub(1);
    (1..=k).fold(1usize, |acc, i| acc * (n + i) / i)
}

/// Occupations in descending lexicographic order.
fn compositions<const M: usize>(total: usize) -> Vec<[u16; M]> {
    fn fill<const M: usize>(pos: usize, left: usize, cur: &mut [u16; M], out: &mut Vec<[u16; M]>) {
        if pos + 1 == M {
            cur[pos] = left as u16;
            out.push(*cur);
            return;
        }
        for n in (0..=left).rev() {
            cur[pos] = n as u16;
            fill(pos + 1, left - n, cur, out);
        }
    }
    let mut out = Vec::with_capacity(sector_dimension(M, total));
    let mut cur = [0u16; M];
    if M > 0 {
        fill(0, total, &mut cur, &mut out);
    }
    out
}

#[derive(Debug)]
struct Sector<const M: usize> {
    total: usize,
    offset: usize,
    states: Vec<[u16; M]>,
}

/// Retained occupation tuples, sector by sector.
#[derive(Debug)]
pub struct FockBasis<const M: usize> {
    cutoff: FockCutoff,
    sectors: Vec<Sector<M>>,
    index: HashMap<[u16; M], usize>,
    dim: usize,
}

impl<const M: usize> FockBasis<M> {
    pub fn new(cutoff: FockCutoff) -> Result<Self> {
        cutoff.validate(M)?;
        let mut sectors = Vec::new();
        let mut index = HashMap::new();
        let mut offset = 0;
        for total in cutoff.totals() {
            let states = compositions::<M>(total);
            for (i, s) in states.iter().enumerate() {
                index.insert(*s, offset + i);
            }
            let len = states.len();
            sectors.push(Sector {
                total,
                offset,
                states,
            });
            offset += len;
        }
        Ok(Self {
            cutoff,
            sectors,
            index,
            dim: offset,
        })
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn index_of(&self, occupation: [usize; M]) -> Option<usize> {
        if occupation.iter().any(|&n| n > u16::MAX as usize) {
            return None;
        }
        self.index.get(&occupation.map(|n| n as u16)).copied()
    }

    /// Occupation tuples in storage order.
    pub fn states(&self) -> impl Iterator<Item = [usize; M]> + '_ {
        self.sectors
            .iter()
            .flat_map(|s| s.states.iter().map(|o| o.map(|n| n as usize)))
    }

    /// `(total, offset, len)` of each retained sector.
    pub fn sector_ranges(&self) -> Vec<(usize, usize, usize)> {
        self.sectors
            .iter()
            .map(|s| (s.total, s.offset, s.states.len()))
            .collect()
    }
}

/// Amplitude vector on a truncated Fock basis.
#[derive(Debug, Clone)]
pub struct FockStateVector<const M: usize = 3> {
    basis: Arc<FockBasis<M>>,
    amps: Vec<C64>,
    deficiency: f64,
}

impl<const M: usize> FockStateVector<M> {
    pub fn zeros(basis: Arc<FockBasis<M>>) -> Self {
        let dim = basis.dim();
        Self {
            basis,
            amps: vec![C64::new(0.0, 0.0); dim],
            deficiency: 0.0,
        }
    }

    /// Number state `|n_1, …, n_M⟩`.
    pub fn number_state(cutoff: FockCutoff, occupation: [usize; M]) -> Result<Self> {
        let basis = Arc::new(FockBasis::new(cutoff)?);
        let idx = basis.index_of(occupation).ok_or_else(|| {
            Error::InvalidArgument(format!("occupation {occupation:?} outside the cutoff"))
        })?;
        let mut s = Self::zeros(basis);
        s.amps[idx] = C64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn vacuum(cutoff: FockCutoff) -> Result<Self> {
        Self::number_state(cutoff, [0; M])
    }

    pub fn basis(&self) -> &FockBasis<M> {
        &self.basis
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.basis.cutoff()
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitude(&self, occupation: [usize; M]) -> C64 {
        self.basis
            .index_of(occupation)
            .map_or(C64::new(0.0, 0.0), |i| self.amps[i])
    }

    /// Norm lost when the source state was projected onto the cutoff.
    pub fn deficiency(&self) -> f64 {
        self.deficiency
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.cutoff() != other.cutoff() {
            return Err(Error::CutoffMismatch);
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `⟨n_m⟩` for every mode, normalized by the retained norm.
    pub fn mean_photons(&self) -> [f64; M] {
        let mut out = [0.0; M];
        for (occ, a) in self.basis.states().zip(&self.amps) {
            let p = a.norm_sqr();
            for m in 0..M {
                out[m] += p * occ[m] as f64;
            }
        }
        let norm = self.norm_sqr();
        out.map(|x| x / norm)
    }

    /// Probability carried by each retained total-photon sector.
    pub fn sector_weights(&self) -> Vec<(usize, f64)> {
        self.basis
            .sector_ranges()
            .into_iter()
            .map(|(total, off, len)| {
                (total, self.amps[off..off + len].iter().map(|a| a.norm_sqr()).sum())
            })
            .collect()
    }

    /// Single-mode reduced density matrix on `0..=n_max`, normalized to unit
    /// trace.
    pub fn reduced_density(&self, mode: usize) -> DMatrix<C64> {
        assert!(mode < M);
        let n = self.cutoff().n_max + 1;
        let mut groups: HashMap<[usize; M], Vec<(usize, C64)>> = HashMap::new();
        for (occ, a) in self.basis.states().zip(&self.amps) {
            if *a == C64::new(0.0, 0.0) {
                continue;
            }
            let mut key = occ;
            key[mode] = 0;
            groups.entry(key).or_default().push((occ[mode], *a));
        }
        let mut rho = DMatrix::<C64>::zeros(n, n);
        for entries in groups.values() {
            for &(i, ai) in entries {
                for &(j, aj) in entries {
                    rho[(i, j)] += ai * aj.conj();
                }
            }
        }
        let norm = self.norm_sqr();
        rho.unscale(norm)
    }

    /// Eigenvalues of the single-mode reduced state, descending, clamped.
    pub fn marginal_spectrum(&self, mode: usize) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.reduced_density(mode))
            .into_iter()
            .map(|v| v.max(0.0))
            .collect()
    }

    pub fn marginal_purity(&self, mode: usize) -> f64 {
        let rho = self.reduced_density(mode);
        (&rho * &rho).trace().re
    }

    /// Multiplies `|n⟩` by `e^{-i Σ ω_m n_m t}`.
    pub fn apply_free_evolution(&mut self, omegas: [f64; M], t: f64) {
        for (occ, a) in self.basis.states().zip(self.amps.iter_mut()) {
            let phase: f64 = (0..M).map(|m| omegas[m] * occ[m] as f64).sum();
            *a *= C64::from_polar(1.0, -phase * t);
        }
    }
}

/// `|⟨ψ|φ⟩|²`, clamped to `[0, 1]`.
pub fn fock_fidelity<const M: usize>(psi: &FockStateVector<M>, phi: &FockStateVector<M>) -> Result<f64> {
    Ok(psi.inner(phi)?.norm_sqr().min(1.0))
}

/// `e^{-|a|²/2} a^n / sqrt(n!)` for `n = 0..=n_max`.
fn coherent_number_amplitudes(a: C64, n_max: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut cur = C64::new((-0.5 * a.norm_sqr()).exp(), 0.0);
    out.push(cur);
    for n in 1..=n_max {
        cur = cur * a / (n as f64).sqrt();
        out.push(cur);
    }
    out
}

/// Expands a branch state in the number basis. Fails when the projected
/// norm falls short of the state norm by more than `tol`.
pub fn branch_to_fock_with<const M: usize>(
    state: &BranchState<M>,
    cutoff: FockCutoff,
    tol: f64,
) -> Result<FockStateVector<M>> {
    let basis = Arc::new(FockBasis::<M>::new(cutoff)?);
    let n_max = cutoff.n_max;
    let tables: Vec<(C64, Vec<Vec<C64>>)> = state
        .branches()
        .iter()
        .map(|b| {
            (
                b.coeff,
                b.amps
                    .iter()
                    .map(|&a| coherent_number_amplitudes(a, n_max))
                    .collect(),
            )
        })
        .collect();
    let amps: Vec<C64> = basis
        .states()
        .map(|occ| {
            tables
                .iter()
                .map(|(c, t)| (0..M).fold(*c, |acc, m| acc * t[m][occ[m]]))
                .sum()
        })
        .collect();
    let mut out = FockStateVector::zeros(basis);
    out.amps = amps;
    let total = state.norm_sqr();
    out.deficiency = (1.0 - out.norm_sqr() / total).max(0.0);
    if out.deficiency > tol {
        return Err(Error::TruncationBreach {
            deficiency: out.deficiency,
            tol,
            n_max,
        });
    }
    Ok(out)
}

pub fn branch_to_fock<const M: usize>(state: &BranchState<M>, cutoff: FockCutoff) -> Result<FockStateVector<M>> {
    branch_to_fock_with(state, cutoff, DEFAULT_TRUNCATION_TOL)
}

/// Hopping lists of one sector: for each mode pair, the nonzero elements
/// `(target index, source index, sqrt((n_i + 1) n_j))` of `a_i† a_j`.
#[derive(Debug, Clone)]
struct SectorOperator {
    offset: usize,
    dim: usize,
    transfers: Vec<Vec<(u32, u32, f64)>>,
}

impl SectorOperator {
    fn build<const M: usize>(basis: &FockBasis<M>, sector: &Sector<M>, pairs: &[(usize, usize)]) -> Self {
        let transfers = pairs
            .iter()
            .map(|&(i, j)| {
                let mut list = Vec::new();
                for (src, occ) in sector.states.iter().enumerate() {
                    if occ[j] == 0 {
                        continue;
                    }
                    let mut to = *occ;
                    to[i] += 1;
                    to[j] -= 1;
                    let tgt = basis.index[&to] - sector.offset;
                    let w = (((occ[i] as f64) + 1.0) * occ[j] as f64).sqrt();
                    list.push((tgt as u32, src as u32, w));
                }
                list
            })
            .collect();
        Self {
            offset: sector.offset,
            dim: sector.states.len(),
            transfers,
        }
    }

    /// `y = Σ_p (g_p a_i† a_j + g_p* a_j† a_i) x`.
    fn apply(&self, couplings: &[C64], x: &[C64], y: &mut [C64]) {
        y.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for (list, &g) in self.transfers.iter().zip(couplings) {
            let gc = g.conj();
            for &(to, from, w) in list {
                let (to, from) = (to as usize, from as usize);
                y[to] += g * w * x[from];
                y[from] += gc * w * x[to];
            }
        }
    }
}

/// Sparse passive Hamiltonian `Σ_p (g_p a_i† a_j + h.c.)` stored by sector.
#[derive(Debug, Clone)]
pub struct FockHamiltonian<const M: usize = 3> {
    basis: Arc<FockBasis<M>>,
    pairs: Vec<(usize, usize)>,
    couplings: Vec<C64>,
    sectors: Vec<SectorOperator>,
}

impl<const M: usize> FockHamiltonian<M> {
    /// Hamiltonian with terms `g a_i† a_j + g* a_j† a_i` for each
    /// `(i, j, g)`.
    pub fn from_hoppings(cutoff: FockCutoff, hoppings: &[(usize, usize, C64)]) -> Result<Self> {
        Self::on_basis(Arc::new(FockBasis::new(cutoff)?), hoppings)
    }

    fn on_basis(basis: Arc<FockBasis<M>>, hoppings: &[(usize, usize, C64)]) -> Result<Self> {
        for &(i, j, _) in hoppings {
            if i >= M || j >= M || i == j {
                return Err(Error::InvalidArgument(format!("invalid hopping pair ({i}, {j})")));
            }
        }
        let pairs: Vec<_> = hoppings.iter().map(|&(i, j, _)| (i, j)).collect();
        let sectors = basis
            .sectors
            .iter()
            .map(|s| SectorOperator::build(&basis, s, &pairs))
            .collect();
        Ok(Self {
            basis,
            pairs,
            couplings: hoppings.iter().map(|h| h.2).collect(),
            sectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// `H x` on the full retained space.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); x.len()];
        for s in &self.sectors {
            let range = s.offset..s.offset + s.dim;
            s.apply(&self.couplings, &x[range.clone()], &mut y[range]);
        }
        y
    }

    /// Dense matrix of one sector, in storage order.
    pub fn sector_block(&self, total: usize) -> Option<DMatrix<C64>> {
        let s = self
            .basis
            .sectors
            .iter()
            .zip(&self.sectors)
            .find(|(sec, _)| sec.total == total)?
            .1;
        Some(dense_of(|x, y| s.apply(&self.couplings, x, y), s.dim))
    }

    /// Dense matrix on the full retained space.
    pub fn to_dense(&self) -> DMatrix<C64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        let mut e = vec![C64::new(0.0, 0.0); n];
        for c in 0..n {
            e[c] = C64::new(1.0, 0.0);
            let col = self.apply(&e);
            e[c] = C64::new(0.0, 0.0);
            for (r, v) in col.into_iter().enumerate() {
                m[(r, c)] = v;
            }
        }
        m
    }

    /// `exp(-i H t) ψ`, sector by sector.
    pub fn evolve(&self, psi: &FockStateVector<M>, t: f64, opts: KrylovOptions) -> Result<FockStateVector<M>> {
        if psi.cutoff() != self.basis.cutoff() {
            return Err(Error::CutoffMismatch);
        }
        // Tolerances are relative to the whole state, so sparsely populated
        // sectors need not be resolved to their own relative precision.
        let total = psi.norm_sqr().sqrt();
        let blocks: Vec<Vec<C64>> = self
            .sectors
            .par_iter()
            .map(|s| {
                let x = &psi.amps[s.offset..s.offset + s.dim];
                let own = x.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                let local = KrylovOptions {
                    tol: if own > 0.0 { (opts.tol * total / own).min(1e-3) } else { opts.tol },
                    ..opts
                };
                krylov::expm_multiply(|v, w| s.apply(&self.couplings, v, w), x, t, local)
            })
            .collect();
        Ok(psi.with_blocks(blocks))
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }
}

fn dense_of<F: Fn(&[C64], &mut [C64])>(apply: F, n: usize) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(n, n);
    let mut e = vec![C64::new(0.0, 0.0); n];
    let mut col = vec![C64::new(0.0, 0.0); n];
    for c in 0..n {
        e[c] = C64::new(1.0, 0.0);
        apply(&e, &mut col);
        e[c] = C64::new(0.0, 0.0);
        for r in 0..n {
            m[(r, c)] = col[r];
        }
    }
    m
}

impl<const M: usize> FockStateVector<M> {
    fn with_blocks(&self, blocks: Vec<Vec<C64>>) -> Self {
        let mut amps = Vec::with_capacity(self.amps.len());
        for b in blocks {
            amps.extend(b);
        }
        Self {
            basis: Arc::clone(&self.basis),
            amps,
            deficiency: self.deficiency,
        }
    }
}

fn coupling_terms(config: &CouplingConfig, t: f64) -> [(usize, usize, C64); 2] {
    [
        (0, 1, C64::from_polar(config.lambda, config.detuning_ab() * t + config.phi)),
        (0, 2, C64::from_polar(config.kappa, config.detuning_ac() * t + config.theta)),
    ]
}

/// Interaction-frame Hamiltonian
/// `λ(e^{iφ} a†b + h.c.) + κ(e^{iθ} a†c + h.c.)`. For a detuned
/// configuration this is the operator at `t = 0`.
pub fn build_hamiltonian(config: &CouplingConfig, cutoff: FockCutoff) -> Result<FockHamiltonian<3>> {
    config.validate()?;
    FockHamiltonian::from_hoppings(cutoff, &coupling_terms(config, 0.0))
}

#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    pub truncation_tol: f64,
    pub krylov: KrylovOptions,
    pub ode: Tolerance,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            truncation_tol: DEFAULT_TRUNCATION_TOL,
            krylov: KrylovOptions::default(),
            ode: Tolerance {
                atol: 1e-12,
                rtol: 1e-12,
                max_steps: 2_000_000,
            },
        }
    }
}

/// Schrödinger-picture evolution of a three-mode number-basis state,
/// including the free phases `e^{-iω_x n_x t}`.
pub fn evolve_fock(psi0: &FockStateVector<3>, config: &CouplingConfig, t: f64) -> Result<FockStateVector<3>> {
    evolve_fock_with(psi0, config, t, &OracleOptions::default())
}

pub fn evolve_fock_with(
    psi0: &FockStateVector<3>,
    config: &CouplingConfig,
    t: f64,
    opts: &OracleOptions,
) -> Result<FockStateVector<3>> {
    Ok(evolve_fock_schedule(psi0, config, &[t], opts)?.pop().expect("one time"))
}

/// Evolves `psi0` to every time in `times` (any order). A detuned
/// configuration is integrated once along the sorted times instead of
/// restarting from zero for each.
pub fn evolve_fock_schedule(
    psi0: &FockStateVector<3>,
    config: &CouplingConfig,
    times: &[f64],
    opts: &OracleOptions,
) -> Result<Vec<FockStateVector<3>>> {
    config.validate()?;
    if psi0.deficiency > opts.truncation_tol {
        return Err(Error::TruncationBreach {
            deficiency: psi0.deficiency,
            tol: opts.truncation_tol,
            n_max: psi0.cutoff().n_max,
        });
    }
    let ham = FockHamiltonian::on_basis(Arc::clone(&psi0.basis), &coupling_terms(config, 0.0))?;
    let evolved: Vec<FockStateVector<3>> = if config.is_resonant() {
        times
            .par_iter()
            .map(|&t| ham.evolve(psi0, t, opts.krylov))
            .collect::<Result<_>>()?
    } else {
        let mut order: Vec<usize> = (0..times.len()).collect();
        order.sort_by(|&i, &j| times[i].total_cmp(&times[j]));
        // trajectories[sector][k] is the block at times[order[k]].
        let trajectories = ham
            .sectors
            .par_iter()
            .map(|s| {
                let mut x = psi0.amps[s.offset..s.offset + s.dim].to_vec();
                let mut t_prev = 0.0;
                order
                    .iter()
                    .map(|&i| {
                        x = ode::integrate(
                            |time, v, dv| {
                                let g = coupling_terms(config, time).map(|h| h.2);
                                s.apply(&g, v, dv);
                                dv.iter_mut().for_each(|d| *d *= -C64::i());
                            },
                            t_prev,
                            times[i],
                            &x,
                            opts.ode,
                        )?;
                        t_prev = times[i];
                        Ok(x.clone())
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let mut out: Vec<Option<FockStateVector<3>>> = vec![None; times.len()];
        for (k, &i) in order.iter().enumerate() {
            let blocks = trajectories.iter().map(|tr| tr[k].clone()).collect();
            out[i] = Some(psi0.with_blocks(blocks));
        }
        out.into_iter().map(|o| o.expect("every time filled")).collect()
    };
    evolved
        .into_iter()
        .zip(times)
        .map(|(mut out, &t)| {
            out.apply_free_evolution([config.omega_a, config.omega_b, config.omega_c], t);
            let lost = (psi0.norm_sqr() - out.norm_sqr()).abs();
            if lost > opts.truncation_tol {
                return Err(Error::TruncationBreach {
                    deficiency: lost,
                    tol: opts.truncation_tol,
                    n_max: psi0.cutoff().n_max,
                });
            }
            Ok(out)
        })
        .collect()
}
