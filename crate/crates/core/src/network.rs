//! Three-beam-splitter network converting a superposition in port `a` into
//! entanglement between ports `b_o` and `c_o`.
//!
//! Input modes are ordered `{a, v, b, c}` (with `v` the vacuum port of the
//! first beam splitter) and outputs `{a_o, a_o', b_o, c_o}`:
//!
//! ```text
//! a_t = T1 a + R1 v        a_r = T1 v + R1 a
//! a_o = T2 a_t + R2 b      b_o = T2 b + R2 a_t
//! a_o' = T3 a_r + R3 c     c_o = T3 c + R3 a_r
//! ```
//!
//! with `T = cos φ` and `R = i sin φ`.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

use crate::branch::{make_state, reduced_spectrum, BranchState, ModeSpec};
use crate::entanglement::{
    branch_overlaps, classify_parties, entropy, party_purity, purity, EntanglementReport, EntropyUnit,
};
use crate::error::{Error, Result};
use crate::fock::{branch_to_fock_with, fock_fidelity, FockCutoff, FockHamiltonian, FockStateVector};
use crate::krylov::KrylovOptions;
use crate::modes::ModeSet;

type C64 = Complex64;

pub const PORT_A: usize = 0;
pub const PORT_V: usize = 1;
pub const PORT_B: usize = 2;
pub const PORT_C: usize = 3;

pub const OUTPUT_NAMES: [&str; 4] = ["a_o", "a_o'", "b_o", "c_o"];

/// Branch state over the four network modes.
pub type NetworkState = BranchState<4>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitterSpec {
    pub varphi: f64,
}

impl BeamSplitterSpec {
    pub fn new(varphi: f64) -> Self {
        Self { varphi }
    }

    pub fn transmission(&self) -> C64 {
        C64::new(self.varphi.cos(), 0.0)
    }

    pub fn reflection(&self) -> C64 {
        C64::new(0.0, self.varphi.sin())
    }

    /// `[[T, R], [R, T]]`.
    pub fn matrix(&self) -> Matrix2<C64> {
        let (t, r) = (self.transmission(), self.reflection());
        Matrix2::new(t, r, r, t)
    }
}

/// Composed output-from-input matrix of the whole network.
pub fn network_matrix(specs: &[BeamSplitterSpec; 3]) -> Matrix4<C64> {
    let (t1, r1) = (specs[0].transmission(), specs[0].reflection());
    let (t2, r2) = (specs[1].transmission(), specs[1].reflection());
    let (t3, r3) = (specs[2].transmission(), specs[2].reflection());
    let zero = C64::new(0.0, 0.0);
    Matrix4::new(
        t1 * t2, r1 * t2, r2, zero, //
        r1 * t3, t1 * t3, zero, r3, //
        t1 * r2, r1 * r2, t2, zero, //
        r1 * r3, t1 * r3, zero, t3,
    )
}

fn embed(bs: &BeamSplitterSpec, i: usize, j: usize) -> Matrix4<C64> {
    let m = bs.matrix();
    let mut out = Matrix4::identity();
    out[(i, i)] = m[(0, 0)];
    out[(i, j)] = m[(0, 1)];
    out[(j, i)] = m[(1, 0)];
    out[(j, j)] = m[(1, 1)];
    out
}

/// Same network built as three successive two-port maps. Slot 0 carries
/// `a → a_t → a_o`, slot 1 `v → a_r → a_o'`.
pub fn network_matrix_sequential(specs: &[BeamSplitterSpec; 3]) -> Matrix4<C64> {
    let first = embed(&specs[0], PORT_A, PORT_V);
    let second = embed(&specs[1], PORT_A, PORT_B);
    let third = embed(&specs[2], PORT_V, PORT_C);
    third * second * first
}

/// `a` prepared as given, `v` in vacuum, `b` and `c` coherent.
pub fn network_input(a: ModeSpec, beta: C64, gamma: C64) -> Result<NetworkState> {
    make_state([
        a,
        ModeSpec::vacuum(),
        ModeSpec::Coherent(beta),
        ModeSpec::Coherent(gamma),
    ])
}

pub fn apply_network(input: &NetworkState, specs: &[BeamSplitterSpec; 3]) -> Result<NetworkState> {
    if input
        .branches()
        .iter()
        .any(|b| b.amps[PORT_V] != C64::new(0.0, 0.0))
    {
        return Err(Error::InvalidArgument(
            "the ancilla port v must be in vacuum".into(),
        ));
    }
    Ok(input.transform(&network_matrix(specs)))
}

/// Purities of all output ports and the entropies of the conversion cuts.
///
/// Entropy keys: `a|bc` for the source ports against the target ports,
/// `b_o|c_o` when the source ports are pure, `a_o|a_o'` when the target
/// ports are pure. The class label treats `{a_o, a_o'}`, `b_o` and `c_o`
/// as the three parties.
pub fn conversion_report(output: &NetworkState, tol: f64) -> Result<EntanglementReport> {
    let source = ModeSet::from_modes(&[0, 1]);
    let class_label = classify_parties(
        output,
        [source, ModeSet::single(2), ModeSet::single(3)],
        tol,
    )?;
    let mut purities = std::collections::BTreeMap::new();
    for (m, name) in OUTPUT_NAMES.iter().enumerate() {
        purities.insert(
            name.to_string(),
            purity(&reduced_spectrum(output, ModeSet::single(m))),
        );
    }
    let mut entropies_bits = std::collections::BTreeMap::new();
    let split = reduced_spectrum(output, source);
    entropies_bits.insert("a|bc".to_string(), entropy(&split, EntropyUnit::Bits));
    if purity(&split) > 1.0 - tol {
        let s = entropy(&reduced_spectrum(output, ModeSet::single(2)), EntropyUnit::Bits);
        entropies_bits.insert("b_o|c_o".to_string(), s);
    }
    let target = source.complement(4);
    if party_purity(output, target) > 1.0 - tol {
        let s = entropy(&reduced_spectrum(output, ModeSet::single(0)), EntropyUnit::Bits);
        entropies_bits.insert("a_o|a_o'".to_string(), s);
    }
    Ok(EntanglementReport {
        entropies_bits,
        purities,
        branch_overlaps: branch_overlaps(output, &OUTPUT_NAMES),
        class_label,
    })
}

/// Pair of modes mixed by each splitter, in application order.
pub const SPLITTER_SLOTS: [(usize, usize); 3] = [(PORT_A, PORT_V), (PORT_A, PORT_B), (PORT_V, PORT_C)];

/// Runs the network in the number basis: each splitter is the hopping
/// Hamiltonian `-(a_i† a_j + a_j† a_i)` applied for a time `φ`.
pub fn fock_network(
    psi: &FockStateVector<4>,
    specs: &[BeamSplitterSpec; 3],
    opts: KrylovOptions,
) -> Result<FockStateVector<4>> {
    let mut out = psi.clone();
    for (spec, &(i, j)) in specs.iter().zip(&SPLITTER_SLOTS) {
        let h = FockHamiltonian::<4>::from_hoppings(psi.cutoff(), &[(i, j, C64::new(-1.0, 0.0))])?;
        out = h.evolve(&out, spec.varphi, opts)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkOracle {
    pub n_max: usize,
    pub fidelity: f64,
    pub deficiency: f64,
}

/// Compares the branch-picture output with the number-basis network.
pub fn network_oracle(
    input: &NetworkState,
    specs: &[BeamSplitterSpec; 3],
    cutoff: FockCutoff,
    truncation_tol: f64,
) -> Result<NetworkOracle> {
    let psi = branch_to_fock_with(input, cutoff, truncation_tol)?;
    let evolved = fock_network(&psi, specs, KrylovOptions::default())?;
    let expected = branch_to_fock_with(&apply_network(input, specs)?, cutoff, truncation_tol)?;
    Ok(NetworkOracle {
        n_max: cutoff.n_max,
        fidelity: fock_fidelity(&expected, &evolved)?,
        deficiency: psi.deficiency().max(expected.deficiency()),
    })
}
