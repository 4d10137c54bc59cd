//! Entropies, marginal purities and Dür-class labels of pure branch states.
//!
//! Only pure global states are classified, so the labels produced are
//! fully inseparable (class 1), biseparable with one factored party
//! (class 2) and fully separable (class 5). Classes 3 and 4 exist in the
//! enum for completeness but need mixed states and are never returned.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::branch::{coherent_overlap, reduced_spectrum, BranchState};
use crate::error::{Error, Result};
use crate::json::ComplexValue;
use crate::modes::{mode_name, Cut, ModeSet, MODE_B};

/// Default tolerance on `1 - purity` for calling a marginal pure.
pub const PURITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EntropyUnit {
    #[default]
    Bits,
    Nats,
}

/// Von Neumann entropy of a probability spectrum.
pub fn entropy(spectrum: &[f64], unit: EntropyUnit) -> f64 {
    let nats: f64 = spectrum
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum();
    match unit {
        EntropyUnit::Nats => nats.max(0.0),
        EntropyUnit::Bits => (nats / std::f64::consts::LN_2).max(0.0),
    }
}

pub fn purity(spectrum: &[f64]) -> f64 {
    spectrum.iter().map(|p| p * p).sum()
}

/// Entanglement entropy across `side | rest`, in bits.
pub fn cut_entropy<const M: usize>(state: &BranchState<M>, side: ModeSet) -> f64 {
    cut_entropy_in(state, side, EntropyUnit::Bits)
}

pub fn cut_entropy_in<const M: usize>(state: &BranchState<M>, side: ModeSet, unit: EntropyUnit) -> f64 {
    entropy(&reduced_spectrum(state, side), unit)
}

/// `Tr ρ_S²` for the modes in `side`.
pub fn party_purity<const M: usize>(state: &BranchState<M>, side: ModeSet) -> f64 {
    purity(&reduced_spectrum(state, side))
}

pub fn marginal_purity<const M: usize>(state: &BranchState<M>, mode: usize) -> f64 {
    party_purity(state, ModeSet::single(mode))
}

/// Tripartite entanglement class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassLabel {
    FullyInseparable,
    /// Product across the given cut; the lone party of the cut factors out.
    Biseparable(Cut),
    /// Mixed states only; never produced.
    TwoCutBiseparable,
    /// Mixed states only; never produced.
    ThreeCutBiseparable,
    FullySeparable,
    Undetermined,
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassLabel::FullyInseparable => f.write_str("Class1_FullyInseparable"),
            ClassLabel::Biseparable(cut) => write!(f, "Class2_Biseparable({cut})"),
            ClassLabel::TwoCutBiseparable => f.write_str("Class3_TwoCutBiseparable"),
            ClassLabel::ThreeCutBiseparable => f.write_str("Class4_ThreeCutBiseparable"),
            ClassLabel::FullySeparable => f.write_str("Class5_FullySeparable"),
            ClassLabel::Undetermined => f.write_str("Undetermined"),
        }
    }
}

impl FromStr for ClassLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let label = match s {
            "Class1_FullyInseparable" => ClassLabel::FullyInseparable,
            "Class2_Biseparable(A|BC)" => ClassLabel::Biseparable(Cut::A),
            "Class2_Biseparable(B|AC)" => ClassLabel::Biseparable(Cut::B),
            "Class2_Biseparable(C|AB)" => ClassLabel::Biseparable(Cut::C),
            "Class3_TwoCutBiseparable" => ClassLabel::TwoCutBiseparable,
            "Class4_ThreeCutBiseparable" => ClassLabel::ThreeCutBiseparable,
            "Class5_FullySeparable" => ClassLabel::FullySeparable,
            "Undetermined" => ClassLabel::Undetermined,
            other => return Err(Error::InvalidArgument(format!("unknown class label {other:?}"))),
        };
        Ok(label)
    }
}

impl Serialize for ClassLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ClassLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn check_normalized<const M: usize>(state: &BranchState<M>) -> Result<()> {
    let n2 = state.norm_sqr();
    if (n2 - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm_sqr: n2 });
    }
    Ok(())
}

/// Labels a pure state split into three parties (each a set of modes).
/// `parties[0]`, `[1]`, `[2]` play the roles of A, B and C.
pub fn classify_parties<const M: usize>(
    state: &BranchState<M>,
    parties: [ModeSet; 3],
    tol: f64,
) -> Result<ClassLabel> {
    check_normalized(state)?;
    let pure: Vec<bool> = parties
        .iter()
        .map(|&p| party_purity(state, p) > 1.0 - tol)
        .collect();
    let label = match pure.iter().filter(|&&p| p).count() {
        3 => ClassLabel::FullySeparable,
        0 => ClassLabel::FullyInseparable,
        1 => {
            let lone = pure.iter().position(|&p| p).unwrap_or(0);
            ClassLabel::Biseparable(Cut::ALL[lone])
        }
        _ => ClassLabel::Undetermined,
    };
    Ok(label)
}

pub fn classify_pure(state: &BranchState<3>, tol: f64) -> Result<ClassLabel> {
    classify_parties(state, Cut::ALL.map(Cut::side), tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    pub entropies_bits: BTreeMap<String, f64>,
    pub purities: BTreeMap<String, f64>,
    /// Per-mode overlap between the two branches of a two-branch state.
    pub branch_overlaps: BTreeMap<String, ComplexValue>,
    pub class_label: ClassLabel,
}

/// `⟨X_1|X_2⟩` per mode for two-branch states, empty otherwise.
pub fn branch_overlaps<const M: usize>(state: &BranchState<M>, names: &[&str; M]) -> BTreeMap<String, ComplexValue> {
    let mut out = BTreeMap::new();
    if let [b1, b2] = state.branches() {
        for m in 0..M {
            out.insert(
                names[m].to_string(),
                coherent_overlap(b1.amps[m], b2.amps[m]).into(),
            );
        }
    }
    out
}

/// Full report for a three-mode state. The `B|C` entropy is included only
/// when mode A is pure, since only then is the BC pair in a pure state.
pub fn report(state: &BranchState<3>, tol: f64) -> Result<EntanglementReport> {
    let class_label = classify_pure(state, tol)?;
    let mut entropies_bits = BTreeMap::new();
    let mut purities = BTreeMap::new();
    for cut in Cut::ALL {
        let spec = reduced_spectrum(state, cut.side());
        entropies_bits.insert(cut.label().to_string(), entropy(&spec, EntropyUnit::Bits));
        purities.insert(mode_name(cut.mode()).to_string(), purity(&spec));
    }
    if purities["A"] > 1.0 - tol {
        let s = cut_entropy(state, ModeSet::single(MODE_B));
        entropies_bits.insert("B|C".to_string(), s);
    }
    Ok(EntanglementReport {
        entropies_bits,
        purities,
        branch_overlaps: branch_overlaps(state, &["A", "B", "C"]),
        class_label,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branch::{evolve, make_state, CatSpec, ModeSpec};
    use crate::propagator::{compute_coefficients, CouplingConfig};
    use num_complex::Complex64;
    use std::f64::consts::{PI, SQRT_2};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cat_state(alpha: f64) -> BranchState<3> {
        make_state([
            ModeSpec::Cat(CatSpec::new(c(alpha, 0.0), 0.0)),
            ModeSpec::vacuum(),
            ModeSpec::vacuum(),
        ])
        .unwrap()
    }

    fn binary_entropy(p: f64) -> f64 {
        -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
    }

    #[test]
    fn entropy_units() {
        let spec = [0.5, 0.5];
        assert!((entropy(&spec, EntropyUnit::Bits) - 1.0).abs() < 1e-15);
        assert!((entropy(&spec, EntropyUnit::Nats) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(entropy(&[1.0, 0.0], EntropyUnit::Bits), 0.0);
    }

    #[test]
    fn product_state_is_class5() {
        let s = BranchState::coherent([c(1.0, 0.2), c(-0.5, 0.0), c(0.0, 0.7)]);
        assert_eq!(classify_pure(&s, PURITY_TOL).unwrap(), ClassLabel::FullySeparable);
        for m in 0..3 {
            assert_eq!(cut_entropy(&s, ModeSet::single(m)), 0.0);
            assert!((marginal_purity(&s, m) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn conversion_state_is_class2() {
        let cfg = CouplingConfig::resonant(1.0, 1.0, 0.0, 0.0);
        let m = compute_coefficients(&cfg, PI / (2.0 * SQRT_2)).unwrap();
        let out = evolve(&cat_state(2.0), &m);
        assert!((marginal_purity(&out, 0) - 1.0).abs() < 1e-10);
        assert_eq!(
            classify_pure(&out, PURITY_TOL).unwrap(),
            ClassLabel::Biseparable(Cut::A)
        );
        let s = (-4f64).exp();
        let p = (1.0 + s).powi(2) / (2.0 * (1.0 + s * s));
        let rep = report(&out, PURITY_TOL).unwrap();
        assert!((rep.entropies_bits["B|C"] - binary_entropy(p)).abs() < 1e-12);
        assert!((rep.entropies_bits["B|C"] - 0.9990).abs() < 2e-4);
    }

    #[test]
    fn ghz_regime_is_class1() {
        let cfg = CouplingConfig::resonant(1.0, 1.0, 0.0, 0.0);
        let t = PI / (4.0 * cfg.rabi());
        let out = evolve(&cat_state(3.0), &compute_coefficients(&cfg, t).unwrap());
        assert_eq!(
            classify_pure(&out, PURITY_TOL).unwrap(),
            ClassLabel::FullyInseparable
        );
        let rep = report(&out, PURITY_TOL).unwrap();
        assert!(!rep.entropies_bits.contains_key("B|C"));
        let ov = rep.branch_overlaps["A"];
        assert!((ov.re - (-9f64).exp()).abs() < 1e-15);
        for cut in Cut::ALL {
            assert!((rep.entropies_bits[cut.label()] - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn complementary_cuts_agree() {
        let cfg = CouplingConfig::resonant(0.6, 1.1, 0.3, 1.0);
        let out = evolve(&cat_state(1.2), &compute_coefficients(&cfg, 0.8).unwrap());
        for m in 0..3 {
            let side = ModeSet::single(m);
            let a = cut_entropy(&out, side);
            let b = cut_entropy(&out, side.complement(3));
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn label_strings_round_trip() {
        for label in [
            ClassLabel::FullyInseparable,
            ClassLabel::Biseparable(Cut::B),
            ClassLabel::TwoCutBiseparable,
            ClassLabel::ThreeCutBiseparable,
            ClassLabel::FullySeparable,
            ClassLabel::Undetermined,
        ] {
            assert_eq!(label.to_string().parse::<ClassLabel>().unwrap(), label);
        }
        let json = serde_json::to_string(&ClassLabel::Biseparable(Cut::A)).unwrap();
        assert_eq!(json, "\"Class2_Biseparable(A|BC)\"");
    }

    #[test]
    fn unnormalized_is_rejected() {
        let s = BranchState::<3>::new(vec![crate::branch::Branch {
            coeff: c(2.0, 0.0),
            amps: [c(0.0, 0.0); 3],
        }])
        .unwrap();
        assert!(matches!(
            classify_pure(&s, PURITY_TOL),
            Err(Error::NotNormalized { .. })
        ));
    }
}
