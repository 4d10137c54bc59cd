//! JSON scenarios: schema, validation, execution and the CSV sweep format.
//!
//! A scenario either evolves three modes under a [`CouplingConfig`] over a
//! schedule of times, or (when `network` is present) pushes four modes
//! through the beam-splitter network once.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::branch::{evolve, make_state, Branch, BranchState, CatSpec, ModeSpec};
use crate::charfun::{chi_normal, chi_symmetric, PhasePoint};
use crate::entanglement::{self, EntanglementReport, PURITY_TOL};
use crate::error::{Error, Result};
use crate::fock::{
    branch_to_fock_with, evolve_fock_schedule, fock_fidelity, FockCutoff, OracleOptions,
    DEFAULT_TRUNCATION_TOL,
};
use crate::json::ComplexValue;
use crate::network::{self, BeamSplitterSpec, NetworkState, OUTPUT_NAMES};
use crate::propagator::{compute_coefficients, special_times, CouplingConfig};

type C64 = Complex64;

/// An oracle comparison fails below `1 - ORACLE_FIDELITY_TOL`.
pub const ORACLE_FIDELITY_TOL: f64 = 1e-6;

/// Column header of the three-mode sweep file.
pub const SWEEP_HEADER: &str = "t,entropy_A_BC,entropy_B_AC,entropy_C_AB,purity_A,purity_B,purity_C,class_label,overlap_A_abs,oracle_fidelity";

/// Column header of the network sweep file.
pub const NETWORK_HEADER: &str = "t,purity_a_o,purity_a_o',purity_b_o,purity_c_o,entropy_a_bc,entropy_b_o_c_o,class_label,overlap_a_o_abs,oracle_fidelity";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<CouplingConfig>,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Schedule>,
    #[serde(default)]
    pub measures: Vec<Measure>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub charfun_points: Vec<PointSpec>,
    #[serde(default)]
    pub oracle: OracleSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkSpec>,
}

/// Per-mode preparation; omitted modes start in vacuum.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    #[serde(default)]
    pub a: ModeJson,
    #[serde(default)]
    pub b: ModeJson,
    #[serde(default)]
    pub c: ModeJson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum ModeJson {
    Coherent(ComplexValue),
    Cat(CatJson),
}

impl Default for ModeJson {
    fn default() -> Self {
        ModeJson::Coherent(ComplexValue { re: 0.0, im: 0.0 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatJson {
    pub alpha_re: f64,
    pub alpha_im: f64,
    #[serde(rename = "Phi", default)]
    pub phi: f64,
}

impl From<ModeJson> for ModeSpec {
    fn from(m: ModeJson) -> Self {
        match m {
            ModeJson::Coherent(z) => ModeSpec::Coherent(z.into()),
            ModeJson::Cat(c) => ModeSpec::Cat(CatSpec::new(C64::new(c.alpha_re, c.alpha_im), c.phi)),
        }
    }
}

/// Raw schedule object; exactly one field must be set.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub special: Option<Special>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub t_start: f64,
    pub t_end: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Special {
    pub n_max: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Entropies,
    Purities,
    Classify,
    CharfunPoints,
    OracleCheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    pub eta: ComplexValue,
    pub zeta: ComplexValue,
    pub xi: ComplexValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    #[serde(default)]
    pub enabled: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff_override: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub varphi1: f64,
    pub varphi2: f64,
    pub varphi3: f64,
}

impl NetworkSpec {
    pub fn splitters(&self) -> [BeamSplitterSpec; 3] {
        [self.varphi1, self.varphi2, self.varphi3].map(BeamSplitterSpec::new)
    }
}

/// One evaluation time with its origin.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduledTime {
    pub t: f64,
    pub label: String,
}

impl Schedule {
    pub fn resolve(&self, config: &CouplingConfig) -> Result<Vec<ScheduledTime>> {
        let set = [self.times.is_some(), self.sweep.is_some(), self.special.is_some()];
        if set.iter().filter(|&&s| s).count() != 1 {
            return Err(Error::InvalidArgument(
                "schedule must set exactly one of `times`, `sweep`, `special`".into(),
            ));
        }
        let out = if let Some(times) = &self.times {
            if times.is_empty() {
                return Err(Error::InvalidArgument("schedule.times is empty".into()));
            }
            times
                .iter()
                .map(|&t| ScheduledTime { t, label: "time".into() })
                .collect()
        } else if let Some(s) = self.sweep {
            if s.steps == 0 {
                return Err(Error::InvalidArgument("schedule.sweep.steps must be positive".into()));
            }
            (0..s.steps)
                .map(|k| {
                    let t = if s.steps == 1 {
                        s.t_start
                    } else {
                        s.t_start + (s.t_end - s.t_start) * k as f64 / (s.steps - 1) as f64
                    };
                    ScheduledTime { t, label: "sweep".into() }
                })
                .collect()
        } else {
            let sp = special_times(config, self.special.unwrap().n_max)?;
            let mut v: Vec<ScheduledTime> = sp
                .conversion_times
                .iter()
                .enumerate()
                .map(|(k, &t)| ScheduledTime { t, label: format!("conversion n={}", k + 1) })
                .chain(
                    sp.recurrence_times
                        .iter()
                        .enumerate()
                        .map(|(k, &t)| ScheduledTime { t, label: format!("recurrence n={}", k + 1) }),
                )
                .collect();
            v.sort_by(|a, b| a.t.total_cmp(&b.t));
            v
        };
        if let Some(bad) = out.iter().find(|s| !s.t.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite time {}", bad.t)));
        }
        Ok(out)
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("scenario: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn wants(&self, m: Measure) -> bool {
        self.measures.contains(&m)
    }

    pub fn oracle_requested(&self) -> bool {
        self.oracle.enabled || self.wants(Measure::OracleCheck)
    }

    pub fn initial_modes(&self) -> [ModeSpec; 3] {
        [self.initial.a.into(), self.initial.b.into(), self.initial.c.into()]
    }

    fn points(&self) -> Result<Vec<PhasePoint>> {
        if !self.wants(Measure::CharfunPoints) {
            return Ok(Vec::new());
        }
        if self.charfun_points.is_empty() {
            return Err(Error::InvalidArgument(
                "measure `charfun_points` needs a non-empty `charfun_points` list".into(),
            ));
        }
        self.charfun_points
            .iter()
            .map(|p| PhasePoint::new(p.eta.into(), p.zeta.into(), p.xi.into()))
            .collect()
    }

    /// Checks everything that can be checked without evolving.
    pub fn validate(&self) -> Result<()> {
        if self.network.is_some() {
            if self.wants(Measure::CharfunPoints) {
                return Err(Error::InvalidArgument(
                    "charfun_points are not available for network scenarios".into(),
                ));
            }
            network::network_input(
                self.initial.a.into(),
                ComplexValue::into(coherent_only(self.initial.b, "b")?),
                ComplexValue::into(coherent_only(self.initial.c, "c")?),
            )?;
            return Ok(());
        }
        let config = self
            .config
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("scenario needs `config` (or `network`)".into()))?;
        config.validate()?;
        self.schedule
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("scenario needs a `schedule`".into()))?
            .resolve(config)?;
        make_state(self.initial_modes())?;
        self.points()?;
        Ok(())
    }
}

fn coherent_only(m: ModeJson, port: &str) -> Result<ComplexValue> {
    match m {
        ModeJson::Coherent(z) => Ok(z),
        ModeJson::Cat(_) => Err(Error::InvalidArgument(format!(
            "network port {port} must be coherent"
        ))),
    }
}

/// Knobs supplied on the command line.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Purity tolerance for class labels and conditional entropies.
    pub tol: f64,
    /// Overrides the oracle cutoff of the scenario.
    pub cutoff: Option<usize>,
    /// Runs the oracle even when the scenario does not ask for it.
    pub force_oracle: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            tol: PURITY_TOL,
            cutoff: None,
            force_oracle: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRecord {
    pub coeff: ComplexValue,
    pub amps: Vec<ComplexValue>,
}

/// Serialized branch state; `modes` names the amplitude slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    pub modes: Vec<String>,
    pub branches: Vec<BranchRecord>,
}

impl StateRecord {
    pub fn from_state<const M: usize>(state: &BranchState<M>, names: &[&str; M]) -> Self {
        Self {
            modes: names.iter().map(|s| s.to_string()).collect(),
            branches: state
                .branches()
                .iter()
                .map(|b| BranchRecord {
                    coeff: b.coeff.into(),
                    amps: b.amps.iter().map(|&a| a.into()).collect(),
                })
                .collect(),
        }
    }

    pub fn to_state<const M: usize>(&self) -> Result<BranchState<M>> {
        let branches = self
            .branches
            .iter()
            .map(|b| {
                let amps: [C64; M] = b
                    .amps
                    .iter()
                    .map(|&a| C64::from(a))
                    .collect::<Vec<_>>()
                    .try_into()
                    .map_err(|_| Error::InvalidArgument(format!("expected {M} amplitudes per branch")))?;
                Ok(Branch { coeff: b.coeff.into(), amps })
            })
            .collect::<Result<Vec<_>>>()?;
        BranchState::new(branches)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleRecord {
    pub n_max: usize,
    pub fidelity: f64,
    pub deficiency: f64,
    pub certified: bool,
}

impl OracleRecord {
    fn new(n_max: usize, fidelity: f64, deficiency: f64) -> Self {
        Self {
            n_max,
            fidelity,
            deficiency,
            certified: fidelity >= 1.0 - ORACLE_FIDELITY_TOL && deficiency <= DEFAULT_TRUNCATION_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharfunRecord {
    pub eta: ComplexValue,
    pub zeta: ComplexValue,
    pub xi: ComplexValue,
    pub chi_normal: ComplexValue,
    pub chi_symmetric: ComplexValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub t: f64,
    pub label: String,
    pub state: StateRecord,
    pub report: EntanglementReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub charfun: Vec<CharfunRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<CouplingConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkSpec>,
    pub records: Vec<Record>,
}

impl RunReport {
    pub fn is_network(&self) -> bool {
        self.network.is_some()
    }

    /// First record whose oracle comparison did not certify.
    pub fn oracle_failure(&self) -> Option<Error> {
        self.records.iter().find_map(|r| {
            let o = r.oracle?;
            (!o.certified).then(|| Error::OracleFailure {
                t: r.t,
                n_max: o.n_max,
                reason: format!(
                    "fidelity {:.16e} (needs >= {}), deficiency {:.3e} (needs <= {:e})",
                    o.fidelity,
                    1.0 - ORACLE_FIDELITY_TOL,
                    o.deficiency,
                    DEFAULT_TRUNCATION_TOL
                ),
            })
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        if self.is_network() {
            network_csv(&self.records)
        } else {
            sweep_csv(&self.records)
        }
    }
}

fn oracle_cutoff(scenario: &Scenario, opts: &RunOptions, mean_photons: f64) -> FockCutoff {
    match opts.cutoff.or(scenario.oracle.cutoff_override) {
        Some(n) => FockCutoff::new(n),
        None => FockCutoff::auto(mean_photons),
    }
}

/// Runs a scenario. Truncation breaches abort with an error; fidelity
/// shortfalls are recorded and reported by [`RunReport::oracle_failure`].
pub fn execute(scenario: &Scenario, opts: &RunOptions) -> Result<RunReport> {
    scenario.validate()?;
    let records = match scenario.network {
        Some(net) => vec![execute_network(scenario, &net, opts)?],
        None => execute_evolution(scenario, opts)?,
    };
    Ok(RunReport {
        name: scenario.name.clone(),
        config: if scenario.network.is_some() { None } else { scenario.config },
        network: scenario.network,
        records,
    })
}

fn execute_evolution(scenario: &Scenario, opts: &RunOptions) -> Result<Vec<Record>> {
    let config = scenario.config.expect("validated");
    let times = scenario.schedule.as_ref().expect("validated").resolve(&config)?;
    let initial = make_state(scenario.initial_modes())?;
    let points = scenario.points()?;

    let oracle_states = if scenario.oracle_requested() || opts.force_oracle {
        let cutoff = oracle_cutoff(scenario, opts, initial.total_mean_photons());
        let fail = |e| oracle_error(times[0].t, cutoff.n_max, e);
        let psi0 = branch_to_fock_with(&initial, cutoff, DEFAULT_TRUNCATION_TOL).map_err(fail)?;
        let ts: Vec<f64> = times.iter().map(|s| s.t).collect();
        let states = evolve_fock_schedule(&psi0, &config, &ts, &OracleOptions::default()).map_err(fail)?;
        Some((psi0.deficiency(), states))
    } else {
        None
    };

    times
        .par_iter()
        .enumerate()
        .map(|(k, st)| {
            let state = evolve(&initial, &compute_coefficients(&config, st.t)?);
            let report = entanglement::report(&state, opts.tol)?;
            let oracle = match &oracle_states {
                Some((deficiency, states)) => {
                    let evolved = &states[k];
                    let n_max = evolved.cutoff().n_max;
                    let expected = branch_to_fock_with(&state, evolved.cutoff(), DEFAULT_TRUNCATION_TOL)
                        .map_err(|e| oracle_error(st.t, n_max, e))?;
                    let fid = fock_fidelity(&expected, evolved)?;
                    Some(OracleRecord::new(n_max, fid, deficiency.max(expected.deficiency())))
                }
                None => None,
            };
            let charfun = points
                .iter()
                .map(|p| {
                    Ok(CharfunRecord {
                        eta: p.eta.into(),
                        zeta: p.zeta.into(),
                        xi: p.xi.into(),
                        chi_normal: chi_normal(&state, p)?.into(),
                        chi_symmetric: chi_symmetric(&state, p)?.into(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Record {
                t: st.t,
                label: st.label.clone(),
                state: StateRecord::from_state(&state, &["A", "B", "C"]),
                report,
                oracle,
                charfun,
            })
        })
        .collect()
}

fn oracle_error(t: f64, n_max: usize, e: Error) -> Error {
    match e {
        Error::TruncationBreach { .. } => Error::OracleFailure {
            t,
            n_max,
            reason: e.to_string(),
        },
        other => other,
    }
}

fn network_state(scenario: &Scenario) -> Result<NetworkState> {
    network::network_input(
        scenario.initial.a.into(),
        coherent_only(scenario.initial.b, "b")?.into(),
        coherent_only(scenario.initial.c, "c")?.into(),
    )
}

fn execute_network(scenario: &Scenario, net: &NetworkSpec, opts: &RunOptions) -> Result<Record> {
    let input = network_state(scenario)?;
    let specs = net.splitters();
    let output = network::apply_network(&input, &specs)?;
    let report = network::conversion_report(&output, opts.tol)?;
    let oracle = if scenario.oracle_requested() || opts.force_oracle {
        let cutoff = oracle_cutoff(scenario, opts, input.total_mean_photons());
        let o = network::network_oracle(&input, &specs, cutoff, DEFAULT_TRUNCATION_TOL)
            .map_err(|e| oracle_error(0.0, cutoff.n_max, e))?;
        Some(OracleRecord::new(o.n_max, o.fidelity, o.deficiency))
    } else {
        None
    };
    Ok(Record {
        t: 0.0,
        label: "network".into(),
        state: StateRecord::from_state(&output, &OUTPUT_NAMES),
        report,
        oracle,
        charfun: Vec::new(),
    })
}

/// Re-derives the entanglement report from a record's stored state.
pub fn remeasure(record: &Record, network: bool, tol: f64) -> Result<EntanglementReport> {
    if network {
        network::conversion_report(&record.state.to_state::<4>()?, tol)
    } else {
        entanglement::report(&record.state.to_state::<3>()?, tol)
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn get(map: &BTreeMap<String, f64>, key: &str) -> String {
    opt_num(map.get(key).copied())
}

fn overlap_abs(r: &EntanglementReport, key: &str) -> String {
    opt_num(r.branch_overlaps.get(key).map(|z| C64::from(*z).norm()))
}

fn sweep_csv(records: &[Record]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in records {
        let rep = &r.report;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            num(r.t),
            get(&rep.entropies_bits, "A|BC"),
            get(&rep.entropies_bits, "B|AC"),
            get(&rep.entropies_bits, "C|AB"),
            get(&rep.purities, "A"),
            get(&rep.purities, "B"),
            get(&rep.purities, "C"),
            rep.class_label,
            overlap_abs(rep, "A"),
            opt_num(r.oracle.map(|o| o.fidelity)),
        );
    }
    out
}

fn network_csv(records: &[Record]) -> String {
    let mut out = String::from(NETWORK_HEADER);
    out.push('\n');
    for r in records {
        let rep = &r.report;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            num(r.t),
            get(&rep.purities, "a_o"),
            get(&rep.purities, "a_o'"),
            get(&rep.purities, "b_o"),
            get(&rep.purities, "c_o"),
            get(&rep.entropies_bits, "a|bc"),
            get(&rep.entropies_bits, "b_o|c_o"),
            rep.class_label,
            overlap_abs(rep, "a_o"),
            opt_num(r.oracle.map(|o| o.fidelity)),
        );
    }
    out
}
