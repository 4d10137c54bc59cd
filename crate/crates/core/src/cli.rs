//! Command-line front end. Exit status: 0 success, 1 I/O failure,
//! 2 invalid input, 3 oracle or truncation failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use crate::branch::{CatSpec, ModeSpec};
use crate::entanglement::{EntanglementReport, PURITY_TOL};
use crate::error::{Error, Result};
use crate::json::ComplexValue;
use crate::network::{self, BeamSplitterSpec};
use crate::propagator::{compute_coefficients, special_times, CouplingConfig, SpecialTimes};
use crate::scenario::{execute, OracleRecord, RunOptions, RunReport, Scenario};

#[derive(Debug, Parser)]
#[command(name = "trimode", version, about = "Three-mode bilinear coupling simulator")]
pub struct Cli {
    /// Directory for report.json / sweep.csv (created if missing).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Purity tolerance used for class labels.
    #[arg(long, global = true, default_value_t = PURITY_TOL)]
    pub tol: f64,
    /// Fock cutoff for the oracle, overriding the scenario.
    #[arg(long, global = true)]
    pub cutoff: Option<usize>,
    /// Suppress progress output on stdout.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario and write report.json and sweep.csv.
    Run { scenario: PathBuf },
    /// Compare branch and number-basis evolution at every scheduled time.
    OracleCheck { scenario: PathBuf },
    /// Print the propagator matrix at time t.
    Propagator {
        #[command(flatten)]
        coupling: CouplingArgs,
        #[arg(long)]
        t: f64,
    },
    /// Print recurrence and conversion times.
    SpecialTimes {
        #[command(flatten)]
        coupling: CouplingArgs,
        #[arg(long, default_value_t = 3)]
        n_max: usize,
    },
    /// Push a cat state through the three-splitter network.
    Beamsplitter {
        #[arg(long, allow_negative_numbers = true)]
        varphi1: f64,
        #[arg(long, allow_negative_numbers = true)]
        varphi2: f64,
        #[arg(long, allow_negative_numbers = true)]
        varphi3: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        alpha_re: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        alpha_im: f64,
        /// Relative phase of the cat.
        #[arg(long = "cat-phase", default_value_t = 0.0, allow_negative_numbers = true)]
        cat_phase: f64,
    },
}

/// Coupling parameters; `--config` reads a JSON `CouplingConfig` instead.
#[derive(Debug, Args)]
pub struct CouplingArgs {
    #[arg(long, conflicts_with_all = ["lambda", "kappa", "omega", "phi", "theta"])]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub kappa: f64,
    /// Common detuning of both pumps.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub omega: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta: f64,
}

impl CouplingArgs {
    fn resolve(&self) -> Result<CouplingConfig, Failure> {
        let config = match &self.config {
            Some(path) => {
                let text = read(path)?;
                serde_json::from_str(&text)
                    .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?
            }
            None => CouplingConfig::detuned(self.lambda, self.kappa, self.omega, self.phi, self.theta),
        };
        config.validate()?;
        Ok(config)
    }
}

/// A failed command with its exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn invalid(message: String) -> Self {
        Self { code: 2, message }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Self {
            code: 1,
            message: format!("{}: {e}", path.display()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self {
            code: e.exit_code(),
            message: e.to_string(),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Failure::io(&path, e))?;
    Ok(path)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

struct Ctx {
    out_dir: Option<PathBuf>,
    quiet: bool,
    opts: RunOptions,
}

impl Ctx {
    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", msg.as_ref());
        }
    }

    /// Prints a JSON document, and writes it when `--out-dir` was given.
    fn emit(&self, name: &str, doc: &str) -> Result<(), Failure> {
        if let Some(dir) = &self.out_dir {
            write(dir, name, doc)?;
        }
        if !self.quiet {
            print!("{doc}");
        }
        Ok(())
    }
}

fn load(path: &Path) -> Result<Scenario, Failure> {
    let text = read(path)?;
    Ok(Scenario::from_json(&text)?)
}

fn cmd_run(ctx: &Ctx, path: &Path) -> Result<(), Failure> {
    let scenario = load(path)?;
    let report = execute(&scenario, &ctx.opts)?;
    let dir = ctx.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let json = write(&dir, "report.json", &report.to_json())?;
    let csv = write(&dir, "sweep.csv", &report.to_csv())?;
    for r in &report.records {
        let fid = r
            .oracle
            .map(|o| format!("  oracle fidelity {:.12}", o.fidelity))
            .unwrap_or_default();
        ctx.say(format!("t = {:<22.16} {:<16} {}{fid}", r.t, r.label, r.report.class_label));
    }
    ctx.say(format!("wrote {} and {}", json.display(), csv.display()));
    match report.oracle_failure() {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct OracleLine {
    t: f64,
    label: String,
    #[serde(flatten)]
    oracle: OracleRecord,
}

fn cmd_oracle_check(ctx: &Ctx, path: &Path) -> Result<(), Failure> {
    let scenario = load(path)?;
    if !scenario.oracle.enabled {
        return Err(Failure::invalid(
            "oracle-check needs a scenario with `oracle.enabled: true`".into(),
        ));
    }
    let opts = RunOptions {
        force_oracle: true,
        ..ctx.opts
    };
    let report: RunReport = execute(&scenario, &opts)?;
    let lines: Vec<OracleLine> = report
        .records
        .iter()
        .map(|r| OracleLine {
            t: r.t,
            label: r.label.clone(),
            oracle: r.oracle.expect("oracle forced"),
        })
        .collect();
    for l in &lines {
        ctx.say(format!(
            "t = {:<22.16} cutoff {:>3}  fidelity {:.16e}  deficiency {:.3e}  {}",
            l.t,
            l.oracle.n_max,
            l.oracle.fidelity,
            l.oracle.deficiency,
            if l.oracle.certified { "ok" } else { "FAIL" }
        ));
    }
    if let Some(dir) = &ctx.out_dir {
        write(dir, "oracle.json", &to_json(&lines))?;
    }
    match report.oracle_failure() {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn matrix_json<const R: usize, const C: usize>(
    m: &nalgebra::SMatrix<Complex64, R, C>,
) -> Vec<Vec<ComplexValue>> {
    (0..R).map(|i| (0..C).map(|j| m[(i, j)].into()).collect()).collect()
}

#[derive(Serialize)]
struct PropagatorDoc {
    t: f64,
    config: CouplingConfig,
    rabi: f64,
    /// Interaction-frame coefficients.
    entries: Vec<Vec<ComplexValue>>,
    free_phases: Vec<ComplexValue>,
    lab_frame: Vec<Vec<ComplexValue>>,
    unitarity_residual: f64,
}

fn cmd_propagator(ctx: &Ctx, coupling: &CouplingArgs, t: f64) -> Result<(), Failure> {
    let config = coupling.resolve()?;
    let p = compute_coefficients(&config, t)?;
    let doc = PropagatorDoc {
        t,
        config,
        rabi: config.rabi(),
        entries: matrix_json(&p.entries),
        free_phases: p.free_phases.iter().map(|&z| z.into()).collect(),
        lab_frame: matrix_json(&p.lab_frame()),
        unitarity_residual: p.unitarity_residual(),
    };
    ctx.emit("propagator.json", &to_json(&doc))
}

fn cmd_special_times(ctx: &Ctx, coupling: &CouplingArgs, n_max: usize) -> Result<(), Failure> {
    let config = coupling.resolve()?;
    let times: SpecialTimes = special_times(&config, n_max)?;
    ctx.emit("special_times.json", &to_json(&times))
}

#[derive(Serialize)]
struct BeamsplitterDoc {
    varphi: [f64; 3],
    matrix: Vec<Vec<ComplexValue>>,
    unitarity_residual: f64,
    report: EntanglementReport,
}

fn cmd_beamsplitter(ctx: &Ctx, varphi: [f64; 3], alpha: Complex64, phase: f64) -> Result<(), Failure> {
    let specs = varphi.map(BeamSplitterSpec::new);
    let m = network::network_matrix(&specs);
    let residual = (m.adjoint() * m - nalgebra::Matrix4::identity())
        .iter()
        .fold(0.0_f64, |acc, z| acc.max(z.norm()));
    let zero = Complex64::new(0.0, 0.0);
    let input = network::network_input(ModeSpec::Cat(CatSpec::new(alpha, phase)), zero, zero)?;
    let output = network::apply_network(&input, &specs)?;
    let doc = BeamsplitterDoc {
        varphi,
        matrix: matrix_json(&m),
        unitarity_residual: residual,
        report: network::conversion_report(&output, ctx.opts.tol)?,
    };
    ctx.emit("beamsplitter.json", &to_json(&doc))
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    if !(cli.tol > 0.0 && cli.tol < 1.0) {
        return Err(Failure::invalid(format!("--tol must lie in (0, 1), got {}", cli.tol)));
    }
    let ctx = Ctx {
        out_dir: cli.out_dir,
        quiet: cli.quiet,
        opts: RunOptions {
            tol: cli.tol,
            cutoff: cli.cutoff,
            force_oracle: false,
        },
    };
    match &cli.command {
        Command::Run { scenario } => cmd_run(&ctx, scenario),
        Command::OracleCheck { scenario } => cmd_oracle_check(&ctx, scenario),
        Command::Propagator { coupling, t } => cmd_propagator(&ctx, coupling, *t),
        Command::SpecialTimes { coupling, n_max } => cmd_special_times(&ctx, coupling, *n_max),
        Command::Beamsplitter {
            varphi1,
            varphi2,
            varphi3,
            alpha_re,
            alpha_im,
            cat_phase,
        } => cmd_beamsplitter(
            &ctx,
            [*varphi1, *varphi2, *varphi3],
            Complex64::new(*alpha_re, *alpha_im),
            *cat_phase,
        ),
    }
}

/// Parses `args` and runs the command, returning the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
