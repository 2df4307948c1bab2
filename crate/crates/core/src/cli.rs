//! Command-line front end: `compile`, `verify`, `estimate` and `render`.
//!
//! Exit codes: 0 success, 1 unreadable or unparsable input (including bad
//! command-line arguments), 2 input that parses but is not a valid program,
//! 3 a placement the scheduler cannot realize, 4 a failed verification.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::canon::{canonicalize, MultiTargetProgram};
use crate::circuit::{parse_circuit, Circuit};
use crate::estimate::{compare_table, estimate, Baseline, Comparison, ResourceEstimate};
use crate::icm::{invert_icm, Action, CorrectionRule, Trigger};
use crate::pauli::{Letter, Sign};
use crate::render::{render, Format};
use crate::schedule::{
    emit_schedule, interpret_prefix, interpret_schedule, load_placement, naive_layout, validate_schedule, EmitError, SurgeryOp,
    SurgerySchedule,
};
use crate::stabilizer::{circuit_state, run_circuit, EngineError, Outcomes, RecordedMeasurement, StabilizerMatrix};

#[derive(Debug, Parser)]
#[command(
    name = "lsc",
    version,
    about = "Compile inverted-ICM circuits to lattice-surgery schedules and check them"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the schedule as JSON.
    Compile(RunConfig),
    /// Check the schedule against the circuit's own semantics.
    Verify(VerifyConfig),
    /// Report footprint, time and space-time volume.
    Estimate(EstimateConfig),
    /// Draw one frame per timestep.
    Render(RenderConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LayoutMode {
    /// One row per qubit and one column per multi-target CNOT, widened for magic states.
    Naive,
}

/// Options shared by every command.
#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Circuit file.
    pub input: PathBuf,
    /// Built-in layout to use.
    #[arg(long, value_enum, conflicts_with = "placement")]
    pub layout: Option<LayoutMode>,
    /// Hand-made placement file.
    #[arg(long)]
    pub placement: Option<PathBuf>,
    /// Seed for random measurement outcomes.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyConfig {
    #[command(flatten)]
    pub run: RunConfig,
    /// Verify this schedule JSON instead of compiling one.
    #[arg(long)]
    pub schedule: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateConfig {
    #[command(flatten)]
    pub run: RunConfig,
    /// Evaluate the symbolic costs at this code distance.
    #[arg(long)]
    pub distance: Option<u64>,
    /// Braiding volume to compare with: Y_BRAID, A_BRAID or BH_BRAID.
    #[arg(long)]
    pub baseline: Option<Baseline>,
}

#[derive(Debug, Clone, Args)]
pub struct RenderConfig {
    #[command(flatten)]
    pub run: RunConfig,
    #[arg(long, default_value = "ascii")]
    pub format: Format,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("placement is infeasible: {0}")]
    Infeasible(String),
    #[error("verification failed")]
    VerifyFailed,
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Parse { .. } | CliError::Io(_) => 1,
            CliError::Invalid(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::VerifyFailed => 4,
        }
    }
}

/// A compiled circuit: the measured-basis program the schedule realizes, the
/// circuit whose semantics it must reproduce, and the schedule itself.
pub struct Compiled {
    pub circuit: Circuit,
    pub rules: Vec<CorrectionRule>,
    pub program: MultiTargetProgram,
    pub schedule: SurgerySchedule,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Parses, inverts rotated initializations, canonicalizes, lays out and emits.
pub fn compile(cfg: &RunConfig) -> Result<Compiled, CliError> {
    let text = read(&cfg.input)?;
    let parsed = parse_circuit(&text).map_err(|e| CliError::Parse {
        path: cfg.input.display().to_string(),
        message: e.to_string(),
    })?;
    // Rotated initializations are first turned into rotated measurements.
    let rotated = parsed.inits().iter().any(|s| s.is_some_and(|s| s.is_rotated()));
    let (circuit, rules) = if rotated {
        invert_icm(&parsed).map_err(|e| CliError::Invalid(e.to_string()))?
    } else {
        (parsed, Vec::new())
    };
    let program = canonicalize(&circuit).map_err(|e| CliError::Invalid(e.to_string()))?;
    let placement = match &cfg.placement {
        Some(path) => load_placement(&read(path)?).map_err(|e| CliError::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?,
        None => naive_layout(&program),
    };
    let schedule = emit_schedule(&program, &placement, &rules).map_err(|e| match e {
        EmitError::InvalidProgram(_) | EmitError::FeedForwardCycle(_) => CliError::Invalid(e.to_string()),
        _ => CliError::Infeasible(e.to_string()),
    })?;
    let violations = validate_schedule(&schedule);
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(CliError::Invalid(format!("emitted schedule is malformed: {}", list.join("; "))));
    }
    Ok(Compiled {
        circuit,
        rules,
        program,
        schedule,
    })
}

fn emit(out: &Option<PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn cmd_compile(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let c = compile(cfg)?;
    emit(&cfg.out, &format!("{}\n", c.schedule.to_json()), stdout)
}

/// Outcome of checking one schedule.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub violations: Vec<String>,
    /// Canonical state after the entangling part of the schedule.
    pub prepared: Option<StabilizerMatrix>,
    pub prepared_ok: bool,
    /// `None` when the readouts cannot be replayed on the tableau (|A⟩ states).
    pub readout_ok: Option<bool>,
    pub error: Option<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.error.is_none() && self.prepared_ok && self.readout_ok != Some(false)
    }
}

/// Applies the correction rules that fire on a direct run's measurement record
/// to the unmeasured qubits (held in id order).
fn apply_rules(
    state: &mut StabilizerMatrix,
    circuit: &Circuit,
    rules: &[CorrectionRule],
    record: &[RecordedMeasurement],
) -> Result<(), EngineError> {
    let measured: Vec<usize> = record.iter().map(|m| m.qubit).collect();
    let alive: Vec<usize> = (0..circuit.num_qubits).filter(|q| !measured.contains(q)).collect();
    for rule in rules {
        let fires = rule.fires(|t| match t {
            Trigger::Measurement(q) => record.iter().any(|m| m.qubit == q && m.bit),
            _ => false,
        });
        let Some(pos) = alive.iter().position(|&q| q == rule.qubit).filter(|_| fires) else {
            continue;
        };
        match rule.action {
            Action::TrackX => state.apply_single_pauli(pos, Letter::X)?,
            Action::TrackZ => state.apply_single_pauli(pos, Letter::Z)?,
            Action::ApplyP => state.apply_p(pos)?,
        }
    }
    Ok(())
}

/// Checks `s` structurally, then compares the state it prepares with the
/// circuit's, and, when every readout is Clifford, the post-readout state on the
/// branch drawn from `seed`.
pub fn verify(circuit: &Circuit, rules: &[CorrectionRule], s: &SurgerySchedule, seed: u64) -> VerifyReport {
    let mut report = VerifyReport {
        violations: validate_schedule(s).iter().map(|v| v.to_string()).collect(),
        prepared: None,
        prepared_ok: false,
        readout_ok: None,
        error: None,
    };
    if !report.violations.is_empty() {
        return report;
    }
    let result = (|| -> Result<(), String> {
        let want = circuit_state(&circuit.without_measurements()).map_err(|e| e.to_string())?;
        let prefix = interpret_prefix(s, s.entangling_steps(), &mut Outcomes::seeded(seed)).map_err(|e| e.to_string())?;
        report.prepared_ok = prefix.qubits.iter().all(Option::is_some) && prefix.state.same_state(&want).map_err(|e| e.to_string())?;
        report.prepared = Some(prefix.state.canonical_form().map_err(|e| e.to_string())?);
        let clifford = !s.steps.iter().flatten().any(|o| {
            matches!(
                o.op,
                SurgeryOp::Inject {
                    state: crate::schedule::MagicState::A,
                    ..
                }
            )
        });
        if clifford {
            let full = interpret_schedule(s, &mut Outcomes::seeded(seed)).map_err(|e| e.to_string())?;
            let queue = circuit
                .statements
                .iter()
                .filter_map(|st| match st {
                    crate::circuit::Statement::Measure(q, _) => full.triggers.get(&Trigger::Measurement(*q)).copied(),
                    _ => None,
                })
                .map(Sign::from_bit)
                .collect();
            let mut forced = Outcomes::Forced {
                queue,
                include_deterministic: true,
            };
            report.readout_ok = Some(match run_circuit(circuit, &mut forced) {
                Ok((mut direct, record)) => {
                    apply_rules(&mut direct, circuit, rules, &record).map_err(|e| e.to_string())?;
                    full.state.same_state(&direct).map_err(|e| e.to_string())?
                }
                Err(_) => false,
            });
        }
        Ok(())
    })();
    report.error = result.err();
    report
}

fn cmd_verify(cfg: &VerifyConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let compiled = compile(&cfg.run)?;
    let schedule = match &cfg.schedule {
        Some(path) => SurgerySchedule::from_json(&read(path)?).map_err(|e| CliError::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?,
        None => compiled.schedule,
    };
    let report = verify(&compiled.circuit, &compiled.rules, &schedule, cfg.run.seed);
    let mut text = String::new();
    for v in &report.violations {
        text.push_str(&format!("violation: {v}\n"));
    }
    if let Some(e) = &report.error {
        text.push_str(&format!("error: {e}\n"));
    }
    if let Some(m) = &report.prepared {
        text.push_str("prepared state (canonical form):\n");
        text.push_str(&m.to_grid());
        text.push_str(&format!(
            "prepared state: {}\n",
            if report.prepared_ok { "matches" } else { "differs" }
        ));
    }
    match report.readout_ok {
        Some(ok) => text.push_str(&format!(
            "readouts (seed {}): {}\n",
            cfg.run.seed,
            if ok { "match" } else { "differ" }
        )),
        None if report.prepared.is_some() => text.push_str("readouts: not checked (non-Clifford magic states)\n"),
        None => {}
    }
    text.push_str(if report.passed() { "PASS\n" } else { "FAIL\n" });
    emit(&cfg.run.out, &text, stdout)?;
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::VerifyFailed)
    }
}

#[derive(Debug, Serialize)]
struct EstimateReport {
    estimate: ResourceEstimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    distance: Option<Evaluated>,
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison: Option<Comparison>,
}

#[derive(Debug, Serialize)]
struct Evaluated {
    d: u64,
    cycles: u64,
    physical_qubits: u64,
    volume: u64,
}

fn cmd_estimate(cfg: &EstimateConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let c = compile(&cfg.run)?;
    let est = estimate(&c.schedule);
    let report = EstimateReport {
        estimate: est,
        distance: cfg.distance.map(|d| Evaluated {
            d,
            cycles: est.cycles(d),
            physical_qubits: est.physical_qubits(d),
            volume: est.volume(d),
        }),
        comparison: cfg.baseline.map(|b| compare_table(&est, b)),
    };
    let mut text = format!("{est}\n");
    if let Some(e) = &report.distance {
        text.push_str(&format!(
            "at d = {}: {} cycles, {} physical qubits, volume {}\n",
            e.d, e.cycles, e.physical_qubits, e.volume
        ));
    }
    if let Some(cmp) = &report.comparison {
        text.push_str(&format!("{cmp}\n"));
    }
    let json = serde_json::to_string_pretty(&report).expect("reports always serialize");
    match &cfg.run.out {
        Some(path) => {
            fs::write(path, format!("{json}\n"))?;
            stdout.write_all(text.as_bytes())?;
        }
        None => {
            stdout.write_all(text.as_bytes())?;
            stdout.write_all(format!("{json}\n").as_bytes())?;
        }
    }
    Ok(())
}

fn cmd_render(cfg: &RenderConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let c = compile(&cfg.run)?;
    emit(&cfg.run.out, &render(&c.schedule, cfg.format), stdout)
}

/// Runs the command line `args` (including the program name), writing normal
/// output to `stdout`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            stdout.write_all(e.to_string().as_bytes())?;
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.to_string())),
    };
    match &cli.command {
        Command::Compile(cfg) => cmd_compile(cfg, stdout),
        Command::Verify(cfg) => cmd_verify(cfg, stdout),
        Command::Estimate(cfg) => cmd_estimate(cfg, stdout),
        Command::Render(cfg) => cmd_render(cfg, stdout),
    }
}
