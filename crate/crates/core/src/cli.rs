//! Command-line surface: measurement construction, mutual-information
//! evaluation, POVM validation, numerical optimization, and protocol runs.

use crate::adaptive::{self, both_qubits_trine_protocol, run_protocol, ProtocolNode};
use crate::ensembles::{double_trine, trine_ensemble, Ensemble};
use crate::measurements::{
    classify_povm, entangled_basis_povm, nine_outcome_product_povm, single_qubit_trine_povm,
    six_outcome_povm, MeasurementError, Povm,
};
use crate::optimizer::{maximize_mi, Mode, OptimizerError, PovmParameterization};
use crate::serial;
use crate::statistics::{mutual_information, outcome_probabilities, JointDistribution};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::fmt::Write as _;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID_INPUT: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

/// Reference value printed in comparison lines: the entangled-basis optimum.
fn optimum() -> f64 {
    crate::statistics::optimum_mi_closed_form()
}

#[derive(Debug)]
pub struct CliFailure {
    pub code: i32,
    pub message: String,
}

impl CliFailure {
    fn invalid(message: impl Into<String>) -> Self {
        CliFailure {
            code: EXIT_INVALID_INPUT,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        CliFailure {
            code: EXIT_INTERNAL,
            message: message.into(),
        }
    }
}

type CliResult = Result<String, CliFailure>;

#[derive(Debug, Parser)]
#[command(
    name = "double-trine",
    about = "Measurement design and mutual-information analysis for the double-trine ensemble",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the mutual information of an ensemble × measurement pair.
    Mi(MiArgs),
    /// Validate a POVM JSON file: positivity, completeness, classification.
    Validate(ValidateArgs),
    /// Derivative-free search over POVM space maximizing mutual information.
    Optimize(OptimizeArgs),
    /// Evaluate an adaptive local-measurement protocol exactly.
    Protocol(ProtocolArgs),
    /// Search over one-way adaptive local protocols.
    OptimizeProtocol(OptimizeProtocolArgs),
    /// Write a builtin ensemble, measurement, or protocol as JSON.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
pub struct MiArgs {
    /// Builtin `double-trine`, `trine`, or a path to an ensemble JSON file.
    #[arg(long)]
    pub ensemble: Option<String>,
    /// Builtin `entangled`, `six`, `nine`, `trine-local`, or a POVM JSON path.
    #[arg(long, default_value = "entangled")]
    pub measurement: String,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    pub output_format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Path to a POVM JSON file.
    #[arg(long)]
    pub povm: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    pub output_format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    /// Search space: `global` (arbitrary elements) or `product`.
    #[arg(long, value_enum, default_value_t = CliMode::Global)]
    pub mode: CliMode,
    /// Outcome count M.
    #[arg(long, default_value_t = 4)]
    pub outcomes: usize,
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long, default_value_t = 2000)]
    pub iters: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Builtin `double-trine`, `trine`, or an ensemble JSON path.
    #[arg(long, default_value = "double-trine")]
    pub ensemble: String,
    /// Write the best POVM found to this JSON file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    pub output_format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CliMode {
    Global,
    Product,
}

#[derive(Debug, Args)]
pub struct ProtocolArgs {
    /// Path to a protocol JSON file.
    #[arg(long, conflicts_with = "builtin")]
    pub file: Option<PathBuf>,
    /// Builtin protocol: `trine-both` (trine POVM on each qubit).
    #[arg(long)]
    pub builtin: Option<String>,
    /// Builtin `double-trine` or an ensemble JSON path (dim-4 products only).
    #[arg(long, default_value = "double-trine")]
    pub ensemble: String,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    pub output_format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct OptimizeProtocolArgs {
    #[arg(long, default_value_t = 3)]
    pub outcomes_first: usize,
    #[arg(long, default_value_t = 3)]
    pub outcomes_second: usize,
    /// Nelder-Mead iterations per restart.
    #[arg(long, default_value_t = 400)]
    pub budget: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Write the best protocol found to this JSON file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// Builtin measurement to export: `entangled`, `six`, `nine`, `trine-local`.
    #[arg(long)]
    pub measurement: Option<String>,
    /// Builtin ensemble to export: `double-trine`, `trine`.
    #[arg(long)]
    pub ensemble: Option<String>,
    /// Builtin protocol to export: `trine-both`.
    #[arg(long)]
    pub protocol: Option<String>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn read_file(path: &PathBuf) -> Result<String, CliFailure> {
    std::fs::read_to_string(path)
        .map_err(|e| CliFailure::invalid(format!("cannot read {}: {e}", path.display())))
}

fn load_ensemble(source: &str) -> Result<Ensemble, CliFailure> {
    match source {
        "double-trine" => Ok(double_trine()),
        "trine" => Ok(trine_ensemble()),
        path => {
            let text = read_file(&PathBuf::from(path))?;
            serial::ensemble_from_json(&text)
                .map_err(|e| CliFailure::invalid(format!("invalid ensemble: {e}")))
        }
    }
}

fn load_measurement(source: &str) -> Result<Povm, CliFailure> {
    match source {
        "entangled" => Ok(entangled_basis_povm()),
        "six" => Ok(six_outcome_povm()),
        "nine" => Ok(nine_outcome_product_povm()),
        "trine-local" => Ok(single_qubit_trine_povm()),
        path => {
            let text = read_file(&PathBuf::from(path))?;
            serial::povm_from_json(&text)
                .map_err(|e| CliFailure::invalid(format!("invalid POVM: {e}")))
        }
    }
}

fn default_ensemble_for(povm: &Povm) -> Ensemble {
    if povm.dim() == 2 {
        trine_ensemble()
    } else {
        double_trine()
    }
}

fn conditional_table(jd: &JointDistribution) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:>8}", "p(k|j)");
    for label in jd.labels() {
        let _ = write!(out, " {label:>12}");
    }
    out.push('\n');
    for j in 0..jd.num_states() {
        let _ = write!(out, "{:>8}", format!("j={j}"));
        for p in jd.conditionals(j) {
            let _ = write!(out, " {p:>12.9}");
        }
        out.push('\n');
    }
    out
}

fn mi_json(jd: &JointDistribution, mi: f64) -> String {
    serde_json::to_string_pretty(&json!({
        "mi_bits": mi,
        "labels": jd.labels(),
        "joint": jd.joint(),
        "priors": jd.priors(),
    }))
    .expect("plain data serializes")
}

pub fn cmd_mi(args: &MiArgs) -> CliResult {
    let povm = load_measurement(&args.measurement)?;
    let ensemble = match &args.ensemble {
        Some(source) => load_ensemble(source)?,
        None => default_ensemble_for(&povm),
    };
    let jd = outcome_probabilities(&ensemble, &povm)
        .map_err(|e| CliFailure::invalid(format!("cannot evaluate: {e}")))?;
    let mi = mutual_information(&jd);
    Ok(match args.output_format {
        OutputFormat::Table => {
            format!("{}I = {mi:.9} bits\n", conditional_table(&jd))
        }
        OutputFormat::Json => mi_json(&jd, mi),
        OutputFormat::Csv => jd.to_csv(),
    })
}

pub fn cmd_validate(args: &ValidateArgs) -> CliResult {
    let text = read_file(&args.povm)?;
    let parsed = serial::povm_from_json(&text);
    match parsed {
        Ok(povm) => {
            let classification = classify_povm(&povm)
                .map_err(|e| CliFailure::internal(format!("classification failed: {e}")))?;
            let mut report = String::new();
            let _ = writeln!(report, "valid POVM: dim {}, {} outcomes", povm.dim(), povm.len());
            for (label, element) in povm.labels().iter().zip(povm.elements()) {
                let min_eig = element
                    .min_eigenvalue()
                    .map_err(|e| CliFailure::internal(e.to_string()))?;
                let _ = writeln!(report, "  {label}: min eigenvalue {min_eig:.3e}");
            }
            let _ = writeln!(report, "classification: {classification}");
            Ok(report)
        }
        Err(e) => {
            let mut message = format!("invalid POVM: {e}");
            if let serial::SerialError::Measurement(MeasurementError::NotComplete {
                defect_norm,
                ..
            }) = &e
            {
                let _ = write!(message, " (Frobenius defect {defect_norm:.6})");
            }
            Err(CliFailure::invalid(message))
        }
    }
}

pub fn cmd_optimize(args: &OptimizeArgs) -> CliResult {
    let ensemble = load_ensemble(&args.ensemble)?;
    let mode = match args.mode {
        CliMode::Global => Mode::Global,
        CliMode::Product => Mode::Product,
    };
    let param = PovmParameterization {
        mode,
        outcomes: args.outcomes,
    };
    let result = maximize_mi(&ensemble, param, args.restarts, args.iters, args.seed).map_err(
        |e| match e {
            OptimizerError::NoFeasiblePovm => CliFailure {
                code: EXIT_INFEASIBLE,
                message: "no feasible POVM found".to_string(),
            },
            other => CliFailure::internal(other.to_string()),
        },
    )?;
    if let Some(path) = &args.out {
        std::fs::write(path, serial::povm_to_json(&result.povm))
            .map_err(|e| CliFailure::invalid(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(match args.output_format {
        OutputFormat::Json => serde_json::to_string_pretty(&json!({
            "mode": match mode { Mode::Global => "global", Mode::Product => "product" },
            "M": args.outcomes,
            "best_I_bits": result.mi_bits,
            "povm": serde_json::from_str::<serde_json::Value>(
                &serial::povm_to_json(&result.povm)).expect("emitted JSON parses"),
            "classification": result.classification.to_string(),
            "trace": result.trace,
        }))
        .expect("plain data serializes"),
        _ => format!(
            "best I = {:.9} bits over {} restarts x {} iters (seed {})\nclassification: {}\n",
            result.mi_bits, args.restarts, args.iters, args.seed, result.classification
        ),
    })
}

fn load_protocol(args: &ProtocolArgs) -> Result<ProtocolNode, CliFailure> {
    if let Some(path) = &args.file {
        let text = read_file(path)?;
        return serial::protocol_from_json(&text)
            .map_err(|e| CliFailure::invalid(format!("invalid protocol: {e}")));
    }
    match args.builtin.as_deref() {
        Some("trine-both") => Ok(both_qubits_trine_protocol()),
        Some(other) => Err(CliFailure::invalid(format!(
            "unknown builtin protocol `{other}` (expected `trine-both`)"
        ))),
        None => Err(CliFailure::invalid(
            "provide --file <protocol.json> or --builtin trine-both",
        )),
    }
}

pub fn cmd_protocol(args: &ProtocolArgs) -> CliResult {
    let protocol = load_protocol(args)?;
    let ensemble = load_ensemble(&args.ensemble)?;
    let jd = run_protocol(&ensemble, &protocol)
        .map_err(|e| CliFailure::invalid(format!("cannot run protocol: {e}")))?;
    let mi = mutual_information(&jd);
    Ok(match args.output_format {
        OutputFormat::Json => mi_json(&jd, mi),
        OutputFormat::Csv => jd.to_csv(),
        OutputFormat::Table => {
            let relation = if mi < optimum() { "<" } else { ">=" };
            format!(
                "{}I = {mi:.9} bits\ncomparison: I {relation} {:.9} (entangled-basis optimum)\n",
                conditional_table(&jd),
                optimum()
            )
        }
    })
}

pub fn cmd_optimize_protocol(args: &OptimizeProtocolArgs) -> CliResult {
    let (protocol, mi) = adaptive::optimize_one_way(
        &double_trine(),
        args.outcomes_first,
        args.outcomes_second,
        args.budget,
        args.seed,
    )
    .map_err(|e| CliFailure::internal(e.to_string()))?;
    if let Some(path) = &args.out {
        std::fs::write(path, serial::protocol_to_json(&protocol))
            .map_err(|e| CliFailure::invalid(format!("cannot write {}: {e}", path.display())))?;
    }
    let relation = if mi < optimum() { "<" } else { ">=" };
    Ok(format!(
        "best one-way I = {mi:.9} bits\ncomparison: I {relation} {:.9} (entangled-basis optimum)\n",
        optimum()
    ))
}

pub fn cmd_export(args: &ExportArgs) -> CliResult {
    let text = if let Some(m) = &args.measurement {
        serial::povm_to_json(&load_measurement(m)?)
    } else if let Some(e) = &args.ensemble {
        serial::ensemble_to_json(&load_ensemble(e)?)
    } else if let Some(p) = &args.protocol {
        match p.as_str() {
            "trine-both" => serial::protocol_to_json(&both_qubits_trine_protocol()),
            other => {
                return Err(CliFailure::invalid(format!(
                    "unknown builtin protocol `{other}`"
                )))
            }
        }
    } else {
        return Err(CliFailure::invalid(
            "provide one of --measurement, --ensemble, --protocol",
        ));
    };
    if let Some(path) = &args.out {
        std::fs::write(path, &text)
            .map_err(|e| CliFailure::invalid(format!("cannot write {}: {e}", path.display())))?;
        Ok(format!("wrote {}\n", path.display()))
    } else {
        Ok(text)
    }
}

/// Dispatch a parsed command; returns (exit code, output or diagnostic).
pub fn run(cli: &Cli) -> (i32, String) {
    let result = match &cli.command {
        Command::Mi(args) => cmd_mi(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Optimize(args) => cmd_optimize(args),
        Command::Protocol(args) => cmd_protocol(args),
        Command::OptimizeProtocol(args) => cmd_optimize_protocol(args),
        Command::Export(args) => cmd_export(args),
    };
    match result {
        Ok(output) => (EXIT_OK, output),
        Err(failure) => (failure.code, format!("error: {}\n", failure.message)),
    }
}
