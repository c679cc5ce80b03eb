//! `telewit` command-line interface.
//!
//! Exit codes: 0 success, 1 a validation check failed, 2 input error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "telewit", version, about = "Teleportation witnesses for two-qudit states")]
pub struct Cli {
    /// Print the full JSON report on stdout instead of a summary.
    #[arg(long, global = true)]
    pub json: bool,
    /// Worker threads for parallel sections (results do not depend on it).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,
    /// Also write the JSON report to this file.
    #[arg(long, global = true, value_name = "FILE")]
    pub report: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build, evaluate, certify or validate witness operators.
    #[command(subcommand)]
    Witness(WitnessCmd),
    /// Construct density matrices.
    #[command(subcommand)]
    State(StateCmd),
    /// Estimate the fully entangled fraction of a state.
    Fef(FefArgs),
    /// Expand a witness in products of local observables.
    Decompose(DecomposeArgs),
    /// Simulate finite-shot estimation of a witness expectation.
    Measure(MeasureArgs),
    /// Run the witness validity checks on random states.
    Validate(ValidateArgs),
}

#[derive(Subcommand, Debug)]
pub enum WitnessCmd {
    Build(BuildArgs),
    Eval(EvalArgs),
    Certify(CertifyArgs),
}

#[derive(Subcommand, Debug)]
pub enum StateCmd {
    Make(MakeArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum KindArg {
    Tel,
    Ent,
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(2..=8))]
    pub dim: u8,
    #[arg(long, value_enum, default_value = "tel")]
    pub kind: KindArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub witness: PathBuf,
    #[arg(long)]
    pub state: PathBuf,
    /// Values below -tol count as detection.
    #[arg(long, default_value_t = telewit::witness::DEFAULT_DETECTION_TOL)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    #[arg(long)]
    pub witness: PathBuf,
    /// `builtin`, `search`, or a product-vector JSON file.
    #[arg(long, default_value = "builtin")]
    pub vectors: String,
    #[arg(long, default_value_t = 200)]
    pub attempts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateKind {
    Iso,
    BellDiag,
    Maxent,
    Random,
    Product,
}

#[derive(Args, Debug)]
pub struct MakeArgs {
    #[arg(long, value_enum)]
    pub kind: StateKind,
    /// Local dimension; `bell-diag` is always two qubits.
    #[arg(long, value_parser = clap::value_parser!(u8).range(2..=8))]
    pub dim: Option<u8>,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "c")]
    pub alpha: Option<f64>,
    /// Correlations `c1,c2,c3` of a Bell-diagonal state.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub c: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct FefArgs {
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisArg {
    Pauli,
    Gellmann,
    Spin1,
}

impl BasisArg {
    pub fn name(self) -> &'static str {
        match self {
            BasisArg::Pauli => "pauli",
            BasisArg::Gellmann => "gellmann",
            BasisArg::Spin1 => "spin1",
        }
    }
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    #[arg(long)]
    pub witness: PathBuf,
    #[arg(long, value_enum)]
    pub basis: BasisArg,
}

#[derive(Args, Debug)]
pub struct MeasureArgs {
    #[arg(long)]
    pub witness: PathBuf,
    #[arg(long)]
    pub state: PathBuf,
    /// Shots per decomposition term.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub shots: u64,
    #[arg(long)]
    pub seed: u64,
    /// Defaults to spin1 for qutrits, pauli for qubits, gellmann otherwise.
    #[arg(long, value_enum)]
    pub basis: Option<BasisArg>,
    #[arg(long, default_value_t = telewit::measure::DEFAULT_Z)]
    pub z: f64,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[arg(long)]
    pub witness: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n as usize).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
