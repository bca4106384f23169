mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Individual-variation robustness benchmark for tabular classifiers.
#[derive(Debug, Parser)]
#[command(name = "ivrobust", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate CVA/CVI/CVT from a longitudinal study.
    EstimateCv(EstimateArgs),
    /// Run the evaluation protocols and write reports.
    Bench(BenchArgs),
    /// Write one IV-perturbed copy of a dataset plus a KS table.
    Perturb(PerturbArgs),
    /// Write the synthetic benchmark dataset.
    Synth(SynthArgs),
    /// Simulate a longitudinal study with known CVs.
    SimulateStudy(SimulateArgs),
    /// Recompute the input digests recorded in a manifest.
    VerifyManifest { manifest: PathBuf },
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Study CSV with columns subject,step,replicate,<features...>.
    #[arg(long)]
    data: PathBuf,
    /// Class the estimated CVI belongs to.
    #[arg(long, default_value_t = 0)]
    class: u8,
    /// Profile output path (default: <out-dir>/profile.json).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

/// Where the dataset comes from.
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct DataSource {
    /// Dataset CSV with a 0/1 label column.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Use the bundled synthetic benchmark instead of a file.
    #[arg(long)]
    synthetic: bool,
}

#[derive(Debug, Args)]
struct CommonArgs {
    #[command(flatten)]
    source: DataSource,
    /// Synthetic generator spec (JSON); implies --synthetic semantics.
    #[arg(long, requires = "synthetic")]
    synthetic_spec: Option<PathBuf>,
    /// Label column name for --data.
    #[arg(long, default_value = "target")]
    label: String,
    /// CV profile (JSON). Defaults to the bundled blood-panel table.
    #[arg(long)]
    profile: Option<PathBuf>,
    #[arg(long, default_value_t = 99)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Use the per-feature maximum CVI over classes at test time.
    #[arg(long)]
    class_agnostic_cv: bool,
    /// Clamp perturbed values at zero.
    #[arg(long)]
    clip_nonnegative: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProtocolArg {
    Standard,
    Augmented,
    Imprecise,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CiBasisArg {
    PerIteration,
    PerFold,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, value_enum, default_value_t = ProtocolArg::Standard)]
    protocol: ProtocolArg,
    #[arg(long, default_value_t = 100)]
    iterations: usize,
    #[arg(long, default_value_t = 3)]
    folds: usize,
    /// Perturbed copies per training instance for ACS/ACG.
    #[arg(long, default_value_t = 100)]
    augment_n: usize,
    /// Worker threads over iterations; output does not depend on it.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, value_enum, default_value_t = CiBasisArg::PerIteration)]
    ci_basis: CiBasisArg,
    #[arg(long, default_value_t = 0.95)]
    ci_level: f64,
}

#[derive(Debug, Args)]
struct PerturbArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Features to run the KS test on.
    #[arg(long, value_delimiter = ',', default_value = "LY,WBC,NE,AST")]
    features: Vec<String>,
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Generator spec (JSON). Defaults to the bundled benchmark.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Override the generator seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 0.03)]
    cva: f64,
    #[arg(long, default_value_t = 0.10)]
    cvi: f64,
    #[arg(long, default_value_t = 30)]
    subjects: usize,
    #[arg(long, default_value_t = 10)]
    steps: usize,
    #[arg(long, default_value_t = 2)]
    replicates: usize,
    #[arg(long, default_value_t = 99)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<ivrobust::Error>() {
        Some(ivrobust::Error::Numeric(_)) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::EstimateCv(a) => commands::estimate_cv(a),
        Command::Bench(a) => commands::bench(a),
        Command::Perturb(a) => commands::perturb(a),
        Command::Synth(a) => commands::synth(a),
        Command::SimulateStudy(a) => commands::simulate_study(a),
        Command::VerifyManifest { manifest } => commands::verify_manifest(&manifest),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
