use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use reltherm_cli::{check_invariants, run, write_report, CliError, Experiment, ExperimentConfig, OutputFormat};
use reltherm_core::Seed;

const SEED_ENV: &str = "RELTHERM_SEED";

#[derive(Parser)]
#[command(
    name = "reltherm",
    version,
    about = "Smooth-entropy thermalization experiments",
    after_help = "Seed precedence: --seed, then the config file's \"seed\", then the RELTHERM_SEED \
                  environment variable, then 0.\n\
                  Exit codes: 0 success, 1 invalid configuration or I/O error, 2 numerical failure, \
                  3 invariant-suite failure."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Entropies of a random bipartite state, with SDP certificates.
    Entropy(Common),
    /// Haar sampling of thermalization on Ω = S⊗E with condition margins.
    DecoupleSample(Common),
    /// Spin energy-shell pipeline: thresholds, marginals and sampling.
    SpinExample(Common),
    /// Heat-flow search on a correlated or product thermal pair.
    HeatFlow(Common),
    /// Runs the inequality and invariant suite; exits 3 on any failure.
    VerifyBounds(Common),
}

#[derive(Args)]
#[command(after_help = "The default seed can be set with the RELTHERM_SEED environment variable.")]
struct Common {
    /// JSON config file; its "experiment" must match the subcommand.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for all sampling (overrides the config file and RELTHERM_SEED).
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; the report goes to standard output when absent.
    #[arg(long)]
    out: Option<String>,
    /// Output format: json or csv.
    #[arg(long)]
    format: Option<OutputFormat>,
}

fn env_seed() -> Result<Option<u64>, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Validation(format!("{SEED_ENV}: {v:?} is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

fn build_config(name: &str, args: &Common) -> Result<ExperimentConfig, CliError> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let mut config = ExperimentConfig::from_json(&text)?;
            if config.experiment.name() != name {
                return Err(CliError::Validation(format!(
                    "experiment: config names {:?} but the subcommand is {name:?}",
                    config.experiment.name()
                )));
            }
            let has_seed =
                serde_json::from_str::<serde_json::Value>(&text).map(|v| v.get("seed").is_some()).unwrap_or(false);
            if !has_seed {
                config.seed = Seed(env_seed()?.unwrap_or(0));
            }
            config
        }
        None => {
            let mut config = ExperimentConfig::new(Experiment::default_for(name)?);
            config.seed = Seed(env_seed()?.unwrap_or(0));
            config
        }
    };
    if let Some(seed) = args.seed {
        config.seed = Seed(seed);
    }
    if let Some(out) = &args.out {
        config.output_path = Some(out.clone());
    }
    if let Some(format) = args.format {
        config.output_format = format;
    }
    Ok(config)
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (name, args) = match &cli.command {
        Command::Entropy(a) => ("entropy", a),
        Command::DecoupleSample(a) => ("decouple-sample", a),
        Command::SpinExample(a) => ("spin-example", a),
        Command::HeatFlow(a) => ("heat-flow", a),
        Command::VerifyBounds(a) => ("verify-bounds", a),
    };
    let config = build_config(name, args)?;
    let report = run(&config)?;
    match &config.output_path {
        Some(path) => {
            write_report(&report)?;
            eprintln!("{name}: report written to {path} ({:.2} s)", report.wall_clock_seconds);
        }
        None => print!("{}", report.render(config.output_format)),
    }
    check_invariants(&report)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
