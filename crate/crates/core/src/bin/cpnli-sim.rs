use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use cpnli::config::{preset, Experiment, RunConfig, Violation, PRESET_NAMES};
use cpnli::experiment;
use cpnli::Error;

/// Simulate the reflective common-path nonlinear interferometer.
#[derive(Parser)]
#[command(name = "cpnli-sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the configured experiment.
        #[arg(long)]
        experiment: Option<String>,
        /// Override the tomography seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a configuration file and list every violated rule.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the built-in preset configurations as TOML.
    Presets,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

fn fail(code: &str, message: &str, violations: &[Violation], exit: u8) -> ExitCode {
    let report = json!({
        "error": { "code": code, "message": message, "violations": violations }
    });
    eprintln!("{report}");
    ExitCode::from(exit)
}

fn fail_with(err: &Error) -> ExitCode {
    let (code, exit) = match err {
        Error::Config(_) => ("config_invalid", EXIT_CONFIG),
        Error::Validation { .. } => ("invalid_parameters", EXIT_CONFIG),
        Error::GridTooCoarse { .. } => ("grid_too_coarse", EXIT_RUNTIME),
        Error::ZeroWeightBin { .. } => ("zero_weight_bin", EXIT_RUNTIME),
        Error::NoCounts => ("no_counts", EXIT_RUNTIME),
        Error::Io(_) => ("io_error", EXIT_RUNTIME),
    };
    fail(code, &err.to_string(), &[], exit)
}

fn load(path: &Path) -> Result<RunConfig, ExitCode> {
    RunConfig::load(path).map_err(|e| fail_with(&e))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            experiment,
            seed,
            out,
        } => {
            let mut cfg = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            if let Some(name) = experiment {
                match name.parse::<Experiment>() {
                    Ok(e) => cfg.experiment = e,
                    Err(e) => return fail_with(&e),
                }
            }
            if let Some(seed) = seed {
                cfg.tomography.seed = seed;
            }
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            let violations = cfg.validate();
            if !violations.is_empty() {
                return fail(
                    "config_invalid",
                    "configuration violates one or more rules",
                    &violations,
                    EXIT_CONFIG,
                );
            }
            match experiment::run(&cfg) {
                Ok(output) => {
                    for f in &output.files {
                        println!("{}", f.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail_with(&e),
            }
        }
        Command::Validate { config } => {
            let cfg = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            let violations = cfg.validate();
            println!(
                "{}",
                json!({ "valid": violations.is_empty(), "violations": violations })
            );
            if violations.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_CONFIG)
            }
        }
        Command::Presets => {
            for name in PRESET_NAMES {
                let cfg = preset(name).expect("listed preset exists");
                match cfg.to_toml() {
                    Ok(text) => println!("# preset: {name}\n{text}"),
                    Err(e) => return fail_with(&e),
                }
            }
            ExitCode::SUCCESS
        }
    }
}
