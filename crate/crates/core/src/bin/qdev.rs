use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qdev::cli::{device_config, error_json, load_config, presets_listing, run, study_convergence, Overrides};
use qdev::experiments::build_preset;
use qdev::{Error, TbcKind};

#[derive(Parser)]
#[command(name = "qdev", version, about = "1D quantum device simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bias sweep (or single scattering state) for a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// c4tbc, d4tbc or adtbc
        #[arg(long)]
        scheme: Option<TbcKind>,
        #[arg(long, allow_negative_numbers = true)]
        nx: Option<i64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grid-refinement studies.
    Study {
        #[command(subcommand)]
        study: Study,
    },
    /// Built-in devices.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum Study {
    /// Convergence orders under grid halving; writes convergence.csv.
    Convergence {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        scheme: Option<TbcKind>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
    /// Print a preset as an inline `[device]` table.
    Show { name: String },
}

fn configure_threads() -> Result<(), Error> {
    let Ok(value) = std::env::var("QDEV_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::Validation {
            field: "QDEV_THREADS".into(),
            message: format!("expected a positive integer, got `{value}`"),
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::InvalidSystem(e.to_string()))
}

fn execute(cli: Cli) -> Result<ExitCode, Error> {
    configure_threads()?;
    match cli.command {
        Command::Run { config, scheme, nx, out } => {
            let mut cfg = load_config(&config)?;
            cfg.apply(&Overrides { scheme, nx, out });
            let report = run(&cfg)?;
            for path in &report.files {
                println!("{}", path.display());
            }
            for (bias, err) in &report.failures {
                eprintln!("V_ds = {bias}: {}", error_json(err));
            }
            Ok(if report.failures.is_empty() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Study {
            study: Study::Convergence { config, scheme, out },
        } => {
            let mut cfg = load_config(&config)?;
            cfg.apply(&Overrides { scheme, nx: None, out });
            let (report, path) = study_convergence(&cfg)?;
            print!("{}", report.to_csv());
            eprintln!("wrote {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Presets { action: PresetAction::List } => {
            print!("{}", presets_listing());
            Ok(ExitCode::SUCCESS)
        }
        Command::Presets {
            action: PresetAction::Show { name },
        } => {
            print!("{}", device_config(&build_preset(&name)?)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            println!("{}", error_json(&e));
            ExitCode::from(2)
        }
    }
}
