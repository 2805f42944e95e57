use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hhg::config::{RunConfig, OUTPUT_ROOT_ENV};
use hhg::runner::{self, RunError, RunOptions};
use hhg::sweep::{self, SweepAxis};

#[derive(Parser)]
#[command(name = "hhg", version, about = "Helium high-harmonic generation in SAE and TDDFT models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML run configuration; defaults apply to missing keys.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. --set pulse.intensity=5e14.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output root (also settable through HHG_OUTPUT_ROOT).
    #[arg(long)]
    output_root: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the field-free ground state and print its energies.
    GroundState {
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Propagate one configuration and write its outputs.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        /// Recompute even if a complete run exists.
        #[arg(long)]
        force: bool,
    },
    /// Run a configuration for several values of one parameter.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// cep, intensity, gauge or model.
        #[arg(long)]
        axis: SweepAxis,
        /// Comma-separated values, e.g. 0,1.5707963267948966.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        force: bool,
    },
    /// Recompute observables of an existing run from its dipole record.
    Analyze {
        dir: PathBuf,
        /// Override an observables key.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Print the feature tables of two runs side by side.
    Compare { a: PathBuf, b: PathBuf },
}

fn load_config(args: &ConfigArgs) -> Result<RunConfig, RunError> {
    let text = match &args.config {
        Some(p) => fs::read_to_string(p).map_err(|source| RunError::Io {
            path: p.clone(),
            source,
        })?,
        None => String::new(),
    };
    if let Some(root) = &args.output_root {
        // the flag outranks both the environment and the config file
        std::env::set_var(OUTPUT_ROOT_ENV, root);
    }
    Ok(RunConfig::parse_with_overrides(&text, &args.overrides)?)
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn execute(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::GroundState { config } => {
            let cfg = load_config(&config)?;
            println!("{}", json(&runner::ground_state(&cfg)?));
        }
        Command::Run { config, force } => {
            let cfg = load_config(&config)?;
            let out = runner::run(
                &cfg,
                &RunOptions {
                    force,
                    ..RunOptions::default()
                },
            )?;
            if out.skipped {
                eprintln!("complete run found in {}; nothing to do", out.dir.display());
            } else {
                eprintln!("wrote {}", out.dir.display());
            }
            println!("{}", json(&out.manifest));
        }
        Command::Sweep {
            config,
            axis,
            values,
            workers,
            force,
        } => {
            let cfg = load_config(&config)?;
            let res = sweep::sweep(
                &cfg,
                axis,
                &values,
                workers,
                &RunOptions {
                    force,
                    ..RunOptions::default()
                },
            )?;
            print!("{}", res.table);
            eprintln!("wrote {}", res.table_path.display());
            if res.points.iter().any(|p| p.error.is_some()) {
                eprintln!("some sweep points failed; see the table");
            }
        }
        Command::Analyze { dir, overrides } => {
            let stored = runner::read_run_config(&dir)?;
            let cfg = RunConfig::parse_with_overrides(&stored.to_toml(), &overrides)?;
            let (out, manifest) = runner::analyze(&dir, &cfg)?;
            eprintln!("wrote {}", out.display());
            println!("{}", json(&manifest.observables));
        }
        Command::Compare { a, b } => print!("{}", sweep::compare(&a, &b)?),
    }
    Ok(())
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
