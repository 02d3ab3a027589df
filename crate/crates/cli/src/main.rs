use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use efpqubo::commands::{self, CompareConfig, DegeneracyConfig};
use efpqubo::config::load_config;
use efpqubo::error::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "efpqubo", about = "l0-regularized EFP regression via QUBO annealing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, clap::Args)]
struct CommonArgs {
    /// JSON configuration file
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: current directory)
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Use the paper's large-scale experiment settings
    #[arg(long)]
    paper_scale: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Write the (restriction-preprocessed) synthetic event sample
    Generate(CommonArgs),
    /// Run the λ × run sweep and write results/summary CSVs
    Sweep(CommonArgs),
    /// Emit the (value, penalty, count) degeneracy profile of a scheme
    Degeneracy(CommonArgs),
    /// Join two sweep outputs on λ or nnz
    Compare(CommonArgs),
}

fn load_typed<T: serde::de::DeserializeOwned>(path: &PathBuf) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("invalid config {}: {e}", path.display())))
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Generate(args) => {
            let mut config = load_config(&args.config)?;
            if args.paper_scale {
                config.apply_paper_scale();
            }
            let path = commands::cmd_generate(&config, &args.out)?;
            println!("wrote {}", path.display());
        }
        Command::Sweep(args) => {
            let mut config = load_config(&args.config)?;
            if args.paper_scale {
                config.apply_paper_scale();
            }
            let rows = commands::cmd_sweep(&config, &args.out)?;
            println!("wrote {} rows to {}", rows.len(), args.out.join("results.csv").display());
        }
        Command::Degeneracy(args) => {
            let config: DegeneracyConfig = load_typed(&args.config)?;
            let path = commands::cmd_degeneracy(&config, &args.out)?;
            println!("wrote {}", path.display());
        }
        Command::Compare(args) => {
            let config: CompareConfig = load_typed(&args.config)?;
            let path = commands::cmd_compare(&config, &args.out)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code as u8)
        }
    }
}
