use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};

use pulsom_cli::{cmd_eval, cmd_features, cmd_report, cmd_synth, cmd_train, keys_help, RunConfig};

/// Self-organizing maps for short feature sequences: MFCC front-end,
/// classic, spiking, recurrent and leaky-integrator maps, and evaluation.
///
/// Exit codes: 0 ok, 2 config error, 3 I/O error, 4 corpus format error,
/// 5 training diverged.
#[derive(Parser)]
#[command(name = "pulsom", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract MFCC sequences from a SPHERE corpus with .phn/.wrd alignments.
    Features {
        /// Run config; relative paths in it resolve against its directory.
        #[arg(short, long)]
        config: PathBuf,
    },
    /// Generate a synthetic sequence dataset.
    Synth {
        /// Run config; relative paths in it resolve against its directory.
        #[arg(short, long)]
        config: PathBuf,
    },
    /// Train the configured model on data.train.
    Train {
        /// Run config; relative paths in it resolve against its directory.
        #[arg(short, long)]
        config: PathBuf,
    },
    /// Label units on data.train and score data.train and data.test.
    Eval {
        /// Run config; relative paths in it resolve against its directory.
        #[arg(short, long)]
        config: PathBuf,
        /// Model file (default: <run.output_dir>/model.txt).
        #[arg(short, long)]
        model: Option<PathBuf>,
    },
    /// Combine several report CSVs into one table.
    Report {
        /// Run config; relative paths in it resolve against its directory.
        #[arg(short, long)]
        config: PathBuf,
    },
}

fn run(command: Command) -> Result<(), pulsom_cli::CliError> {
    match command {
        Command::Features { config } => {
            let n = cmd_features(&RunConfig::load(&config)?)?;
            println!("{n} sequences");
        }
        Command::Synth { config } => {
            let n = cmd_synth(&RunConfig::load(&config)?)?;
            println!("{n} sequences");
        }
        Command::Train { config } => {
            let path = cmd_train(&RunConfig::load(&config)?)?;
            println!("model written to {}", path.display());
        }
        Command::Eval { config, model } => {
            let cfg = RunConfig::load(&config)?;
            for (split, report) in cmd_eval(&cfg, model.as_deref())? {
                print!("{}", report.to_table(&split));
            }
        }
        Command::Report { config } => {
            print!("{}", cmd_report(&RunConfig::load(&config)?)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let matches = Cli::command()
        .after_long_help(keys_help())
        .mut_subcommands(|sub| sub.after_long_help(keys_help()))
        .get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pulsom: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
