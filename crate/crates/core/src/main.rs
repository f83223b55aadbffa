use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use g2moduli::cli_io::{example, run_file, Overrides, EXAMPLES};

/// Energies, lengths and certificates on G2 moduli testbeds.
#[derive(Debug, Parser)]
#[command(name = "g2moduli", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario file. Flags override the matching scenario fields.
    Run {
        file: PathBuf,
        /// Directory for artifacts (default: current directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Gauss–Legendre nodes per quadrature segment.
        #[arg(long)]
        quad_nodes: Option<usize>,
        /// Finite-difference step for Hessian scenarios.
        #[arg(long)]
        fd_step: Option<f64>,
        /// Seed for randomised sampling.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List the bundled scenarios.
    ListExamples,
    /// Print a bundled scenario to stdout.
    ShowExample { name: String },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::ListExamples => {
            for e in EXAMPLES {
                println!("{:<24} {}", e.name, e.description);
            }
            ExitCode::SUCCESS
        }
        Command::ShowExample { name } => match example(&name) {
            Some(e) => {
                print!("{}", e.source);
                ExitCode::SUCCESS
            }
            None => {
                eprintln!("error: no bundled scenario named `{name}`");
                ExitCode::from(1)
            }
        },
        Command::Run {
            file,
            out,
            quad_nodes,
            fd_step,
            seed,
        } => {
            let overrides = Overrides {
                out_dir: out,
                quad_nodes,
                fd_step,
                seed,
            };
            match run_file(&file, &overrides) {
                Ok((outcome, written)) => {
                    for line in &outcome.summary {
                        println!("{line}");
                    }
                    for path in &written {
                        println!("wrote {}", path.display());
                    }
                    if outcome.verdict_ok {
                        ExitCode::SUCCESS
                    } else {
                        println!("verdict: negative");
                        ExitCode::from(2)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
    }
}
