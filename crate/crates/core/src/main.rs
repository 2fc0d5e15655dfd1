use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use namedtensor::lang::{self, Diagnostic, Program};
use namedtensor::zoo;

#[derive(Parser)]
#[command(name = "nt", version, about = "Check, run and differentiate named-tensor programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report syntax and shape errors without running the program
    Check { file: PathBuf },
    /// Run the program and print what its directives produce
    Eval {
        file: PathBuf,
        /// Seed for declared inputs that are never bound
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the derivative of one identifier with respect to another
    Grad {
        file: PathBuf,
        #[arg(long)]
        of: String,
        #[arg(long)]
        wrt: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Model fixtures checked against loop references
    Zoo {
        #[command(subcommand)]
        command: ZooCommand,
    },
}

#[derive(Subcommand)]
enum ZooCommand {
    /// List fixture names
    List,
    /// Run one fixture and print its deviation from the reference
    Run {
        name: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn report(path: &Path, diagnostics: &[Diagnostic]) -> ExitCode {
    for d in diagnostics {
        eprintln!("{}:{d}", path.display());
    }
    ExitCode::FAILURE
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn load(path: &Path) -> Result<Program, ExitCode> {
    let source = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("{}: {e}", path.display());
        ExitCode::from(2)
    })?;
    lang::parse(&source).map_err(|d| report(path, &[d]))
}

fn run(cli: Cli) -> Result<(), ExitCode> {
    match cli.command {
        Command::Check { file } => {
            let program = load(&file)?;
            let diagnostics = lang::check(&program);
            if !diagnostics.is_empty() {
                return Err(report(&file, &diagnostics));
            }
            emit(&format!("{}: ok\n", file.display()));
        }
        Command::Eval { file, seed } => {
            let program = load(&file)?;
            let eval = lang::evaluate(&program, seed).map_err(|d| report(&file, &d))?;
            emit(&eval.output);
        }
        Command::Grad { file, of, wrt, seed } => {
            let program = load(&file)?;
            let d = lang::grad(&program, &of, &wrt, seed).map_err(|d| report(&file, &d))?;
            emit(&format!("# d{of}/d{wrt}\n{}", d.value.to_text()));
        }
        Command::Zoo {
            command: ZooCommand::List,
        } => {
            let list: String = zoo::fixtures()
                .iter()
                .map(|f| format!("{:<20} {}\n", f.name, f.summary))
                .collect();
            emit(&list);
        }
        Command::Zoo {
            command: ZooCommand::Run { name, seed },
        } => {
            let Some(fixture) = zoo::find(&name) else {
                eprintln!("unknown fixture {name}; try `nt zoo list`");
                return Err(ExitCode::from(2));
            };
            let r = fixture.run(seed).map_err(|e| {
                eprintln!("{name}: {e}");
                ExitCode::FAILURE
            })?;
            let verdict = if r.passed() { "ok" } else { "FAIL" };
            emit(&format!(
                "{name} seed={seed} max_abs_deviation={:e} tolerance={:e} {verdict}\n",
                r.deviation, r.tolerance
            ));
            if !r.passed() {
                return Err(ExitCode::FAILURE);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => code,
    }
}
