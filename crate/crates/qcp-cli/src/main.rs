//! Command-line front end: load or generate problem instances, run the
//! solvers, and emit results, iteration logs, plot data, and benchmark
//! tables.
//!
//! Exit codes: 0 success, 1 solver failure, 2 usage or parse error.

mod bench;
mod gen;
mod solve;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "qcp", version, about = "Quasi-concave global minimization over linear constraints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and print the result as JSON.
    Solve(solve::SolveArgs),
    /// Generate an instance file for one of the problem families.
    Gen(gen::GenArgs),
    /// Run a benchmark grid and print a CSV table.
    Bench(bench::BenchArgs),
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Solve(args) => solve::run(args),
        Command::Gen(args) => gen::run(args),
        Command::Bench(args) => bench::run(args),
    };
    std::process::exit(code);
}

/// Prints a machine-readable error to stderr and picks the exit code.
pub(crate) fn fail(kind: &str, message: &str, code: i32) -> i32 {
    eprintln!(
        "{}",
        serde_json::json!({ "error": kind, "message": message })
    );
    code
}

pub(crate) fn write_or_stdout(path: Option<&std::path::Path>, content: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, content),
        None => {
            println!("{content}");
            Ok(())
        }
    }
}
