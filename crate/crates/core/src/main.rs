use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use isofield::harness::{exit_code, run_path, Command, Overrides};

#[derive(Parser)]
#[command(name = "isofield", version, about = "Isotropic Gaussian fields on compact groups and the sphere")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Draw replicates and write coefficient and covariance summaries.
    Simulate(RunArgs),
    /// Run the verification suites and write report.json.
    Verify(RunArgs),
    /// Compute the mean-square continuity modulus.
    Modulus(RunArgs),
    /// Decide whether a nugget covariance is realizable.
    Nugget(RunArgs),
    /// Synthesize coefficients on the quadrature grid and analyze them back.
    Transform(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::Verify(a) => (Command::Verify, a),
        Cmd::Modulus(a) => (Command::Modulus, a),
        Cmd::Nugget(a) => (Command::Nugget, a),
        Cmd::Transform(a) => (Command::Transform, a),
    };
    let overrides = Overrides {
        seed: args.seed,
        replicates: args.replicates,
        out: args.out,
        workers: args.workers,
    };
    let result = run_path(command, &args.config, &overrides);
    match &result {
        Ok(m) => {
            for t in &m.tests {
                println!("{} {}", if t.pass { "PASS" } else { "FAIL" }, t.test);
            }
            println!("{}: {} ({:.2} s)", m.command, if m.pass { "pass" } else { "fail" }, m.wall_clock_seconds);
        }
        Err(e) => eprintln!("isofield: {e}"),
    }
    ExitCode::from(exit_code(&result) as u8)
}
