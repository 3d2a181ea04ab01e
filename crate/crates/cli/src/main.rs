use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mpcc_cli::commands::{self, exit, CertifyFlags, Outcome};
use mpcc_cli::ToleranceOverrides;
use mpcc_core::MultiplierClass;

#[derive(Parser)]
#[command(name = "mpcc", version, about = "M-stationarity certificates for complementarity-constrained programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct TolFlags {
    /// Certificate tolerance for signs, products and residuals.
    #[arg(long = "tol")]
    cert_tol: Option<f64>,
    /// Threshold below which constraint values count as active.
    #[arg(long)]
    active_tol: Option<f64>,
    /// Allowed constraint violation at the point.
    #[arg(long)]
    feas_tol: Option<f64>,
    /// Tolerance of the LP and min-norm solvers.
    #[arg(long)]
    solver_tol: Option<f64>,
}

impl TolFlags {
    fn overrides(&self) -> ToleranceOverrides {
        ToleranceOverrides {
            active_tol: self.active_tol,
            feas_tol: self.feas_tol,
            solver_tol: self.solver_tol,
            cert_tol: self.cert_tol,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Require {
    S,
    M,
    A,
    W,
}

impl From<Require> for MultiplierClass {
    fn from(r: Require) -> Self {
        match r {
            Require::S => MultiplierClass::S,
            Require::M => MultiplierClass::M,
            Require::A => MultiplierClass::A,
            Require::W => MultiplierClass::WeakOnly,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the feasibility report and index sets of a problem file.
    Classify {
        file: PathBuf,
        #[command(flatten)]
        tol: TolFlags,
        #[arg(long)]
        json: bool,
    },
    /// Certify M-stationarity of the point in a problem file.
    Certify {
        file: PathBuf,
        #[command(flatten)]
        tol: TolFlags,
        /// Largest biactive set to enumerate branches for.
        #[arg(long, default_value_t = 12)]
        branch_cap: usize,
        /// Also run the sign-pattern oracle and include its result.
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        json: bool,
    },
    /// Check a multiplier vector (or a report's witness) against a problem file.
    Check {
        file: PathBuf,
        multipliers: PathBuf,
        /// Weakest class accepted.
        #[arg(long, value_enum, default_value = "m")]
        require: Require,
        #[command(flatten)]
        tol: TolFlags,
        #[arg(long)]
        json: bool,
    },
    /// Compare sampled tangent directions with the linearized cone (affine files only).
    Probe {
        file: PathBuf,
        #[arg(long, default_value_t = 1000)]
        directions: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        tol: TolFlags,
        #[arg(long)]
        json: bool,
    },
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Classify { file, tol, json } => commands::classify(&file, &tol.overrides(), json),
        Command::Certify { file, tol, branch_cap, oracle, json } => commands::certify(
            &file,
            &CertifyFlags { tolerances: tol.overrides(), branch_cap, oracle, json },
        ),
        Command::Check { file, multipliers, require, tol, json } => {
            commands::check(&file, &multipliers, require.into(), &tol.overrides(), json)
        }
        Command::Probe { file, directions, seed, tol, json } => {
            commands::probe(&file, directions, seed, &tol.overrides(), json)
        }
    }
}

fn main() -> ExitCode {
    let outcome = match Cli::try_parse() {
        Ok(cli) => run(cli),
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(exit::PARSE as u8);
        }
    };
    let _ = std::io::stdout().write_all(outcome.stdout.as_bytes());
    let _ = std::io::stderr().write_all(outcome.stderr.as_bytes());
    ExitCode::from(outcome.code as u8)
}
