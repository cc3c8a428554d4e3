//! The `papm` command-line tool.
//!
//! Exit codes: 0 success, 1 mathematical violation or prediction mismatch,
//! 2 usage or input error.

pub mod commands;
pub mod report;
pub mod spec_file;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::connection::{ConnectionParams, NamedConnection};

pub use commands::exit_code_for;
use report::Tolerances;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "papm",
    version,
    about = "Natural connections on conformal Riemannian P-manifolds: validation, classification, identity checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the structure axioms and W1 membership at every sample point.
    Validate(Common),
    /// Predict whether the curvature of a natural connection is a Riemannian P-tensor and compare with numerics.
    Classify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        connection: ConnectionArgs,
    },
    /// Check one curvature identity at every sample point.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        identity: Identity,
        #[command(flatten)]
        connection: ConnectionArgs,
    },
    /// Classify a grid of connections and compare predictions with numerics; CSV on stdout.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Lambda range `A:B`.
        #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
        lambda_range: (f64, f64),
        /// Mu range `A:B`.
        #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
        mu_range: (f64, f64),
        /// Grid points per axis.
        #[arg(long)]
        steps: usize,
        /// Write the JSON summary to this file.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Manifold spec file (JSON).
    spec: PathBuf,
    #[arg(long, default_value_t = 1e-4)]
    tol_curvature: f64,
    #[arg(long, default_value_t = 1e-5)]
    tol_derivative: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol_structure: f64,
}

impl Common {
    fn tolerances(&self) -> Tolerances {
        Tolerances {
            curvature: self.tol_curvature,
            derivative: self.tol_derivative,
            structure: self.tol_structure,
        }
    }
}

#[derive(Debug, Args)]
struct ConnectionArgs {
    /// D, Dtilde or canonical.
    #[arg(long, conflicts_with_all = ["lambda", "mu"])]
    named: Option<NamedConnection>,
    #[arg(long, requires = "mu", allow_hyphen_values = true)]
    lambda: Option<f64>,
    #[arg(long, requires = "lambda", allow_hyphen_values = true)]
    mu: Option<f64>,
}

impl ConnectionArgs {
    /// Defaults to `D` when nothing is given.
    fn resolve(&self, n: usize) -> ConnectionParams {
        match (self.named, self.lambda, self.mu) {
            (Some(named), _, _) => named.params(n),
            (None, Some(l), Some(m)) => ConnectionParams::new(l, m),
            _ => NamedConnection::D.params(n),
        }
    }

    fn given(&self) -> bool {
        self.named.is_some() || self.lambda.is_some()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Identity {
    /// Curvature of `∇` from that of `∇'`, the torsion and `∇'Q`.
    #[value(name = "torsion-curvature", alias = "eq12")]
    TorsionCurvature,
    /// Closed form of `∇'Q`.
    #[value(name = "nabla-q", alias = "eq19")]
    NablaQ,
    /// `R - R'` in terms of `π1, π2, π3, ψ1(S'), ψ2(S'')`.
    #[value(name = "decomposition", alias = "eq21")]
    Decomposition,
    /// Ricci and scalar curvature relations.
    #[value(name = "ricci-scalar", alias = "cor32")]
    RicciScalar,
    /// Antisymmetrised derivatives of `θ` under `∇` and `∇'`.
    #[value(name = "theta-derivatives", alias = "eq26p")]
    ThetaDerivatives,
    /// `∇'g = ∇'P = 0`.
    #[value(name = "naturality")]
    Naturality,
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("'{s}' is not of the form A:B"))?;
    let parse = |t: &str| {
        t.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("'{t}' is not a finite number"))
    };
    Ok((parse(a)?, parse(b)?))
}

/// Runs the tool with explicit output streams; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return e.exit_code();
        }
    };
    let result = match &cli.command {
        Command::Validate(common) => commands::validate(&common.spec, common.tolerances()),
        Command::Classify { common, connection } => {
            if !connection.given() {
                let _ = writeln!(err, "error: classify needs --named or --lambda/--mu");
                return EXIT_INPUT;
            }
            commands::classify(&common.spec, common.tolerances(), |n| connection.resolve(n))
        }
        Command::Verify {
            common,
            identity,
            connection,
        } => commands::verify(&common.spec, common.tolerances(), *identity, |n| {
            connection.resolve(n)
        }),
        Command::Sweep {
            common,
            lambda_range,
            mu_range,
            steps,
            summary,
        } => commands::sweep(
            &common.spec,
            common.tolerances(),
            commands::Grid {
                lambda: *lambda_range,
                mu: *mu_range,
                steps: *steps,
            },
            summary.as_deref(),
        ),
    };
    match result {
        Ok(outcome) => {
            let _ = out.write_all(outcome.stdout.as_bytes());
            for msg in &outcome.stderr {
                let _ = writeln!(err, "{msg}");
            }
            outcome.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code_for(&e)
        }
    }
}

/// Entry point for the binary.
pub fn main_with_args(args: impl IntoIterator<Item = OsString>) -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(args, &mut stdout.lock(), &mut stderr.lock())
}
