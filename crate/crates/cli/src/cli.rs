use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use goodwill_core::RootForm;

use crate::commands::{self, ControlSpec, SimulateOpts, VerifyOpts};
use crate::error::exit;

/// Stochastic advertising goodwill with memory: simulation, explicit
/// optimal spending and its Monte Carlo verification.
#[derive(Debug, Parser)]
#[command(name = "goodwill", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate goodwill paths; writes t, y_mean, y_p05, y_p95, z.
    Simulate {
        scenario: PathBuf,
        out: PathBuf,
        /// Number of paths (default: numerics.n_paths).
        #[arg(long)]
        paths: Option<usize>,
        /// Noise seed (default: numerics.seed).
        #[arg(long)]
        seed: Option<u64>,
        /// Also write a run with the step divided by this factor, on the same
        /// Brownian paths, to `<out>.refine<K>.<ext>`.
        #[arg(long, value_name = "K")]
        dt_refine: Option<usize>,
        /// optimal, zero, constant:<v> or scaled:<factor>.
        #[arg(long, default_value = "optimal")]
        control: ControlSpec,
    },
    /// Solve for the explicit value function; writes t, w0, Bw, z_star, c.
    Solve { scenario: PathBuf, out: PathBuf },
    /// Check by Monte Carlo that no control beats the value function.
    Verify {
        scenario: PathBuf,
        out: PathBuf,
        /// Comma-separated controls, as for `simulate --control`.
        #[arg(long, value_delimiter = ',', default_value = "optimal,zero,scaled:1.1")]
        controls: Vec<ControlSpec>,
        #[arg(long)]
        paths: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Multiply w0 by this factor before verifying (self-test).
        #[arg(long, hide = true)]
        corrupt_w0_scale: Option<f64>,
    },
    /// Compare the delay equation with its lifted form under refinement.
    Equivalence {
        scenario: PathBuf,
        out: PathBuf,
        /// Number of step halvings after the scenario grid.
        #[arg(long, default_value_t = 2)]
        refinements: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Invariant-measure condition for dy = [a0 y(t) + a1 y(t-r)] dt + σ dW.
    #[command(allow_negative_numbers = true)]
    Stability {
        a0: f64,
        a1: f64,
        /// Transcendental equation for the root: γ·cot γ = a0 or γ·coth γ = a0.
        #[arg(long, value_enum, default_value_t = Form::Cot)]
        form: Form,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Form {
    Cot,
    Coth,
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                exit::INPUT
            } else {
                exit::OK
            };
        }
    };
    let result = match cli.command {
        Command::Simulate {
            scenario,
            out,
            paths,
            seed,
            dt_refine,
            control,
        } => commands::simulate(&SimulateOpts {
            scenario,
            out,
            paths,
            seed,
            dt_refine,
            control,
        }),
        Command::Solve { scenario, out } => commands::solve_cmd(&scenario, &out),
        Command::Verify {
            scenario,
            out,
            controls,
            paths,
            seed,
            corrupt_w0_scale,
        } => commands::verify(&VerifyOpts {
            scenario,
            out,
            controls,
            paths,
            seed,
            corrupt_w0_scale,
        }),
        Command::Equivalence {
            scenario,
            out,
            refinements,
            seed,
        } => commands::equivalence(&scenario, &out, refinements, seed),
        Command::Stability { a0, a1, form } => commands::stability(
            a0,
            a1,
            match form {
                Form::Cot => RootForm::Cot,
                Form::Coth => RootForm::Coth,
            },
        ),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
