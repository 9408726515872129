//! `bergman`: verification suites, constant tables and convergence runs for
//! the Bergman projection on the unit ball.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{Failure, KernelArgs, NormArgs, QuadArgs, RefKind, RouteArg};
use output::{emit, Format};

#[derive(Debug, Parser)]
#[command(name = "bergman", version, about = "Bergman projection norms on the unit ball of C^d")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the identity, normalization, transform and reproducing-property checks.
    Verify {
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        quad: QuadArgs,
        /// Tolerance for the exact automorphism identities.
        #[arg(long, default_value_t = 1e-12)]
        max_residual: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Print known reference norms of T_σ.
    Reference {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long, value_enum, default_value_t = RefKind::All)]
        kind: RefKind,
        /// Lebesgue exponent for the Lp bounds.
        #[arg(long, default_value_t = 4.0)]
        p: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Print C, λ and the norm of T_σ : L∞ → B.
    Norm {
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        norm: NormArgs,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compare J_{c,t}(r e₁) by quadrature with its closed-form supremum.
    Jvalue {
        #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
        c: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        t: f64,
        #[arg(long, default_value_t = 1)]
        d: usize,
        /// Comma-separated radii in [0, 1).
        #[arg(long, default_value = "0,0.5,0.9")]
        r: String,
        #[command(flatten)]
        quad: QuadArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Lower bounds from the extremal sequence, one row per ε.
    Converge {
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        norm: NormArgs,
        /// Comma-separated ε values in (0, 1), increasing.
        #[arg(long)]
        eps: Option<String>,
        #[arg(long, value_enum, default_value_t = RouteArg::Transformed)]
        route: RouteArg,
        #[command(flatten)]
        quad: QuadArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Tabulate C_p: closed values or bounds next to the optimizer estimate.
    Cp {
        #[arg(long, value_delimiter = ',', default_value = "2")]
        d: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1,1.5,2,3,inf")]
        p: Vec<String>,
        #[arg(long, default_value_t = bergman_core::constants::DEFAULT_RESTARTS)]
        restarts: usize,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("BERGMAN_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Failure::Config(format!("BERGMAN_THREADS must be a positive integer, got '{value}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Runtime(e.to_string()))
}

fn dispatch(command: &Command) -> Result<(output::Report, &OutputArgs), Failure> {
    Ok(match command {
        Command::Verify {
            kernel,
            quad,
            max_residual,
            output,
        } => (commands::verify(kernel, quad, *max_residual)?, output),
        Command::Reference { kernel, kind, p, output } => (commands::reference(kernel, *kind, *p)?, output),
        Command::Norm {
            kernel,
            norm,
            seed,
            output,
        } => (commands::norm(kernel, norm, *seed)?, output),
        Command::Jvalue {
            c,
            t,
            d,
            r,
            quad,
            output,
        } => (commands::jvalue(*c, *t, *d, r, quad)?, output),
        Command::Converge {
            kernel,
            norm,
            eps,
            route,
            quad,
            output,
        } => (commands::converge(kernel, norm, eps.as_deref(), *route, quad)?, output),
        Command::Cp {
            d,
            n,
            p,
            restarts,
            seed,
            output,
        } => (commands::cp(d, n, p, *restarts, *seed)?, output),
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| dispatch(&cli.command));
    match result {
        Ok((report, out)) => {
            if let Err(e) = emit(&report, out.format, out.out.as_deref()) {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(2);
            }
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
