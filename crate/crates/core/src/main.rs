use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use quasidim::cli::{self, Emission, Format};
use quasidim::error::Error;

#[derive(Parser, Debug)]
#[command(name = "quasidim", version, about = "Hausdorff dimension of quasi-circle Julia sets J(z^2+c)")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format
    #[arg(long, global = true, default_value = "csv")]
    format: Format,

    /// Output path (default stdout)
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<String>,

    /// Override the quasi-circle regime guard on |c|
    #[arg(long, global = true)]
    force: bool,

    /// Worker threads for the tree enumeration (results are thread-count
    /// independent)
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct CArg {
    /// Parameter c as a complex literal, e.g. 0.05+0i or -1.12+0.222i
    #[arg(long)]
    c: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve Bowen's equation for the dimension and compare with the
    /// small-|c| asymptotic
    Dim {
        #[command(flatten)]
        c: CArg,
        #[arg(long = "n-max", default_value_t = 14)]
        n_max: u32,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Dimension solves over a grid of |c| moduli and arguments
    Sweep {
        /// Comma-separated list of |c| values
        #[arg(long)]
        moduli: String,
        /// Number of equally spaced arguments per modulus
        #[arg(long, default_value_t = 1)]
        args: u32,
        #[arg(long = "n-max", default_value_t = 14)]
        n_max: u32,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Pressure estimates per depth at a fixed exponent s
    Pressure {
        #[command(flatten)]
        c: CArg,
        #[arg(long)]
        s: f64,
        #[arg(long, default_value_t = 12)]
        n: u32,
    },
    /// Run the algebraic identity suite at the given parameter and depth
    Identities {
        #[command(flatten)]
        c: CArg,
        #[arg(long, default_value_t = 10)]
        n: u32,
    },
    /// Sample the Julia set by randomized inverse iteration
    Sample {
        #[command(flatten)]
        c: CArg,
        #[arg(long, default_value_t = 100_000)]
        count: usize,
        #[arg(long = "burn-in", default_value_t = 100)]
        burn_in: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Box-counting dimension of an inverse-iteration cloud
    Boxdim {
        #[command(flatten)]
        c: CArg,
        #[arg(long, default_value_t = 1_000_000)]
        count: usize,
        #[arg(long = "burn-in", default_value_t = 100)]
        burn_in: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated box sizes, decreasing
        #[arg(long, default_value = "0.0625,0.03125,0.015625,0.0078125,0.00390625,0.001953125,0.0009765625,0.00048828125")]
        scales: String,
    },
    /// Falconer's dimension bounds for |c| > (5+2*sqrt(6))/4
    Bounds {
        #[command(flatten)]
        c: CArg,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not errors
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => cli::EXIT_INVALID_INPUT,
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };

    #[cfg(feature = "parallel")]
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: failed to configure thread pool: {e}");
            return ExitCode::from(cli::EXIT_INVALID_INPUT as u8);
        }
    }

    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code_for(&e) as u8)
        }
    }
}

fn run(cli: &Cli) -> Result<i32, Error> {
    let (emission, code) = match &cli.command {
        Command::Dim { c, n_max, tol } => {
            let param = parse_param(&c.c, cli.force)?;
            warn_parabolic(param.c());
            (cli::run_dim(&param, *n_max, *tol)?, cli::EXIT_OK)
        }
        Command::Sweep { moduli, args, n_max, tol } => {
            let moduli = cli::parse_f64_list(moduli)?;
            (cli::run_sweep(&moduli, *args, *n_max, *tol, cli.force)?, cli::EXIT_OK)
        }
        Command::Pressure { c, s, n } => {
            let param = parse_param(&c.c, cli.force)?;
            (cli::run_pressure(&param, *s, *n)?, cli::EXIT_OK)
        }
        Command::Identities { c, n } => {
            let param = parse_param(&c.c, cli.force)?;
            let (em, ok) = cli::run_identities(&param, *n)?;
            (em, if ok { cli::EXIT_OK } else { cli::EXIT_IDENTITY_FAILURE })
        }
        Command::Sample { c, count, burn_in, seed } => {
            let param = parse_sample_param(&c.c, cli.force)?;
            (cli::run_sample(&param, *count, *burn_in, *seed)?, cli::EXIT_OK)
        }
        Command::Boxdim { c, count, burn_in, seed, scales } => {
            let param = parse_sample_param(&c.c, cli.force)?;
            let scales = cli::parse_f64_list(scales)?;
            (
                cli::run_boxdim(&param, *count, *burn_in, *seed, &scales)?,
                cli::EXIT_OK,
            )
        }
        Command::Bounds { c } => {
            let value = cli::parse_complex(&c.c)?;
            // the bounds operation does its own range check
            let param = quasidim::dynamics::Parameter::forced(value);
            (cli::run_bounds(&param)?, cli::EXIT_OK)
        }
    };

    emit(cli, &emission)?;
    Ok(code)
}

fn parse_param(text: &str, force: bool) -> Result<quasidim::dynamics::Parameter, Error> {
    cli::resolve_parameter(cli::parse_complex(text)?, force)
}

/// Sampling is meaningful on the whole |c| <= 2 disc; admit that range
/// without requiring --force.
fn parse_sample_param(text: &str, force: bool) -> Result<quasidim::dynamics::Parameter, Error> {
    let c = cli::parse_complex(text)?;
    if force || c.norm() <= 2.0 {
        Ok(quasidim::dynamics::Parameter::forced(c))
    } else {
        cli::resolve_parameter(c, force)
    }
}

fn warn_parabolic(c: Complex64) {
    if (Complex64::new(1.0, 0.0) - 4.0 * c).norm() < 1e-12 {
        eprintln!("warning: c = 1/4 is parabolic; alpha = 1/2 is not repelling");
    }
}

fn emit(cli: &Cli, emission: &Emission) -> Result<(), Error> {
    let text = emission.render(cli.format);
    match &cli.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Error::InvalidInput(format!("cannot write {path}: {e}"))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Error::InvalidInput(format!("cannot write stdout: {e}")))
        }
    }
}
