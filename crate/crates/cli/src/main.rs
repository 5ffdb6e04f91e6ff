//! `hfgap`: tables and constants for the Hartree-Fock gap of the half-filled
//! square-lattice Hubbard model.

mod commands;
mod output;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hubbard_gap::{Error, QuadratureConfig};

use output::Format;

const EXIT_INPUT: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "hfgap", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Relative tolerance of every adaptive integral.
    #[arg(long, global = true, default_value_t = 1e-10)]
    rel_tol: f64,

    /// Absolute tolerance of every adaptive integral.
    #[arg(long, global = true, default_value_t = 1e-13)]
    abs_tol: f64,

    /// Maximum bisection depth of an adaptive integral.
    #[arg(long, global = true, default_value_t = 50)]
    max_depth: u32,

    /// Sample count of the Monte Carlo oracle.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    mc_samples: usize,

    /// Seed of the Monte Carlo oracle.
    #[arg(long, global = true, default_value_t = QuadratureConfig::default().seed)]
    seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the gap equation at one coupling.
    Solve {
        #[arg(long, allow_negative_numbers = true)]
        u: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        t: f64,
        /// Also evaluate the right-hand side as a Brillouin-zone average
        /// (quadrature and Monte Carlo) at the solution.
        #[arg(long)]
        oracle: bool,
    },
    /// Numerical gap against the weak-coupling formula on a grid of couplings (t = 1).
    Sweep {
        #[arg(long, allow_negative_numbers = true)]
        u_min: f64,
        #[arg(long, allow_negative_numbers = true)]
        u_max: f64,
        #[arg(long)]
        points: usize,
        /// Space the grid logarithmically.
        #[arg(long)]
        log: bool,
    },
    /// Density of states against its small-energy expansion.
    Dos {
        #[arg(long, default_value_t = 41)]
        points: usize,
        #[arg(long, default_value_t = 1e-3, allow_negative_numbers = true)]
        eps_min: f64,
        #[arg(long, default_value_t = 4.0, allow_negative_numbers = true)]
        eps_max: f64,
        /// Space the grid logarithmically.
        #[arg(long)]
        log: bool,
    },
    /// a0, b1, a1, the sech integral and the gap-ratio constants.
    Constants,
    /// Mellin moments J1, J2 and their Laurent fits.
    Regularize {
        /// Comma-separated values of s.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true,
              default_values_t = hubbard_gap::renorm::DEFAULT_S_GRID.to_vec())]
        s: Vec<f64>,
    },
    /// Gap to Neel temperature ratio.
    Ratio {
        /// Comma-separated couplings.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true,
              default_values_t = vec![0.1, 0.04, 0.01])]
        u: Vec<f64>,
        /// Override a1 (computed from the sech integral by default).
        #[arg(long, allow_negative_numbers = true)]
        a1: Option<f64>,
        /// Override b1 (computed from a0 by default).
        #[arg(long, allow_negative_numbers = true)]
        b1: Option<f64>,
    },
}

fn exit_code(e: &Error) -> u8 {
    if e.is_input_error() {
        EXIT_INPUT
    } else {
        EXIT_NUMERICAL
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = QuadratureConfig {
        rel_tol: cli.rel_tol,
        abs_tol: cli.abs_tol,
        max_depth: cli.max_depth,
        mc_samples: cli.mc_samples,
        seed: cli.seed,
    };
    let result = cfg.validate().and_then(|()| match &cli.command {
        Command::Solve { u, t, oracle } => commands::solve(*u, *t, *oracle, &cfg),
        Command::Sweep {
            u_min,
            u_max,
            points,
            log,
        } => commands::sweep(*u_min, *u_max, *points, *log, &cfg),
        Command::Dos {
            points,
            eps_min,
            eps_max,
            log,
        } => commands::dos(*points, *eps_min, *eps_max, *log, &cfg),
        Command::Constants => commands::constants(&cfg),
        Command::Regularize { s } => commands::regularize(s, &cfg),
        Command::Ratio { u, a1, b1 } => commands::ratio(u, *a1, *b1, &cfg),
    });

    let out = match result {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };

    let written = match &cli.output {
        Some(path) => File::create(path).and_then(|f| {
            let mut w = BufWriter::new(f);
            output::render(&out, cli.format, &mut w)?;
            w.flush()
        }),
        None => {
            let stdout = std::io::stdout();
            output::render(&out, cli.format, stdout.lock())
        }
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
