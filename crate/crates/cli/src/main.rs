mod commands;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use failure::Failure;

/// Squeezed atoms radiating into a cavity: preparation, rotation, emission,
/// region scans and quasi-probability grids.
#[derive(Debug, Parser)]
#[command(name = "dicke-cavity", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Points per axis of the field Q grid.
    #[arg(long, default_value_t = 201)]
    q_resolution: usize,
    #[arg(long, default_value_t = 181)]
    theta_points: usize,
    #[arg(long, default_value_t = 361)]
    phi_points: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Stage 1: squeeze the atoms with a coherent field.
    Prep {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Also write the sector table and Hamiltonian blocks.
        #[arg(long)]
        dump_operators: bool,
    },
    /// Stage 2: rotate an atomic state.
    Rotate {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Atomic density matrix JSON (as written by `prep`).
        #[arg(long)]
        state: PathBuf,
    },
    /// Stage 3: radiate an atomic state into the vacuum.
    Radiate {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        dump_operators: bool,
    },
    /// All three stages plus quasi-probability grids.
    Pipeline {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[command(flatten)]
        grids: GridArgs,
    },
    /// Achievable (|<a>|, variance) region per atom number.
    ScanRegion {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Q-function of a field (or joint) density matrix.
    Qfunc {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Half-width of the square window; defaults to the cutoff-based extent.
        #[arg(long)]
        extent: Option<f64>,
        #[arg(long, default_value_t = 201)]
        resolution: usize,
        /// Also write a PGM quick-look image.
        #[arg(long)]
        pgm: bool,
    },
    /// Husimi distribution of an atomic density matrix over the Bloch sphere.
    Husimi {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 181)]
        theta_points: usize,
        #[arg(long, default_value_t = 361)]
        phi_points: usize,
        #[arg(long)]
        pgm: bool,
    },
    /// Operator-identity and conservation suites.
    Verify {
        /// Atom numbers (S = N/2).
        #[arg(long = "atoms", num_args = 1.., default_values_t = [1u32])]
        atoms: Vec<u32>,
        #[arg(long = "n-max", num_args = 1.., default_values_t = [4usize])]
        n_max: Vec<usize>,
        #[arg(long = "phi", num_args = 1.., default_values_t = [0.0, std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_2])]
        phi: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Lab-time and thermal-photon feasibility numbers.
    Feasibility {
        #[arg(long)]
        coupling_hz: f64,
        #[arg(long)]
        tau: f64,
        #[arg(long)]
        lifetime_s: f64,
        #[arg(long)]
        cavity_lifetime_s: f64,
        #[arg(long, default_value_t = 21.5e9)]
        frequency_hz: f64,
        #[arg(long, default_value_t = 0.2)]
        temperature_k: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Prep { cfg, dump_operators } => commands::prep(&cfg.config, cfg.out, dump_operators),
        Command::Rotate { cfg, state } => commands::rotate(&cfg.config, cfg.out, &state),
        Command::Radiate {
            cfg,
            state,
            dump_operators,
        } => commands::radiate(&cfg.config, cfg.out, &state, dump_operators),
        Command::Pipeline { cfg, grids } => commands::pipeline(&cfg.config, cfg.out, grids),
        Command::ScanRegion { cfg } => commands::scan_region(&cfg.config, cfg.out),
        Command::Qfunc {
            state,
            out,
            extent,
            resolution,
            pgm,
        } => commands::qfunc(&state, &out, extent, resolution, pgm),
        Command::Husimi {
            state,
            out,
            theta_points,
            phi_points,
            pgm,
        } => commands::husimi(&state, &out, theta_points, phi_points, pgm),
        Command::Verify { atoms, n_max, phi, out } => commands::verify(&atoms, &n_max, &phi, &out),
        Command::Feasibility {
            coupling_hz,
            tau,
            lifetime_s,
            cavity_lifetime_s,
            frequency_hz,
            temperature_k,
            out,
        } => commands::feasibility(
            commands::FeasibilityArgs {
                coupling_hz,
                tau,
                lifetime_s,
                cavity_lifetime_s,
                frequency_hz,
                temperature_k,
            },
            &out,
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.to_json());
            ExitCode::from(f.exit_code())
        }
    }
}
