//! `arnold-chain`: Melnikov data, scattering maps and transition chains for
//! the a priori unstable pendulum-rotor system.
//!
//! Exit status: 0 on success, 1 on domain errors (invalid config, a point
//! outside the domain, a failed chain), 2 on usage errors.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "arnold-chain", version, about = "Scattering maps and transition chains for Arnold diffusion")]
pub struct Cli {
    /// Also write a gnuplot script `<out>.gp` next to CSV outputs.
    #[arg(long, global = true)]
    pub gnuplot: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct ConfigArg {
    /// System configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
}

/// `nφ×ns`, also accepted as `nφxns`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid(pub usize, pub usize);

fn parse_grid(s: &str) -> Result<Grid, String> {
    let (a, b) = s
        .split_once(['x', 'X', '×'])
        .ok_or_else(|| format!("expected NPHIxNS, got `{s}`"))?;
    let n = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}"));
    let g = Grid(n(a)?, n(b)?);
    if g.0 == 0 || g.1 == 0 {
        return Err("grid sizes must be positive".into());
    }
    Ok(g)
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the hypotheses on a configuration and list every violation.
    Validate(ConfigArg),
    /// Melnikov potential L(I, φ, s) on a uniform grid.
    Melnikov {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(long = "I", allow_hyphen_values = true)]
        action: f64,
        #[arg(long, value_parser = parse_grid, default_value = "256x256")]
        grid: Grid,
        /// Keep only the harmonics with k + l ≤ 1.
        #[arg(long)]
        first_order: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Crest curves ξ_M, ξ_m at one action.
    Crests {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(long = "I", allow_hyphen_values = true)]
        action: f64,
        #[arg(long, default_value_t = 512)]
        samples: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Homoclinic selection τ*(I, φ, s).
    Tau {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(long = "I", allow_hyphen_values = true)]
        action: f64,
        #[arg(long, allow_hyphen_values = true)]
        phi: f64,
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
    },
    /// Reduced Poincaré function L*(I, ·) and its partials.
    Rpf {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(long = "I", allow_hyphen_values = true)]
        action: f64,
        #[arg(long, default_value_t = 512)]
        samples: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Orbit of the first-order scattering map in (I, θ̃).
    Scatter {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(long = "I", allow_hyphen_values = true)]
        action: f64,
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 1)]
        iters: usize,
        /// Write the orbit here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tori of the pendulum normal form at a resonance and their images.
    Tori {
        #[command(flatten)]
        cfg: ConfigArg,
        /// Resonance `k0 l0`, centred at I = l0/k0.
        #[arg(long, num_args = 2, value_names = ["K0", "L0"])]
        res: Vec<u32>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        levels: Vec<f64>,
        #[arg(long, default_value_t = 256)]
        samples: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Poisson bracket {F*, L*} at one point.
    Bracket {
        #[command(flatten)]
        cfg: ConfigArg,
        /// Resonance `k0 l0`; flat tori when omitted.
        #[arg(long, num_args = 2, value_names = ["K0", "L0"])]
        res: Option<Vec<u32>>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long = "I", allow_hyphen_values = true)]
        action: f64,
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
    },
    /// Transition chain of tori between two actions.
    Chain {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, allow_hyphen_values = true)]
        to: f64,
        #[arg(long)]
        out: PathBuf,
        /// Also write the pseudo-orbit as CSV.
        #[arg(long)]
        pseudo_orbit: Option<PathBuf>,
        /// Points per inner-flow segment of the pseudo-orbit.
        #[arg(long, default_value_t = 16)]
        samples: usize,
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
    },
    /// Measured against predicted scattering jump, with an ε² fit.
    Verify {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long = "I", allow_hyphen_values = true)]
        action: f64,
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn configure_threads() {
    if let Some(n) = std::env::var("ARNOLD_CHAIN_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("ARNOLD_CHAIN_THREADS ignored: {e}");
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    configure_threads();
    match commands::run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
