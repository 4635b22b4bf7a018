use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use udw_witness::witness::StateFamily;

#[derive(Debug, Parser)]
#[command(
    name = "udw-witness",
    version,
    about = "Nonclassicality witness for a detector moving through a cavity"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the witness on a proper-time grid and write it as CSV.
    Witness(WitnessArgs),
    /// Time-averaged |W| of inertial detectors over a velocity range.
    ScanVelocity(VelocityArgs),
    /// Late-time |W| of accelerated detectors over an acceleration range.
    ScanAcceleration(AccelerationArgs),
    /// Late-time |W| of cat states over a range of amplitudes.
    ScanAlpha(AlphaArgs),
    /// Check the closed forms against a truncated Fock-space simulation.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrajArg {
    Static,
    Inertial(f64),
    Accel(f64),
}

fn number(s: &str) -> Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| format!("`{s}` is not a number"))
}

pub fn parse_state(s: &str) -> Result<StateFamily<f64>, String> {
    let (kind, value) = s.split_once(':').unwrap_or((s, ""));
    match kind {
        "fock" => value
            .parse::<u32>()
            .map(StateFamily::Fock)
            .map_err(|_| format!("fock needs a photon number, got `{value}`")),
        "cat" => number(value).map(StateFamily::Cat),
        "thermal" => number(value).map(StateFamily::Thermal),
        "coherent" => {
            let (re, im) = value
                .split_once(',')
                .ok_or_else(|| format!("coherent needs RE,IM, got `{value}`"))?;
            Ok(StateFamily::Coherent(Complex64::new(
                number(re)?,
                number(im)?,
            )))
        }
        _ => Err(format!(
            "unknown state `{s}`; expected fock:N, cat:A0, coherent:RE,IM or thermal:NBAR"
        )),
    }
}

pub fn parse_traj(s: &str) -> Result<TrajArg, String> {
    match s.split_once(':') {
        None if s == "static" => Ok(TrajArg::Static),
        Some(("inertial", v)) => number(v).map(TrajArg::Inertial),
        Some(("accel", a)) => number(a).map(TrajArg::Accel),
        _ => Err(format!(
            "unknown trajectory `{s}`; expected static, inertial:V or accel:A"
        )),
    }
}

/// Cavity, coupling and numerics shared by every physics subcommand.
#[derive(Debug, Clone, Args)]
pub struct Physics {
    /// Probed mode index.
    #[arg(long, default_value_t = 5000)]
    pub k0: u32,
    /// Cavity length.
    #[arg(long = "L", default_value_t = 10000.0)]
    pub length: f64,
    /// Field mass.
    #[arg(long, default_value_t = 1.0)]
    pub m: f64,
    /// Detector start position [default: L/(2 k0)].
    #[arg(long)]
    pub x0: Option<f64>,
    /// Coupling strength [default: 2 sqrt(k0)].
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Absolute quadrature tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Route every response through adaptive quadrature.
    #[arg(long)]
    pub force_quadrature: bool,
    /// Worker threads [default: all cores].
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output file [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct WitnessArgs {
    #[arg(long, default_value = "fock:1", value_parser = parse_state)]
    pub state: StateFamily<f64>,
    #[arg(long, default_value = "static", value_parser = parse_traj)]
    pub traj: TrajArg,
    #[command(flatten)]
    pub physics: Physics,
    #[arg(long, default_value_t = 500.0)]
    pub tau_max: f64,
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    /// Use this frequency for the probed mode and treat --lambda as the
    /// full coupling (static detector only).
    #[arg(long)]
    pub omega_override: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct Range {
    #[arg(long)]
    pub from: f64,
    #[arg(long)]
    pub to: f64,
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
}

#[derive(Debug, Clone, Args)]
pub struct VelocityArgs {
    #[arg(long, default_value = "fock:1", value_parser = parse_state)]
    pub state: StateFamily<f64>,
    #[command(flatten)]
    pub physics: Physics,
    #[command(flatten)]
    pub range: Range,
    #[arg(long, default_value_t = 500.0)]
    pub tau_max: f64,
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    /// Averaging window start.
    #[arg(long, default_value_t = 0.0)]
    pub t1: f64,
    /// Averaging window end.
    #[arg(long, default_value_t = 500.0)]
    pub t2: f64,
}

#[derive(Debug, Clone, Args)]
pub struct AccelerationArgs {
    #[arg(long, default_value = "fock:1", value_parser = parse_state)]
    pub state: StateFamily<f64>,
    #[command(flatten)]
    pub physics: Physics,
    #[command(flatten)]
    pub range: Range,
    /// Proper time at which the asymptote is read off.
    #[arg(long, default_value_t = 500.0)]
    pub eval_at: f64,
}

#[derive(Debug, Clone, Args)]
pub struct AlphaArgs {
    #[arg(long, default_value = "accel:0.8", value_parser = parse_traj)]
    pub traj: TrajArg,
    #[command(flatten)]
    pub physics: Physics,
    #[command(flatten)]
    pub range: Range,
    #[arg(long, default_value_t = 500.0)]
    pub eval_at: f64,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    /// Restrict the end-to-end checks to one state family.
    #[arg(long, value_parser = parse_state)]
    pub state: Option<StateFamily<f64>>,
    /// Fock basis size per mode.
    #[arg(long, default_value_t = 40)]
    pub cutoff: usize,
    /// Number of simulated cavity modes.
    #[arg(long, default_value_t = 16)]
    pub kmax: u32,
    /// Skip the Trotter propagator check.
    #[arg(long)]
    pub no_trotter: bool,
}
