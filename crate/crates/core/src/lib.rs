//! Nonclassicality witness for cavity field states probed by a moving
//! Unruh-DeWitt detector.
//!
//! A gapless two-level detector couples to a 1-D scalar field in a cavity
//! with Dirichlet walls. Its coherence decays by a known factor in every mode
//! and picks up a state-dependent factor in the probed mode `k0`; undoing the
//! known part gives the witness `W(τ)`, and `|W| > 1` certifies that the
//! field state in `k0` has no classical P-representation.
//!
//! The physics is generic over [`Real`] (`f32` or `f64`); the `*64` and `*32`
//! aliases below fix the precision. The truncated Fock-space [`oracle`] is
//! `f64` only.
//!
//! ```
//! use udw_witness::{CavityConfig64, CouplingSpec64, StateSpec64, TrajectorySpec64};
//! use udw_witness::witness::{uniform_grid, witness_series, SeriesOptions, StateFamily};
//!
//! let cavity = CavityConfig64::at_antinode(10_000.0, 1.0, 5000)?;
//! let state = StateSpec64::new(StateFamily::Fock(1), 5000)?;
//! let coupling = CouplingSpec64::new(2.0 * 5000f64.sqrt())?;
//! let traj = TrajectorySpec64::inertial(0.7, cavity.x0, cavity.length)?;
//! let taus = uniform_grid(50.0, 200)?;
//! let series = witness_series(&state, &cavity, &coupling, &traj, &taus, &SeriesOptions::default())?;
//! assert_eq!(series.len(), 200);
//! # Ok::<(), udw_witness::Error>(())
//! ```

pub mod error;
pub mod field;
pub mod oracle;
mod quadrature;
pub mod response;
pub mod scalar;
pub mod scan;
pub mod trajectory;
pub mod witness;

pub use error::{Error, Result};
pub use scalar::Real;

pub type ModeSpec64 = field::ModeSpec<f64>;
pub type ModeSpec32 = field::ModeSpec<f32>;
pub type CavityConfig64 = field::CavityConfig<f64>;
pub type CavityConfig32 = field::CavityConfig<f32>;
pub type TrajectorySpec64 = trajectory::TrajectorySpec<f64>;
pub type TrajectorySpec32 = trajectory::TrajectorySpec<f32>;
pub type CouplingSpec64 = response::CouplingSpec<f64>;
pub type CouplingSpec32 = response::CouplingSpec<f32>;
pub type ChiValue64 = response::ChiValue<f64>;
pub type ChiValue32 = response::ChiValue<f32>;
pub type StateSpec64 = witness::StateSpec<f64>;
pub type StateSpec32 = witness::StateSpec<f32>;
pub type WitnessSeries64 = witness::WitnessSeries<f64>;
pub type WitnessSeries32 = witness::WitnessSeries<f32>;
