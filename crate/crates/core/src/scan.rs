//! Parameter sweeps over velocity, acceleration and cat amplitude.
//!
//! Each point is evaluated independently; a failing point yields NaN and a
//! warning instead of aborting the sweep. Results come back sorted by the
//! swept parameter regardless of how many worker threads ran.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::CavityConfig;
use crate::response::CouplingSpec;
use crate::scalar::Real;
use crate::trajectory::TrajectorySpec;
use crate::witness::{
    asymptote_value, time_averaged_witness, uniform_grid, witness_series, SeriesOptions,
    StateFamily, StateSpec,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint<T> {
    pub param: T,
    pub metric: T,
    pub warning: Option<String>,
}

/// `steps` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace<T: Real>(lo: T, hi: T, steps: usize) -> Result<Vec<T>> {
    if steps == 0 {
        return Err(Error::invalid("steps", "scan needs at least one point"));
    }
    if !lo.is_finite() || !hi.is_finite() || hi < lo {
        return Err(Error::invalid(
            "range",
            format!("need finite lo <= hi, got [{lo}, {hi}]"),
        ));
    }
    if steps == 1 {
        return Ok(vec![lo]);
    }
    let n = T::from_count(steps - 1);
    Ok((0..steps)
        .map(|i| lo + (hi - lo) * T::from_count(i) / n)
        .collect())
}

/// Evaluates `metric` at every parameter on at most `jobs` threads
/// (`None`: rayon's default pool).
pub fn run_scan<T, F>(params: &[T], jobs: Option<usize>, metric: F) -> Result<Vec<ScanPoint<T>>>
where
    T: Real,
    F: Fn(T) -> Result<T> + Sync,
{
    let eval = || -> Vec<ScanPoint<T>> {
        params
            .par_iter()
            .map(|&p| match metric(p) {
                Ok(m) => ScanPoint {
                    param: p,
                    metric: m,
                    warning: None,
                },
                Err(e) => ScanPoint {
                    param: p,
                    metric: T::nan(),
                    warning: Some(format!("scan point {p}: {e}")),
                },
            })
            .collect()
    };
    let mut points = match jobs {
        None => eval(),
        Some(0) => return Err(Error::invalid("jobs", "need at least one worker")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::invalid("jobs", e.to_string()))?
            .install(eval),
    };
    points.sort_by(|a, b| {
        a.param
            .partial_cmp(&b.param)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(points)
}

/// Window and grid for time-averaged sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AveragingWindow<T> {
    pub tau_max: T,
    pub samples: usize,
    pub t1: T,
    pub t2: T,
}

/// Time-averaged `|W|` for inertial detectors at each velocity.
pub fn scan_velocity<T: Real>(
    state: &StateSpec<T>,
    cavity: &CavityConfig<T>,
    coupling: &CouplingSpec<T>,
    velocities: &[T],
    window: &AveragingWindow<T>,
    opts: &SeriesOptions<T>,
    jobs: Option<usize>,
) -> Result<Vec<ScanPoint<T>>> {
    let taus = uniform_grid(window.tau_max, window.samples)?;
    run_scan(velocities, jobs, |v| {
        let traj = TrajectorySpec::inertial(v, cavity.x0, cavity.length)?;
        let series = witness_series(state, cavity, coupling, &traj, &taus, opts)?;
        time_averaged_witness(&series, window.t1, window.t2)
    })
}

/// Asymptotic `|W|` at `eval_at` for accelerated detectors at each acceleration.
pub fn scan_acceleration<T: Real>(
    state: &StateSpec<T>,
    cavity: &CavityConfig<T>,
    coupling: &CouplingSpec<T>,
    accelerations: &[T],
    eval_at: T,
    opts: &SeriesOptions<T>,
    jobs: Option<usize>,
) -> Result<Vec<ScanPoint<T>>> {
    run_scan(accelerations, jobs, |a| {
        let traj = TrajectorySpec::accelerated(a, cavity.x0, cavity.length)?;
        asymptote_value(state, cavity, coupling, &traj, eval_at, opts)
    })
}

/// Asymptotic `|W|` of cat states at each amplitude `α₀` on a fixed
/// wall-stopped trajectory.
pub fn scan_alpha<T: Real>(
    cavity: &CavityConfig<T>,
    coupling: &CouplingSpec<T>,
    traj: &TrajectorySpec<T>,
    alphas: &[T],
    eval_at: T,
    opts: &SeriesOptions<T>,
    jobs: Option<usize>,
) -> Result<Vec<ScanPoint<T>>> {
    run_scan(alphas, jobs, |a0| {
        let state = StateSpec::new(StateFamily::Cat(a0), cavity.k0)?;
        asymptote_value(&state, cavity, coupling, traj, eval_at, opts)
    })
}
