//! Witness function of the probed mode.
//!
//! For a state with Glauber–Sudarshan function `P(α)` in mode `k0` the
//! witness is `W(τ) = ∫ P(α) e^{4i Im(α* χ(τ))} d²α`, the normal-ordered
//! characteristic function at `2χ`. Any state with a positive `P` satisfies
//! `|W| ≤ 1`. Closed forms for the supported state families live here,
//! together with extraction of `W` from the detector coherence and the
//! diagnostics built on sampled series.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{CavityConfig, ModeSpec};
use crate::response::{self, ChiBranch, ChiMethod, ChiValue, CouplingSpec, QuadratureOptions};
use crate::scalar::Real;
use crate::trajectory::{TrajectoryKind, TrajectorySpec};

/// Slack above the classicality bound before a sample counts as a violation.
pub const BOUND_TOLERANCE: f64 = 1e-9;

/// Default number of samples on a proper-time grid.
pub const DEFAULT_SAMPLES: usize = 2000;

/// Laguerre polynomial `L_n(x)` by the three-term recurrence.
pub fn laguerre<T: Real>(n: u32, x: T) -> T {
    let mut prev = T::one();
    if n == 0 {
        return prev;
    }
    let mut cur = T::one() - x;
    for k in 1..n {
        let kf = T::from_u32(k).unwrap();
        let next = ((T::lit(2.0) * kf + T::one() - x) * cur - kf * prev) / (kf + T::one());
        prev = cur;
        cur = next;
    }
    cur
}

/// `W = L_N(4|χ|²)` for the Fock state `|N⟩`.
pub fn witness_fock<T: Real>(n: u32, chi: &ChiValue<T>) -> Result<T> {
    if n == 0 {
        return Err(Error::invalid("N", "Fock witness needs N >= 1"));
    }
    Ok(laguerre(n, T::lit(4.0) * chi.norm_sqr()))
}

/// Witness of the even cat state `(|α0⟩ + |−α0⟩)/norm` with real `α0 > 0`.
pub fn witness_cat<T: Real>(alpha0: T, chi: &ChiValue<T>) -> Result<T> {
    if !(alpha0 > T::zero()) || !alpha0.is_finite() {
        return Err(Error::invalid(
            "alpha0",
            format!("cat amplitude must be > 0, got {alpha0}"),
        ));
    }
    let four = T::lit(4.0);
    let overlap = (-T::lit(2.0) * alpha0 * alpha0).exp();
    let diag = (four * alpha0 * chi.value.im).cos();
    let interference = overlap * (four * alpha0 * chi.value.re).cosh();
    let w = (diag + interference) / (T::one() + overlap);
    if !w.is_finite() {
        return Err(Error::numerical("witness_cat", "cosh overflow"));
    }
    Ok(w)
}

/// `W = e^{4i Im(α0* χ)}` for a coherent state; always of unit modulus.
pub fn witness_coherent<T: Real>(alpha0: Complex<T>, chi: &ChiValue<T>) -> Complex<T> {
    let phase = T::lit(4.0) * (alpha0.conj() * chi.value).im;
    Complex::new(phase.cos(), phase.sin())
}

/// `W = exp(−4 n̄ |χ|²)` for a thermal state of mean occupation `n̄`.
pub fn witness_thermal<T: Real>(nbar: T, chi: &ChiValue<T>) -> Result<T> {
    if !(nbar >= T::zero()) || !nbar.is_finite() {
        return Err(Error::invalid(
            "nbar",
            format!("mean occupation must be >= 0, got {nbar}"),
        ));
    }
    Ok((-T::lit(4.0) * nbar * chi.norm_sqr()).exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateFamily<T> {
    Fock(u32),
    Cat(T),
    Coherent(Complex<T>),
    Thermal(T),
}

/// Field state: `family` in mode `k0`, vacuum in every other mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateSpec<T> {
    pub family: StateFamily<T>,
    pub k0: u32,
}

impl<T: Real> StateSpec<T> {
    pub fn new(family: StateFamily<T>, k0: u32) -> Result<Self> {
        if k0 == 0 {
            return Err(Error::invalid("k0", "mode index must be >= 1"));
        }
        match family {
            StateFamily::Fock(_) => {}
            StateFamily::Cat(a) => {
                if !(a > T::zero()) || !a.is_finite() {
                    return Err(Error::invalid(
                        "alpha0",
                        format!("cat amplitude must be > 0, got {a}"),
                    ));
                }
            }
            StateFamily::Coherent(a) => {
                if !(a.re.is_finite() && a.im.is_finite()) {
                    return Err(Error::invalid(
                        "alpha0",
                        "coherent amplitude must be finite",
                    ));
                }
            }
            StateFamily::Thermal(n) => {
                if !(n >= T::zero()) || !n.is_finite() {
                    return Err(Error::invalid(
                        "nbar",
                        format!("mean occupation must be >= 0, got {n}"),
                    ));
                }
            }
        }
        Ok(Self { family, k0 })
    }

    /// Whether the state has a non-negative P-function, so `|W| ≤ 1` must hold.
    pub fn is_classical(&self) -> bool {
        matches!(
            self.family,
            StateFamily::Coherent(_) | StateFamily::Thermal(_) | StateFamily::Fock(0)
        )
    }

    /// Witness value for the given response of mode `k0`.
    pub fn witness(&self, chi: &ChiValue<T>) -> Result<Complex<T>> {
        let real = |w: T| Complex::new(w, T::zero());
        match self.family {
            StateFamily::Fock(0) => Ok(real(T::one())),
            StateFamily::Fock(n) => witness_fock(n, chi).map(real),
            StateFamily::Cat(a) => witness_cat(a, chi).map(real),
            StateFamily::Coherent(a) => Ok(witness_coherent(a, chi)),
            StateFamily::Thermal(n) => witness_thermal(n, chi).map(real),
        }
    }
}

/// Initial detector state in the `σ_x` eigenbasis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorState<T> {
    pub w0: Complex<T>,
    pub p0: T,
}

impl<T: Real> DetectorState<T> {
    pub fn new(w0: Complex<T>, p0: T) -> Result<Self> {
        if !(p0 >= T::zero() && p0 <= T::one()) {
            return Err(Error::invalid(
                "p0",
                format!("population must lie in [0, 1], got {p0}"),
            ));
        }
        let bound = (p0 * (T::one() - p0)).sqrt();
        if !(w0.norm() <= bound * (T::one() + T::epsilon())) {
            return Err(Error::invalid(
                "w0",
                format!(
                    "coherence |w0| = {} exceeds sqrt(p0(1-p0)) = {bound}",
                    w0.norm()
                ),
            ));
        }
        if w0.norm() == T::zero() {
            return Err(Error::invalid(
                "w0",
                "zero initial coherence carries no witness signal",
            ));
        }
        Ok(Self { w0, p0 })
    }

    /// Maximal coherence `|+⟩⟨+|`-type start: `p0 = 1/2`, `w0 = 1/2`.
    pub fn maximally_coherent() -> Self {
        let half = T::lit(0.5);
        Self {
            w0: Complex::new(half, T::zero()),
            p0: half,
        }
    }

    /// `w(τ)/w(0)` for a measured coherence.
    pub fn ratio(&self, w: Complex<T>) -> Complex<T> {
        w / self.w0
    }
}

/// Recovers `W = (w(τ)/w(0))·e^{2Σ_k|χ_k|²}` from the detector coherence.
pub fn extract_witness<T: Real>(w_ratio: Complex<T>, chi_sum: T) -> Result<Complex<T>> {
    if !(w_ratio.re.is_finite() && w_ratio.im.is_finite()) {
        return Err(Error::invalid("w_ratio", "coherence ratio must be finite"));
    }
    if !(chi_sum >= T::zero()) {
        return Err(Error::invalid(
            "chi_sum",
            format!("mode sum must be >= 0, got {chi_sum}"),
        ));
    }
    let factor = (T::lit(2.0) * chi_sum).exp();
    if !factor.is_finite() {
        return Err(Error::numerical(
            "extract_witness",
            format!("decoherence factor e^(2·{chi_sum}) overflows"),
        ));
    }
    Ok(w_ratio * factor)
}

/// Uniform grid of `samples` proper times on `[0, tau_max]`.
pub fn uniform_grid<T: Real>(tau_max: T, samples: usize) -> Result<Vec<T>> {
    if samples == 0 {
        return Err(Error::invalid(
            "samples",
            "grid must contain at least one sample",
        ));
    }
    if !(tau_max > T::zero()) || !tau_max.is_finite() {
        return Err(Error::invalid(
            "tau_max",
            format!("must be finite and > 0, got {tau_max}"),
        ));
    }
    if samples == 1 {
        return Ok(vec![tau_max]);
    }
    let n = T::from_count(samples - 1);
    Ok((0..samples)
        .map(|i| tau_max * T::from_count(i) / n)
        .collect())
}

/// A sample whose response could not be computed.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleFailure {
    pub index: usize,
    pub tau: f64,
    pub branch: ChiBranch,
    pub error: Error,
}

/// Witness sampled on a proper-time grid. Failed samples carry NaN values
/// and never count as violations.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessSeries<T> {
    pub taus: Vec<T>,
    pub chi: Vec<Option<ChiValue<T>>>,
    pub w_complex: Vec<Complex<T>>,
    pub w_abs: Vec<T>,
    pub violates: Vec<bool>,
    pub failures: Vec<SampleFailure>,
}

impl<T: Real> WitnessSeries<T> {
    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }
}

/// How responses are evaluated along a series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOptions<T> {
    pub method: ChiMethod,
    pub quadrature: QuadratureOptions<T>,
}

impl<T: Real> Default for SeriesOptions<T> {
    fn default() -> Self {
        Self {
            method: ChiMethod::Auto,
            quadrature: QuadratureOptions::default(),
        }
    }
}

fn expected_branch<T: Real>(traj: &TrajectorySpec<T>, method: ChiMethod) -> ChiBranch {
    match (method, traj.kind()) {
        (ChiMethod::Auto, TrajectoryKind::Static) => ChiBranch::StaticClosedForm,
        (ChiMethod::Auto, TrajectoryKind::Inertial { .. }) => ChiBranch::InertialClosedForm,
        _ => ChiBranch::Quadrature,
    }
}

fn check_grid<T: Real>(taus: &[T]) -> Result<()> {
    if taus.is_empty() {
        return Err(Error::invalid("tau_grid", "grid is empty"));
    }
    if !(taus[0] >= T::zero()) || taus.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid(
            "tau_grid",
            "proper times must be finite and >= 0",
        ));
    }
    if taus.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid(
            "tau_grid",
            "proper times must be strictly increasing",
        ));
    }
    Ok(())
}

/// Witness series for the probed mode of `cavity`.
pub fn witness_series<T: Real>(
    state: &StateSpec<T>,
    cavity: &CavityConfig<T>,
    coupling: &CouplingSpec<T>,
    traj: &TrajectorySpec<T>,
    taus: &[T],
    opts: &SeriesOptions<T>,
) -> Result<WitnessSeries<T>> {
    if state.k0 != cavity.k0 {
        return Err(Error::invalid(
            "k0",
            format!(
                "state occupies mode {} but the cavity probes mode {}",
                state.k0, cavity.k0
            ),
        ));
    }
    witness_series_for_mode(state, &cavity.probed_mode(), coupling, traj, taus, opts)
}

/// Witness series for an explicitly given probed mode (e.g. one with a
/// prescribed frequency).
pub fn witness_series_for_mode<T: Real>(
    state: &StateSpec<T>,
    mode: &ModeSpec<T>,
    coupling: &CouplingSpec<T>,
    traj: &TrajectorySpec<T>,
    taus: &[T],
    opts: &SeriesOptions<T>,
) -> Result<WitnessSeries<T>> {
    check_grid(taus)?;
    let branch = expected_branch(traj, opts.method);
    let wall = traj.wall_time();
    // the response is frozen from the wall time on; evaluate it once
    let frozen = match wall {
        Some(tw) if taus.last().is_some_and(|&t| t >= tw) => Some(response::chi(
            mode,
            coupling,
            traj,
            tw,
            opts.method,
            &opts.quadrature,
        )),
        _ => None,
    };
    let eval = |tau: T| -> Result<(ChiValue<T>, Complex<T>)> {
        let chi = match (&frozen, wall) {
            (Some(f), Some(tw)) if tau >= tw => f.clone()?,
            _ => response::chi(mode, coupling, traj, tau, opts.method, &opts.quadrature)?,
        };
        let w = state.witness(&chi)?;
        Ok((chi, w))
    };
    let results: Vec<Result<(ChiValue<T>, Complex<T>)>> =
        taus.par_iter().map(|&t| eval(t)).collect();

    let bound = T::one() + T::lit(BOUND_TOLERANCE);
    let nan = Complex::new(T::nan(), T::nan());
    let mut series = WitnessSeries {
        taus: taus.to_vec(),
        chi: Vec::with_capacity(taus.len()),
        w_complex: Vec::with_capacity(taus.len()),
        w_abs: Vec::with_capacity(taus.len()),
        violates: Vec::with_capacity(taus.len()),
        failures: Vec::new(),
    };
    for (index, r) in results.into_iter().enumerate() {
        match r {
            Ok((chi, w)) => {
                let a = w.norm();
                series.chi.push(Some(chi));
                series.w_complex.push(w);
                series.w_abs.push(a);
                series.violates.push(a > bound);
            }
            Err(error) => {
                series.chi.push(None);
                series.w_complex.push(nan);
                series.w_abs.push(T::nan());
                series.violates.push(false);
                series.failures.push(SampleFailure {
                    index,
                    tau: taus[index].to_f64_lossy(),
                    branch,
                    error,
                });
            }
        }
    }
    Ok(series)
}

fn interpolate<T: Real>(taus: &[T], ys: &[T], t: T) -> T {
    let i = taus.partition_point(|&x| x <= t);
    if i == 0 {
        return ys[0];
    }
    if i >= taus.len() {
        return ys[taus.len() - 1];
    }
    let (t0, t1) = (taus[i - 1], taus[i]);
    let s = (t - t0) / (t1 - t0);
    ys[i - 1] + (ys[i] - ys[i - 1]) * s
}

/// Trapezoidal mean of `|W|` over `[t1, t2]`, interpolating linearly at the
/// window edges.
pub fn time_averaged_witness<T: Real>(series: &WitnessSeries<T>, t1: T, t2: T) -> Result<T> {
    let taus = &series.taus;
    if taus.is_empty() {
        return Err(Error::invalid("series", "empty series"));
    }
    if !(t1 < t2) {
        return Err(Error::invalid(
            "t1",
            format!("window needs t1 < t2, got [{t1}, {t2}]"),
        ));
    }
    let (lo, hi) = (taus[0], taus[taus.len() - 1]);
    if t1 < lo || t2 > hi {
        return Err(Error::invalid(
            "t2",
            format!("window [{t1}, {t2}] outside sampled span [{lo}, {hi}]"),
        ));
    }
    let ys = &series.w_abs;
    let mut pts: Vec<(T, T)> = vec![(t1, interpolate(taus, ys, t1))];
    for (&t, &y) in taus.iter().zip(ys) {
        if t > t1 && t < t2 {
            pts.push((t, y));
        }
    }
    pts.push((t2, interpolate(taus, ys, t2)));
    let area = pts.windows(2).fold(T::zero(), |s, w| {
        s + (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / T::lit(2.0)
    });
    let mean = area / (t2 - t1);
    if !mean.is_finite() {
        return Err(Error::numerical(
            "time_averaged_witness",
            "window contains failed samples",
        ));
    }
    Ok(mean)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViolationMetrics<T> {
    pub first_violation_tau: Option<T>,
    pub max_abs_w: T,
    pub argmax_tau: T,
}

/// First bound violation and the maximum of `|W|` over valid samples.
pub fn violation_metrics<T: Real>(series: &WitnessSeries<T>) -> Result<ViolationMetrics<T>> {
    if series.is_empty() {
        return Err(Error::invalid("series", "empty series"));
    }
    let first_violation_tau = series
        .violates
        .iter()
        .position(|&v| v)
        .map(|i| series.taus[i]);
    let mut best: Option<(T, T)> = None;
    for (&t, &a) in series.taus.iter().zip(&series.w_abs) {
        if a.is_nan() {
            continue;
        }
        if best.is_none_or(|(_, b)| a > b) {
            best = Some((t, a));
        }
    }
    let (argmax_tau, max_abs_w) = best.unwrap_or((T::nan(), T::nan()));
    Ok(ViolationMetrics {
        first_violation_tau,
        max_abs_w,
        argmax_tau,
    })
}

/// Late-time `|W|` for a wall-stopped trajectory, evaluated at `t_eval`.
///
/// Past the wall time the response is frozen, so the value does not depend
/// on `t_eval` as long as the wall has been reached.
pub fn asymptote_value<T: Real>(
    state: &StateSpec<T>,
    cavity: &CavityConfig<T>,
    coupling: &CouplingSpec<T>,
    traj: &TrajectorySpec<T>,
    t_eval: T,
    opts: &SeriesOptions<T>,
) -> Result<T> {
    let tw = traj
        .wall_time()
        .ok_or_else(|| Error::invalid("trajectory", "a static detector never reaches the wall"))?;
    if !(t_eval >= tw) {
        return Err(Error::invalid(
            "eval_at",
            format!("evaluation time {t_eval} precedes the wall time; need T >= {tw}"),
        ));
    }
    if state.k0 != cavity.k0 {
        return Err(Error::invalid(
            "k0",
            "state and cavity probe different modes",
        ));
    }
    let chi = response::chi(
        &cavity.probed_mode(),
        coupling,
        traj,
        t_eval,
        opts.method,
        &opts.quadrature,
    )?;
    Ok(state.witness(&chi)?.norm())
}
