//! Detector response amplitude
//!
//! ```text
//! χ_k(τ) = −iλ ∫₀^τ F_k(x(τ′)) e^{iω_k τ′} dτ′
//! ```
//!
//! evaluated in closed form for static and inertial detectors and by
//! oscillation-aware adaptive quadrature otherwise. Also hosts the mode sum
//! `Σ_k |χ_k|²` that sets the decoherence factor, the critical velocity of
//! the inertial resonance, and the forced-oscillator phase `β` used by the
//! oracle.

use std::cell::Cell;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::{CavityConfig, ModeSpec};
use crate::quadrature::{self, Quadrature};
use crate::scalar::Real;
use crate::trajectory::{TrajectoryKind, TrajectorySpec};

/// Half-width of the resonance band, relative to `ω_k`, inside which the
/// inertial closed form is replaced by its cancellation-free limit form.
pub const RESONANCE_BAND: f64 = 1e-6;

/// How a [`ChiValue`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChiBranch {
    StaticClosedForm,
    InertialClosedForm,
    InertialResonanceLimit,
    Quadrature,
}

impl ChiBranch {
    pub fn as_str(&self) -> &'static str {
        match self {
            ChiBranch::StaticClosedForm => "static-closed-form",
            ChiBranch::InertialClosedForm => "inertial-closed-form",
            ChiBranch::InertialResonanceLimit => "inertial-resonance-limit",
            ChiBranch::Quadrature => "quadrature",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiValue<T> {
    pub value: Complex<T>,
    pub branch: ChiBranch,
    /// Absolute error bound; zero for closed forms.
    pub err_estimate: T,
}

impl<T: Real> ChiValue<T> {
    fn closed(value: Complex<T>, branch: ChiBranch) -> Self {
        Self {
            value,
            branch,
            err_estimate: T::zero(),
        }
    }

    /// Bare amplitude with no evaluation history, e.g. for direct witness evaluation.
    pub fn exact(value: Complex<T>) -> Self {
        Self::closed(value, ChiBranch::StaticClosedForm)
    }

    pub fn norm_sqr(&self) -> T {
        self.value.norm_sqr()
    }
}

/// Detector–field coupling strength `λ ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingSpec<T> {
    lambda: T,
}

impl<T: Real> CouplingSpec<T> {
    pub fn new(lambda: T) -> Result<Self> {
        if !(lambda >= T::zero()) || !lambda.is_finite() {
            return Err(Error::invalid(
                "lambda",
                format!("coupling must be >= 0, got {lambda}"),
            ));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }
}

/// Settings for [`chi_quadrature`] and [`phase_beta`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions<T> {
    /// Absolute tolerance on the returned amplitude.
    pub tol: T,
    /// Bisections allowed after the initial oscillation-resolving partition.
    pub max_subdivisions: usize,
}

impl<T: Real> Default for QuadratureOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-10),
            max_subdivisions: 200_000,
        }
    }
}

impl<T: Real> QuadratureOptions<T> {
    pub fn with_tol(tol: T) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > T::zero()) {
            return Err(Error::invalid(
                "tol",
                format!("tolerance must be > 0, got {}", self.tol),
            ));
        }
        Ok(())
    }
}

/// Routing for [`chi`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChiMethod {
    /// Closed forms where available, quadrature otherwise.
    #[default]
    Auto,
    /// Quadrature for every trajectory.
    ForceQuadrature,
}

fn check_tau<T: Real>(tau: T) -> Result<()> {
    if !(tau >= T::zero()) || !tau.is_finite() {
        return Err(Error::invalid(
            "tau",
            format!("proper time must be finite and >= 0, got {tau}"),
        ));
    }
    Ok(())
}

fn finite_or_fail<T: Real>(z: Complex<T>, context: &str) -> Result<Complex<T>> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::numerical(context, "non-finite intermediate"))
    }
}

/// `(e^{iωτ} − 1)` written as `2i sin(ωτ/2) e^{iωτ/2}` to avoid cancellation.
fn expm1_i<T: Real>(phase: T) -> Complex<T> {
    let half = phase / T::lit(2.0);
    Complex::new(T::zero(), T::lit(2.0) * half.sin()) * Complex::new(half.cos(), half.sin())
}

/// `∫₀^τ e^{iδt} dt`, well-conditioned at `δ → 0`.
fn exp_integral<T: Real>(delta: T, tau: T) -> Complex<T> {
    let x = delta * tau / T::lit(2.0);
    let sinc = if x.abs() < T::lit(1e-4) {
        T::one() - x * x / T::lit(6.0)
    } else {
        x.sin() / x
    };
    Complex::new(x.cos(), x.sin()) * (tau * sinc)
}

/// Closed form for a detector resting at `x0`:
/// `χ = −λF_k(x0)(e^{iω_kτ} − 1)/ω_k`.
pub fn chi_static<T: Real>(
    mode: &ModeSpec<T>,
    coupling: &CouplingSpec<T>,
    x0: T,
    tau: T,
) -> Result<ChiValue<T>> {
    check_tau(tau)?;
    let f = mode.amplitude(x0)?;
    let w = mode.omega();
    let value = expm1_i(w * tau) * (-coupling.lambda() * f / w);
    Ok(ChiValue::closed(
        finite_or_fail(value, "chi_static")?,
        ChiBranch::StaticClosedForm,
    ))
}

/// Frequency at which an inertial detector crosses successive maxima of mode
/// `k`: `ω_L = kπv/(L√(1−v²))`.
pub fn crossing_rate<T: Real>(mode: &ModeSpec<T>, velocity: T) -> T {
    mode.wavenumber() * velocity / (T::one() - velocity * velocity).sqrt()
}

/// Closed form for inertial motion, valid up to the wall time.
///
/// Outside the resonance band the antiderivative
/// `e^{iωt}(ω sin(ω_L t + φ) + iω_L cos(ω_L t + φ))/(ω_L² − ω²)` is used.
/// Inside it, where numerator and denominator both vanish, the integral is
/// split into co- and counter-rotating exponentials and the resonant one is
/// evaluated through `sinc`, which reduces to the linear-in-`τ` limit at
/// exact resonance.
pub fn chi_inertial_analytic<T: Real>(
    mode: &ModeSpec<T>,
    coupling: &CouplingSpec<T>,
    traj: &TrajectorySpec<T>,
    tau: T,
) -> Result<ChiValue<T>> {
    check_tau(tau)?;
    let velocity = match traj.kind() {
        TrajectoryKind::Inertial { velocity } => velocity,
        _ => {
            return Err(Error::invalid(
                "trajectory",
                "closed inertial form requires an inertial trajectory",
            ))
        }
    };
    let tw = traj
        .wall_time()
        .expect("inertial trajectories reach the wall");
    if tau > tw {
        return Err(Error::invalid(
            "tau",
            format!("closed inertial form valid up to the wall time {tw}, got {tau}"),
        ));
    }
    let value = inertial_value(mode, coupling.lambda(), velocity, traj.x0(), tau, false);
    let w = mode.omega();
    let wl = crossing_rate(mode, velocity);
    let branch = if (wl - w).abs() < T::lit(RESONANCE_BAND) * w {
        ChiBranch::InertialResonanceLimit
    } else {
        ChiBranch::InertialClosedForm
    };
    Ok(ChiValue::closed(
        finite_or_fail(value, "chi_inertial_analytic")?,
        branch,
    ))
}

/// Raw inertial evaluation; `force_split` selects the limit form regardless of detuning.
pub(crate) fn inertial_value<T: Real>(
    mode: &ModeSpec<T>,
    lambda: T,
    velocity: T,
    x0: T,
    tau: T,
    force_split: bool,
) -> Complex<T> {
    let two = T::lit(2.0);
    let w = mode.omega();
    let wl = crossing_rate(mode, velocity);
    // phase of F_k along x(τ) = x0 + uτ
    let phi = mode.wavenumber() * x0;
    let pref = lambda / (T::from_u32(mode.k()).unwrap() * T::PI()).sqrt();
    if force_split || (wl - w).abs() < T::lit(RESONANCE_BAND) * w {
        let eip = Complex::new(phi.cos(), phi.sin());
        let co = eip * exp_integral(w + wl, tau);
        let counter = eip.conj() * exp_integral(w - wl, tau);
        // −i·pref·(co − counter)/(2i)
        (counter - co) * (pref / two)
    } else {
        let g = |t: T| {
            let th = wl * t + phi;
            Complex::new((w * t).cos(), (w * t).sin()) * Complex::new(w * th.sin(), wl * th.cos())
        };
        let num = g(tau) - g(T::zero());
        let den = (wl - w) * (wl + w);
        num * (pref / den)
    }
}

/// Greedy panel boundaries on `[0, end]` so that no panel exceeds an eighth
/// of either the mode period or the instantaneous mode-crossing period.
fn oscillation_breaks<T: Real>(mode: &ModeSpec<T>, traj: &TrajectorySpec<T>, end: T) -> Vec<T> {
    let eighth = T::lit(2.0) * T::PI() / T::lit(8.0);
    let kl = mode.wavenumber();
    let w = mode.omega();
    let cap = |t: T| eighth / w.max(kl * traj.coordinate_rate(t.min(end)));
    let mut breaks = vec![T::zero()];
    let mut t = T::zero();
    while t < end {
        let mut h = cap(t);
        h = h.min(cap(t + h));
        h = h.min(cap(t + h));
        let next = if t + h >= end { end } else { t + h };
        if !(next > t) {
            break;
        }
        breaks.push(next);
        t = next;
    }
    if *breaks.last().unwrap() < end {
        breaks.push(end);
    }
    breaks
}

/// Adaptive quadrature of the response integral along any trajectory.
///
/// The integrand vanishes identically past the wall time, so the domain is
/// cut there and the result is frozen for later `tau`.
pub fn chi_quadrature<T: Real>(
    mode: &ModeSpec<T>,
    coupling: &CouplingSpec<T>,
    traj: &TrajectorySpec<T>,
    tau: T,
    opts: &QuadratureOptions<T>,
) -> Result<ChiValue<T>> {
    check_tau(tau)?;
    opts.validate()?;
    let zero = Complex::new(T::zero(), T::zero());
    let lambda = coupling.lambda();
    if lambda == T::zero() || tau == T::zero() {
        return Ok(ChiValue {
            value: zero,
            branch: ChiBranch::Quadrature,
            err_estimate: T::zero(),
        });
    }
    let end = traj.wall_time().map_or(tau, |tw| tau.min(tw));
    let breaks = oscillation_breaks(mode, traj, end);
    let w = mode.omega();
    let integrand = |t: T| {
        let f = mode.amplitude_unchecked(traj.position(t));
        Complex::new((w * t).cos(), (w * t).sin()) * f
    };
    let Quadrature {
        value,
        err,
        converged,
    } = quadrature::integrate(integrand, &breaks, opts.tol / lambda, opts.max_subdivisions);
    let value = value * Complex::new(T::zero(), -lambda);
    let err = err * lambda;
    if !converged || !value.re.is_finite() || !value.im.is_finite() {
        return Err(Error::NumericalFailure {
            context: format!("chi_quadrature (k={}, tau={tau})", mode.k()),
            reason: format!(
                "no convergence to tol {} within {} subdivisions",
                opts.tol, opts.max_subdivisions
            ),
            best_re: value.re.to_f64_lossy(),
            best_im: value.im.to_f64_lossy(),
            err_estimate: err.to_f64_lossy(),
        });
    }
    Ok(ChiValue {
        value,
        branch: ChiBranch::Quadrature,
        err_estimate: err,
    })
}

/// Response of mode `mode` along `traj`, routed by trajectory family.
///
/// Static detectors use the static closed form, inertial ones the inertial
/// closed form (evaluated at the wall time once the wall is reached) and
/// accelerated ones quadrature.
pub fn chi<T: Real>(
    mode: &ModeSpec<T>,
    coupling: &CouplingSpec<T>,
    traj: &TrajectorySpec<T>,
    tau: T,
    method: ChiMethod,
    opts: &QuadratureOptions<T>,
) -> Result<ChiValue<T>> {
    match (method, traj.kind()) {
        (ChiMethod::Auto, TrajectoryKind::Static) => chi_static(mode, coupling, traj.x0(), tau),
        (ChiMethod::Auto, TrajectoryKind::Inertial { .. }) => {
            check_tau(tau)?;
            let tw = traj.wall_time().unwrap();
            chi_inertial_analytic(mode, coupling, traj, tau.min(tw))
        }
        _ => chi_quadrature(mode, coupling, traj, tau, opts),
    }
}

/// Settings for [`chi_mode_sum`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSumOptions<T> {
    /// Stop once the latest block of 16 modes adds less than this fraction of the sum.
    pub rel_tail_tol: T,
    /// Hard cap on the number of modes.
    pub max_modes: u32,
    pub method: ChiMethod,
    pub quadrature: QuadratureOptions<T>,
}

impl<T: Real> Default for ModeSumOptions<T> {
    fn default() -> Self {
        Self {
            rel_tail_tol: T::lit(1e-8),
            max_modes: 1 << 16,
            method: ChiMethod::Auto,
            quadrature: QuadratureOptions::default(),
        }
    }
}

const MODE_BLOCK: u32 = 16;

/// `Σ_k |χ_k(τ)|²` with a relative tail cutoff.
pub fn chi_mode_sum<T: Real>(
    cavity: &CavityConfig<T>,
    coupling: &CouplingSpec<T>,
    traj: &TrajectorySpec<T>,
    tau: T,
    opts: &ModeSumOptions<T>,
) -> Result<T> {
    if !(opts.rel_tail_tol > T::zero()) {
        return Err(Error::invalid("rel_tail_tol", "tail tolerance must be > 0"));
    }
    check_tau(tau)?;
    if coupling.lambda() == T::zero() || tau == T::zero() {
        return Ok(T::zero());
    }
    let mut total = T::zero();
    let mut block = T::zero();
    for k in 1..=opts.max_modes {
        let mode = cavity.mode(k)?;
        let c = chi(&mode, coupling, traj, tau, opts.method, &opts.quadrature)?;
        let term = c.norm_sqr();
        total = total + term;
        block = block + term;
        if k % MODE_BLOCK == 0 {
            if block <= opts.rel_tail_tol * total {
                return Ok(total);
            }
            block = T::zero();
        }
    }
    Err(Error::NumericalFailure {
        context: format!("chi_mode_sum (tau={tau})"),
        reason: format!(
            "tail not below {} after {} modes",
            opts.rel_tail_tol, opts.max_modes
        ),
        best_re: total.to_f64_lossy(),
        best_im: 0.0,
        err_estimate: block.to_f64_lossy(),
    })
}

/// `Σ |χ_k(τ)|²` over exactly the given modes.
pub fn chi_squared_sum<T: Real>(
    cavity: &CavityConfig<T>,
    coupling: &CouplingSpec<T>,
    traj: &TrajectorySpec<T>,
    tau: T,
    modes: impl IntoIterator<Item = u32>,
    method: ChiMethod,
    opts: &QuadratureOptions<T>,
) -> Result<T> {
    let mut total = T::zero();
    for k in modes {
        let mode = cavity.mode(k)?;
        total = total + chi(&mode, coupling, traj, tau, method, opts)?.norm_sqr();
    }
    Ok(total)
}

/// Velocity at which the mode-crossing rate of an inertial detector equals
/// the mode frequency.
///
/// With `q = kπ/(mL)`, `v_c = sqrt((1 + q²)/(1 + 2q²))`; a massless field
/// gives the limit `1/√2`.
pub fn critical_velocity<T: Real>(mode: &ModeSpec<T>) -> T {
    let m = mode.mass();
    if m == T::zero() {
        return T::FRAC_1_SQRT_2();
    }
    let q = mode.wavenumber() / m;
    let q2 = q * q;
    if !q2.is_finite() {
        return T::FRAC_1_SQRT_2();
    }
    ((T::one() + q2) / (T::one() + T::lit(2.0) * q2)).sqrt()
}

/// Forced-oscillator phase
/// `β = ∫_{τ0}^{τ} dτ′ ∫_{τ0}^{τ′} dτ″ f(τ′) f(τ″) sin(ω(τ′ − τ″))`
/// by nested adaptive quadrature.
pub fn phase_beta<T, F>(f: F, omega: T, tau0: T, tau: T, opts: &QuadratureOptions<T>) -> Result<T>
where
    T: Real,
    F: Fn(T) -> T,
{
    opts.validate()?;
    if !(tau >= tau0) {
        return Err(Error::invalid(
            "tau",
            format!("need tau >= tau0, got {tau} < {tau0}"),
        ));
    }
    if tau == tau0 {
        return Ok(T::zero());
    }
    let span = tau - tau0;
    let panels = |a: T, b: T| {
        let n = if omega > T::zero() {
            ((b - a) * omega * T::lit(8.0) / (T::lit(2.0) * T::PI()))
                .ceil()
                .to_usize()
                .unwrap_or(1)
        } else {
            1
        };
        quadrature::uniform_breaks(a, b, n.max(1))
    };
    let inner_tol = opts.tol / (T::lit(10.0) * (T::one() + span));
    let inner_failed = Cell::new(false);
    let outer = |t1: T| {
        let ft1 = f(t1);
        if ft1 == T::zero() || t1 <= tau0 {
            return T::zero();
        }
        let q = quadrature::integrate_real(
            |t2| f(t2) * (omega * (t1 - t2)).sin(),
            &panels(tau0, t1),
            inner_tol,
            opts.max_subdivisions,
        );
        if !q.converged {
            inner_failed.set(true);
        }
        ft1 * q.value.re
    };
    let q = quadrature::integrate_real(outer, &panels(tau0, tau), opts.tol, opts.max_subdivisions);
    if !q.converged || inner_failed.get() || !q.value.re.is_finite() {
        return Err(Error::NumericalFailure {
            context: "phase_beta".into(),
            reason: "nested quadrature did not converge".into(),
            best_re: q.value.re.to_f64_lossy(),
            best_im: 0.0,
            err_estimate: q.err.to_f64_lossy(),
        });
    }
    Ok(q.value.re)
}
