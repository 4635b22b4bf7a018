//! Cavity geometry of the 1-D scalar field: mode functions and frequencies.
//!
//! The cavity occupies `[0, L]` with Dirichlet walls. All quantities are in
//! natural units (`c = ħ = 1`).

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Angular frequency `ω_k = sqrt((kπ/L)² + m²)` of cavity mode `k`.
pub fn mode_frequency<T: Real>(k: u32, length: T, mass: T) -> Result<T> {
    check_mode(k, length)?;
    if !(mass >= T::zero()) || !mass.is_finite() {
        return Err(Error::invalid(
            "m",
            format!("field mass must be >= 0, got {mass}"),
        ));
    }
    let kl = wavenumber(k, length);
    Ok(kl.hypot(mass))
}

/// Mode function `F_k(x) = sin(kπx/L)/sqrt(kπ)`.
///
/// Positions outside the cavity are rejected rather than clamped, so that a
/// trajectory bug surfaces here instead of silently producing zero coupling.
pub fn mode_function<T: Real>(k: u32, length: T, x: T) -> Result<T> {
    check_mode(k, length)?;
    if !(x >= T::zero() && x <= length) {
        return Err(Error::invalid(
            "x",
            format!("position {x} outside cavity [0, {length}]"),
        ));
    }
    Ok(mode_function_unchecked(k, length, x))
}

#[inline]
pub(crate) fn mode_function_unchecked<T: Real>(k: u32, length: T, x: T) -> T {
    let kf = T::from_u32(k).unwrap();
    (wavenumber(k, length) * x).sin() / (kf * T::PI()).sqrt()
}

/// `kπ/L`.
#[inline]
pub(crate) fn wavenumber<T: Real>(k: u32, length: T) -> T {
    T::from_u32(k).unwrap() * T::PI() / length
}

fn check_mode<T: Real>(k: u32, length: T) -> Result<()> {
    if k == 0 {
        return Err(Error::invalid("k", "mode index must be >= 1"));
    }
    if !(length > T::zero()) || !length.is_finite() {
        return Err(Error::invalid(
            "L",
            format!("cavity length must be > 0, got {length}"),
        ));
    }
    Ok(())
}

/// One cavity mode with its derived frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSpec<T> {
    k: u32,
    length: T,
    mass: T,
    omega: T,
}

impl<T: Real> ModeSpec<T> {
    pub fn new(k: u32, length: T, mass: T) -> Result<Self> {
        let omega = mode_frequency(k, length, mass)?;
        Ok(Self {
            k,
            length,
            mass,
            omega,
        })
    }

    /// A mode with a prescribed frequency, decoupled from `(k, L, m)`.
    ///
    /// Used for the single-oscillator model where the oscillator frequency is
    /// given directly. The mass is reported as NaN since it no longer
    /// determines `omega`.
    pub fn with_omega(k: u32, length: T, omega: T) -> Result<Self> {
        check_mode(k, length)?;
        if !(omega > T::zero()) || !omega.is_finite() {
            return Err(Error::invalid(
                "omega",
                format!("frequency must be > 0, got {omega}"),
            ));
        }
        Ok(Self {
            k,
            length,
            mass: T::nan(),
            omega,
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn mass(&self) -> T {
        self.mass
    }

    pub fn omega(&self) -> T {
        self.omega
    }

    /// `kπ/L`, the spatial wavenumber.
    pub fn wavenumber(&self) -> T {
        wavenumber(self.k, self.length)
    }

    /// Mode function at `x`, rejecting positions outside the cavity.
    pub fn amplitude(&self, x: T) -> Result<T> {
        mode_function(self.k, self.length, x)
    }

    pub(crate) fn amplitude_unchecked(&self, x: T) -> T {
        mode_function_unchecked(self.k, self.length, x)
    }
}

/// Cavity, field mass, probed mode and detector start position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityConfig<T> {
    pub length: T,
    pub mass: T,
    pub k0: u32,
    pub x0: T,
}

impl<T: Real> CavityConfig<T> {
    /// Cavity with the detector at the leftmost antinode `L/(2k0)` of the probed mode.
    pub fn at_antinode(length: T, mass: T, k0: u32) -> Result<Self> {
        check_mode(k0, length)?;
        let x0 = length / (T::lit(2.0) * T::from_u32(k0).unwrap());
        Self::new(length, mass, k0, x0)
    }

    pub fn new(length: T, mass: T, k0: u32, x0: T) -> Result<Self> {
        mode_frequency(k0, length, mass)?;
        if !(x0 >= T::zero() && x0 <= length) {
            return Err(Error::invalid(
                "x0",
                format!("start position {x0} outside cavity [0, {length}]"),
            ));
        }
        Ok(Self {
            length,
            mass,
            k0,
            x0,
        })
    }

    pub fn mode(&self, k: u32) -> Result<ModeSpec<T>> {
        ModeSpec::new(k, self.length, self.mass)
    }

    pub fn probed_mode(&self) -> ModeSpec<T> {
        ModeSpec::new(self.k0, self.length, self.mass).expect("validated at construction")
    }
}
