//! Detector worldlines parametrized by proper time.
//!
//! Every moving trajectory starts at `x0` moving right and stops at the right
//! wall `x = L`, where all mode functions vanish. After arrival the detector
//! stays at the wall, so the coupling is identically zero from then on.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrajectoryKind<T> {
    Static,
    /// Constant coordinate velocity `v`, `0 < v < 1`.
    Inertial {
        velocity: T,
    },
    /// Constant proper acceleration `a > 0`, starting at rest.
    Accelerated {
        acceleration: T,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySpec<T> {
    kind: TrajectoryKind<T>,
    x0: T,
    length: T,
}

impl<T: Real> TrajectorySpec<T> {
    pub fn new(kind: TrajectoryKind<T>, x0: T, length: T) -> Result<Self> {
        if !(length > T::zero()) || !length.is_finite() {
            return Err(Error::invalid(
                "L",
                format!("cavity length must be > 0, got {length}"),
            ));
        }
        if !(x0 >= T::zero() && x0 < length) {
            return Err(Error::invalid(
                "x0",
                format!("start position must lie in [0, L), got {x0}"),
            ));
        }
        match kind {
            TrajectoryKind::Static => {}
            TrajectoryKind::Inertial { velocity } => {
                if !(velocity > T::zero() && velocity < T::one()) {
                    return Err(Error::invalid(
                        "velocity",
                        format!("inertial velocity must satisfy 0 < v < 1, got {velocity}"),
                    ));
                }
            }
            TrajectoryKind::Accelerated { acceleration } => {
                if !(acceleration > T::zero()) || !acceleration.is_finite() {
                    return Err(Error::invalid(
                        "acceleration",
                        format!("proper acceleration must be > 0, got {acceleration}"),
                    ));
                }
            }
        }
        Ok(Self { kind, x0, length })
    }

    pub fn fixed(x0: T, length: T) -> Result<Self> {
        Self::new(TrajectoryKind::Static, x0, length)
    }

    pub fn inertial(velocity: T, x0: T, length: T) -> Result<Self> {
        Self::new(TrajectoryKind::Inertial { velocity }, x0, length)
    }

    pub fn accelerated(acceleration: T, x0: T, length: T) -> Result<Self> {
        Self::new(TrajectoryKind::Accelerated { acceleration }, x0, length)
    }

    pub fn kind(&self) -> TrajectoryKind<T> {
        self.kind
    }

    pub fn x0(&self) -> T {
        self.x0
    }

    pub fn length(&self) -> T {
        self.length
    }

    /// Proper time at which the detector reaches the right wall.
    pub fn wall_time(&self) -> Option<T> {
        let gap = self.length - self.x0;
        match self.kind {
            TrajectoryKind::Static => None,
            TrajectoryKind::Inertial { velocity } => {
                Some(gap * (T::one() - velocity * velocity).sqrt() / velocity)
            }
            TrajectoryKind::Accelerated { acceleration } => {
                Some((T::one() + acceleration * gap).acosh() / acceleration)
            }
        }
    }

    /// Position at proper time `tau`, pinned to `L` from the wall time on.
    pub fn position(&self, tau: T) -> T {
        if let Some(tw) = self.wall_time() {
            if tau >= tw {
                return self.length;
            }
        }
        self.free_position(tau).min(self.length)
    }

    /// Unclamped worldline.
    fn free_position(&self, tau: T) -> T {
        match self.kind {
            TrajectoryKind::Static => self.x0,
            TrajectoryKind::Inertial { velocity } => {
                self.x0 + velocity * tau / (T::one() - velocity * velocity).sqrt()
            }
            TrajectoryKind::Accelerated { acceleration } => {
                // cosh(aτ) − 1 = 2 sinh²(aτ/2), without cancellation at small aτ
                let s = (acceleration * tau / T::lit(2.0)).sinh();
                self.x0 + T::lit(2.0) * s * s / acceleration
            }
        }
    }

    /// Coordinate velocity `dx/dτ` (zero once clamped at the wall).
    pub fn coordinate_rate(&self, tau: T) -> T {
        if let Some(tw) = self.wall_time() {
            if tau >= tw {
                return T::zero();
            }
        }
        match self.kind {
            TrajectoryKind::Static => T::zero(),
            TrajectoryKind::Inertial { velocity } => {
                velocity / (T::one() - velocity * velocity).sqrt()
            }
            TrajectoryKind::Accelerated { acceleration } => (acceleration * tau).sinh(),
        }
    }
}
