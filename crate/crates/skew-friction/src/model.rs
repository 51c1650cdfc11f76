//! Model parameterization: skewness, drift regime, horizon.
//!
//! All densities in this crate assume the process starts at the origin.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Drift specification of the two-valued drift `m(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Drift {
    /// Dry friction: constant pull toward the origin with level `m`,
    /// i.e. drift `-m` on the nonnegative half-line and `+m` below it.
    DryFriction { m: f64 },
    /// Arbitrary levels: `m1` on the nonnegative half-line, `m2` below.
    General { m1: f64, m2: f64 },
}

/// Skewness `p`, drift regime, and horizon `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    p: f64,
    drift: Drift,
    horizon: f64,
}

impl ModelParams {
    pub fn new(p: f64, drift: Drift, horizon: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::config(format!("skewness p must lie in (0, 1), got {p}")));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::config(format!("horizon T must be positive, got {horizon}")));
        }
        match drift {
            Drift::DryFriction { m } if !m.is_finite() => {
                return Err(Error::config("friction level m must be finite"))
            }
            Drift::General { m1, m2 } if !(m1.is_finite() && m2.is_finite()) => {
                return Err(Error::config("drift levels must be finite"))
            }
            _ => {}
        }
        Ok(ModelParams { p, drift, horizon })
    }

    /// Dry-friction parameterization `m1 = -m`, `m2 = m`.
    pub fn dry_friction(p: f64, m: f64, horizon: f64) -> Result<Self> {
        ModelParams::new(p, Drift::DryFriction { m }, horizon)
    }

    /// General two-valued drift.
    pub fn general(p: f64, m1: f64, m2: f64, horizon: f64) -> Result<Self> {
        ModelParams::new(p, Drift::General { m1, m2 }, horizon)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        1.0 - self.p
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn drift(&self) -> Drift {
        self.drift
    }

    /// Drift level on the nonnegative half-line.
    pub fn m1(&self) -> f64 {
        match self.drift {
            Drift::DryFriction { m } => -m,
            Drift::General { m1, .. } => m1,
        }
    }

    /// Drift level on the negative half-line.
    pub fn m2(&self) -> f64 {
        match self.drift {
            Drift::DryFriction { m } => m,
            Drift::General { m2, .. } => m2,
        }
    }

    /// The two-valued drift `m(x)`; `x = 0` takes the nonnegative branch.
    pub fn drift_at(&self, x: f64) -> f64 {
        if x >= 0.0 {
            self.m1()
        } else {
            self.m2()
        }
    }

    /// The friction level `m`, or a configuration error when the
    /// parameters are not in dry-friction form. Densities beyond the
    /// general-drift joint are only derived in that regime.
    pub fn friction(&self) -> Result<f64> {
        match self.drift {
            Drift::DryFriction { m } => Ok(m),
            Drift::General { m1, m2 } => Err(Error::config(format!(
                "this density requires dry-friction drift (m1 = -m, m2 = m); got m1 = {m1}, m2 = {m2}"
            ))),
        }
    }

    /// Mirrored parameters: `p -> 1 - p`, same drift magnitude, same horizon.
    pub fn mirrored(&self) -> Self {
        ModelParams {
            p: 1.0 - self.p,
            drift: self.drift,
            horizon: self.horizon,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_validates() {
        assert!(ModelParams::dry_friction(0.5, 0.5, 1.0).is_ok());
        assert!(ModelParams::dry_friction(0.0, 0.5, 1.0).is_err());
        assert!(ModelParams::dry_friction(1.0, 0.5, 1.0).is_err());
        assert!(ModelParams::dry_friction(0.5, 0.5, 0.0).is_err());
        assert!(ModelParams::general(0.5, f64::NAN, 0.0, 1.0).is_err());
    }

    #[test]
    fn dry_friction_levels() {
        let p = ModelParams::dry_friction(0.7, 0.5, 1.0).unwrap();
        assert_eq!(p.m1(), -0.5);
        assert_eq!(p.m2(), 0.5);
        assert_eq!(p.drift_at(0.0), -0.5);
        assert_eq!(p.drift_at(-0.1), 0.5);
        assert_eq!(p.friction().unwrap(), 0.5);
        assert!((p.q() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn general_drift_rejected_where_friction_required() {
        let p = ModelParams::general(0.7, 0.2, 0.4, 1.0).unwrap();
        assert!(p.friction().is_err());
    }

    #[test]
    fn negative_friction_is_allowed() {
        // physically uninteresting but computable; flagged downstream
        assert!(ModelParams::dry_friction(0.5, -0.5, 1.0).is_ok());
    }
}
