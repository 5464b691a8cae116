//! Model parameters, state space and the planar vector field.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::responses::FunctionalResponsePair;

/// States within this distance outside the unit square are snapped onto it.
pub const CLAMP_WINDOW: f64 = 1e-12;

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidRate { name, value })
    }
}

/// Dimensional rates, all per unit time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawRates {
    beta: f64,
    delta: f64,
    zeta: f64,
    xi: f64,
}

impl RawRates {
    pub fn new(beta: f64, delta: f64, zeta: f64, xi: f64) -> Result<Self> {
        Ok(RawRates {
            beta: positive("beta", beta)?,
            delta: positive("delta", delta)?,
            zeta: positive("zeta", zeta)?,
            xi: positive("xi", xi)?,
        })
    }

    /// Rescale time by the curing rate.
    pub fn nondimensionalize(&self) -> ModelParams {
        let zeta = self.zeta / self.delta;
        let xi = self.xi / self.delta;
        ModelParams {
            tau: self.beta / self.delta,
            omega: self.zeta / self.xi,
            zeta,
            xi,
        }
    }
}

/// Dimensionless parameters. `omega` is cached as `zeta / xi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    tau: f64,
    omega: f64,
    zeta: f64,
    xi: f64,
}

impl ModelParams {
    pub fn new(tau: f64, zeta: f64, xi: f64) -> Result<Self> {
        let tau = positive("tau", tau)?;
        let zeta = positive("zeta", zeta)?;
        let xi = positive("xi", xi)?;
        Ok(ModelParams {
            tau,
            omega: zeta / xi,
            zeta,
            xi,
        })
    }

    /// Parameters from `tau` and `omega` alone, taking `xi = 1` and `zeta = omega`.
    /// Equilibrium locations depend only on `(tau, omega)`.
    pub fn with_omega(tau: f64, omega: f64) -> Result<Self> {
        let omega = positive("omega", omega)?;
        Self::new(tau, omega, 1.0)
    }

    /// Explicit constructor that checks the cached ratio.
    pub fn from_parts(tau: f64, omega: f64, zeta: f64, xi: f64) -> Result<Self> {
        let p = Self::new(tau, zeta, xi)?;
        if (omega - p.omega).abs() > 1e-12 * p.omega.max(1.0) {
            return Err(Error::InconsistentOmega { omega, ratio: p.omega });
        }
        Ok(p)
    }

    #[inline]
    pub fn tau(&self) -> f64 {
        self.tau
    }
    #[inline]
    pub fn omega(&self) -> f64 {
        self.omega
    }
    #[inline]
    pub fn zeta(&self) -> f64 {
        self.zeta
    }
    #[inline]
    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// Same parameters with both network rates multiplied by `factor`.
    pub fn scale_network_rates(&self, factor: f64) -> Result<Self> {
        let factor = positive("epsilon", factor)?;
        Self::new(self.tau, self.zeta * factor, self.xi * factor)
    }

    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        Self::new(tau, self.zeta, self.xi)
    }
}

/// A point `(y, z)` of the unit square: prevalence and link density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct State {
    y: f64,
    z: f64,
}

fn clamp_coord(v: f64) -> Option<f64> {
    if (0.0..=1.0).contains(&v) {
        Some(v)
    } else if (-CLAMP_WINDOW..0.0).contains(&v) {
        Some(0.0)
    } else if v > 1.0 && v <= 1.0 + CLAMP_WINDOW {
        Some(1.0)
    } else {
        None
    }
}

impl State {
    pub fn new(y: f64, z: f64) -> Result<Self> {
        match (clamp_coord(y), clamp_coord(z)) {
            (Some(y), Some(z)) => Ok(State { y, z }),
            _ => Err(Error::StateOutOfRange { y, z }),
        }
    }

    #[inline]
    pub fn y(&self) -> f64 {
        self.y
    }
    #[inline]
    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.y, self.z]
    }

    pub fn distance(&self, other: &State) -> f64 {
        (self.y - other.y).hypot(self.z - other.z)
    }
}

/// Right-hand side at an arbitrary point; no range checks.
#[inline]
pub fn rhs(p: &ModelParams, fr: &FunctionalResponsePair, u: [f64; 2]) -> [f64; 2] {
    let [y, z] = u;
    [
        -y + p.tau * y * (1.0 - y) * z,
        -p.zeta * z * fr.fbr.eval(y) + p.xi * (1.0 - z) * fr.fcr.eval(y),
    ]
}

/// Time derivative `(dy/dt, dz/dt)` of the adaptive mean-field system.
pub fn vector_field(p: &ModelParams, fr: &FunctionalResponsePair, s: &State) -> (f64, f64) {
    let [dy, dz] = rhs(p, fr, s.to_array());
    (dy, dz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::responses::Builtin;

    #[test]
    fn nondimensionalize_examples() {
        let p = RawRates::new(2.0, 1.0, 1.0, 1.0).unwrap().nondimensionalize();
        assert_eq!((p.tau(), p.omega(), p.zeta(), p.xi()), (2.0, 1.0, 1.0, 1.0));
        let p = RawRates::new(3.0, 2.0, 4.0, 2.0).unwrap().nondimensionalize();
        assert_eq!((p.tau(), p.omega(), p.zeta(), p.xi()), (1.5, 2.0, 2.0, 1.0));
        let p = RawRates::new(0.8, 1.0, 1.0, 1.0).unwrap().nondimensionalize();
        assert_eq!((p.tau(), p.omega()), (0.8, 1.0));
    }

    #[test]
    fn rates_must_be_positive() {
        assert!(matches!(
            RawRates::new(1.0, 0.0, 1.0, 1.0),
            Err(Error::InvalidRate { name: "delta", .. })
        ));
        assert!(ModelParams::new(-1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn omega_consistency_enforced() {
        assert!(ModelParams::from_parts(2.0, 0.5, 1.0, 2.0).is_ok());
        assert!(matches!(
            ModelParams::from_parts(2.0, 0.6, 1.0, 2.0),
            Err(Error::InconsistentOmega { .. })
        ));
    }

    #[test]
    fn state_clamps_only_within_window() {
        let s = State::new(-5e-13, 1.0 + 5e-13).unwrap();
        assert_eq!((s.y(), s.z()), (0.0, 1.0));
        assert!(State::new(-1e-9, 0.5).is_err());
        assert!(State::new(0.5, 1.1).is_err());
    }

    #[test]
    fn boundary_values() {
        let p = ModelParams::new(3.0, 1.3, 0.7).unwrap();
        let aid = FunctionalResponsePair::builtin(Builtin::Aid);
        for z in [0.0, 0.3, 1.0] {
            assert_eq!(vector_field(&p, &aid, &State::new(0.0, z).unwrap()).0, 0.0);
            assert_eq!(vector_field(&p, &aid, &State::new(1.0, z).unwrap()).0, -1.0);
        }
        let (_, dz) = vector_field(&p, &aid, &State::new(0.5, 1.0).unwrap());
        assert!((dz - (-1.3 * 0.25)).abs() < 1e-15);
    }

    #[test]
    fn lemma_boundary_signs() {
        let p = ModelParams::new(2.5, 0.8, 1.4).unwrap();
        for b in Builtin::ALL {
            let fr = FunctionalResponsePair::builtin(b);
            for i in 0..=100 {
                let y = i as f64 / 100.0;
                let (_, dz0) = vector_field(&p, &fr, &State::new(y, 0.0).unwrap());
                let (_, dz1) = vector_field(&p, &fr, &State::new(y, 1.0).unwrap());
                assert_eq!(dz0, p.xi() * fr.fcr.eval(y));
                assert!(dz0 >= 0.0);
                assert_eq!(dz1, -p.zeta() * fr.fbr.eval(y));
                assert!(dz1 <= 0.0);
            }
        }
    }

    #[test]
    fn field_is_deterministic() {
        let p = ModelParams::new(2.1, 0.4, 0.9).unwrap();
        let fr = FunctionalResponsePair::builtin(Builtin::Asis);
        let s = State::new(0.123456789, 0.987654321).unwrap();
        let a = vector_field(&p, &fr, &s);
        let b = vector_field(&p, &fr, &s);
        assert_eq!(a.0.to_bits(), b.0.to_bits());
        assert_eq!(a.1.to_bits(), b.1.to_bits());
    }
}
