//! Functional responses modulating link breaking and link creation.
//!
//! A response maps prevalence `y ∈ [0, 1]` to a non-negative rate factor.
//! The four built-in pairs have exact closed forms; user responses are
//! polynomials in ascending-degree coefficient form.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of grid points used to certify non-negativity.
pub const POSITIVITY_GRID: usize = 1001;
/// Values above this are accepted as non-negative.
pub const NEGATIVITY_TOL: f64 = -1e-12;

#[derive(Debug, Clone, PartialEq)]
enum Form {
    Constant(f64),
    /// `y`
    Identity,
    /// `2y(1 − y)`
    TwiceYOneMinusY,
    /// `(1 − y)²`
    OneMinusYSquared,
    /// `c0 + c1 y + c2 y² + …`
    Polynomial(Vec<f64>),
}

/// A non-negative response `f(y)` with analytic derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalResponse {
    form: Form,
    label: String,
}

impl FunctionalResponse {
    fn builtin(form: Form, label: &str) -> Self {
        FunctionalResponse {
            form,
            label: label.to_owned(),
        }
    }

    /// Polynomial response; `coeffs[k]` multiplies `y^k`.
    pub fn polynomial(coeffs: &[f64], which: &'static str) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::EmptyCoefficients(which));
        }
        if let Some(bad) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(Error::Domain(format!("{which} coefficient {bad} is not finite")));
        }
        let label = coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| match k {
                0 => format!("{c}"),
                1 => format!("{c}*y"),
                _ => format!("{c}*y^{k}"),
            })
            .collect::<Vec<_>>()
            .join(" + ");
        let response = FunctionalResponse {
            form: Form::Polynomial(coeffs.to_vec()),
            label,
        };
        response.check_nonnegative(which)?;
        Ok(response)
    }

    fn check_nonnegative(&self, which: &'static str) -> Result<()> {
        for i in 0..POSITIVITY_GRID {
            let y = i as f64 / (POSITIVITY_GRID - 1) as f64;
            let value = self.eval(y);
            if value.is_nan() || value < NEGATIVITY_TOL {
                return Err(Error::NegativeResponse { which, y, value });
            }
        }
        Ok(())
    }

    #[inline]
    pub fn eval(&self, y: f64) -> f64 {
        match &self.form {
            Form::Constant(c) => *c,
            Form::Identity => y,
            Form::TwiceYOneMinusY => 2.0 * y * (1.0 - y),
            Form::OneMinusYSquared => (1.0 - y) * (1.0 - y),
            Form::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &ck| acc * y + ck),
        }
    }

    #[inline]
    pub fn deriv(&self, y: f64) -> f64 {
        match &self.form {
            Form::Constant(_) => 0.0,
            Form::Identity => 1.0,
            Form::TwiceYOneMinusY => 2.0 - 4.0 * y,
            Form::OneMinusYSquared => -2.0 * (1.0 - y),
            Form::Polynomial(c) => c
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, &ck)| acc * y + k as f64 * ck),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// True when the response vanishes at every certification grid point.
    pub fn is_identically_zero(&self) -> bool {
        (0..POSITIVITY_GRID).all(|i| self.eval(i as f64 / (POSITIVITY_GRID - 1) as f64) == 0.0)
    }
}

impl fmt::Display for FunctionalResponse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// The four response pairs analysed in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builtin {
    /// Random link activation/deactivation: `fbr = fcr = 1`.
    Rlad,
    /// `fbr = y`, `fcr = 1`.
    LinearBreak,
    /// Adaptive SIS: `fbr = 2y(1−y)`, `fcr = (1−y)²`.
    Asis,
    /// Adaptive information diffusion: `fbr = (1−y)²`, `fcr = 2y(1−y)`.
    Aid,
}

impl Builtin {
    pub const ALL: [Builtin; 4] = [Builtin::Rlad, Builtin::LinearBreak, Builtin::Asis, Builtin::Aid];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Rlad => "rlad",
            Builtin::LinearBreak => "linear_break",
            Builtin::Asis => "asis",
            Builtin::Aid => "aid",
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown built-in model '{s}'")))
    }
}

/// Link-breaking (`fbr`) and link-creation (`fcr`) responses.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalResponsePair {
    pub fbr: FunctionalResponse,
    pub fcr: FunctionalResponse,
}

/// JSON form of a polynomial pair: `{"fbr": [c0, c1, ...], "fcr": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialSpec {
    pub fbr: Vec<f64>,
    pub fcr: Vec<f64>,
}

impl FunctionalResponsePair {
    pub fn new(fbr: FunctionalResponse, fcr: FunctionalResponse) -> Result<Self> {
        if fbr.is_identically_zero() && fcr.is_identically_zero() {
            return Err(Error::BothResponsesZero);
        }
        Ok(FunctionalResponsePair { fbr, fcr })
    }

    pub fn builtin(name: Builtin) -> Self {
        use Form::*;
        let (fbr, fcr) = match name {
            Builtin::Rlad => (
                FunctionalResponse::builtin(Constant(1.0), "1"),
                FunctionalResponse::builtin(Constant(1.0), "1"),
            ),
            Builtin::LinearBreak => (
                FunctionalResponse::builtin(Identity, "y"),
                FunctionalResponse::builtin(Constant(1.0), "1"),
            ),
            Builtin::Asis => (
                FunctionalResponse::builtin(TwiceYOneMinusY, "2y(1-y)"),
                FunctionalResponse::builtin(OneMinusYSquared, "(1-y)^2"),
            ),
            Builtin::Aid => (
                FunctionalResponse::builtin(OneMinusYSquared, "(1-y)^2"),
                FunctionalResponse::builtin(TwiceYOneMinusY, "2y(1-y)"),
            ),
        };
        FunctionalResponsePair { fbr, fcr }
    }

    pub fn from_polynomial(fbr_coeffs: &[f64], fcr_coeffs: &[f64]) -> Result<Self> {
        let fbr = FunctionalResponse::polynomial(fbr_coeffs, "fbr")?;
        let fcr = FunctionalResponse::polynomial(fcr_coeffs, "fcr")?;
        Self::new(fbr, fcr)
    }

    pub fn from_spec(spec: &PolynomialSpec) -> Result<Self> {
        Self::from_polynomial(&spec.fbr, &spec.fcr)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: PolynomialSpec = serde_json::from_str(text)?;
        Self::from_spec(&spec)
    }
}
