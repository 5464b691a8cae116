use thiserror::Error;

/// Errors raised by model construction and the analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{which} response is negative ({value:e}) at y = {y}")]
    NegativeResponse { which: &'static str, y: f64, value: f64 },
    #[error("link-breaking and link-creation responses are both identically zero on [0, 1]")]
    BothResponsesZero,
    #[error("{0} coefficient list is empty")]
    EmptyCoefficients(&'static str),
    #[error("{name} must be finite and strictly positive, got {value}")]
    InvalidRate { name: &'static str, value: f64 },
    #[error("omega = {omega} is inconsistent with zeta / xi = {ratio}")]
    InconsistentOmega { omega: f64, ratio: f64 },
    #[error("state ({y}, {z}) lies outside the unit square")]
    StateOutOfRange { y: f64, z: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("jacobian is not Hurwitz (eigenvalue real parts {re1:e}, {re2:e})")]
    NotHurwitz { re1: f64, re2: f64 },
    #[error("equilibrium is not a saddle (det J = {determinant:e})")]
    NotSaddle { determinant: f64 },
    #[error("invalid integrator configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
