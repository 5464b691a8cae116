//! Disease-free and endemic equilibria, the basic reproduction number, and
//! the closed-form equilibria of the four built-in response pairs.
//!
//! Endemic prevalences are the zeros on `(0, 1)` of
//!
//! ```text
//! h(y) = ω·fbr(y) + (1 − τ(1 − y))·fcr(y)
//! ```
//!
//! with link density `z = 1 / (τ(1 − y))`. Roots are bracketed on a uniform
//! grid of 10 000 cells; roots closer than roughly `2e-4` may merge into a
//! single tangential report.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::model::{ModelParams, State};
use crate::responses::{Builtin, FunctionalResponsePair};
use crate::roots::{find_roots, BracketOptions, Multiplicity};

/// Cells in the sign-change scan of `h`.
pub const ROOT_GRID_INTERVALS: usize = 10_000;
/// Tolerance above 1 admitted for the endemic link density.
pub const Z_FEASIBILITY_TOL: f64 = 1e-10;
/// Endemic prevalences at or beyond `1 − Y_UPPER_EXCLUSION` are rejected.
pub const Y_UPPER_EXCLUSION: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EquilibriumKind {
    #[serde(rename = "DFE")]
    Dfe,
    #[serde(rename = "EE")]
    Endemic,
}

/// Link density of an equilibrium. `Free` happens for the disease-free state
/// when both responses vanish at `y = 0`: every point of the `z` axis is
/// then stationary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinkDensity {
    Value(f64),
    Free,
}

impl LinkDensity {
    pub fn value(self) -> Option<f64> {
        match self {
            LinkDensity::Value(z) => Some(z),
            LinkDensity::Free => None,
        }
    }
}

impl Serialize for LinkDensity {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            LinkDensity::Value(z) => s.serialize_f64(*z),
            LinkDensity::Free => s.serialize_str("free_variable"),
        }
    }
}

/// Basic reproduction number, when the next-generation splitting applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum R0 {
    Value(f64),
    NotApplicable,
}

impl R0 {
    pub fn value(self) -> Option<f64> {
        match self {
            R0::Value(v) => Some(v),
            R0::NotApplicable => None,
        }
    }
}

impl fmt::Display for R0 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            R0::Value(v) => write!(f, "{v}"),
            R0::NotApplicable => f.write_str("not_applicable"),
        }
    }
}

impl Serialize for R0 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            R0::Value(v) => s.serialize_f64(*v),
            R0::NotApplicable => s.serialize_str("not_applicable"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Equilibrium {
    pub y: f64,
    pub z: LinkDensity,
    pub kind: EquilibriumKind,
    pub multiplicity: Multiplicity,
    pub r0_at_params: Option<f64>,
}

impl Equilibrium {
    /// The equilibrium as a state, with `z_free` standing in for a free link density.
    pub fn state_or(&self, z_free: f64) -> State {
        let z = self.z.value().unwrap_or(z_free);
        State::new(self.y, z).expect("equilibria lie in the unit square")
    }

    /// The equilibrium as a state; `None` when the link density is free.
    pub fn state(&self) -> Option<State> {
        self.z
            .value()
            .map(|z| State::new(self.y, z).expect("equilibria lie in the unit square"))
    }

    /// Euclidean distance from `s`; for a free link density only `y` counts.
    pub fn distance_to(&self, s: &State) -> f64 {
        match self.z {
            LinkDensity::Value(z) => (s.y() - self.y).hypot(s.z() - z),
            LinkDensity::Free => (s.y() - self.y).abs(),
        }
    }

    fn endemic(y: f64, z: f64, multiplicity: Multiplicity, r0: Option<f64>) -> Self {
        Equilibrium {
            y,
            z: LinkDensity::Value(z),
            kind: EquilibriumKind::Endemic,
            multiplicity,
            r0_at_params: r0,
        }
    }
}

/// The disease-free equilibrium `(0, z0)`.
pub fn dfe(p: &ModelParams, fr: &FunctionalResponsePair) -> Equilibrium {
    let b0 = fr.fbr.eval(0.0);
    let c0 = fr.fcr.eval(0.0);
    let z = if b0 == 0.0 && c0 == 0.0 {
        LinkDensity::Free
    } else {
        LinkDensity::Value(c0 / (p.omega() * b0 + c0))
    };
    Equilibrium {
        y: 0.0,
        z,
        kind: EquilibriumKind::Dfe,
        multiplicity: Multiplicity::Simple,
        r0_at_params: r0(p, fr).value(),
    }
}

/// `h(y) = ω·fbr(y) + (1 − τ(1 − y))·fcr(y)`; its zeros are endemic prevalences.
pub fn h_function(p: &ModelParams, fr: &FunctionalResponsePair, y: f64) -> f64 {
    p.omega() * fr.fbr.eval(y) + (1.0 - p.tau() * (1.0 - y)) * fr.fcr.eval(y)
}

fn h_derivative(p: &ModelParams, fr: &FunctionalResponsePair, y: f64) -> f64 {
    p.omega() * fr.fbr.deriv(y) + p.tau() * fr.fcr.eval(y) + (1.0 - p.tau() * (1.0 - y)) * fr.fcr.deriv(y)
}

/// Newton refinement, kept only while it stays local and does not worsen `|h|`.
fn polish(p: &ModelParams, fr: &FunctionalResponsePair, y0: f64) -> f64 {
    let mut y = y0;
    let mut hy = h_function(p, fr, y);
    for _ in 0..5 {
        let d = h_derivative(p, fr, y);
        if d.abs() <= 1e-8 || hy == 0.0 {
            break;
        }
        let next = y - hy / d;
        if !(next > 0.0 && next < 1.0) || (next - y0).abs() > 1e-9 {
            break;
        }
        let hn = h_function(p, fr, next);
        if hn.abs() >= hy.abs() {
            break;
        }
        y = next;
        hy = hn;
    }
    y
}

/// All endemic equilibria, sorted by prevalence.
pub fn endemic_equilibria(p: &ModelParams, fr: &FunctionalResponsePair) -> Vec<Equilibrium> {
    let opts = BracketOptions {
        intervals: ROOT_GRID_INTERVALS,
        ..BracketOptions::default()
    };
    let r0 = r0(p, fr).value();
    find_roots(|y| h_function(p, fr, y), 0.0, 1.0, &opts)
        .into_iter()
        .filter_map(|root| {
            let y = match root.multiplicity {
                Multiplicity::Simple => polish(p, fr, root.x),
                Multiplicity::Double => root.x,
            };
            if !(y > 0.0 && y < 1.0 - Y_UPPER_EXCLUSION) {
                return None;
            }
            let z = 1.0 / (p.tau() * (1.0 - y));
            if !(z > 0.0 && z <= 1.0 + Z_FEASIBILITY_TOL) {
                return None;
            }
            Some(Equilibrium::endemic(y, z.min(1.0), root.multiplicity, r0))
        })
        .collect()
}

/// Disease-free equilibrium followed by the endemic ones.
pub fn all_equilibria(p: &ModelParams, fr: &FunctionalResponsePair) -> Vec<Equilibrium> {
    let mut out = vec![dfe(p, fr)];
    out.extend(endemic_equilibria(p, fr));
    out
}

/// Basic reproduction number `τ·fcr(0) / (ω·fbr(0) + fcr(0))`.
pub fn r0(p: &ModelParams, fr: &FunctionalResponsePair) -> R0 {
    let b0 = fr.fbr.eval(0.0);
    let c0 = fr.fcr.eval(0.0);
    if c0 > 0.0 {
        R0::Value(p.tau() * c0 / (p.omega() * b0 + c0))
    } else {
        R0::NotApplicable
    }
}

/// Threshold at which the two endemic states of the information-diffusion
/// pair appear: `2τ / (ω + 2 + √(8ω))`.
pub fn r0_aid(p: &ModelParams) -> f64 {
    2.0 * p.tau() / (p.omega() + 2.0 + (8.0 * p.omega()).sqrt())
}

/// Closed-form endemic equilibria for a built-in pair, restricted to `(0,1)×(0,1]`.
pub fn closed_form_ee(example: Builtin, p: &ModelParams) -> Vec<Equilibrium> {
    let tau = p.tau();
    let omega = p.omega();
    let r0 = r0(p, &FunctionalResponsePair::builtin(example)).value();
    let candidates: Vec<(f64, f64, Multiplicity)> = match example {
        Builtin::Rlad => vec![(1.0 - (1.0 + omega) / tau, 1.0 / (1.0 + omega), Multiplicity::Simple)],
        Builtin::LinearBreak => vec![(
            (tau - 1.0) / (tau + omega),
            (tau + omega) / (tau * (1.0 + omega)),
            Multiplicity::Simple,
        )],
        Builtin::Asis => {
            let a = (1.0 - 2.0 * omega) / (2.0 * tau);
            let y = 1.0 - a - (a * a + 2.0 * omega / tau).sqrt();
            vec![(y, 1.0 / (tau * (1.0 - y)), Multiplicity::Simple)]
        }
        Builtin::Aid => {
            let b = 2.0 * tau + omega - 2.0;
            let disc = b * b - 8.0 * tau * omega;
            if disc < 0.0 {
                vec![]
            } else if disc == 0.0 {
                let y = b / (4.0 * tau);
                vec![(y, 1.0 / (tau * (1.0 - y)), Multiplicity::Double)]
            } else {
                let sq = disc.sqrt();
                [b - sq, b + sq]
                    .into_iter()
                    .map(|num| {
                        let y = num / (4.0 * tau);
                        (y, 1.0 / (tau * (1.0 - y)), Multiplicity::Simple)
                    })
                    .collect()
            }
        }
    };
    candidates
        .into_iter()
        .filter(|&(y, z, _)| y > 0.0 && y < 1.0 && z > 0.0 && z <= 1.0 + Z_FEASIBILITY_TOL)
        .map(|(y, z, m)| Equilibrium::endemic(y, z.min(1.0), m, r0))
        .collect()
}
