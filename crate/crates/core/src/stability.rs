//! Linearisation, eigenvalue classification, the four-case disease-free
//! analysis, and the Dulac-function divergence certificate ruling out
//! periodic orbits.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::equilibria::{dfe, Equilibrium, LinkDensity};
use crate::linalg::Mat2;
use crate::model::{ModelParams, State};
use crate::responses::FunctionalResponsePair;

/// `|Re λ|` below this leaves stability undetermined.
pub const ZERO_EIGEN_TOL: f64 = 1e-9;
/// Determinants below `-SADDLE_DET_TOL` are saddles.
pub const SADDLE_DET_TOL: f64 = 1e-9;
/// Discriminants below `-SPIRAL_DISC_TOL` give complex eigenvalues.
pub const SPIRAL_DISC_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    StableNode,
    UnstableNode,
    StableSpiral,
    UnstableSpiral,
    Saddle,
    Undetermined,
}

impl Classification {
    pub fn name(self) -> &'static str {
        match self {
            Classification::StableNode => "stable_node",
            Classification::UnstableNode => "unstable_node",
            Classification::StableSpiral => "stable_spiral",
            Classification::UnstableSpiral => "unstable_spiral",
            Classification::Saddle => "saddle",
            Classification::Undetermined => "undetermined",
        }
    }

    pub fn is_stable(self) -> bool {
        matches!(self, Classification::StableNode | Classification::StableSpiral)
    }

    pub fn is_unstable(self) -> bool {
        matches!(
            self,
            Classification::UnstableNode | Classification::UnstableSpiral | Classification::Saddle
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityReport {
    pub jacobian: Mat2,
    #[serde(serialize_with = "serialize_eigenvalues")]
    pub eigenvalues: [Complex64; 2],
    pub classification: Classification,
    pub trace: f64,
    pub determinant: f64,
}

fn serialize_eigenvalues<S: serde::Serializer>(ev: &[Complex64; 2], s: S) -> Result<S::Ok, S::Error> {
    let pairs: [[f64; 2]; 2] = [[ev[0].re, ev[0].im], [ev[1].re, ev[1].im]];
    pairs.serialize(s)
}

/// Jacobian of the vector field at `s`.
pub fn jacobian(p: &ModelParams, fr: &FunctionalResponsePair, s: &State) -> Mat2 {
    jacobian_at(p, fr, s.y(), s.z())
}

pub(crate) fn jacobian_at(p: &ModelParams, fr: &FunctionalResponsePair, y: f64, z: f64) -> Mat2 {
    let tau = p.tau();
    Mat2::new(
        -1.0 + tau * (1.0 - 2.0 * y) * z,
        tau * y * (1.0 - y),
        -p.zeta() * z * fr.fbr.deriv(y) + p.xi() * (1.0 - z) * fr.fcr.deriv(y),
        -p.zeta() * fr.fbr.eval(y) - p.xi() * fr.fcr.eval(y),
    )
}

/// Classify the linearisation `J`.
///
/// Checks run in order: a near-zero real part makes the report
/// `undetermined`; then `det < −1e-9` is a saddle; a negative discriminant
/// is a spiral; otherwise a node. Real eigenvalues of opposite sign whose
/// determinant is within the saddle tolerance are reported `undetermined`.
pub fn classify(j: &Mat2) -> StabilityReport {
    let eigenvalues = j.eigenvalues();
    let trace = j.trace();
    let determinant = j.det();
    let min_re = eigenvalues[0].re.abs().min(eigenvalues[1].re.abs());
    let classification = if min_re < ZERO_EIGEN_TOL {
        Classification::Undetermined
    } else if determinant < -SADDLE_DET_TOL {
        Classification::Saddle
    } else if j.discriminant() < -SPIRAL_DISC_TOL {
        if trace < 0.0 {
            Classification::StableSpiral
        } else {
            Classification::UnstableSpiral
        }
    } else if eigenvalues[0].re < 0.0 && eigenvalues[1].re < 0.0 {
        Classification::StableNode
    } else if eigenvalues[0].re > 0.0 && eigenvalues[1].re > 0.0 {
        Classification::UnstableNode
    } else {
        Classification::Undetermined
    };
    StabilityReport {
        jacobian: *j,
        eigenvalues,
        classification,
        trace,
        determinant,
    }
}

/// Linear stability of an equilibrium. A free link density is evaluated at `z_free`.
pub fn classify_equilibrium(
    p: &ModelParams,
    fr: &FunctionalResponsePair,
    eq: &Equilibrium,
    z_free: f64,
) -> StabilityReport {
    classify(&jacobian(p, fr, &eq.state_or(z_free)))
}

/// Which of the four sign patterns of `(fbr(0), fcr(0))` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DfeCase {
    /// `fbr(0) = 0`, `fcr(0) = 0`: a line of disease-free states.
    BothZero = 1,
    /// `fbr(0) = 0`, `fcr(0) > 0`: threshold at `τ = 1`.
    CreationOnly = 2,
    /// `fbr(0) > 0`, `fcr(0) = 0`: always a stable node.
    BreakingOnly = 3,
    /// `fbr(0) > 0`, `fcr(0) > 0`: threshold at `τ = (ω·fbr(0) + fcr(0)) / fcr(0)`.
    Both = 4,
}

impl DfeCase {
    pub fn number(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DfeCaseAnalysis {
    pub case: DfeCase,
    /// `λ₁ = −1 + τ·z0`; absent when `z0` is free.
    pub lambda1: Option<f64>,
    /// `λ₂ = −ζ·fbr(0) − ξ·fcr(0)`.
    pub lambda2: f64,
    /// Value of `τ` at which the verdict flips (cases 2 and 4).
    pub tau_threshold: Option<f64>,
    pub verdict: Classification,
    /// Report from the numerical classifier; `None` when `z0` is free.
    pub report: Option<StabilityReport>,
}

impl DfeCaseAnalysis {
    /// Closed-form eigenvalues at a chosen point `(0, z0)` of the disease-free line.
    pub fn eigenvalues_at(&self, p: &ModelParams, z0: f64) -> (f64, f64) {
        (-1.0 + p.tau() * z0, self.lambda2)
    }
}

fn verdict_from_real(l1: f64, l2: f64) -> Classification {
    if l1.abs() < ZERO_EIGEN_TOL || l2.abs() < ZERO_EIGEN_TOL {
        Classification::Undetermined
    } else if l1 < 0.0 && l2 < 0.0 {
        Classification::StableNode
    } else if l1 > 0.0 && l2 > 0.0 {
        Classification::UnstableNode
    } else {
        Classification::Saddle
    }
}

/// Closed-form stability of the disease-free equilibrium.
pub fn dfe_case_analysis(p: &ModelParams, fr: &FunctionalResponsePair) -> DfeCaseAnalysis {
    let b0 = fr.fbr.eval(0.0);
    let c0 = fr.fcr.eval(0.0);
    let case = match (b0 > 0.0, c0 > 0.0) {
        (false, false) => DfeCase::BothZero,
        (false, true) => DfeCase::CreationOnly,
        (true, false) => DfeCase::BreakingOnly,
        (true, true) => DfeCase::Both,
    };
    let lambda2 = -p.zeta() * b0 - p.xi() * c0;
    let eq = dfe(p, fr);
    let (lambda1, verdict, report) = match eq.z {
        LinkDensity::Free => (None, Classification::Undetermined, None),
        LinkDensity::Value(z0) => {
            let l1 = -1.0 + p.tau() * z0;
            let report = classify(&jacobian_at(p, fr, 0.0, z0));
            (Some(l1), verdict_from_real(l1, lambda2), Some(report))
        }
    };
    let tau_threshold = match case {
        DfeCase::CreationOnly => Some(1.0),
        DfeCase::Both => Some((p.omega() * b0 + c0) / c0),
        _ => None,
    };
    DfeCaseAnalysis {
        case,
        lambda1,
        lambda2,
        tau_threshold,
        verdict,
        report,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DulacCertificate {
    pub max_f: f64,
    pub holds: bool,
}

/// Dulac-rescaled divergence `F(y, z) = −τ − ξ·fcr(y)/(y·z²)` for the
/// weight `1/(yz)`.
pub fn dulac_divergence(p: &ModelParams, fr: &FunctionalResponsePair, y: f64, z: f64) -> f64 {
    -p.tau() - p.xi() * fr.fcr.eval(y) / (y * z * z)
}

/// Evaluates `F` on the interior grid `{i/(n+1)}²`, `i = 1..=n`.
pub fn bendixson_dulac_certificate(p: &ModelParams, fr: &FunctionalResponsePair, grid_n: usize) -> DulacCertificate {
    let n = grid_n.max(2);
    let h = 1.0 / (n + 1) as f64;
    let max_f = (1..=n)
        .into_par_iter()
        .map(|i| {
            let y = i as f64 * h;
            (1..=n)
                .map(|k| dulac_divergence(p, fr, y, k as f64 * h))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    DulacCertificate {
        max_f,
        holds: max_f < 0.0,
    }
}
