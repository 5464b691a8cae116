//! Analysis toolkit for the adaptive SIS mean-field model on a rewiring
//! contact network:
//!
//! ```text
//! dy/dt = −y + τ·y·(1 − y)·z
//! dz/dt = −ζ·z·fbr(y) + ξ·(1 − z)·fcr(y)
//! ```
//!
//! `y` is prevalence, `z` link density, and `fbr`/`fcr` the link-breaking
//! and link-creation responses. The crate finds equilibria, classifies
//! their stability, integrates trajectories, estimates regions of
//! attraction, extracts separatrices, and analyses the slow-network limit.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod equilibria;
pub mod error;
pub mod geometry;
pub mod integrator;
pub mod linalg;
pub mod model;
pub mod output;
pub mod responses;
pub mod roots;
pub mod slowfast;
pub mod stability;

pub use dynamics::{integrate, IntegratorConfig, Sample, Terminal, Trajectory};
pub use equilibria::{Equilibrium, EquilibriumKind, LinkDensity, R0};
pub use error::{Error, Result};
pub use geometry::{RegionOfAttraction, Separatrix};
pub use linalg::Mat2;
pub use model::{ModelParams, RawRates, State};
pub use responses::{Builtin, FunctionalResponse, FunctionalResponsePair};
pub use slowfast::{SlowFastParams, SlowFastRun};
pub use stability::{Classification, StabilityReport};
