//! Discretized Boltzmann model on truncated phase space.
//!
//! The recurrence `f^j = U^dt f^{j-1} + dt * J_pi(U^dt f^{j-1})` is evaluated
//! on a uniform spatial partition times a uniform velocity grid, alongside
//! the explicit constants of its error analysis and numerical checks of the
//! inequalities behind it.

// `!(x > 0.0)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod analysis;
pub mod constants;
pub mod error;
pub mod kernels;
pub mod operators;
pub mod parallel;
pub mod phase_space;
pub mod scheme;

pub use error::{Error, Result};
pub use kernels::{KernelForm, KernelSpec, SphereQuadrature};
pub use operators::{BoundaryMode, CollisionOperator, GainInterpolation, StreamOptions, StreamingScheme};
pub use phase_space::{DistributionField, GaussianMixture, GaussianSpec, SpatialPartition, VelocityGrid, WeightSpec};
pub use analysis::{
    CampaignSpec, ConvergenceTable, FamilySpec, InequalityVerdict, NormReport, Resolution,
};
pub use constants::{ConstantsInput, ConstantsReport};
pub use scheme::{Diagnostics, GuardSpec, Scheme, SchemeParams, Trajectory};
