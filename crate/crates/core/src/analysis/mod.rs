//! Norms, moments, discrepancy, Lipschitz estimates, inequality checks,
//! envelope checks and convergence studies.

mod convergence;
mod discrepancy;
mod envelope;
mod family;
mod inequalities;
mod lipschitz;
mod norms;

pub use convergence::{
    convergence_study, log_log_fit, ConvergenceRow, ConvergenceTable, Resolution,
};
pub use discrepancy::{discrepancy, Discrepancy, DiscrepancyKind, DISCREPANCY_CAP};
pub use envelope::{envelope_check, EnvelopeReport};
pub use family::FamilySpec;
pub use inequalities::{
    homogenization_check, verify_inequalities, weighted_sup, CampaignSpec, HomogenizationCheck,
    InequalityVerdict, INEQUALITY_IDS,
};
pub use lipschitz::{lipschitz_estimate, LipschitzEstimate};
pub use norms::{b_norm, l1_norm, m_norm, moments, norms, Moments, NormReport};
