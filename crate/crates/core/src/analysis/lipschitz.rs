use serde::{Deserialize, Serialize};

use crate::operators::{translate, StreamOptions};
use crate::phase_space::{norm_sq, DistributionField};

use super::norms::m_norm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzEstimate {
    /// Measured `M_tau` norm.
    pub r_est: f64,
    /// Largest `||T_y g - g||_{M_tau} / |y|` over the usable samples.
    pub m_est: f64,
    /// Samples with `0 < |y| <= 1` that entered the estimate.
    pub samples_used: usize,
    pub warnings: Vec<String>,
}

/// Measured membership constants `(R, M)` of the class `M_tau(R, M)`.
///
/// `synthesis_rate`, when known, is the smallest decay rate `g` was built
/// with; measuring at or above it gives estimates that grow with resolution.
pub fn lipschitz_estimate(
    g: &DistributionField,
    tau: f64,
    y_samples: &[[f64; 3]],
    opts: StreamOptions,
    synthesis_rate: Option<f64>,
) -> LipschitzEstimate {
    let mut warnings = Vec::new();
    if let Some(rate) = synthesis_rate {
        if tau >= rate {
            warnings.push(format!(
                "rate {tau} is not below the synthesis rate {rate}; the estimate may diverge with resolution"
            ));
        }
    }
    let mut m_est: f64 = 0.0;
    let mut used = 0;
    for &y in y_samples {
        let len = norm_sq(y).sqrt();
        if !(len > 0.0 && len <= 1.0) {
            continue;
        }
        used += 1;
        let d = translate(g, y, opts).sub(g).expect("translation keeps grids");
        m_est = m_est.max(m_norm(&d, tau) / len);
    }
    LipschitzEstimate {
        r_est: m_norm(g, tau),
        m_est,
        samples_used: used,
        warnings,
    }
}
