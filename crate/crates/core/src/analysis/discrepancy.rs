use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase_space::DistributionField;

/// Largest nodes-per-axis (spatial and velocity) for the full 6D sweep.
pub const DISCREPANCY_CAP: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscrepancyKind {
    /// Supremum over all 6D corner thresholds.
    Full,
    /// Maximum of the six one-dimensional marginal discrepancies; a lower
    /// bound on the full value.
    Marginal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub value: f64,
    pub kind: DiscrepancyKind,
    /// Number of corner thresholds the full sweep visits.
    pub corners: u64,
}

fn unit_masses(g: &DistributionField) -> Result<Vec<f64>> {
    if !g.is_nonnegative() {
        return Err(Error::Precondition("discrepancy needs nonnegative fields".into()));
    }
    let total: f64 = g.values().iter().sum();
    if total <= 0.0 {
        return Err(Error::Precondition("discrepancy of a zero-mass field".into()));
    }
    Ok(g.values().iter().map(|v| v / total).collect())
}

/// Cumulative sums along every axis of a 6D array with the given extents.
fn prefix_sums(mut a: Vec<f64>, dims: [usize; 6]) -> Vec<f64> {
    let mut stride = 1;
    for axis in (0..6).rev() {
        let n = dims[axis];
        let block = stride * n;
        for base in (0..a.len()).step_by(block) {
            for off in 0..stride {
                let mut acc = 0.0;
                for k in 0..n {
                    let i = base + k * stride + off;
                    acc += a[i];
                    a[i] = acc;
                }
            }
        }
        stride = block;
    }
    a
}

/// `sup_z |G(z) - H(z)|` for the unit-mass normalised cell measures.
///
/// Both densities are constant on each phase-space cell, so the supremum is
/// attained at cell corners. Above [`DISCREPANCY_CAP`] only marginals are
/// computed.
pub fn discrepancy(g: &DistributionField, h: &DistributionField) -> Result<Discrepancy> {
    g.check_same_grids(h)?;
    let nx = g.partition().fine_cells_per_axis();
    let nv = g.grid().nodes_per_axis();
    let corners = ((nx * nx * nx) as u64) * ((nv * nv * nv) as u64);
    let diff: Vec<f64> = unit_masses(g)?
        .iter()
        .zip(unit_masses(h)?)
        .map(|(a, b)| a - b)
        .collect();
    let dims = [nx, nx, nx, nv, nv, nv];
    if nx <= DISCREPANCY_CAP && nv <= DISCREPANCY_CAP {
        let value = prefix_sums(diff, dims).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        return Ok(Discrepancy {
            value,
            kind: DiscrepancyKind::Full,
            corners,
        });
    }
    let mut value: f64 = 0.0;
    for axis in 0..6 {
        let mut marginal = vec![0.0; dims[axis]];
        for (i, d) in diff.iter().enumerate() {
            let mut rest = i;
            let mut idx = 0;
            for a in (0..6).rev() {
                let k = rest % dims[a];
                rest /= dims[a];
                if a == axis {
                    idx = k;
                }
            }
            marginal[idx] += d;
        }
        let mut acc = 0.0;
        for m in marginal {
            acc += m;
            value = value.max(acc.abs());
        }
    }
    Ok(Discrepancy {
        value,
        kind: DiscrepancyKind::Marginal,
        corners,
    })
}
