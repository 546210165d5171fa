use serde::{Deserialize, Serialize};

use crate::phase_space::norm_sq;
use crate::scheme::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    /// `max (f - E) / R` over retained snapshots and samples, clipped at 0.
    pub max_excess: f64,
    /// Step index where the maximum occurs.
    pub step: usize,
}

/// Compare a trajectory with the comoving envelope
/// `E(t, x, v) = R exp(-tau0 (x - t v)^2 - tau0 v^2)` at `t = j dt`.
pub fn envelope_check(traj: &Trajectory, r_env: f64, tau0: f64) -> EnvelopeReport {
    let mut report = EnvelopeReport {
        max_excess: 0.0,
        step: 0,
    };
    for (&j, f) in &traj.snapshots {
        let t = j as f64 * traj.dt;
        let nodes = f.grid().nodes();
        for c in 0..f.n_cells() {
            let x = f.partition().center(c);
            for (val, v) in f.cell(c).iter().zip(&nodes) {
                let shifted = [x[0] - t * v[0], x[1] - t * v[1], x[2] - t * v[2]];
                let env = r_env * (-tau0 * (norm_sq(shifted) + norm_sq(*v))).exp();
                let excess = (val - env) / r_env;
                if excess > report.max_excess {
                    report = EnvelopeReport {
                        max_excess: excess,
                        step: j,
                    };
                }
            }
        }
    }
    report
}
