use serde::{Deserialize, Serialize};

use crate::phase_space::{norm_sq, DistributionField};

/// Norms of one field at a list of weight rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub l1: f64,
    pub rates: Vec<f64>,
    pub b_norm: Vec<f64>,
    pub m_norm: Vec<f64>,
}

/// Mass, momentum and energy (`int |v|^2 g`).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Moments {
    pub mass: f64,
    pub momentum: [f64; 3],
    pub energy: f64,
}

impl Moments {
    pub fn as_array(&self) -> [f64; 5] {
        [self.mass, self.momentum[0], self.momentum[1], self.momentum[2], self.energy]
    }
}

pub fn l1_norm(g: &DistributionField) -> f64 {
    g.l1()
}

/// `max |g| exp(tau v^2)` over the samples.
pub fn b_norm(g: &DistributionField, tau: f64) -> f64 {
    let w: Vec<f64> = g.grid().nodes().iter().map(|&v| (tau * norm_sq(v)).exp()).collect();
    (0..g.n_cells())
        .map(|c| {
            g.cell(c)
                .iter()
                .zip(&w)
                .fold(0.0f64, |m, (f, w)| m.max(f.abs() * w))
        })
        .fold(0.0, f64::max)
}

/// `max |g| exp(tau (x^2 + v^2))` over the samples.
pub fn m_norm(g: &DistributionField, tau: f64) -> f64 {
    let w: Vec<f64> = g.grid().nodes().iter().map(|&v| (tau * norm_sq(v)).exp()).collect();
    (0..g.n_cells())
        .map(|c| {
            let wx = (tau * norm_sq(g.partition().center(c))).exp();
            g.cell(c)
                .iter()
                .zip(&w)
                .fold(0.0f64, |m, (f, w)| m.max(f.abs() * w))
                * wx
        })
        .fold(0.0, f64::max)
}

pub fn norms(g: &DistributionField, rates: &[f64]) -> NormReport {
    NormReport {
        l1: g.l1(),
        rates: rates.to_vec(),
        b_norm: rates.iter().map(|&t| b_norm(g, t)).collect(),
        m_norm: rates.iter().map(|&t| m_norm(g, t)).collect(),
    }
}

pub fn moments(g: &DistributionField) -> Moments {
    let nodes = g.grid().nodes();
    let mut acc = [0.0; 5];
    for c in 0..g.n_cells() {
        for (f, v) in g.cell(c).iter().zip(&nodes) {
            acc[0] += f;
            acc[1] += f * v[0];
            acc[2] += f * v[1];
            acc[3] += f * v[2];
            acc[4] += f * norm_sq(*v);
        }
    }
    let vol = g.sample_volume();
    Moments {
        mass: acc[0] * vol,
        momentum: [acc[1] * vol, acc[2] * vol, acc[3] * vol],
        energy: acc[4] * vol,
    }
}
