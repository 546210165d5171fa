use std::f64::consts::PI;

use crate::error::{config_err, Result};

/// Product rule on the unit sphere: Gauss-Legendre in `cos(theta)` times a
/// uniform rule in `phi`.
///
/// With an even number of azimuthal nodes every node has its antipode in
/// the set, stored exactly as `-omega`, so odd integrands cancel exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereQuadrature {
    n_theta: usize,
    n_phi: usize,
    nodes: Vec<[f64; 3]>,
    weights: Vec<f64>,
    antipode: Vec<usize>,
}

impl SphereQuadrature {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta == 0 {
            return Err(config_err("n_theta must be positive"));
        }
        if n_phi < 2 || n_phi % 2 != 0 {
            return Err(config_err(format!(
                "n_phi must be even and >= 2 for antipodal pairing, got {n_phi}"
            )));
        }
        let (mu, wmu) = gauss_legendre(n_theta);
        let dphi = 2.0 * PI / n_phi as f64;
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        let mut antipode = Vec::with_capacity(n_theta * n_phi);
        for i in 0..n_theta {
            let sin_t = (1.0 - mu[i] * mu[i]).max(0.0).sqrt();
            for k in 0..n_phi {
                let phi = dphi * (k as f64 + 0.5);
                nodes.push([sin_t * phi.cos(), sin_t * phi.sin(), mu[i]]);
                weights.push(wmu[i] * dphi);
                antipode.push((n_theta - 1 - i) * n_phi + (k + n_phi / 2) % n_phi);
            }
        }
        for j in 0..nodes.len() {
            let a = antipode[j];
            if j < a {
                let w = nodes[j];
                nodes[a] = [-w[0], -w[1], -w[2]];
            }
        }
        Ok(Self {
            n_theta,
            n_phi,
            nodes,
            weights,
            antipode,
        })
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn antipode(&self, j: usize) -> usize {
        self.antipode[j]
    }

    pub fn is_antipodal(&self) -> bool {
        true
    }

    /// One node of every antipodal pair, with the doubled weight.
    pub fn half_sphere(&self) -> Vec<([f64; 3], f64)> {
        (0..self.len())
            .filter(|&j| j < self.antipode[j])
            .map(|j| (self.nodes[j], 2.0 * self.weights[j]))
            .collect()
    }

    pub fn integrate(&self, f: impl Fn([f64; 3]) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&n, &w)| w * f(n))
            .sum()
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending and exactly
/// mirror-symmetric.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, z);
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = weight;
        w[n - 1 - i] = weight;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// `(P_n(z), P_n'(z))` by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}
