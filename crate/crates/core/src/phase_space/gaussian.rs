use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};

use super::field::DistributionField;
use super::grid::{norm_sq, SpatialPartition, VelocityGrid};

/// `amplitude * exp(-alpha |x - center_x|^2 - tau |v - center_v|^2)`.
///
/// Besides sampling, the spec knows closed-form bounds for its weighted
/// norms and translation-Lipschitz constant, which the oracle tests use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub amplitude: f64,
    pub alpha: f64,
    pub tau: f64,
    #[serde(default)]
    pub center_x: [f64; 3],
    #[serde(default)]
    pub center_v: [f64; 3],
}

impl GaussianSpec {
    pub fn centered(amplitude: f64, alpha: f64, tau: f64) -> Self {
        Self {
            amplitude,
            alpha,
            tau,
            center_x: [0.0; 3],
            center_v: [0.0; 3],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.amplitude.is_finite() {
            return Err(config_err("gaussian amplitude must be finite"));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(config_err(format!(
                "gaussian tau must be > 0, got {}",
                self.tau
            )));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(config_err(format!(
                "gaussian alpha must be >= 0, got {}",
                self.alpha
            )));
        }
        if self
            .center_x
            .iter()
            .chain(self.center_v.iter())
            .any(|c| !c.is_finite())
        {
            return Err(config_err("gaussian centres must be finite"));
        }
        Ok(())
    }

    pub fn eval(&self, x: [f64; 3], v: [f64; 3]) -> f64 {
        let dx = sub3(x, self.center_x);
        let dv = sub3(v, self.center_v);
        self.amplitude * (-self.alpha * norm_sq(dx) - self.tau * norm_sq(dv)).exp()
    }

    /// Free transport of the Gaussian: `g(x - t v, v)`.
    pub fn eval_transported(&self, t: f64, x: [f64; 3], v: [f64; 3]) -> f64 {
        self.eval([x[0] - t * v[0], x[1] - t * v[1], x[2] - t * v[2]], v)
    }

    pub fn sample(&self, partition: &SpatialPartition, grid: &VelocityGrid) -> Result<DistributionField> {
        self.validate()?;
        DistributionField::from_fn(*partition, *grid, |x, v| self.eval(x, v))
    }

    /// Whole-space integral; infinite when `alpha == 0`.
    pub fn l1_exact(&self) -> f64 {
        if self.alpha == 0.0 {
            return f64::INFINITY;
        }
        self.amplitude.abs() * (PI / self.alpha).powf(1.5) * (PI / self.tau).powf(1.5)
    }

    /// Exact `sup_v |g| exp(t v^2)`.
    pub fn b_norm(&self, t: f64) -> f64 {
        self.amplitude.abs() * weight_sup(self.tau, t, norm_sq(self.center_v))
    }

    /// Exact `sup_{x,v} |g| exp(t (x^2 + v^2))`.
    pub fn m_norm(&self, t: f64) -> f64 {
        self.amplitude.abs()
            * weight_sup(self.alpha, t, norm_sq(self.center_x))
            * weight_sup(self.tau, t, norm_sq(self.center_v))
    }

    /// `sup_{x,v} exp(t (x^2 + v^2)) |grad_x g|`.
    pub fn gradient_bound(&self, t: f64) -> f64 {
        if self.amplitude == 0.0 || self.alpha == 0.0 {
            return 0.0;
        }
        self.amplitude.abs()
            * self.spatial_gradient_factor(t)
            * weight_sup(self.tau, t, norm_sq(self.center_v))
    }

    /// A rigorous `M` with `||T_y g - g||_{M_t} <= M |y|` for all `|y| <= 1`.
    ///
    /// Moving the weight from `x` to `x + s y` costs a factor controlled by
    /// the split `|x|^2 <= (1 + e)|x + s y|^2 + (1 + 1/e)`, with `e` chosen so
    /// that the effective rate `t (1 + e)` sits midway between `t` and `alpha`.
    pub fn lipschitz_bound(&self, t: f64) -> f64 {
        if self.amplitude == 0.0 || self.alpha == 0.0 {
            return 0.0;
        }
        if t <= 0.0 {
            return self.gradient_bound(0.0);
        }
        if t >= self.alpha {
            return f64::INFINITY;
        }
        let t_eff = 0.5 * (self.alpha + t);
        let shift_cost = (t * (self.alpha + t) / (self.alpha - t)).exp();
        self.amplitude.abs()
            * self.spatial_gradient_factor(t_eff)
            * shift_cost
            * weight_sup(self.tau, t, norm_sq(self.center_v))
    }

    /// `sup_x exp(t x^2) |grad_x exp(-alpha |x - x0|^2)|`.
    fn spatial_gradient_factor(&self, t: f64) -> f64 {
        if t >= self.alpha {
            return f64::INFINITY;
        }
        let beta = self.alpha - t;
        let c = t * norm_sq(self.center_x).sqrt() / beta;
        2.0 * self.alpha
            * ((2.0 * E * beta).powf(-0.5) + c)
            * weight_sup(self.alpha, t, norm_sq(self.center_x))
    }
}

/// `sup_z exp(-rate |z - c|^2 + t |z|^2)` for `|c|^2 = c_sq`.
fn weight_sup(rate: f64, t: f64, c_sq: f64) -> f64 {
    if t < rate {
        (rate * t * c_sq / (rate - t)).exp()
    } else if t == rate && c_sq == 0.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Sample a single Gaussian on the given grids.
pub fn gaussian_field(
    spec: &GaussianSpec,
    partition: &SpatialPartition,
    grid: &VelocityGrid,
) -> Result<DistributionField> {
    spec.sample(partition, grid)
}

/// Finite sum of Gaussians. Norm and Lipschitz bounds are the sums of the
/// component bounds.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GaussianMixture {
    pub components: Vec<GaussianSpec>,
}

impl GaussianMixture {
    pub fn new(components: Vec<GaussianSpec>) -> Self {
        Self { components }
    }

    pub fn validate(&self) -> Result<()> {
        self.components.iter().try_for_each(GaussianSpec::validate)
    }

    pub fn eval(&self, x: [f64; 3], v: [f64; 3]) -> f64 {
        self.components.iter().map(|c| c.eval(x, v)).sum()
    }

    pub fn eval_transported(&self, t: f64, x: [f64; 3], v: [f64; 3]) -> f64 {
        self.components
            .iter()
            .map(|c| c.eval_transported(t, x, v))
            .sum()
    }

    pub fn sample(&self, partition: &SpatialPartition, grid: &VelocityGrid) -> Result<DistributionField> {
        self.validate()?;
        DistributionField::from_fn(*partition, *grid, |x, v| self.eval(x, v))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::new(
            self.components
                .iter()
                .map(|g| GaussianSpec {
                    amplitude: c * g.amplitude,
                    ..*g
                })
                .collect(),
        )
    }

    /// Upper bound on the B-norm at rate `t`.
    pub fn b_norm_bound(&self, t: f64) -> f64 {
        self.components.iter().map(|c| c.b_norm(t)).sum()
    }

    /// Upper bound on the M-norm at rate `t`.
    pub fn m_norm_bound(&self, t: f64) -> f64 {
        self.components.iter().map(|c| c.m_norm(t)).sum()
    }

    pub fn lipschitz_bound(&self, t: f64) -> f64 {
        self.components.iter().map(|c| c.lipschitz_bound(t)).sum()
    }

    /// Smallest spatial and velocity decay rates over the components.
    pub fn min_rates(&self) -> (f64, f64) {
        self.components.iter().fold((f64::INFINITY, f64::INFINITY), |(a, t), c| {
            (a.min(c.alpha), t.min(c.tau))
        })
    }
}
