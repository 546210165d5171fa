use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};
use crate::phase_space::{GaussianMixture, GaussianSpec};

/// Random Gaussian mixtures with closed-form norm and Lipschitz bounds.
///
/// Every component decays at velocity rate `tau` drawn from `tau_range`,
/// which must lie strictly above any rate the bounds are taken at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    #[serde(default = "default_components")]
    pub components: [usize; 2],
    #[serde(default = "default_amplitude")]
    pub amplitude: [f64; 2],
    pub alpha: [f64; 2],
    pub tau: [f64; 2],
    /// Centres are drawn uniformly from `[-x, x]^3` and `[-v, v]^3`.
    #[serde(default)]
    pub center_x: f64,
    #[serde(default)]
    pub center_v: f64,
}

fn default_components() -> [usize; 2] {
    [1, 3]
}

fn default_amplitude() -> [f64; 2] {
    [0.1, 1.0]
}

fn range_ok(r: [f64; 2], lo: f64) -> bool {
    r[0].is_finite() && r[1].is_finite() && r[0] >= lo && r[0] <= r[1]
}

impl FamilySpec {
    pub fn validate(&self) -> Result<()> {
        if self.components[0] == 0 || self.components[0] > self.components[1] {
            return Err(config_err("family component counts must satisfy 1 <= min <= max"));
        }
        if !range_ok(self.amplitude, 0.0) {
            return Err(config_err("family amplitude range must be ordered and nonnegative"));
        }
        if !range_ok(self.alpha, 0.0) || self.alpha[0] <= 0.0 {
            return Err(config_err("family alpha range must be ordered and positive"));
        }
        if !range_ok(self.tau, 0.0) || self.tau[0] <= 0.0 {
            return Err(config_err("family tau range must be ordered and positive"));
        }
        if !(self.center_x >= 0.0 && self.center_v >= 0.0) {
            return Err(config_err("family centre spreads must be nonnegative"));
        }
        Ok(())
    }

    /// Smallest velocity rate any member can have.
    pub fn min_tau(&self) -> f64 {
        self.tau[0]
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> GaussianMixture {
        let n = rng.gen_range(self.components[0]..=self.components[1]);
        let draw = |rng: &mut ChaCha8Rng, r: [f64; 2]| {
            if r[0] == r[1] {
                r[0]
            } else {
                rng.gen_range(r[0]..r[1])
            }
        };
        let spread = |rng: &mut ChaCha8Rng, s: f64| -> [f64; 3] {
            if s == 0.0 {
                [0.0; 3]
            } else {
                [0, 1, 2].map(|_| rng.gen_range(-s..s))
            }
        };
        GaussianMixture::new(
            (0..n)
                .map(|_| GaussianSpec {
                    amplitude: draw(rng, self.amplitude),
                    alpha: draw(rng, self.alpha),
                    tau: draw(rng, self.tau),
                    center_x: spread(rng, self.center_x),
                    center_v: spread(rng, self.center_v),
                })
                .collect(),
        )
    }

    /// A member scaled into `M_tau(r, m)`, using the analytic bounds.
    pub fn sample_member(&self, rng: &mut ChaCha8Rng, tau: f64, r: f64, m: f64) -> GaussianMixture {
        let g = self.sample(rng);
        let (rg, mg) = (g.m_norm_bound(tau), g.lipschitz_bound(tau));
        let mut scale: f64 = 1.0;
        if rg > r {
            scale = scale.min(r / rg);
        }
        if mg > m {
            scale = scale.min(m / mg);
        }
        g.scaled(scale)
    }
}
