//! Streaming, translation, homogenization and the collision operator family.

mod collision;
mod homogenize;
mod moment_fix;
mod streaming;

pub use collision::{cell_singular_average, CollisionOperator, GainInterpolation};
pub use homogenize::homogenize;
pub use moment_fix::{invariants, moment_fix};
pub use streaming::{
    stream, support_check, translate, BoundaryMode, StreamOptions, StreamingScheme, SupportCheck,
};

use crate::error::{Error, Result};
use crate::kernels::{KernelSpec, SphereQuadrature};
use crate::phase_space::DistributionField;

/// Post-collision velocities `(v', v*')` for a collision parameter `omega`.
pub fn post_collision(v: [f64; 3], vs: [f64; 3], omega: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let dot = (0..3).map(|d| (v[d] - vs[d]) * omega[d]).sum::<f64>();
    let vp = [0, 1, 2].map(|d| v[d] - dot * omega[d]);
    let vsp = [0, 1, 2].map(|d| vs[d] + dot * omega[d]);
    (vp, vsp)
}

fn operator(g: &DistributionField, spec: &KernelSpec, quad: &SphereQuadrature) -> Result<CollisionOperator> {
    CollisionOperator::new(*spec, quad, *g.grid(), GainInterpolation::default())
}

/// `S_B(g, h)`.
pub fn loss_term(
    g: &DistributionField,
    h: &DistributionField,
    spec: &KernelSpec,
    quad: &SphereQuadrature,
) -> Result<DistributionField> {
    operator(g, spec, quad)?.loss(g, h)
}

/// `P_B(g, h)`.
pub fn gain_term(
    g: &DistributionField,
    h: &DistributionField,
    spec: &KernelSpec,
    quad: &SphereQuadrature,
) -> Result<DistributionField> {
    operator(g, spec, quad)?.gain(g, h)
}

/// `J(g) = P_B(g, g) - S_B(g, g)`.
pub fn collision(g: &DistributionField, spec: &KernelSpec, quad: &SphereQuadrature) -> Result<DistributionField> {
    operator(g, spec, quad)?.bilinear(g, g)
}

/// `J_pi(g) = J_B(g, pi g)`.
pub fn homogenized_collision(
    g: &DistributionField,
    spec: &KernelSpec,
    quad: &SphereQuadrature,
) -> Result<DistributionField> {
    operator(g, spec, quad)?.homogenized(g)
}

/// `E(g)`: the loss-term frequency built from the cell-averaged field.
pub fn collision_frequency(
    g: &DistributionField,
    spec: &KernelSpec,
    quad: &SphereQuadrature,
) -> Result<DistributionField> {
    operator(g, spec, quad)?.collision_frequency(g)
}

/// `I(g, h, t, s) = J_pi(U^t g) - U^s J(h)`.
#[allow(clippy::too_many_arguments)]
pub fn defect(
    g: &DistributionField,
    h: &DistributionField,
    t: f64,
    s: f64,
    spec: &KernelSpec,
    quad: &SphereQuadrature,
    opts: StreamOptions,
) -> Result<DistributionField> {
    operator(g, spec, quad)?.defect(g, h, t, s, opts)
}

impl CollisionOperator {
    /// `J(g)`.
    pub fn collision(&self, g: &DistributionField) -> Result<DistributionField> {
        self.bilinear(g, g)
    }

    /// `J_pi(g) = J_B(g, pi g)`.
    pub fn homogenized(&self, g: &DistributionField) -> Result<DistributionField> {
        self.bilinear(g, &homogenize(g))
    }

    /// Gain and loss of `J_pi(g)`.
    pub fn homogenized_parts(&self, g: &DistributionField) -> Result<(DistributionField, DistributionField)> {
        self.gain_loss(g, &homogenize(g))
    }

    /// `E(g)`; requires `g >= 0`.
    pub fn collision_frequency(&self, g: &DistributionField) -> Result<DistributionField> {
        if !g.is_nonnegative() {
            return Err(Error::Precondition(
                "collision frequency needs a nonnegative field".into(),
            ));
        }
        self.frequency(&homogenize(g))
    }

    /// `I(g, h, t, s) = J_pi(U^t g) - U^s J(h)`.
    pub fn defect(
        &self,
        g: &DistributionField,
        h: &DistributionField,
        t: f64,
        s: f64,
        opts: StreamOptions,
    ) -> Result<DistributionField> {
        g.check_same_grids(h)?;
        let left = self.homogenized(&stream(g, t, opts))?;
        let right = stream(&self.collision(h)?, s, opts);
        left.sub(&right)
    }
}

#[cfg(test)]
mod tests;
