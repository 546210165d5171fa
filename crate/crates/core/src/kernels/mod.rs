//! Collision kernels obeying Grad's soft cutoff, quadrature on the unit
//! sphere, and the Gauss Pi function.

mod gamma;
mod sphere;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{config_err, Error, Result};

pub use gamma::gauss_pi;
pub use sphere::SphereQuadrature;
pub(crate) use sphere::gauss_legendre;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelForm {
    /// `b = b0 / 4pi`, the Maxwellian-molecule case.
    ConstantMaxwell,
    /// `b = (b0 / 4pi) |v - v*|^-lambda`, isotropic in the angle.
    PowerLawSoft,
}

impl std::str::FromStr for KernelForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant_maxwell" => Ok(Self::ConstantMaxwell),
            "power_law_soft" => Ok(Self::PowerLawSoft),
            other => Err(config_err(format!(
                "unknown kernel form {other:?} (expected constant_maxwell or power_law_soft)"
            ))),
        }
    }
}

/// Collision kernel with cutoff parameters `(b0, lambda)`.
///
/// `b0 = 0` is accepted and describes the collisionless limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub form: KernelForm,
    pub b0: f64,
    pub lambda: f64,
    /// Relative speeds below this value are raised to it.
    pub speed_floor: f64,
}

pub const DEFAULT_SPEED_FLOOR: f64 = 1e-6;

impl KernelSpec {
    pub fn new(form: KernelForm, b0: f64, lambda: f64) -> Result<Self> {
        let spec = Self {
            form,
            b0,
            lambda,
            speed_floor: DEFAULT_SPEED_FLOOR,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn maxwell(b0: f64) -> Result<Self> {
        Self::new(KernelForm::ConstantMaxwell, b0, 0.0)
    }

    pub fn soft(b0: f64, lambda: f64) -> Result<Self> {
        Self::new(KernelForm::PowerLawSoft, b0, lambda)
    }

    pub fn with_speed_floor(mut self, floor: f64) -> Result<Self> {
        self.speed_floor = floor;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && (0.0..2.0).contains(&self.lambda)) {
            return Err(config_err(format!(
                "kernel lambda must lie in [0, 2) for the soft cutoff to hold, got {}",
                self.lambda
            )));
        }
        if self.form == KernelForm::ConstantMaxwell && self.lambda != 0.0 {
            return Err(config_err("constant_maxwell requires lambda = 0"));
        }
        if !(self.b0.is_finite() && self.b0 >= 0.0) {
            return Err(config_err(format!(
                "kernel b0 must be nonnegative, got {}",
                self.b0
            )));
        }
        if !(self.speed_floor.is_finite() && self.speed_floor > 0.0) {
            return Err(config_err("speed floor must be positive"));
        }
        Ok(())
    }

    pub fn is_collisionless(&self) -> bool {
        self.b0 == 0.0
    }

    /// Closed form of the angular integral: `b0 * max(s, floor)^-lambda`.
    pub fn angular_total(&self, relative_speed: f64) -> f64 {
        if self.lambda == 0.0 {
            self.b0
        } else {
            self.b0 * relative_speed.max(self.speed_floor).powf(-self.lambda)
        }
    }
}

/// `b(|v - v*|, omega)`; isotropic, so `cos_angle` is only range-checked.
pub fn kernel_value(spec: &KernelSpec, relative_speed: f64, cos_angle: f64) -> Result<f64> {
    spec.validate()?;
    if !(relative_speed >= 0.0) {
        return Err(Error::Domain(format!(
            "relative speed must be >= 0, got {relative_speed}"
        )));
    }
    if !(-1.0 - 1e-12..=1.0 + 1e-12).contains(&cos_angle) {
        return Err(Error::Domain(format!("cosine {cos_angle} outside [-1, 1]")));
    }
    Ok(spec.angular_total(relative_speed) / (4.0 * PI))
}

/// Quadrature estimate of `int_{S^2} b(s, omega) d omega`.
pub fn angular_integral(spec: &KernelSpec, quad: &SphereQuadrature, relative_speed: f64) -> Result<f64> {
    if !(relative_speed > 0.0) {
        return Err(Error::Domain(format!(
            "relative speed must be > 0, got {relative_speed}"
        )));
    }
    let mut total = 0.0;
    for (w, n) in quad.weights().iter().zip(quad.nodes()) {
        total += w * kernel_value(spec, relative_speed, n[2])?;
    }
    Ok(total)
}

/// Check the cutoff bound on `count` log-spaced speeds in `[lo, hi]`.
/// Returns the worst ratio `integral / (b0 s^-lambda)`.
pub fn verify_cutoff(
    spec: &KernelSpec,
    quad: &SphereQuadrature,
    lo: f64,
    hi: f64,
    count: usize,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for j in 0..count {
        let frac = if count > 1 { j as f64 / (count - 1) as f64 } else { 0.0 };
        let s = lo * (hi / lo).powf(frac);
        let bound = spec.b0 * s.powf(-spec.lambda);
        if bound > 0.0 {
            worst = worst.max(angular_integral(spec, quad, s)? / bound);
        }
    }
    Ok(worst)
}
