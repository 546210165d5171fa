//! The recurrence `f^j = U^dt f^{j-1} + dt J_pi(U^dt f^{j-1})` and its
//! step-function trajectory.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::analysis::{b_norm, m_norm, moments};
use crate::constants::c_lambda;
use crate::error::{config_err, Error, Result};
use crate::kernels::{KernelSpec, SphereQuadrature};
use crate::operators::{
    moment_fix, stream, support_check, CollisionOperator, GainInterpolation, StreamOptions,
};
use crate::phase_space::DistributionField;

/// Declared `B_sigma` bound `R + rho` used by the positivity guard.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuardSpec {
    pub r_plus_rho: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeParams {
    pub dt: f64,
    pub horizon: f64,
    pub kernel: KernelSpec,
    pub quadrature: SphereQuadrature,
    pub stream: StreamOptions,
    pub interpolation: GainInterpolation,
    pub moment_fix: bool,
    /// Rate of the `B` and `M` norms recorded in the diagnostics.
    pub norm_rate: f64,
    pub guard: Option<GuardSpec>,
    /// Keep every snapshot while `J + 1` does not exceed this.
    pub snapshot_cap: usize,
    /// Times whose snapshots are kept regardless of the cap.
    pub snapshot_times: Vec<f64>,
    /// Samples below this magnitude do not count as support.
    pub support_threshold: f64,
}

impl SchemeParams {
    pub fn new(dt: f64, horizon: f64, kernel: KernelSpec, quadrature: SphereQuadrature) -> Self {
        Self {
            dt,
            horizon,
            kernel,
            quadrature,
            stream: StreamOptions::default(),
            interpolation: GainInterpolation::default(),
            moment_fix: false,
            norm_rate: 0.5,
            guard: None,
            snapshot_cap: 64,
            snapshot_times: Vec::new(),
            support_threshold: 1e-14,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(config_err(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.horizon.is_finite() && self.dt < self.horizon) {
            return Err(config_err(format!(
                "need 0 < dt < T, got dt = {}, T = {}",
                self.dt, self.horizon
            )));
        }
        if !(self.norm_rate.is_finite() && self.norm_rate >= 0.0) {
            return Err(config_err("norm rate must be nonnegative"));
        }
        if let Some(t) = self.snapshot_times.iter().find(|t| !(**t >= 0.0 && **t < self.horizon)) {
            return Err(config_err(format!("snapshot time {t} outside [0, T)")));
        }
        self.kernel.validate()
    }

    /// `J = [[T / dt]]`.
    pub fn steps(&self) -> usize {
        snapped_floor(self.horizon / self.dt) as usize
    }
}

/// `1 / D0` with `D0 = c_{L,sigma} (R + rho) / 2`.
pub fn positivity_timestep(r_plus_rho: f64, sigma: f64, spec: &KernelSpec) -> Result<f64> {
    if !(r_plus_rho.is_finite() && r_plus_rho > 0.0) {
        return Err(config_err(format!("R + rho must be positive, got {r_plus_rho}")));
    }
    Ok(2.0 / (c_lambda(spec.b0, spec.lambda, sigma)? * r_plus_rho))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuardReport {
    pub declared: GuardSpec,
    pub max_timestep: f64,
    pub dt: f64,
    pub respected: bool,
    /// Measured `B_sigma` norm of the initial field.
    pub measured_b_norm: f64,
}

/// One diagnostics row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub t: f64,
    pub mass: f64,
    pub px: f64,
    pub py: f64,
    pub pz: f64,
    pub energy: f64,
    pub l1: f64,
    pub bnorm: f64,
    pub mnorm: f64,
    pub minval: f64,
}

impl Diagnostics {
    pub const HEADER: [&'static str; 10] =
        ["t", "mass", "px", "py", "pz", "energy", "l1", "bnorm", "mnorm", "minval"];

    pub fn measure(f: &DistributionField, t: f64, rate: f64) -> Self {
        let m = moments(f);
        Self {
            t,
            mass: m.mass,
            px: m.momentum[0],
            py: m.momentum[1],
            pz: m.momentum[2],
            energy: m.energy,
            l1: f.l1(),
            bnorm: b_norm(f, rate),
            mnorm: m_norm(f, rate),
            minval: f.min_value(),
        }
    }

    pub fn values(&self) -> [f64; 10] {
        [
            self.t, self.mass, self.px, self.py, self.pz, self.energy, self.l1, self.bnorm, self.mnorm,
            self.minval,
        ]
    }
}

/// Snapshots `f^j` (those retained), diagnostics for every `j = 0..=J`,
/// and warnings raised during the run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub horizon: f64,
    pub steps: usize,
    pub snapshots: BTreeMap<usize, DistributionField>,
    pub diagnostics: Vec<Diagnostics>,
    pub guard: Option<GuardReport>,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn snapshot(&self, j: usize) -> Option<&DistributionField> {
        self.snapshots.get(&j)
    }

    pub fn last(&self) -> Option<&DistributionField> {
        self.snapshots.get(&self.steps)
    }

    pub fn min_value(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.minval).fold(f64::INFINITY, f64::min)
    }
}

/// Index `j` of the step function at time `t`: `(j - 1) dt <= t < j dt`.
pub fn step_index(dt: f64, horizon: f64, t: f64) -> Result<usize> {
    if !(t >= 0.0 && t < horizon) {
        return Err(Error::Domain(format!("time {t} outside [0, {horizon})")));
    }
    Ok(snapped_floor(t / dt) as usize + 1)
}

/// `floor(r)`, except that ratios within rounding of an integer snap to it;
/// times are usually exact multiples of `dt` up to rounding.
fn snapped_floor(r: f64) -> f64 {
    if (r - r.round()).abs() <= 1e-9 * r.max(1.0) {
        r.round()
    } else {
        r.floor()
    }
}

/// The piecewise-constant trajectory `f_{dt,dx}(t)`, equal to `f^j` on
/// `[(j - 1) dt, j dt)`; `f^0` itself is never returned.
pub fn trajectory_at(traj: &Trajectory, t: f64) -> Result<&DistributionField> {
    let j = step_index(traj.dt, traj.horizon, t)?;
    if j > traj.steps {
        return Err(Error::Domain(format!(
            "time {t} lies past the last computed step {}",
            traj.steps
        )));
    }
    traj.snapshots.get(&j).ok_or_else(|| {
        Error::Precondition(format!("snapshot {j} for time {t} was not retained"))
    })
}

/// A prepared scheme: parameters plus the collision operator built once.
#[derive(Debug, Clone)]
pub struct Scheme {
    params: SchemeParams,
    operator: Option<CollisionOperator>,
}

impl Scheme {
    pub fn new(params: SchemeParams, grid: crate::phase_space::VelocityGrid) -> Result<Self> {
        params.validate()?;
        let operator = if params.kernel.is_collisionless() {
            None
        } else {
            Some(CollisionOperator::new(
                params.kernel,
                &params.quadrature,
                grid,
                params.interpolation,
            )?)
        };
        Ok(Self { params, operator })
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    /// `U^dt f + dt J_pi(U^dt f)`; `index` labels errors.
    pub fn step(&self, f_prev: &DistributionField, index: usize) -> Result<DistributionField> {
        if !f_prev.is_finite() {
            return Err(Error::NonFinite { step: index.saturating_sub(1) });
        }
        let streamed = stream(f_prev, self.params.dt, self.params.stream);
        let Some(op) = &self.operator else {
            return Ok(streamed);
        };
        let (gain, loss) = op.homogenized_parts(&streamed)?;
        let mut increment = gain.sub(&loss)?;
        if self.params.moment_fix {
            increment = moment_fix(&increment, &loss)?;
        }
        let next = streamed.lin_comb(1.0, &increment, self.params.dt)?;
        if !next.is_finite() {
            return Err(Error::NonFinite { step: index });
        }
        Ok(next)
    }

    pub fn run(&self, f0: &DistributionField) -> Result<Trajectory> {
        self.run_with(f0, |_, _| Ok(()))
    }

    /// Run all `J` steps, handing every iterate to `observer` before it is
    /// possibly dropped.
    pub fn run_with<F>(&self, f0: &DistributionField, mut observer: F) -> Result<Trajectory>
    where
        F: FnMut(usize, &DistributionField) -> Result<()>,
    {
        let p = &self.params;
        if !f0.is_finite() {
            return Err(Error::NonFinite { step: 0 });
        }
        let steps = p.steps();
        let keep_all = steps < p.snapshot_cap;
        let mut keep: Vec<usize> = p
            .snapshot_times
            .iter()
            .filter_map(|&t| step_index(p.dt, p.horizon, t).ok())
            .filter(|&j| j <= steps)
            .collect();
        keep.extend([0, steps]);
        let mut warnings = Vec::new();
        let guard = match p.guard {
            Some(spec) => {
                let max_timestep = positivity_timestep(spec.r_plus_rho, spec.sigma, &p.kernel)?;
                let measured = b_norm(f0, spec.sigma);
                if measured > spec.r_plus_rho {
                    warnings.push(format!(
                        "measured B norm {measured:.6e} of the initial field exceeds the declared bound {:.6e}",
                        spec.r_plus_rho
                    ));
                }
                if p.dt > max_timestep {
                    warnings.push(format!(
                        "dt = {} exceeds the positivity guard {max_timestep:.6e}",
                        p.dt
                    ));
                }
                Some(GuardReport {
                    declared: spec,
                    max_timestep,
                    dt: p.dt,
                    respected: p.dt <= max_timestep,
                    measured_b_norm: measured,
                })
            }
            None => None,
        };
        let reach = support_check(f0, p.horizon, p.support_threshold);
        if !reach.contained && p.stream.boundary == crate::operators::BoundaryMode::Open {
            warnings.push(format!(
                "support may leave the box within the horizon (margin {:.3e})",
                reach.margin
            ));
        }
        let mut snapshots = BTreeMap::new();
        let mut diagnostics = Vec::with_capacity(steps + 1);
        diagnostics.push(Diagnostics::measure(f0, 0.0, p.norm_rate));
        observer(0, f0)?;
        snapshots.insert(0, f0.clone());
        let mut current = f0.clone();
        for j in 1..=steps {
            current = self.step(&current, j)?;
            diagnostics.push(Diagnostics::measure(&current, j as f64 * p.dt, p.norm_rate));
            observer(j, &current)?;
            if keep_all || keep.contains(&j) {
                snapshots.insert(j, current.clone());
            }
        }
        Ok(Trajectory {
            dt: p.dt,
            horizon: p.horizon,
            steps,
            snapshots,
            diagnostics,
            guard,
            warnings,
        })
    }
}

/// One step with a freshly built operator.
pub fn step(f_prev: &DistributionField, params: &SchemeParams) -> Result<DistributionField> {
    Scheme::new(params.clone(), *f_prev.grid())?.step(f_prev, 1)
}

pub fn run(f0: &DistributionField, params: &SchemeParams) -> Result<Trajectory> {
    Scheme::new(params.clone(), *f0.grid())?.run(f0)
}
