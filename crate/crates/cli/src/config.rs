//! The TOML run configuration, its defaults and fail-fast validation.

use std::path::{Path, PathBuf};

use kdl_core::analysis::{CampaignSpec, FamilySpec, Resolution};
use kdl_core::constants::ConstantsInput;
use kdl_core::{
    BoundaryMode, GainInterpolation, GaussianMixture, GaussianSpec, KernelForm, KernelSpec,
    SpatialPartition, SphereQuadrature, StreamOptions, StreamingScheme, VelocityGrid,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// The only schema version this binary reads.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub version: u32,
    /// Seeds every random draw (the inequality campaign).
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub domain: DomainConfig,
    #[serde(default)]
    pub kernel: KernelConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub scheme: SchemeConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DomainConfig {
    /// The spatial box is `[-half_width, half_width]^3`.
    pub half_width: f64,
    pub fine_cells: usize,
    pub block_factor: usize,
    pub v_max: f64,
    pub velocity_nodes: usize,
}

impl Default for DomainConfig {
    fn default() -> Self {
        Self {
            half_width: 2.0,
            fine_cells: 8,
            block_factor: 2,
            v_max: 3.0,
            velocity_nodes: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelConfig {
    pub form: KernelForm,
    pub b0: f64,
    pub lambda: f64,
    pub n_theta: usize,
    pub n_phi: usize,
    pub speed_floor: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            form: KernelForm::ConstantMaxwell,
            b0: 1.0,
            lambda: 0.0,
            n_theta: 2,
            n_phi: 4,
            speed_floor: kdl_core::kernels::DEFAULT_SPEED_FLOOR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialConfig {
    pub components: Vec<GaussianSpec>,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            components: vec![GaussianSpec::centered(0.05, 2.0, 2.0)],
        }
    }
}

impl InitialConfig {
    pub fn mixture(&self) -> GaussianMixture {
        GaussianMixture::new(self.components.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SchemeConfig {
    pub dt: f64,
    pub horizon: f64,
    pub streaming: StreamingScheme,
    pub boundary: BoundaryMode,
    pub interpolation: GainInterpolation,
    pub moment_fix: bool,
    pub snapshot_times: Vec<f64>,
    pub snapshot_cap: usize,
    pub norm_rate: f64,
    /// Declared `(R + rho, sigma)`; taken from the constants section when absent.
    pub guard: Option<GuardConfig>,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            dt: 0.05,
            horizon: 0.25,
            streaming: StreamingScheme::ConservativeRemap,
            boundary: BoundaryMode::Open,
            interpolation: GainInterpolation::MonotoneCubic,
            moment_fix: false,
            snapshot_times: Vec::new(),
            snapshot_cap: 64,
            norm_rate: 0.5,
            guard: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuardConfig {
    pub r_plus_rho: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    /// Rates at which the final field's norms are reported.
    pub tau_list: Vec<f64>,
    pub constants: ConstantsConfig,
    pub campaign: CampaignConfig,
    pub convergence: ConvergenceConfig,
    pub discrepancy: DiscrepancyConfig,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            tau_list: vec![0.5, 1.0],
            constants: ConstantsConfig::default(),
            campaign: CampaignConfig::default(),
            convergence: ConvergenceConfig::default(),
            discrepancy: DiscrepancyConfig::default(),
        }
    }
}

/// Class parameters of the constants report; `b0` and `lambda` come from
/// the kernel section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConstantsConfig {
    pub r: f64,
    pub m: f64,
    pub t: f64,
    pub tau: f64,
    pub sigma: f64,
    pub tau1: f64,
    pub tau_star: f64,
    pub m0: f64,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        Self {
            r: 1.0,
            m: 1.0,
            t: 1.0,
            tau: 1.0,
            sigma: 0.5,
            tau1: 0.5,
            tau_star: 1.0,
            m0: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FamilyConfig {
    pub components: [usize; 2],
    pub amplitude: [f64; 2],
    pub alpha: [f64; 2],
    pub tau: [f64; 2],
    pub center_x: f64,
    pub center_v: f64,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        Self {
            components: [1, 3],
            amplitude: [0.1, 1.0],
            alpha: [1.5, 3.0],
            tau: [1.5, 3.0],
            center_x: 0.3,
            center_v: 0.3,
        }
    }
}

/// The inequality campaign; its rates come from the constants section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CampaignConfig {
    pub trials: usize,
    pub max_time: f64,
    pub interpolation: GainInterpolation,
    pub family: FamilyConfig,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            trials: 100,
            max_time: 0.25,
            interpolation: GainInterpolation::MonotoneCubic,
            family: FamilyConfig::default(),
        }
    }
}

/// `levels` are `[dt, block_factor]` pairs; empty means
/// `(dt, 4), (dt/2, 2), (dt/4, 1)` against `(dt/16, 1)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ConvergenceConfig {
    pub levels: Vec<(f64, usize)>,
    pub reference: Option<(f64, usize)>,
}

/// Two `KDL1` snapshot files to compare; without them the run's initial
/// and final fields are compared.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct DiscrepancyConfig {
    pub first: Option<PathBuf>,
    pub second: Option<PathBuf>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("kdl-out")
}

impl RunConfig {
    pub fn partition(&self) -> kdl_core::Result<SpatialPartition> {
        let d = &self.domain;
        SpatialPartition::new(d.half_width, d.fine_cells, d.block_factor)
    }

    pub fn grid(&self) -> kdl_core::Result<VelocityGrid> {
        VelocityGrid::new(self.domain.v_max, self.domain.velocity_nodes)
    }

    pub fn kernel_spec(&self) -> kdl_core::Result<KernelSpec> {
        let k = &self.kernel;
        let spec = KernelSpec {
            form: k.form,
            b0: k.b0,
            lambda: k.lambda,
            speed_floor: k.speed_floor,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn quadrature(&self) -> kdl_core::Result<SphereQuadrature> {
        SphereQuadrature::new(self.kernel.n_theta, self.kernel.n_phi)
    }

    pub fn stream_options(&self) -> StreamOptions {
        StreamOptions {
            scheme: self.scheme.streaming,
            boundary: self.scheme.boundary,
        }
    }

    pub fn constants_input(&self) -> ConstantsInput {
        let c = &self.analysis.constants;
        ConstantsInput {
            r: c.r,
            m: c.m,
            t: c.t,
            tau: c.tau,
            sigma: c.sigma,
            tau1: c.tau1,
            tau_star: c.tau_star,
            m0: c.m0,
            b0: self.kernel.b0,
            lambda: self.kernel.lambda,
        }
    }

    pub fn campaign_spec(&self) -> CampaignSpec {
        let c = &self.analysis.campaign;
        let f = &c.family;
        CampaignSpec {
            family: FamilySpec {
                components: f.components,
                amplitude: f.amplitude,
                alpha: f.alpha,
                tau: f.tau,
                center_x: f.center_x,
                center_v: f.center_v,
            },
            trials: c.trials,
            seed: self.seed,
            tau: self.analysis.constants.tau,
            sigma: self.analysis.constants.sigma,
            max_time: c.max_time,
            interpolation: c.interpolation,
            stream: self.stream_options(),
        }
    }

    /// The ladder and reference, with defaults derived from `scheme.dt`.
    pub fn ladder(&self) -> (Vec<Resolution>, Resolution) {
        let dt = self.scheme.dt;
        let c = &self.analysis.convergence;
        let levels = if c.levels.is_empty() {
            vec![(dt, 4), (dt / 2.0, 2), (dt / 4.0, 1)]
        } else {
            c.levels.clone()
        };
        let reference = c.reference.unwrap_or((dt / 16.0, 1));
        let res = |(dt, block_factor): (f64, usize)| Resolution { dt, block_factor };
        (levels.into_iter().map(res).collect(), res(reference))
    }

    /// Every precondition violation, in document order.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut check = |what: &str, r: kdl_core::Result<()>| {
            if let Err(e) = r {
                out.push(format!("{what}: {e}"));
            }
        };
        if self.version != SCHEMA_VERSION {
            check(
                "version",
                Err(kdl_core::Error::Config(format!(
                    "schema version {} is not supported (expected {SCHEMA_VERSION})",
                    self.version
                ))),
            );
        }
        check("domain", self.partition().map(drop));
        check("domain", self.grid().map(drop));
        check("kernel", self.kernel_spec().map(drop));
        check("kernel", self.quadrature().map(drop));
        if self.initial.components.is_empty() {
            check("initial", Err(cfg("at least one Gaussian component is required")));
        }
        check("initial", self.initial.mixture().validate());
        let s = &self.scheme;
        if !(s.dt.is_finite() && s.dt > 0.0) {
            check("scheme", Err(cfg(format!("dt must be positive, got {}", s.dt))));
        } else if !(s.horizon.is_finite() && s.dt < s.horizon) {
            check(
                "scheme",
                Err(cfg(format!("need dt < T, got dt = {}, T = {}", s.dt, s.horizon))),
            );
        }
        if let Some(t) = s.snapshot_times.iter().find(|t| !(**t >= 0.0 && **t < s.horizon)) {
            check("scheme", Err(cfg(format!("snapshot time {t} outside [0, T)"))));
        }
        if !(s.norm_rate.is_finite() && s.norm_rate >= 0.0) {
            check("scheme", Err(cfg("norm_rate must be nonnegative")));
        }
        if let Some(g) = s.guard {
            if !(g.r_plus_rho > 0.0 && g.sigma > 0.0) {
                check("scheme.guard", Err(cfg("r_plus_rho and sigma must be positive")));
            }
        }
        if let Some(t) = self.analysis.tau_list.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            check("analysis", Err(cfg(format!("tau_list entry {t} must be nonnegative"))));
        }
        if self.kernel.b0 > 0.0 {
            check(
                "analysis.constants",
                kdl_core::constants::constants_report(self.constants_input()).map(drop),
            );
        }
        let camp = self.campaign_spec();
        check("analysis.campaign", camp.family.validate());
        if camp.trials == 0 {
            check("analysis.campaign", Err(cfg("trials must be positive")));
        }
        if !(camp.max_time.is_finite() && camp.max_time >= 0.0) {
            check("analysis.campaign", Err(cfg("max_time must be nonnegative")));
        }
        let (levels, reference) = self.ladder();
        for r in levels.iter().chain([&reference]) {
            if !(r.dt.is_finite() && r.dt > 0.0 && r.dt < s.horizon) {
                check(
                    "analysis.convergence",
                    Err(cfg(format!("level dt {} must lie in (0, T)", r.dt))),
                );
            }
            if r.block_factor == 0 || self.domain.fine_cells % r.block_factor != 0 {
                check(
                    "analysis.convergence",
                    Err(cfg(format!(
                        "block factor {} does not divide {} fine cells",
                        r.block_factor, self.domain.fine_cells
                    ))),
                );
            }
        }
        let d = &self.analysis.discrepancy;
        if d.first.is_some() != d.second.is_some() {
            check("analysis.discrepancy", Err(cfg("give both snapshot paths or neither")));
        }
        out
    }
}

fn cfg(msg: impl Into<String>) -> kdl_core::Error {
    kdl_core::Error::Config(msg.into())
}

/// Parse and validate a config file.
///
/// Unknown keys are errors unless `allow_unknown_keys`; all unknown keys
/// and all precondition violations are reported together.
pub fn parse_config(path: &Path, allow_unknown_keys: bool) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text, allow_unknown_keys)
}

pub fn parse_config_str(text: &str, allow_unknown_keys: bool) -> Result<RunConfig, CliError> {
    let de = toml::Deserializer::parse(text).map_err(|e| CliError::Parse(e.to_string()))?;
    let mut unknown = Vec::new();
    let config: RunConfig = serde_ignored::deserialize(de, |p| unknown.push(p.to_string()))
        .map_err(|e| CliError::Parse(e.to_string()))?;
    let mut violations: Vec<String> = if allow_unknown_keys {
        Vec::new()
    } else {
        unknown.iter().map(|k| format!("unknown key `{k}`")).collect()
    };
    violations.extend(config.violations());
    if violations.is_empty() {
        Ok(config)
    } else {
        Err(CliError::Invalid(violations))
    }
}
