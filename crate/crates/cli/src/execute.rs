//! Subcommand orchestration and artifact writing.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use kdl_core::analysis::{
    convergence_study, discrepancy, norms, verify_inequalities, Discrepancy, NormReport,
};
use kdl_core::constants::{constants_report, ConstantsReport};
use kdl_core::phase_space::{encode_snapshot, read_snapshot};
use kdl_core::scheme::{positivity_timestep, step_index};
use kdl_core::{
    Diagnostics, DistributionField, GuardSpec, Scheme, SchemeParams, Trajectory,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Subcommand {
    Run,
    Converge,
    Verify,
    Constants,
    Discrepancy,
}

/// Positivity-guard verdict recorded in every manifest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GuardVerdict {
    pub r_plus_rho: Option<f64>,
    pub sigma: Option<f64>,
    /// `1 / D0`; `None` when the kernel is collisionless.
    pub max_timestep: Option<f64>,
    pub dt: f64,
    pub respected: bool,
    /// `B_sigma` norm of the sampled initial field.
    pub measured_b_norm: Option<f64>,
}

/// What a finished subcommand leaves on disk.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub manifest: Value,
    /// Text echoed on stdout.
    pub stdout: String,
}

/// Bound `R (pi/tau)^3 (3 exp(-tau L^2) + 3 exp(-tau V^2))` on the initial
/// mass outside the box, with `R` the analytic `M_tau` bound at `tau` half
/// the smallest decay rate of the initial mixture.
pub fn truncation_bound(config: &RunConfig) -> Value {
    let mix = config.initial.mixture();
    let (a, t) = mix.min_rates();
    let tau = 0.5 * a.min(t);
    let r = mix.m_norm_bound(tau);
    let l = config.domain.half_width;
    let v = config.domain.v_max;
    let bound = r
        * (std::f64::consts::PI / tau).powi(3)
        * (3.0 * (-tau * l * l).exp() + 3.0 * (-tau * v * v).exp());
    json!({ "l1_bound": bound, "rate": tau, "r": r })
}

pub fn guard_verdict(config: &RunConfig, f0: &DistributionField) -> Result<GuardVerdict, CliError> {
    let spec = config.kernel_spec()?;
    let dt = config.scheme.dt;
    if spec.is_collisionless() {
        return Ok(GuardVerdict {
            r_plus_rho: None,
            sigma: None,
            max_timestep: None,
            dt,
            respected: true,
            measured_b_norm: None,
        });
    }
    let g = declared_guard(config)?;
    let max = positivity_timestep(g.r_plus_rho, g.sigma, &spec)?;
    Ok(GuardVerdict {
        r_plus_rho: Some(g.r_plus_rho),
        sigma: Some(g.sigma),
        max_timestep: Some(max),
        dt,
        respected: dt <= max,
        measured_b_norm: Some(kdl_core::analysis::b_norm(f0, g.sigma)),
    })
}

/// The declared `(R + rho, sigma)`, from the scheme section or else from
/// the constants report.
fn declared_guard(config: &RunConfig) -> Result<GuardSpec, CliError> {
    if let Some(g) = config.scheme.guard {
        return Ok(GuardSpec {
            r_plus_rho: g.r_plus_rho,
            sigma: g.sigma,
        });
    }
    let report = constants_report(config.constants_input())?;
    Ok(GuardSpec {
        r_plus_rho: report.inputs.r + report.stability.rho,
        sigma: report.inputs.sigma,
    })
}

pub fn scheme_params(config: &RunConfig) -> Result<SchemeParams, CliError> {
    let s = &config.scheme;
    let spec = config.kernel_spec()?;
    let mut p = SchemeParams::new(s.dt, s.horizon, spec, config.quadrature()?);
    p.stream = config.stream_options();
    p.interpolation = s.interpolation;
    p.moment_fix = s.moment_fix;
    p.norm_rate = s.norm_rate;
    p.snapshot_times = s.snapshot_times.clone();
    p.snapshot_cap = s.snapshot_cap;
    if !spec.is_collisionless() {
        p.guard = Some(declared_guard(config)?);
    }
    p.validate()?;
    Ok(p)
}

pub fn initial_field(config: &RunConfig) -> Result<DistributionField, CliError> {
    Ok(config.initial.mixture().sample(&config.partition()?, &config.grid()?)?)
}

/// Diagnostics as CSV; floats use the shortest round-trip form.
pub fn diagnostics_csv(rows: &[Diagnostics]) -> String {
    let mut out = Diagnostics::HEADER.join(",");
    out.push('\n');
    for d in rows {
        let cells: Vec<String> = d.values().iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

struct Writer {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|source| CliError::Write {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|source| CliError::Write {
                path: parent.to_path_buf(),
                source,
            })?;
        }
        fs::write(&path, bytes).map_err(|source| CliError::Write {
            path: path.clone(),
            source,
        })?;
        self.files.push(path);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable output");
        text.push('\n');
        self.write(name, text.as_bytes())
    }
}

/// Step indices whose snapshots are written: `0`, `J`, the requested
/// times, and every step while `J + 1` fits under the cap.
fn snapshot_steps(params: &SchemeParams) -> Vec<usize> {
    let steps = params.steps();
    if steps < params.snapshot_cap {
        return (0..=steps).collect();
    }
    let mut keep: Vec<usize> = params
        .snapshot_times
        .iter()
        .filter_map(|&t| step_index(params.dt, params.horizon, t).ok())
        .filter(|&j| j <= steps)
        .chain([0, steps])
        .collect();
    keep.sort_unstable();
    keep.dedup();
    keep
}

/// Run the scheme, writing every selected snapshot as it is produced so
/// memory holds only the current iterate.
fn run_spilling(
    config: &RunConfig,
    f0: &DistributionField,
    writer: &mut Writer,
) -> Result<Trajectory, CliError> {
    let mut params = scheme_params(config)?;
    let keep = snapshot_steps(&params);
    params.snapshot_cap = 0;
    params.snapshot_times.clear();
    let scheme = Scheme::new(params, *f0.grid())?;
    let mut io_error = None;
    let traj = scheme.run_with(f0, |j, f| {
        if keep.binary_search(&j).is_ok() {
            if let Err(e) = writer.write(&format!("snapshots/step_{j:06}.kdl1"), &encode_snapshot(f)) {
                io_error = Some(e);
                return Err(kdl_core::Error::Format("snapshot write failed".into()));
            }
        }
        Ok(())
    });
    match (traj, io_error) {
        (_, Some(e)) => Err(e),
        (t, None) => Ok(t?),
    }
}

/// Run `subcommand` with the given worker count, writing artifacts under
/// `out_dir`.
pub fn execute(
    config: &RunConfig,
    subcommand: Subcommand,
    workers: usize,
    out_dir: &Path,
) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let mut writer = Writer::new(out_dir)?;
    let (extra, warnings, stdout) =
        kdl_core::parallel::with_workers(workers, || dispatch(config, subcommand, &mut writer))??;
    let f0 = initial_field(config)?;
    let guard = guard_verdict(config, &f0)?;
    let mut all_warnings = warnings;
    if !guard.respected {
        all_warnings.push(format!(
            "dt = {} exceeds the positivity guard {:?}",
            guard.dt, guard.max_timestep
        ));
    }
    let manifest = json!({
        "subcommand": subcommand,
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "seed": config.seed,
        "workers": workers,
        "truncation_error": truncation_bound(config),
        "positivity_guard": guard,
        "collision_cost": collision_cost(config),
        "wall_clock_seconds": start.elapsed().as_secs_f64(),
        "warnings": all_warnings,
        "results": extra,
        "outputs": writer.files.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
    });
    writer.json("manifest.json", &manifest)?;
    Ok(Outcome {
        out_dir: out_dir.to_path_buf(),
        files: writer.files,
        manifest,
        stdout,
    })
}

/// `N_cells * N_v^2 * N_omega` for one full collision evaluation.
fn collision_cost(config: &RunConfig) -> Value {
    let n_cells = config.domain.fine_cells.pow(3);
    let n_v = config.domain.velocity_nodes.pow(3);
    let n_omega = config.kernel.n_theta * config.kernel.n_phi;
    json!({
        "cells": n_cells,
        "velocities": n_v,
        "sphere_nodes": n_omega,
        "pair_evaluations": (n_cells as f64) * (n_v as f64).powi(2) * n_omega as f64,
    })
}

type Dispatched = (Value, Vec<String>, String);

fn dispatch(
    config: &RunConfig,
    subcommand: Subcommand,
    writer: &mut Writer,
) -> Result<Dispatched, CliError> {
    match subcommand {
        Subcommand::Run => run(config, writer),
        Subcommand::Converge => converge(config, writer),
        Subcommand::Verify => verify(config, writer),
        Subcommand::Constants => constants(config, writer),
        Subcommand::Discrepancy => discrepancy_cmd(config, writer),
    }
}

fn run(config: &RunConfig, writer: &mut Writer) -> Result<Dispatched, CliError> {
    let f0 = initial_field(config)?;
    let traj = run_spilling(config, &f0, writer)?;
    writer.write("diagnostics.csv", diagnostics_csv(&traj.diagnostics).as_bytes())?;
    let last = traj.diagnostics.last().expect("diagnostics include t = 0");
    let final_norms: Option<NormReport> = traj.last().map(|f| norms(f, &config.analysis.tau_list));
    let mut stdout = String::new();
    let _ = writeln!(
        stdout,
        "{} steps, final mass {:?}, min value {:?}",
        traj.steps,
        last.mass,
        traj.min_value()
    );
    Ok((
        json!({
            "steps": traj.steps,
            "min_value": traj.min_value(),
            "final": last,
            "final_norms": final_norms,
            "guard": traj.guard,
        }),
        traj.warnings,
        stdout,
    ))
}

fn converge(config: &RunConfig, writer: &mut Writer) -> Result<Dispatched, CliError> {
    let f0 = initial_field(config)?;
    let mut base = scheme_params(config)?;
    base.snapshot_cap = 0;
    let (levels, reference) = config.ladder();
    let table = convergence_study(&f0, &base, &levels, reference)?;
    writer.json("convergence.json", &table)?;
    let mut stdout = String::new();
    for row in &table.rows {
        let _ = writeln!(
            stdout,
            "dt = {:e}, block = {}, error = {:e}",
            row.dt, row.block_factor, row.error
        );
    }
    let _ = writeln!(stdout, "order = {:.4}", table.order);
    Ok((
        json!({ "order": table.order, "strictly_decreasing": table.strictly_decreasing() }),
        Vec::new(),
        stdout,
    ))
}

fn verify(config: &RunConfig, writer: &mut Writer) -> Result<Dispatched, CliError> {
    let report = constants_report(config.constants_input())?;
    let verdicts = verify_inequalities(
        &config.campaign_spec(),
        &report,
        &config.partition()?,
        &config.grid()?,
        &config.quadrature()?,
    )?;
    writer.json("verdicts.json", &verdicts)?;
    let mut stdout = String::new();
    for v in &verdicts {
        let _ = writeln!(
            stdout,
            "{} {} trials={} max_violation={:e} tolerance={:e} max_ratio={:.4}",
            if v.pass { "PASS" } else { "FAIL" },
            v.id,
            v.trials,
            v.max_violation,
            v.tolerance,
            v.max_ratio
        );
    }
    let failed: Vec<String> = verdicts.iter().filter(|v| !v.pass).map(|v| v.id.clone()).collect();
    if !failed.is_empty() {
        print!("{stdout}");
        return Err(CliError::VerificationFailed(failed));
    }
    Ok((json!({ "verdicts": verdicts.len(), "all_pass": true }), Vec::new(), stdout))
}

fn constants(config: &RunConfig, writer: &mut Writer) -> Result<Dispatched, CliError> {
    let report: ConstantsReport = constants_report(config.constants_input())?;
    writer.json("constants.json", &report)?;
    let stdout = serde_json::to_string_pretty(&report).expect("serializable report") + "\n";
    Ok((json!({ "c_sigma": report.c_sigma }), Vec::new(), stdout))
}

fn discrepancy_cmd(config: &RunConfig, writer: &mut Writer) -> Result<Dispatched, CliError> {
    let d = &config.analysis.discrepancy;
    let (a, b, warnings) = match (&d.first, &d.second) {
        (Some(p), Some(q)) => (load(config, p)?, load(config, q)?, Vec::new()),
        _ => {
            let f0 = initial_field(config)?;
            let mut params = scheme_params(config)?;
            params.snapshot_cap = 0;
            let traj = Scheme::new(params, *f0.grid())?.run(&f0)?;
            let last = traj.last().expect("final snapshot is kept").clone();
            (f0, last, traj.warnings)
        }
    };
    let value: Discrepancy = discrepancy(&a, &b)?;
    writer.json("discrepancy.json", &value)?;
    Ok((json!(value), warnings, format!("{:?}\n", value.value)))
}

fn load(config: &RunConfig, path: &Path) -> Result<DistributionField, CliError> {
    let bytes = fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(read_snapshot(&bytes, &config.partition()?, &config.grid()?)?)
}
