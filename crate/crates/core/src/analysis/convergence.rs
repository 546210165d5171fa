use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};
use crate::phase_space::DistributionField;
use crate::scheme::{trajectory_at, Scheme, SchemeParams, Trajectory};

/// One resolution of a convergence ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub dt: f64,
    pub block_factor: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub dt: f64,
    pub block_factor: usize,
    pub dx: f64,
    /// `sup_t ||f_{dt,dx}(t) - f_ref(t)||_L1` over the sample times.
    pub error: f64,
    pub errors: Vec<f64>,
}

/// Rows sorted by `dt + dx` descending, with the least-squares fit
/// `error ~ constant * (dt + dx)^order` in log space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub sample_times: Vec<f64>,
    pub reference: Resolution,
    pub rows: Vec<ConvergenceRow>,
    pub order: f64,
    pub constant: f64,
    /// Root-mean-square residual of the log-space fit.
    pub residual: f64,
    /// Rows with positive error that entered the fit.
    pub fit_points: usize,
}

impl ConvergenceTable {
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].error < w[0].error)
    }
}

/// Least-squares line through `(ln x, ln y)`: `(slope, intercept, rms)`.
pub fn log_log_fit(points: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let icept = my - slope * mx;
    let rms = (pts.iter().map(|p| (p.1 - icept - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Some((slope, icept, rms))
}

fn multiple_of(coarse: f64, fine: f64) -> bool {
    let r = coarse / fine;
    r >= 1.0 - 1e-12 && (r - r.round()).abs() <= 1e-9 * r
}

fn l1_distance(a: &DistributionField, b: &DistributionField) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).sum::<f64>() * a.sample_volume()
}

/// Self-convergence of the scheme from `f0`.
///
/// Every level and the reference run the scheme of `base` with their own
/// `dt` and block factor on the fine grid of `f0`. Errors are taken at the
/// multiples of the coarsest `dt` in `[0, T)`, which every finer time grid
/// must contain.
pub fn convergence_study(
    f0: &DistributionField,
    base: &SchemeParams,
    levels: &[Resolution],
    reference: Resolution,
) -> Result<ConvergenceTable> {
    if levels.is_empty() {
        return Err(config_err("convergence study needs at least one level"));
    }
    let coarse = levels.iter().map(|l| l.dt).fold(0.0, f64::max);
    for l in levels {
        if !multiple_of(coarse, l.dt) || !multiple_of(l.dt, reference.dt) || l.dt <= reference.dt {
            return Err(config_err(format!(
                "time grids do not nest: level dt = {}, coarsest = {coarse}, reference = {}",
                l.dt, reference.dt
            )));
        }
        if l.block_factor < reference.block_factor {
            return Err(config_err("reference block factor must not exceed any level's"));
        }
    }
    let count = (base.horizon / coarse).floor() as usize;
    let mut sample_times: Vec<f64> = (0..count).map(|k| k as f64 * coarse).collect();
    sample_times.retain(|&t| t < base.horizon);
    let run = |res: Resolution| -> Result<(Trajectory, DistributionField)> {
        let part = f0.partition().with_block_factor(res.block_factor)?;
        let f = DistributionField::new(part, *f0.grid(), f0.values().to_vec())?;
        let mut p = base.clone();
        p.dt = res.dt;
        p.snapshot_cap = 0;
        p.snapshot_times = sample_times.clone();
        let tr = Scheme::new(p, *f0.grid())?.run(&f)?;
        Ok((tr, f))
    };
    let (ref_traj, _) = run(reference)?;
    let mut rows = Vec::with_capacity(levels.len());
    for &l in levels {
        let (tr, f) = run(l)?;
        let errors = sample_times
            .iter()
            .map(|&t| Ok(l1_distance(trajectory_at(&tr, t)?, trajectory_at(&ref_traj, t)?)))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(ConvergenceRow {
            dt: l.dt,
            block_factor: l.block_factor,
            dx: f.partition().delta_x(),
            error: errors.iter().copied().fold(0.0, f64::max),
            errors,
        });
    }
    rows.sort_by(|a, b| (b.dt + b.dx).total_cmp(&(a.dt + a.dx)));
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.dt + r.dx, r.error)).collect();
    let fit_points = pts.iter().filter(|p| p.1 > 0.0).count();
    let (order, constant, residual) = match log_log_fit(&pts) {
        Some((p, c, r)) => (p, c.exp(), r),
        None => (0.0, 0.0, 0.0),
    };
    Ok(ConvergenceTable {
        sample_times,
        reference,
        rows,
        order,
        constant,
        residual,
        fit_points,
    })
}
