use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::phase_space::DistributionField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamingScheme {
    /// Per-axis finite-volume shift of the piecewise-constant reconstruction.
    #[default]
    ConservativeRemap,
    /// Single-pass trilinear sampling of `g(x - t v, v)`.
    LinearInterpolation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// Mass leaving the box is lost.
    #[default]
    Open,
    /// The box is a torus: mass leaving one face re-enters at the opposite one.
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StreamOptions {
    pub scheme: StreamingScheme,
    pub boundary: BoundaryMode,
}

/// Whether a field's support stays inside the box over a streaming time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportCheck {
    pub contained: bool,
    /// Smallest distance from the displaced support to the box faces;
    /// negative when the support would leave the box.
    pub margin: f64,
}

const SNAP: f64 = 1e-12;

/// Split a shift measured in cells into an integer part and a fraction in
/// `[0, 1)`, snapping near-integers so grid-aligned shifts stay exact.
fn split_shift(s: f64) -> (i64, f64) {
    let r = s.round();
    if (s - r).abs() < SNAP {
        return (r as i64, 0.0);
    }
    let f = s.floor();
    (f as i64, s - f)
}

/// Free streaming `(U^t g)(x, v) = g(x - t v, v)`.
pub fn stream(g: &DistributionField, t: f64, opts: StreamOptions) -> DistributionField {
    if t == 0.0 {
        return g.clone();
    }
    let h = g.partition().fine_spacing();
    let nodes = g.grid().nodes();
    let shifts: Vec<[f64; 3]> = nodes
        .iter()
        .map(|v| [t * v[0] / h, t * v[1] / h, t * v[2] / h])
        .collect();
    shift_field(g, &shifts, opts)
}

/// Spatial translation `(T_y g)(x, v) = g(x + y, v)`.
pub fn translate(g: &DistributionField, y: [f64; 3], opts: StreamOptions) -> DistributionField {
    if y == [0.0; 3] {
        return g.clone();
    }
    let h = g.partition().fine_spacing();
    let s = [-y[0] / h, -y[1] / h, -y[2] / h];
    shift_field(g, &vec![s; g.n_velocities()], opts)
}

/// Check that streaming for `|t|` keeps the support (cells with
/// `|g| > threshold`) inside the box.
pub fn support_check(g: &DistributionField, t: f64, threshold: f64) -> SupportCheck {
    let Some((lo, hi)) = g.support_box(threshold) else {
        return SupportCheck {
            contained: true,
            margin: f64::INFINITY,
        };
    };
    let half = 0.5 * g.partition().fine_spacing();
    let l = g.partition().half_width();
    let reach = t.abs() * g.grid().v_max();
    let margin = (0..3)
        .map(|d| (l - (hi[d] + half)).min((lo[d] - half) + l))
        .fold(f64::INFINITY, f64::min)
        - reach;
    SupportCheck {
        contained: margin >= 0.0,
        margin,
    }
}

/// Move each velocity slice by its own displacement, measured in cells.
fn shift_field(g: &DistributionField, shifts: &[[f64; 3]], opts: StreamOptions) -> DistributionField {
    match opts.scheme {
        StreamingScheme::ConservativeRemap => {
            let mut values = g.values().to_vec();
            for axis in 0..3 {
                let split: Vec<(i64, f64)> = shifts.iter().map(|s| split_shift(s[axis])).collect();
                if split.iter().all(|&(s, f)| s == 0 && f == 0.0) {
                    continue;
                }
                values = shift_axis(g, &values, axis, &split, opts.boundary);
            }
            g.like(values)
        }
        StreamingScheme::LinearInterpolation => g.like(gather_trilinear(g, shifts, opts.boundary)),
    }
}

/// Source cell index along one axis, or `None` outside an open box.
#[inline]
fn source(k: i64, n: i64, boundary: BoundaryMode) -> Option<usize> {
    match boundary {
        BoundaryMode::Open => (0..n).contains(&k).then_some(k as usize),
        BoundaryMode::Periodic => Some(k.rem_euclid(n) as usize),
    }
}

fn shift_axis(
    g: &DistributionField,
    values: &[f64],
    axis: usize,
    split: &[(i64, f64)],
    boundary: BoundaryMode,
) -> Vec<f64> {
    let part = *g.partition();
    let n = part.fine_cells_per_axis() as i64;
    let nv = g.n_velocities();
    let mut out = vec![0.0; values.len()];
    out.par_chunks_mut(nv).enumerate().for_each(|(cell, row)| {
        let idx = part.unflatten(cell);
        let at = |k: i64| -> Option<usize> {
            source(k, n, boundary).map(|s| {
                let mut j = idx;
                j[axis] = s;
                part.flatten(j) * nv
            })
        };
        for (vk, slot) in row.iter_mut().enumerate() {
            let (s, f) = split[vk];
            let k = idx[axis] as i64 - s;
            let near = at(k).map_or(0.0, |b| values[b + vk]);
            *slot = if f == 0.0 {
                near
            } else {
                let far = at(k - 1).map_or(0.0, |b| values[b + vk]);
                (1.0 - f) * near + f * far
            };
        }
    });
    out
}

fn gather_trilinear(g: &DistributionField, shifts: &[[f64; 3]], boundary: BoundaryMode) -> Vec<f64> {
    let part = *g.partition();
    let n = part.fine_cells_per_axis() as i64;
    let nv = g.n_velocities();
    let values = g.values();
    let split: Vec<[(i64, f64); 3]> = shifts
        .iter()
        .map(|s| [split_shift(s[0]), split_shift(s[1]), split_shift(s[2])])
        .collect();
    let mut out = vec![0.0; values.len()];
    out.par_chunks_mut(nv).enumerate().for_each(|(cell, row)| {
        let idx = part.unflatten(cell);
        for (vk, slot) in row.iter_mut().enumerate() {
            let sp = split[vk];
            let mut acc = 0.0;
            for corner in 0..8 {
                let mut w = 1.0;
                let mut src = [0usize; 3];
                let mut inside = true;
                for d in 0..3 {
                    let far = (corner >> d) & 1 == 1;
                    let (s, f) = sp[d];
                    let wd = if far { f } else { 1.0 - f };
                    if wd == 0.0 {
                        w = 0.0;
                        break;
                    }
                    w *= wd;
                    match source(idx[d] as i64 - s - far as i64, n, boundary) {
                        Some(k) => src[d] = k,
                        None => inside = false,
                    }
                }
                if w != 0.0 && inside {
                    acc += w * values[part.flatten(src) * nv + vk];
                }
            }
            *slot = acc;
        }
    });
    out
}
