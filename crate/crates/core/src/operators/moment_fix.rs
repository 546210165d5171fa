use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::phase_space::DistributionField;

/// The collision invariants `1, v1, v2, v3, |v|^2`.
pub fn invariants(v: [f64; 3]) -> [f64; 5] {
    [1.0, v[0], v[1], v[2], v[0] * v[0] + v[1] * v[1] + v[2] * v[2]]
}

/// Remove the five collision-invariant moments from `increment` inside every
/// homogenization cell.
///
/// The correction is `w(x, v) * sum_j l_j phi_j(v)`, a weighted least-squares
/// projection with weight `w` (normally the loss term, so the correction
/// lives where collisions happen). Cells where `w` cannot support the
/// projection fall back to a uniform weight.
pub fn moment_fix(increment: &DistributionField, weight: &DistributionField) -> Result<DistributionField> {
    increment.check_same_grids(weight)?;
    let part = *increment.partition();
    let nv = increment.n_velocities();
    let phis: Vec<[f64; 5]> = increment.grid().nodes().into_iter().map(invariants).collect();
    let corrections: Vec<(Vec<usize>, Vec<f64>)> = (0..part.block_len())
        .into_par_iter()
        .map(|block| {
            let cells = part.block_cells(block);
            let mut m = [0.0; 5];
            for &c in &cells {
                for (k, phi) in phis.iter().enumerate() {
                    let j = increment.get(c, k);
                    for i in 0..5 {
                        m[i] += phi[i] * j;
                    }
                }
            }
            if m.iter().all(|&x| x == 0.0) {
                return Ok((cells, Vec::new()));
            }
            let (lam, w) = solve_weighted(&cells, &phis, Some(weight), &m)
                .map(|l| (l, Some(weight)))
                .or_else(|| solve_weighted(&cells, &phis, None, &m).map(|l| (l, None)))
                .ok_or_else(|| Error::Precondition("moment projection is singular".into()))?;
            let mut corr = Vec::with_capacity(cells.len() * nv);
            for &c in &cells {
                for (k, phi) in phis.iter().enumerate() {
                    let wk = w.map_or(1.0, |f| f.get(c, k).abs());
                    corr.push(wk * (0..5).map(|i| lam[i] * phi[i]).sum::<f64>());
                }
            }
            Ok((cells, corr))
        })
        .collect::<Result<_>>()?;
    let mut out = increment.values().to_vec();
    for (cells, corr) in corrections {
        if corr.is_empty() {
            continue;
        }
        for (n, &c) in cells.iter().enumerate() {
            for k in 0..nv {
                out[c * nv + k] -= corr[n * nv + k];
            }
        }
    }
    Ok(increment.like(out))
}

/// Solve the 5x5 Gram system for the multipliers; `None` weight means 1.
fn solve_weighted(
    cells: &[usize],
    phis: &[[f64; 5]],
    weight: Option<&DistributionField>,
    m: &[f64; 5],
) -> Option<[f64; 5]> {
    let mut g = [[0.0; 5]; 5];
    for &c in cells {
        for (k, phi) in phis.iter().enumerate() {
            let wk = weight.map_or(1.0, |f| f.get(c, k).abs());
            if wk == 0.0 {
                continue;
            }
            for i in 0..5 {
                for j in 0..5 {
                    g[i][j] += wk * phi[i] * phi[j];
                }
            }
        }
    }
    cholesky_solve(g, *m)
}

fn cholesky_solve(a: [[f64; 5]; 5], b: [f64; 5]) -> Option<[f64; 5]> {
    let scale = (0..5).map(|i| a[i][i]).fold(0.0, f64::max);
    if !(scale > 0.0) {
        return None;
    }
    let mut l = [[0.0; 5]; 5];
    for i in 0..5 {
        for j in 0..=i {
            let s: f64 = a[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            if i == j {
                if s <= 1e-13 * scale {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut y = [0.0; 5];
    for i in 0..5 {
        y[i] = (b[i] - (0..i).map(|k| l[i][k] * y[k]).sum::<f64>()) / l[i][i];
    }
    let mut x = [0.0; 5];
    for i in (0..5).rev() {
        x[i] = (y[i] - (i + 1..5).map(|k| l[k][i] * x[k]).sum::<f64>()) / l[i][i];
    }
    Some(x)
}
