use rayon::prelude::*;

use crate::phase_space::DistributionField;

/// Replace values in every homogenization cell by their mean over the
/// cell's fine cells, separately for each velocity node.
pub fn homogenize(g: &DistributionField) -> DistributionField {
    let part = *g.partition();
    if part.block_factor() == 1 {
        return g.clone();
    }
    let nv = g.n_velocities();
    let vals = g.values();
    let averages: Vec<Vec<f64>> = (0..part.block_len())
        .into_par_iter()
        .map(|block| {
            let cells = part.block_cells(block);
            let inv = 1.0 / cells.len() as f64;
            (0..nv)
                .map(|k| {
                    let first = vals[cells[0] * nv + k];
                    if cells.iter().all(|&c| vals[c * nv + k] == first) {
                        first
                    } else {
                        cells.iter().map(|&c| vals[c * nv + k]).sum::<f64>() * inv
                    }
                })
                .collect()
        })
        .collect();
    let mut out = vec![0.0; vals.len()];
    out.par_chunks_mut(nv).enumerate().for_each(|(cell, row)| {
        row.copy_from_slice(&averages[part.block_of(cell)]);
    });
    g.like(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::{SpatialPartition, VelocityGrid};

    #[test]
    fn slab_average_and_idempotence() {
        let p = SpatialPartition::new(1.0, 2, 2).unwrap();
        let g = VelocityGrid::new(1.0, 1).unwrap();
        let f = DistributionField::from_fn(p, g, |x, _| if x[0] < 0.0 { 1.0 } else { 3.0 }).unwrap();
        let pf = homogenize(&f);
        assert!(pf.values().iter().all(|&v| v == 2.0));
        let f = DistributionField::from_fn(p, g, |x, _| (3.0 * x[0] + x[1]).sin() + 0.1 * x[2]).unwrap();
        let once = homogenize(&f);
        assert_eq!(homogenize(&once), once);
        assert!((once.integral() - f.integral()).abs() < 1e-14);
    }

    #[test]
    fn piecewise_constant_fields_are_fixed() {
        let p = SpatialPartition::new(1.0, 4, 2).unwrap();
        let g = VelocityGrid::new(1.0, 2).unwrap();
        let f = DistributionField::from_fn(p, g, |x, v| (x[0] > 0.0) as u8 as f64 + v[0] * 0.3).unwrap();
        assert_eq!(homogenize(&f), f);
    }
}
