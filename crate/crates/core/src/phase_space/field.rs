use crate::error::{Error, Result};

use super::grid::{SpatialPartition, VelocityGrid};

/// Density samples `f(x_c, v_k)` at fine-cell centres and velocity nodes.
///
/// Values are stored cell-major with the velocity index varying fastest.
/// A field is immutable once built; operators return new fields.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionField {
    partition: SpatialPartition,
    grid: VelocityGrid,
    values: Vec<f64>,
}

impl DistributionField {
    /// Wrap a value array, checking its shape and finiteness.
    pub fn new(partition: SpatialPartition, grid: VelocityGrid, values: Vec<f64>) -> Result<Self> {
        let expected = partition.fine_len() * grid.len();
        if values.len() != expected {
            return Err(Error::GridMismatch(format!(
                "expected {expected} values, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Precondition(format!(
                "non-finite value at flat index {i}"
            )));
        }
        Ok(Self {
            partition,
            grid,
            values,
        })
    }

    pub(crate) fn from_parts(
        partition: SpatialPartition,
        grid: VelocityGrid,
        values: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(values.len(), partition.fine_len() * grid.len());
        Self {
            partition,
            grid,
            values,
        }
    }

    pub fn zeros(partition: SpatialPartition, grid: VelocityGrid) -> Self {
        let n = partition.fine_len() * grid.len();
        Self::from_parts(partition, grid, vec![0.0; n])
    }

    /// Sample `f(x, v)` at every cell centre and velocity node.
    pub fn from_fn<F>(partition: SpatialPartition, grid: VelocityGrid, f: F) -> Result<Self>
    where
        F: Fn([f64; 3], [f64; 3]) -> f64,
    {
        let nodes = grid.nodes();
        let mut values = Vec::with_capacity(partition.fine_len() * grid.len());
        for c in 0..partition.fine_len() {
            let x = partition.center(c);
            values.extend(nodes.iter().map(|&v| f(x, v)));
        }
        Self::new(partition, grid, values)
    }

    pub fn partition(&self) -> &SpatialPartition {
        &self.partition
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn n_cells(&self) -> usize {
        self.partition.fine_len()
    }

    pub fn n_velocities(&self) -> usize {
        self.grid.len()
    }

    pub fn get(&self, cell: usize, node: usize) -> f64 {
        self.values[cell * self.grid.len() + node]
    }

    /// Velocity samples of one spatial cell.
    pub fn cell(&self, cell: usize) -> &[f64] {
        let nv = self.grid.len();
        &self.values[cell * nv..(cell + 1) * nv]
    }

    /// Phase-space volume attached to each sample.
    pub fn sample_volume(&self) -> f64 {
        self.partition.fine_cell_volume() * self.grid.weight()
    }

    pub fn shares_grids(&self, other: &Self) -> bool {
        self.partition == other.partition && self.grid == other.grid
    }

    pub fn check_same_grids(&self, other: &Self) -> Result<()> {
        if self.shares_grids(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(
                "fields live on different spatial or velocity grids".into(),
            ))
        }
    }

    /// Same grids, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.partition, self.grid, values)
    }

    pub(crate) fn like(&self, values: Vec<f64>) -> Self {
        Self::from_parts(self.partition, self.grid, values)
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.like(self.values.iter().map(|v| c * v).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        self.like(self.values.iter().map(|&v| f(v)).collect())
    }

    /// `a * self + b * other`.
    pub fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.check_same_grids(other)?;
        Ok(self.like(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.lin_comb(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.lin_comb(1.0, other, -1.0)
    }

    /// Midpoint-rule L¹ functional.
    pub fn l1(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.sample_volume()
    }

    /// Midpoint-rule integral.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.sample_volume()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Smallest axis-aligned box (in cell-centre coordinates) holding all
    /// samples with `|f| > threshold`, or `None` when there are none.
    pub fn support_box(&self, threshold: f64) -> Option<([f64; 3], [f64; 3])> {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        let mut any = false;
        for c in 0..self.n_cells() {
            if self.cell(c).iter().any(|v| v.abs() > threshold) {
                any = true;
                let x = self.partition.center(c);
                for d in 0..3 {
                    lo[d] = lo[d].min(x[d]);
                    hi[d] = hi[d].max(x[d]);
                }
            }
        }
        any.then_some((lo, hi))
    }
}
