use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};

/// Uniform, cell-centred tensor grid on `[-v_max, v_max]^3`.
///
/// Node `k` on an axis sits at `(2k - n + 1) * h / 2`, so the node set is
/// exactly symmetric under `v -> -v`. Every node carries the volume weight
/// `h^3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityGrid {
    v_max: f64,
    nodes_per_axis: usize,
}

impl VelocityGrid {
    pub fn new(v_max: f64, nodes_per_axis: usize) -> Result<Self> {
        if !(v_max.is_finite() && v_max > 0.0) {
            return Err(config_err(format!("v_max must be positive, got {v_max}")));
        }
        if nodes_per_axis == 0 {
            return Err(config_err("velocity nodes per axis must be positive"));
        }
        Ok(Self {
            v_max,
            nodes_per_axis,
        })
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.nodes_per_axis
    }

    /// Total number of velocity nodes.
    pub fn len(&self) -> usize {
        self.nodes_per_axis.pow(3)
    }

    pub fn is_empty(&self) -> bool {
        self.nodes_per_axis == 0
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.v_max / self.nodes_per_axis as f64
    }

    /// Quadrature weight of every node.
    pub fn weight(&self) -> f64 {
        self.spacing().powi(3)
    }

    pub fn coord(&self, k: usize) -> f64 {
        let n = self.nodes_per_axis as i64;
        (2 * k as i64 - n + 1) as f64 * (0.5 * self.spacing())
    }

    pub fn axis_coords(&self) -> Vec<f64> {
        (0..self.nodes_per_axis).map(|k| self.coord(k)).collect()
    }

    /// Velocity of the node with flat index `i` (last axis fastest).
    pub fn node(&self, i: usize) -> [f64; 3] {
        let [a, b, c] = self.unflatten(i);
        [self.coord(a), self.coord(b), self.coord(c)]
    }

    pub fn nodes(&self) -> Vec<[f64; 3]> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }

    pub fn flatten(&self, idx: [usize; 3]) -> usize {
        let n = self.nodes_per_axis;
        (idx[0] * n + idx[1]) * n + idx[2]
    }

    pub fn unflatten(&self, i: usize) -> [usize; 3] {
        let n = self.nodes_per_axis;
        [i / (n * n), (i / n) % n, i % n]
    }

    /// Flat index of the node mirrored through the origin.
    pub fn mirror(&self, i: usize) -> usize {
        let n = self.nodes_per_axis;
        let [a, b, c] = self.unflatten(i);
        self.flatten([n - 1 - a, n - 1 - b, n - 1 - c])
    }

    /// Default speed floor used to cap singular kernels on this grid.
    pub fn speed_floor(&self) -> f64 {
        1e-6 * self.v_max
    }
}

/// Uniform cubic partition of `[-L, L]^3`.
///
/// Fields are represented on `fine_cells_per_axis^3` cells; homogenization
/// cells are `m^3` blocks of fine cells, where `m` is the block factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialPartition {
    half_width: f64,
    fine_cells_per_axis: usize,
    block_factor: usize,
}

impl SpatialPartition {
    pub fn new(half_width: f64, fine_cells_per_axis: usize, block_factor: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(config_err(format!(
                "box half-width must be positive, got {half_width}"
            )));
        }
        if fine_cells_per_axis == 0 {
            return Err(config_err("fine cells per axis must be positive"));
        }
        if block_factor == 0 {
            return Err(config_err("block factor must be positive"));
        }
        if fine_cells_per_axis % block_factor != 0 {
            return Err(config_err(format!(
                "block factor {block_factor} does not divide {fine_cells_per_axis} fine cells per axis"
            )));
        }
        Ok(Self {
            half_width,
            fine_cells_per_axis,
            block_factor,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn fine_cells_per_axis(&self) -> usize {
        self.fine_cells_per_axis
    }

    pub fn block_factor(&self) -> usize {
        self.block_factor
    }

    /// Same fine grid, different homogenization blocks.
    pub fn with_block_factor(&self, block_factor: usize) -> Result<Self> {
        Self::new(self.half_width, self.fine_cells_per_axis, block_factor)
    }

    pub fn fine_spacing(&self) -> f64 {
        2.0 * self.half_width / self.fine_cells_per_axis as f64
    }

    pub fn fine_cell_volume(&self) -> f64 {
        self.fine_spacing().powi(3)
    }

    pub fn fine_len(&self) -> usize {
        self.fine_cells_per_axis.pow(3)
    }

    pub fn blocks_per_axis(&self) -> usize {
        self.fine_cells_per_axis / self.block_factor
    }

    pub fn block_len(&self) -> usize {
        self.blocks_per_axis().pow(3)
    }

    /// Volume `|pi_l|` of a homogenization cell.
    pub fn block_volume(&self) -> f64 {
        (self.block_factor as f64 * self.fine_spacing()).powi(3)
    }

    /// Partition diameter: `m * h_x * sqrt(3)`.
    pub fn delta_x(&self) -> f64 {
        self.block_factor as f64 * self.fine_spacing() * 3f64.sqrt()
    }

    pub fn coord(&self, k: usize) -> f64 {
        let n = self.fine_cells_per_axis as i64;
        (2 * k as i64 - n + 1) as f64 * (0.5 * self.fine_spacing())
    }

    pub fn center(&self, cell: usize) -> [f64; 3] {
        let [a, b, c] = self.unflatten(cell);
        [self.coord(a), self.coord(b), self.coord(c)]
    }

    pub fn flatten(&self, idx: [usize; 3]) -> usize {
        let n = self.fine_cells_per_axis;
        (idx[0] * n + idx[1]) * n + idx[2]
    }

    pub fn unflatten(&self, cell: usize) -> [usize; 3] {
        let n = self.fine_cells_per_axis;
        [cell / (n * n), (cell / n) % n, cell % n]
    }

    /// Homogenization cell containing a fine cell.
    pub fn block_of(&self, cell: usize) -> usize {
        let m = self.block_factor;
        let nb = self.blocks_per_axis();
        let [a, b, c] = self.unflatten(cell);
        ((a / m) * nb + b / m) * nb + c / m
    }

    /// Fine cells of homogenization cell `block`, in ascending order.
    pub fn block_cells(&self, block: usize) -> Vec<usize> {
        let m = self.block_factor;
        let nb = self.blocks_per_axis();
        let (ba, bb, bc) = (block / (nb * nb), (block / nb) % nb, block % nb);
        let mut cells = Vec::with_capacity(m * m * m);
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    cells.push(self.flatten([ba * m + a, bb * m + b, bc * m + c]));
                }
            }
        }
        cells
    }

    /// Lower and upper corners of a homogenization cell.
    pub fn block_bounds(&self, block: usize) -> ([f64; 3], [f64; 3]) {
        let nb = self.blocks_per_axis();
        let side = self.block_factor as f64 * self.fine_spacing();
        let idx = [block / (nb * nb), (block / nb) % nb, block % nb];
        let lo = idx.map(|k| -self.half_width + k as f64 * side);
        let hi = idx.map(|k| -self.half_width + (k + 1) as f64 * side);
        (lo, hi)
    }

    /// Measured diagonal of a homogenization cell.
    pub fn block_diameter(&self, block: usize) -> f64 {
        let (lo, hi) = self.block_bounds(block);
        lo.iter()
            .zip(hi.iter())
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt()
    }
}

/// Build a partition and report its diameter.
pub fn build_partition(
    box_half_width: f64,
    fine_cells_per_axis: usize,
    block_factor: usize,
) -> Result<SpatialPartition> {
    SpatialPartition::new(box_half_width, fine_cells_per_axis, block_factor)
}

/// Decay rates of the weight `m_{alpha,tau}(x, v) = exp(-alpha x^2 - tau v^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub alpha: f64,
    pub tau: f64,
}

impl WeightSpec {
    pub fn new(alpha: f64, tau: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(config_err(format!("alpha must be >= 0, got {alpha}")));
        }
        if !(tau.is_finite() && tau > 0.0) {
            return Err(config_err(format!("tau must be > 0, got {tau}")));
        }
        Ok(Self { alpha, tau })
    }

    pub fn eval(&self, x: [f64; 3], v: [f64; 3]) -> f64 {
        (-self.alpha * norm_sq(x) - self.tau * norm_sq(v)).exp()
    }
}

pub(crate) fn norm_sq(a: [f64; 3]) -> f64 {
    a[0] * a[0] + a[1] * a[1] + a[2] * a[2]
}
