//! Grids, partitions, sampled phase-space fields and Gaussian test data.

mod field;
mod gaussian;
mod grid;
mod snapshot;

pub use field::DistributionField;
pub use gaussian::{gaussian_field, GaussianMixture, GaussianSpec};
pub use grid::{build_partition, SpatialPartition, VelocityGrid, WeightSpec};
pub use snapshot::{
    decode_snapshot, encode_snapshot, read_snapshot, Snapshot, SNAPSHOT_MAGIC, SNAPSHOT_VERSION,
};

#[allow(unused_imports)]
pub(crate) use grid::norm_sq;
