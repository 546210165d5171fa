use crate::error::{Error, Result};

use super::field::DistributionField;
use super::grid::{SpatialPartition, VelocityGrid};

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"KDL1";
pub const SNAPSHOT_VERSION: u8 = 1;
const HEADER_LEN: usize = 4 + 1 + 6 * 4;

/// Encode a field as `KDL1`, version byte, six little-endian `u32` dims
/// (three spatial, three velocity) and little-endian `f64` values with the
/// velocity index varying fastest.
pub fn encode_snapshot(field: &DistributionField) -> Vec<u8> {
    let nx = field.partition().fine_cells_per_axis() as u32;
    let nv = field.grid().nodes_per_axis() as u32;
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * field.values().len());
    out.extend_from_slice(SNAPSHOT_MAGIC);
    out.push(SNAPSHOT_VERSION);
    for d in [nx, nx, nx, nv, nv, nv] {
        out.extend_from_slice(&d.to_le_bytes());
    }
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Decoded snapshot payload: dims and raw values.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub dims: [u32; 6],
    pub values: Vec<f64>,
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<Snapshot> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!(
            "snapshot too short: {} bytes",
            bytes.len()
        )));
    }
    if &bytes[..4] != SNAPSHOT_MAGIC {
        return Err(Error::Format("bad magic bytes".into()));
    }
    if bytes[4] != SNAPSHOT_VERSION {
        return Err(Error::Format(format!(
            "unsupported snapshot version {}",
            bytes[4]
        )));
    }
    let mut dims = [0u32; 6];
    for (k, d) in dims.iter_mut().enumerate() {
        let at = 5 + 4 * k;
        *d = u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
    }
    let count = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d as usize))
        .ok_or_else(|| Error::Format("dims overflow".into()))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != count * 8 {
        return Err(Error::Format(format!(
            "expected {} payload bytes, found {}",
            count * 8,
            payload.len()
        )));
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Snapshot { dims, values })
}

/// Decode a snapshot onto known grids, checking the stored dims.
pub fn read_snapshot(
    bytes: &[u8],
    partition: &SpatialPartition,
    grid: &VelocityGrid,
) -> Result<DistributionField> {
    let snap = decode_snapshot(bytes)?;
    let nx = partition.fine_cells_per_axis() as u32;
    let nv = grid.nodes_per_axis() as u32;
    if snap.dims != [nx, nx, nx, nv, nv, nv] {
        return Err(Error::GridMismatch(format!(
            "snapshot dims {:?} do not match grids",
            snap.dims
        )));
    }
    DistributionField::new(*partition, *grid, snap.values)
}
