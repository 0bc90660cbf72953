// SPDX-License-Identifier: Apache-2.0

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

pub const DEFAULT_BREAST_HEIGHT_BAND: (f64, f64) = (1.25, 1.35);

/// Points of a height band together with their positions in the input.
#[derive(Debug, Clone, PartialEq)]
pub struct Slice {
    pub cloud: PointCloud,
    pub indices: Vec<usize>,
}

/// Keeps points with `low <= z <= high` (closed band) from a height-normalized
/// cloud. An empty slice is a valid result.
pub fn slice_breast_height(normalized: &PointCloud, band: (f64, f64)) -> Result<Slice> {
    let (low, high) = band;
    if !(low < high) {
        return Err(Error::InvalidConfig(format!("slice band ({low}, {high}) is empty")));
    }
    let indices: Vec<usize> = normalized
        .points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.z >= low && p.z <= high)
        .map(|(i, _)| i)
        .collect();
    Ok(Slice {
        cloud: normalized.subset(&indices),
        indices,
    })
}
