// SPDX-License-Identifier: Apache-2.0

use crate::cloud::PointCloud;
use crate::detect::dbscan_labels;
use crate::error::{Error, Result};

/// Groups tree points into instances by clustering their offset-shifted
/// positions in 3D. Instance ids start at 1 in cluster order; noise gets
/// `None`.
pub fn cluster_offsets(points: &PointCloud, offsets: &[[f64; 3]], eps: f64, min_pts: usize) -> Result<Vec<Option<u32>>> {
    if offsets.len() != points.len() {
        return Err(Error::PointCountMismatch {
            pred: offsets.len(),
            gt: points.len(),
        });
    }
    if !(eps > 0.0 && eps.is_finite()) || min_pts == 0 {
        return Err(Error::InvalidConfig(format!("dbscan needs eps > 0 and min_pts >= 1, got {eps}, {min_pts}")));
    }
    let mut shifted = Vec::with_capacity(points.len());
    for (i, (p, o)) in points.points.iter().zip(offsets).enumerate() {
        if !o.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteCoordinate { index: i });
        }
        shifted.push([p.x + o[0], p.y + o[1], p.z + o[2]]);
    }
    let labels = dbscan_labels(&shifted, eps, min_pts);
    Ok(labels.labels.into_iter().map(|l| l.map(|c| c as u32 + 1)).collect())
}
