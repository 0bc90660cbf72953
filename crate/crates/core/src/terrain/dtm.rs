// SPDX-License-Identifier: Apache-2.0

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

use super::grid::DigitalTerrainModel;

pub const DEFAULT_DTM_RESOLUTION_M: f64 = 0.04;
pub const DEFAULT_FILL_RADIUS_M: f64 = 0.25;

/// Rasterizes ground points into a terrain model covering the whole cloud.
///
/// Each cell holds the median height of the ground points it owns. Empty
/// cells take the height of the nearest cell with data (center to center,
/// ties to the lower cell index) if it lies within `fill_radius`; otherwise
/// they stay no-data.
pub fn build_dtm(
    cloud: &PointCloud,
    ground_mask: &[bool],
    resolution: f64,
    fill_radius: f64,
) -> Result<DigitalTerrainModel> {
    if ground_mask.len() != cloud.len() {
        return Err(Error::InvalidConfig(format!(
            "ground mask has {} entries for {} points",
            ground_mask.len(),
            cloud.len()
        )));
    }
    if !ground_mask.iter().any(|g| *g) {
        return Err(Error::NoGroundPoints);
    }
    let (lo, hi) = cloud.bounds().ok_or(Error::NoGroundPoints)?;
    let mut dtm = DigitalTerrainModel::covering([lo[0], lo[1]], [hi[0], hi[1]], resolution)?;
    let width = dtm.width();

    // (cell, z) pairs sorted by cell then height: a fixed order for medians.
    let mut samples: Vec<(usize, f64)> = cloud
        .points
        .iter()
        .zip(ground_mask)
        .filter(|(_, g)| **g)
        .map(|(p, _)| {
            let (c, r) = dtm.cell_of(p.x, p.y).expect("grid covers the cloud");
            (r * width + c, p.z)
        })
        .collect();
    samples.sort_unstable_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let heights = dtm.raw_mut();
    let mut start = 0;
    while start < samples.len() {
        let cell = samples[start].0;
        let end = start + samples[start..].partition_point(|s| s.0 == cell);
        let run = &samples[start..end];
        let n = run.len();
        heights[cell] = if n % 2 == 1 {
            run[n / 2].1
        } else {
            let (a, b) = (run[n / 2 - 1].1, run[n / 2].1);
            if a == b {
                a
            } else {
                0.5 * (a + b)
            }
        };
        start = end;
    }

    fill_nearest_within(&mut dtm, fill_radius);
    Ok(dtm)
}

fn fill_nearest_within(dtm: &mut DigitalTerrainModel, radius: f64) {
    if !(radius > 0.0) {
        return;
    }
    let (w, h, res) = (dtm.width(), dtm.height(), dtm.resolution());
    let reach = (radius / res).floor() as usize;
    let r2 = (radius / res) * (radius / res);
    let source = dtm.raw().to_vec();
    // best squared distance (in cells) per empty cell; sources visited in
    // index order so strict `<` keeps the lower index on ties
    let mut best = vec![f64::INFINITY; w * h];
    let out = dtm.raw_mut();
    for (src, &z) in source.iter().enumerate() {
        if z.is_nan() {
            continue;
        }
        let (sc, sr) = (src % w, src / w);
        for r in sr.saturating_sub(reach)..=(sr + reach).min(h - 1) {
            for c in sc.saturating_sub(reach)..=(sc + reach).min(w - 1) {
                let dst = r * w + c;
                if !source[dst].is_nan() {
                    continue;
                }
                let (dc, dr) = (c as f64 - sc as f64, r as f64 - sr as f64);
                let d2 = dc * dc + dr * dr;
                if d2 <= r2 && d2 < best[dst] {
                    best[dst] = d2;
                    out[dst] = z;
                }
            }
        }
    }
}

/// Heights above the terrain model.
#[derive(Debug, Clone)]
pub struct NormalizedCloud {
    /// Points with `z` replaced by height above ground.
    pub cloud: PointCloud,
    /// Index in the input cloud of each output point.
    pub source_indices: Vec<usize>,
    /// Input points that lie over no-data and were left out.
    pub excluded: Vec<usize>,
}

/// Replaces every `z` with `z - dtm.height_at(x, y)`. Points with no terrain
/// height available are reported in `excluded` instead of being normalized.
pub fn normalize_heights(cloud: &PointCloud, dtm: &DigitalTerrainModel) -> NormalizedCloud {
    let mut out = NormalizedCloud {
        cloud: PointCloud::new(Vec::with_capacity(cloud.len()), cloud.frame_id.clone()),
        source_indices: Vec::with_capacity(cloud.len()),
        excluded: Vec::new(),
    };
    for (i, p) in cloud.points.iter().enumerate() {
        match dtm.height_at(p.x, p.y) {
            Some(ground) => {
                let mut q = *p;
                q.z = p.z - ground;
                out.cloud.points.push(q);
                out.source_indices.push(i);
            }
            None => out.excluded.push(i),
        }
    }
    if !out.excluded.is_empty() {
        log::warn!("{} points over no-data terrain were excluded", out.excluded.len());
    }
    out
}
