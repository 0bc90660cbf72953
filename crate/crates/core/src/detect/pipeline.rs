// SPDX-License-Identifier: Apache-2.0

use log::debug;
use rayon::prelude::*;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::payload::PayloadCloud;
use crate::terrain::{
    build_dtm, cloth_filter, normalize_heights, ClothParams, DigitalTerrainModel, DEFAULT_DTM_RESOLUTION_M,
    DEFAULT_FILL_RADIUS_M,
};

use super::circle::{arc_coverage, radius_std_error, CircleFit};
use super::cylinder::fit_cylinder_points;
use super::dbscan::dbscan;
use super::hough::{hough_circle, HoughParams};
use super::nms::non_maxima_suppression;
use super::slice::{slice_breast_height, DEFAULT_BREAST_HEIGHT_BAND};

/// A trunk found in one payload.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeDetection {
    /// Trunk center in the world `xy` plane.
    pub position: [f64; 2],
    pub dbh_cm: f64,
    pub fit: CircleFit,
    pub payload_id: usize,
    /// Points supporting the fit.
    pub support: usize,
}

impl TreeDetection {
    pub fn from_fit(fit: CircleFit, payload_id: usize) -> Self {
        TreeDetection {
            position: fit.center,
            dbh_cm: 200.0 * fit.radius,
            fit,
            payload_id,
            support: fit.inlier_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionConfig {
    pub cloth: ClothParams,
    pub dtm_resolution: f64,
    pub dtm_fill_radius: f64,
    pub slice_band: (f64, f64),
    pub dbscan_eps: f64,
    pub dbscan_min_pts: usize,
    pub nms_radius: f64,
    pub hough: HoughParams,
    pub min_trunk_points: usize,
    pub residual_max: f64,
    /// Smallest accepted angular coverage of a trunk arc, in degrees.
    pub min_arc_deg: f64,
    /// Largest accepted standard error of the radius relative to the radius.
    pub max_radius_rel_error: f64,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        DetectionConfig {
            cloth: ClothParams::default(),
            dtm_resolution: DEFAULT_DTM_RESOLUTION_M,
            dtm_fill_radius: DEFAULT_FILL_RADIUS_M,
            slice_band: DEFAULT_BREAST_HEIGHT_BAND,
            dbscan_eps: 0.15,
            dbscan_min_pts: 8,
            nms_radius: 0.5,
            hough: HoughParams::default(),
            min_trunk_points: 20,
            residual_max: 0.03,
            min_arc_deg: 90.0,
            max_radius_rel_error: 0.05,
        }
    }
}

impl DetectionConfig {
    pub fn validate(&self) -> Result<()> {
        self.cloth.validate()?;
        self.hough.validate()?;
        let positive = [
            ("dtm.resolution_m", self.dtm_resolution),
            ("dbscan.eps_m", self.dbscan_eps),
            ("nms.radius_m", self.nms_radius),
            ("fit.residual_max_m", self.residual_max),
            ("fit.radius_rel_se_max", self.max_radius_rel_error),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{key} must be positive, got {v}")));
            }
        }
        if !(self.dtm_fill_radius >= 0.0) {
            return Err(Error::InvalidConfig("dtm fill radius must be non-negative".into()));
        }
        if !(self.slice_band.0 < self.slice_band.1) {
            return Err(Error::InvalidConfig(format!(
                "slice band ({}, {}) is empty",
                self.slice_band.0, self.slice_band.1
            )));
        }
        if self.dbscan_min_pts == 0 || self.min_trunk_points < 3 {
            return Err(Error::InvalidConfig(
                "dbscan.min_pts must be at least 1 and min_trunk_points at least 3".into(),
            ));
        }
        if !(0.0..=360.0).contains(&self.min_arc_deg) {
            return Err(Error::InvalidConfig("minimum arc must lie in [0, 360] degrees".into()));
        }
        Ok(())
    }
}

/// Detections of one payload together with the terrain built on the way.
#[derive(Debug, Clone)]
pub struct PayloadDetections {
    pub detections: Vec<TreeDetection>,
    pub dtm: DigitalTerrainModel,
    pub ground_mask: Vec<bool>,
}

/// Detects trunks in a gravity-aligned payload cloud.
pub fn detect_trees(payload: &PayloadCloud, config: &DetectionConfig) -> Result<Vec<TreeDetection>> {
    detect_trees_with_terrain(payload, config).map(|d| d.detections)
}

struct Terrain {
    ground_mask: Vec<bool>,
    dtm: DigitalTerrainModel,
    /// Non-ground points with heights above the terrain.
    normalized: PointCloud,
}

fn terrain_stage(payload: &PayloadCloud, config: &DetectionConfig) -> Result<Terrain> {
    config.validate()?;
    let cloud = &payload.cloud;
    cloud.validate()?;
    let cloth = cloth_filter(cloud, &config.cloth)?;
    let dtm = build_dtm(cloud, &cloth.ground_mask, config.dtm_resolution, config.dtm_fill_radius)?;
    let above_ground: Vec<usize> = (0..cloud.len()).filter(|&i| !cloth.ground_mask[i]).collect();
    let normalized = normalize_heights(&cloud.subset(&above_ground), &dtm).cloud;
    Ok(Terrain {
        ground_mask: cloth.ground_mask,
        dtm,
        normalized,
    })
}

pub fn detect_trees_with_terrain(payload: &PayloadCloud, config: &DetectionConfig) -> Result<PayloadDetections> {
    let Terrain {
        ground_mask,
        dtm,
        normalized,
    } = terrain_stage(payload, config)?;
    let slice = slice_breast_height(&normalized, config.slice_band)?;
    let detections = detect_in_slice(&slice.cloud, payload.id, config);
    debug!(
        "payload {}: {} ground points, {} slice points, {} detections",
        payload.id,
        ground_mask.iter().filter(|&&g| g).count(),
        slice.cloud.len(),
        detections.len()
    );
    Ok(PayloadDetections {
        detections,
        dtm,
        ground_mask,
    })
}

/// Height band, above the terrain, of the stem segments used by
/// [`detect_trees_cylinder`].
pub const DEFAULT_STEM_BAND: (f64, f64) = (0.5, 3.0);

/// Alternative detector that fits a cylinder to each whole stem segment
/// instead of a circle to the breast-height slice.
///
/// Stems are DBSCAN clusters of the non-ground points in `stem_band`. The
/// arc-coverage and radius-error rules are not applied, so trunks seen from
/// one side are kept, at the price of a less certain diameter. Positions are
/// taken where the axis crosses the middle of the breast-height band.
pub fn detect_trees_cylinder(
    payload: &PayloadCloud,
    config: &DetectionConfig,
    stem_band: (f64, f64),
) -> Result<Vec<TreeDetection>> {
    if !(stem_band.0 < stem_band.1) {
        return Err(Error::InvalidConfig(format!(
            "stem band ({}, {}) is empty",
            stem_band.0, stem_band.1
        )));
    }
    let terrain = terrain_stage(payload, config)?;
    let stems = slice_breast_height(&terrain.normalized, stem_band)?.cloud;
    let clustering = dbscan(&stems, config.dbscan_eps, config.dbscan_min_pts);
    let max_extent = 2.0 * (config.hough.r_max + config.dbscan_eps);
    let breast_height = 0.5 * (config.slice_band.0 + config.slice_band.1);
    let mut fits: Vec<CircleFit> = clustering
        .clusters
        .par_iter()
        .filter_map(|cluster| {
            let xyz: Vec<[f64; 3]> = cluster.point_indices.iter().map(|&i| stems.points[i].xyz()).collect();
            let xy: Vec<[f64; 2]> = xyz.iter().map(|p| [p[0], p[1]]).collect();
            if xyz.len() < config.min_trunk_points || extent(&xy) > max_extent {
                return None;
            }
            let cyl = fit_cylinder_points(&xyz).ok()?;
            let accepted = cyl.radius > config.hough.r_min
                && cyl.radius < config.hough.r_max
                && cyl.rms_residual <= config.residual_max;
            let p = cyl.point_at_height(breast_height)?;
            accepted.then_some(CircleFit {
                center: [p[0], p[1]],
                radius: cyl.radius,
                rms_residual: cyl.rms_residual,
                inlier_count: xyz.len(),
            })
        })
        .collect();
    fits.sort_by(|a, b| a.center[0].total_cmp(&b.center[0]).then(a.center[1].total_cmp(&b.center[1])));
    let mut kept = non_maxima_suppression(&fits, config.nms_radius);
    kept.sort_by(|a, b| a.center[0].total_cmp(&b.center[0]).then(a.center[1].total_cmp(&b.center[1])));
    Ok(kept.into_iter().map(|f| TreeDetection::from_fit(f, payload.id)).collect())
}

/// Clustering, per-cluster circle fitting and suppression on a breast-height
/// slice. The output is sorted by `(x, y)`.
pub fn detect_in_slice(slice: &PointCloud, payload_id: usize, config: &DetectionConfig) -> Vec<TreeDetection> {
    let clustering = dbscan(slice, config.dbscan_eps, config.dbscan_min_pts);
    let max_extent = 2.0 * (config.hough.r_max + config.dbscan_eps);
    let mut fits: Vec<CircleFit> = clustering
        .clusters
        .par_iter()
        .filter_map(|cluster| {
            let xy: Vec<[f64; 2]> = cluster.point_indices.iter().map(|&i| slice.points[i].xy()).collect();
            if xy.len() < config.min_trunk_points || extent(&xy) > max_extent {
                return None;
            }
            let fit = hough_circle(&xy, &config.hough).ok()?;
            accept(&xy, fit, config).then_some(fit)
        })
        .collect();
    fits.sort_by(|a, b| a.center[0].total_cmp(&b.center[0]).then(a.center[1].total_cmp(&b.center[1])));
    let mut kept = non_maxima_suppression(&fits, config.nms_radius);
    kept.sort_by(|a, b| a.center[0].total_cmp(&b.center[0]).then(a.center[1].total_cmp(&b.center[1])));
    kept.into_iter().map(|f| TreeDetection::from_fit(f, payload_id)).collect()
}

fn extent(xy: &[[f64; 2]]) -> f64 {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in xy {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (hi[0] - lo[0]).max(hi[1] - lo[1])
}

fn accept(xy: &[[f64; 2]], fit: CircleFit, config: &DetectionConfig) -> bool {
    let radius_ok = fit.radius > config.hough.r_min && fit.radius < config.hough.r_max;
    if !radius_ok || fit.rms_residual > config.residual_max || fit.inlier_count < config.min_trunk_points {
        return false;
    }
    let band = config.hough.inlier_band();
    let inliers: Vec<[f64; 2]> = xy
        .iter()
        .copied()
        .filter(|p| ((p[0] - fit.center[0]).hypot(p[1] - fit.center[1]) - fit.radius).abs() <= band)
        .collect();
    if arc_coverage(&inliers, fit.center) < config.min_arc_deg.to_radians() {
        return false;
    }
    // a short noisy arc fits many circles equally well
    radius_std_error(&inliers, fit.center, fit.radius)
        .is_some_and(|se| se <= config.max_radius_rel_error * fit.radius)
}
