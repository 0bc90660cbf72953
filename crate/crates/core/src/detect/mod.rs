// SPDX-License-Identifier: Apache-2.0

//! Trunk detection at breast height.

mod circle;
mod cylinder;
mod dbscan;
mod hough;
mod nms;
mod pipeline;
mod slice;

pub use circle::{arc_coverage, circle_objective, least_squares_circle, radius_std_error, CircleFit};
pub use cylinder::{fit_cylinder, fit_cylinder_points, CylinderFit, MIN_CYLINDER_EXTENT_M, MIN_CYLINDER_POINTS};
pub use dbscan::{dbscan, dbscan_labels, Cluster, Clustering, DbscanLabels};
pub use hough::{hough_circle, hough_peak, HoughParams, HoughPeak};
pub use nms::{candidate_order, non_maxima_suppression};
pub use pipeline::{
    detect_in_slice, detect_trees, detect_trees_cylinder, detect_trees_with_terrain, DetectionConfig, PayloadDetections, TreeDetection, DEFAULT_STEM_BAND,
};
pub use slice::{slice_breast_height, Slice, DEFAULT_BREAST_HEIGHT_BAND};
