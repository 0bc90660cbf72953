// SPDX-License-Identifier: Apache-2.0

//! Segmentation and inventory evaluation.

mod dbh;
mod offsets;
mod panoptic;
mod report;

pub use dbh::{
    eval_dbh, read_ground_truth, DbhEvalReport, DbhPair, GroundTruthTree, MatchMode, PlotDbh, DEFAULT_MATCH_RADIUS_M,
};
pub use offsets::cluster_offsets;
pub use panoptic::{
    iou, match_instances, pq_class, pq_overall, thing_quality, ClassScore, FrameRole, Matching, PQReport,
    PanopticClass, PanopticFrame,
};
pub use report::{dbh_report_csv, dbh_report_text, pq_report_csv, pq_report_text};
