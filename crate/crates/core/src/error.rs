// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("i/o failure: {0}")]
    Stream(#[from] std::io::Error),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("malformed record at point {index}: {reason}")]
    MalformedRecord { index: usize, reason: String },
    #[error("non-finite coordinate at point {index}")]
    NonFiniteCoordinate { index: usize },
    #[error("unknown semantic label code {code} at point {index}")]
    UnknownLabelCode { index: usize, code: u64 },
    #[error("point {index} carries instance {instance} but is not a tree point")]
    InstanceOnNonTreePoint { index: usize, instance: u32 },
    #[error("timestamp {timestamp} outside trajectory range [{start}, {end}]")]
    TimestampOutOfRange { timestamp: f64, start: f64, end: f64 },
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("no ground points to build a terrain model from")]
    NoGroundPoints,
    #[error("degenerate cluster: {0}")]
    DegenerateCluster(String),
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("IoU of two empty segments is undefined")]
    BothEmpty,
    #[error("ground truth for plot '{0}' is empty")]
    EmptyGroundTruth(String),
    #[error("could not place tree {placed} of {requested} at the requested spacing")]
    PlacementFailure { placed: usize, requested: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid panoptic frame: {0}")]
    InvalidFrame(String),
    #[error("point count mismatch: prediction has {pred}, ground truth has {gt}")]
    PointCountMismatch { pred: usize, gt: usize },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input (files, flags, data) rather
    /// than by a failure inside the pipeline.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::DegenerateCluster(_) | Error::DegenerateGeometry(_) | Error::Stream(_)
        )
    }
}
