// SPDX-License-Identifier: Apache-2.0

//! Tree inventory from ground-level LiDAR.
//!
//! Point clouds are read with [`io`], cut into payloads by distance
//! travelled with [`payload`], split into ground and vegetation and
//! rasterized with [`terrain`], searched for trunks with [`detect`] and
//! merged across payloads with [`inventory`]. [`eval`] scores segmentations
//! and inventories, [`synth`] generates labelled plots, and [`workflow`]
//! strings the stages together the way the `forest-inventory` binary does.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod cli;
pub mod cloud;
pub mod config;
pub mod detect;
pub mod error;
pub mod eval;
pub mod inventory;
pub mod io;
pub mod payload;
pub mod synth;
pub mod terrain;
pub mod workflow;

pub use cloud::{Point3, PointCloud, SemanticLabel};
pub use error::{Error, Result};
