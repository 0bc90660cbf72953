// SPDX-License-Identifier: Apache-2.0

//! Ground filtering, terrain rasterization and height normalization.

mod cloth;
mod dtm;
mod grid;

pub use cloth::{cloth_filter, ClothParams, ClothResult};
pub use dtm::{
    build_dtm, normalize_heights, NormalizedCloud, DEFAULT_DTM_RESOLUTION_M, DEFAULT_FILL_RADIUS_M,
};
pub use grid::{DigitalTerrainModel, ESRI_NODATA};
