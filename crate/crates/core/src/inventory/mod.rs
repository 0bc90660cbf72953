// SPDX-License-Identifier: Apache-2.0

//! Multi-payload tree inventory.
//!
//! Detections are folded into tree records with support-weighted running
//! means. The means use the incremental update `m += w / W * (v - m)`, so
//! re-observing an identical value leaves the record bit-for-bit unchanged.

mod export;

use std::collections::BTreeMap;

use crate::detect::TreeDetection;
use crate::error::{Error, Result};

pub use export::{
    export_csv, export_geojson, import_csv, read_inventory, write_inventory, InventoryMeta, CSV_FILE, CSV_HEADER,
    GEOJSON_FILE, META_FILE,
};

pub const DEFAULT_ASSOCIATION_RADIUS_M: f64 = 0.5;
/// Trees whose DBH observations spread wider than this are flagged.
pub const HIGH_VARIANCE_STD_CM: f64 = 3.0;

/// One tree aggregated over all its observations.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeInstance {
    pub tree_id: u32,
    pub position: [f64; 2],
    pub dbh_cm: f64,
    pub observations: u32,
    pub first_seen: usize,
    pub last_seen: usize,
    pub rms_residual_cm: f64,
    weight: f64,
    /// Weighted sum of squared DBH deviations.
    dbh_m2: f64,
    /// Weighted mean of the squared per-fit residuals (cm^2).
    mean_sq_residual: f64,
}

impl TreeInstance {
    pub fn from_detection(tree_id: u32, det: &TreeDetection) -> Self {
        let rms_cm = 100.0 * det.fit.rms_residual;
        TreeInstance {
            tree_id,
            position: det.position,
            dbh_cm: det.dbh_cm,
            observations: 1,
            first_seen: det.payload_id,
            last_seen: det.payload_id,
            rms_residual_cm: rms_cm,
            weight: det.support.max(1) as f64,
            dbh_m2: 0.0,
            mean_sq_residual: rms_cm * rms_cm,
        }
    }

    /// Rebuilds a record from exported columns. The accumulated support is
    /// unknown, so every past observation counts with unit weight and zero
    /// DBH spread.
    pub fn from_summary(
        tree_id: u32,
        position: [f64; 2],
        dbh_cm: f64,
        observations: u32,
        rms_residual_cm: f64,
        first_seen: usize,
        last_seen: usize,
    ) -> Self {
        TreeInstance {
            tree_id,
            position,
            dbh_cm,
            observations,
            first_seen,
            last_seen,
            rms_residual_cm,
            weight: observations.max(1) as f64,
            dbh_m2: 0.0,
            mean_sq_residual: rms_residual_cm * rms_residual_cm,
        }
    }

    /// Total support accumulated so far.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn update(&mut self, det: &TreeDetection) {
        let w = det.support.max(1) as f64;
        let total = self.weight + w;
        let f = w / total;
        self.position[0] += f * (det.position[0] - self.position[0]);
        self.position[1] += f * (det.position[1] - self.position[1]);
        let old_mean = self.dbh_cm;
        self.dbh_cm += f * (det.dbh_cm - old_mean);
        self.dbh_m2 += w * (det.dbh_cm - old_mean) * (det.dbh_cm - self.dbh_cm);
        let rms_cm = 100.0 * det.fit.rms_residual;
        self.mean_sq_residual += f * (rms_cm * rms_cm - self.mean_sq_residual);
        self.rms_residual_cm = self.mean_sq_residual.sqrt();
        self.weight = total;
        self.observations += 1;
        self.first_seen = self.first_seen.min(det.payload_id);
        self.last_seen = self.last_seen.max(det.payload_id);
    }

    /// Support-weighted standard deviation of the observed DBH values.
    pub fn dbh_std_cm(&self) -> f64 {
        (self.dbh_m2.max(0.0) / self.weight).sqrt()
    }

    pub fn is_high_variance(&self) -> bool {
        self.dbh_std_cm() > HIGH_VARIANCE_STD_CM
    }

    fn distance2(&self, p: [f64; 2]) -> f64 {
        let (dx, dy) = (self.position[0] - p[0], self.position[1] - p[1]);
        dx * dx + dy * dy
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ForestInventory {
    pub trees: BTreeMap<u32, TreeInstance>,
    pub plot_id: String,
    /// Opaque coordinate reference label.
    pub crs: String,
    pub config_fingerprint: String,
}

impl ForestInventory {
    pub fn new(plot_id: impl Into<String>, crs: impl Into<String>, config_fingerprint: impl Into<String>) -> Self {
        ForestInventory {
            trees: BTreeMap::new(),
            plot_id: plot_id.into(),
            crs: crs.into(),
            config_fingerprint: config_fingerprint.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    pub fn next_id(&self) -> u32 {
        self.trees.keys().next_back().map_or(1, |id| id + 1)
    }

    pub fn high_variance_ids(&self) -> Vec<u32> {
        self.trees.values().filter(|t| t.is_high_variance()).map(|t| t.tree_id).collect()
    }

    /// Id of the closest tree within `radius` of `p`; the lower id wins ties.
    pub fn nearest_within(&self, p: [f64; 2], radius: f64) -> Option<u32> {
        let r2 = radius * radius;
        let mut best: Option<(f64, u32)> = None;
        for t in self.trees.values() {
            let d2 = t.distance2(p);
            if d2 <= r2 && best.is_none_or(|(b, _)| d2 < b) {
                best = Some((d2, t.tree_id));
            }
        }
        best.map(|(_, id)| id)
    }
}

/// Folds a batch of detections into the inventory.
///
/// Detections are processed in `(x, y)` order. Each joins the nearest tree
/// within `association_radius` (trees created earlier in the same batch
/// included) or starts a new tree with the next free id.
pub fn associate(
    mut inventory: ForestInventory,
    detections: &[TreeDetection],
    association_radius: f64,
) -> Result<ForestInventory> {
    if !(association_radius > 0.0 && association_radius.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "association radius must be positive, got {association_radius}"
        )));
    }
    let mut ordered: Vec<&TreeDetection> = detections.iter().collect();
    ordered.sort_by(|a, b| {
        a.position[0]
            .total_cmp(&b.position[0])
            .then(a.position[1].total_cmp(&b.position[1]))
    });
    for det in ordered {
        match inventory.nearest_within(det.position, association_radius) {
            Some(id) => inventory.trees.get_mut(&id).expect("id from lookup").update(det),
            None => {
                let id = inventory.next_id();
                inventory.trees.insert(id, TreeInstance::from_detection(id, det));
            }
        }
    }
    Ok(inventory)
}
