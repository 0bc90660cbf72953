// SPDX-License-Identifier: Apache-2.0

//! Flat `key = value` pipeline configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Every key is
//! optional; unknown or repeated keys are errors. Rendering always emits
//! every key in a fixed order, so the rendered text identifies a
//! configuration and its SHA-256 serves as the fingerprint.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::detect::DetectionConfig;
use crate::error::{Error, Result};
use crate::inventory::DEFAULT_ASSOCIATION_RADIUS_M;
use crate::payload::DEFAULT_WINDOW_M;

/// Every recognized key, in rendering order.
pub const KEYS: [&str; 27] = [
    "payload.window_m",
    "cloth.cell_size_m",
    "cloth.rigidness",
    "cloth.gravity_step_m",
    "cloth.max_iterations",
    "cloth.threshold_m",
    "cloth.epsilon_m",
    "dtm.resolution_m",
    "dtm.fill_radius_m",
    "dtm.export_resolution_m",
    "slice.low_m",
    "slice.high_m",
    "dbscan.eps_m",
    "dbscan.min_pts",
    "nms.radius_m",
    "hough.r_min_m",
    "hough.r_max_m",
    "hough.center_step_m",
    "hough.radius_step_m",
    "fit.residual_max_m",
    "fit.min_points",
    "fit.min_arc_deg",
    "fit.radius_rel_se_max",
    "inventory.association_radius_m",
    "inventory.plot_id",
    "inventory.crs",
    "threads",
];

pub const DEFAULT_EXPORT_RESOLUTION_M: f64 = 0.25;

/// Everything `inventory run` needs besides its inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub window_m: f64,
    pub detection: DetectionConfig,
    /// Cell size of the exported terrain raster.
    pub export_resolution_m: f64,
    pub association_radius_m: f64,
    pub plot_id: String,
    pub crs: String,
    /// Worker threads for payload processing; 0 picks the core count.
    pub threads: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            window_m: DEFAULT_WINDOW_M,
            detection: DetectionConfig::default(),
            export_resolution_m: DEFAULT_EXPORT_RESOLUTION_M,
            association_radius_m: DEFAULT_ASSOCIATION_RADIUS_M,
            plot_id: "plot".into(),
            crs: "local".into(),
            threads: 0,
        }
    }
}

fn number<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("{key}: cannot parse '{value}'")))
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = PipelineConfig::default();
        let mut seen = std::collections::BTreeSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("line {}: expected 'key = value'", n + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(Error::InvalidConfig(format!("line {}: '{key}' given twice", n + 1)));
            }
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Assigns one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let d = &mut self.detection;
        match key {
            "payload.window_m" => self.window_m = number(key, value)?,
            "cloth.cell_size_m" => d.cloth.cell_size = number(key, value)?,
            "cloth.rigidness" => d.cloth.rigidness = number(key, value)?,
            "cloth.gravity_step_m" => d.cloth.gravity_step = number(key, value)?,
            "cloth.max_iterations" => d.cloth.max_iterations = number(key, value)?,
            "cloth.threshold_m" => d.cloth.classification_threshold = number(key, value)?,
            "cloth.epsilon_m" => d.cloth.convergence_epsilon = number(key, value)?,
            "dtm.resolution_m" => d.dtm_resolution = number(key, value)?,
            "dtm.fill_radius_m" => d.dtm_fill_radius = number(key, value)?,
            "dtm.export_resolution_m" => self.export_resolution_m = number(key, value)?,
            "slice.low_m" => d.slice_band.0 = number(key, value)?,
            "slice.high_m" => d.slice_band.1 = number(key, value)?,
            "dbscan.eps_m" => d.dbscan_eps = number(key, value)?,
            "dbscan.min_pts" => d.dbscan_min_pts = number(key, value)?,
            "nms.radius_m" => d.nms_radius = number(key, value)?,
            "hough.r_min_m" => d.hough.r_min = number(key, value)?,
            "hough.r_max_m" => d.hough.r_max = number(key, value)?,
            "hough.center_step_m" => d.hough.center_step = number(key, value)?,
            "hough.radius_step_m" => d.hough.radius_step = number(key, value)?,
            "fit.residual_max_m" => d.residual_max = number(key, value)?,
            "fit.min_points" => d.min_trunk_points = number(key, value)?,
            "fit.min_arc_deg" => d.min_arc_deg = number(key, value)?,
            "fit.radius_rel_se_max" => d.max_radius_rel_error = number(key, value)?,
            "inventory.association_radius_m" => self.association_radius_m = number(key, value)?,
            "inventory.plot_id" => self.plot_id = value.to_string(),
            "inventory.crs" => self.crs = value.to_string(),
            "threads" => self.threads = number(key, value)?,
            _ => return Err(Error::InvalidConfig(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    fn values(&self) -> [String; 27] {
        let d = &self.detection;
        [
            self.window_m.to_string(),
            d.cloth.cell_size.to_string(),
            d.cloth.rigidness.to_string(),
            d.cloth.gravity_step.to_string(),
            d.cloth.max_iterations.to_string(),
            d.cloth.classification_threshold.to_string(),
            d.cloth.convergence_epsilon.to_string(),
            d.dtm_resolution.to_string(),
            d.dtm_fill_radius.to_string(),
            self.export_resolution_m.to_string(),
            d.slice_band.0.to_string(),
            d.slice_band.1.to_string(),
            d.dbscan_eps.to_string(),
            d.dbscan_min_pts.to_string(),
            d.nms_radius.to_string(),
            d.hough.r_min.to_string(),
            d.hough.r_max.to_string(),
            d.hough.center_step.to_string(),
            d.hough.radius_step.to_string(),
            d.residual_max.to_string(),
            d.min_trunk_points.to_string(),
            d.min_arc_deg.to_string(),
            d.max_radius_rel_error.to_string(),
            self.association_radius_m.to_string(),
            self.plot_id.clone(),
            self.crs.clone(),
            self.threads.to_string(),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        self.detection.validate()?;
        for (key, v) in [
            ("payload.window_m", self.window_m),
            ("dtm.export_resolution_m", self.export_resolution_m),
            ("inventory.association_radius_m", self.association_radius_m),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{key} must be positive, got {v}")));
            }
        }
        for (key, v) in [("inventory.plot_id", &self.plot_id), ("inventory.crs", &self.crs)] {
            if v.is_empty() || v.contains(['\n', '\r']) {
                return Err(Error::InvalidConfig(format!("{key} must be a non-empty single line")));
            }
        }
        Ok(())
    }

    /// Every key with its value, one `key = value` line each.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (key, value) in KEYS.iter().zip(self.values()) {
            let _ = writeln!(out, "{key} = {value}");
        }
        out
    }

    /// First 16 hex digits of the SHA-256 of the rendered configuration.
    pub fn fingerprint(&self) -> String {
        short_hash(self.render().as_bytes())
    }
}

/// Hash of the key list; changes whenever a key is added, removed or renamed.
pub fn schema_hash() -> String {
    short_hash(KEYS.join("\n").as_bytes())
}

fn short_hash(bytes: &[u8]) -> String {
    hex::encode(&Sha256::digest(bytes)[..8])
}
