// SPDX-License-Identifier: Apache-2.0

//! Cloth simulation ground filter.
//!
//! The cloud is flipped upside down and a grid of cloth nodes is dropped onto
//! it. Each iteration moves every free node down by `gravity_step`, runs
//! `rigidness` relaxation passes that pull free nodes toward the mean of
//! their four neighbors, then pins any node that has reached the flipped
//! terrain under it. The terrain under a node is the lowest original point
//! whose nearest node it is; nodes without points inherit the value of the
//! closest node that has one. Once settled, points within
//! `classification_threshold` of the cloth (vertically) are ground.
//!
//! All heights are handled relative to the lowest point and all planar
//! coordinates relative to the cloud's minimum corner, so a rigid shift of
//! the input shifts the cloth by the same amount.

use std::collections::VecDeque;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

use super::grid::DigitalTerrainModel;

/// Empty cloth rows/columns added around the cloud.
const BORDER_NODES: usize = 2;
/// Fraction of the gap to the neighbor mean closed by one relaxation pass.
const RELAXATION: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct ClothParams {
    /// Cloth node spacing in meters.
    pub cell_size: f64,
    /// Number of relaxation passes per iteration (1 to 3).
    pub rigidness: u8,
    /// Fall distance per iteration in meters.
    pub gravity_step: f64,
    pub max_iterations: usize,
    /// Maximum point-to-cloth vertical distance of a ground point in meters.
    pub classification_threshold: f64,
    /// The cloth has settled when no node moves more than this in an iteration.
    pub convergence_epsilon: f64,
}

impl Default for ClothParams {
    fn default() -> Self {
        ClothParams {
            cell_size: 0.5,
            rigidness: 2,
            gravity_step: 0.05,
            max_iterations: 500,
            classification_threshold: 0.1,
            convergence_epsilon: 0.001,
        }
    }
}

impl ClothParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("cell_size", self.cell_size),
            ("gravity_step", self.gravity_step),
            ("classification_threshold", self.classification_threshold),
            ("convergence_epsilon", self.convergence_epsilon),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("cloth.{name} must be positive, got {v}")));
            }
        }
        if !(1..=3).contains(&self.rigidness) {
            return Err(Error::InvalidConfig(format!(
                "cloth.rigidness must be 1, 2 or 3, got {}",
                self.rigidness
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("cloth.max_iterations must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ClothResult {
    /// One entry per input point; `true` for ground.
    pub ground_mask: Vec<bool>,
    /// Settled cloth heights; each node sits at the center of one cell.
    pub surface: DigitalTerrainModel,
    /// `false` when `max_iterations` ran out before the cloth settled. The
    /// surface is still the best one reached.
    pub converged: bool,
    pub iterations: usize,
}

impl ClothResult {
    pub fn ground_count(&self) -> usize {
        self.ground_mask.iter().filter(|g| **g).count()
    }
}

struct Cloth {
    cols: usize,
    rows: usize,
    /// Node heights in the flipped frame, relative to the lowest point.
    height: Vec<f64>,
    /// Flipped terrain height under each node.
    floor: Vec<f64>,
    movable: Vec<bool>,
}

impl Cloth {
    fn neighbors(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        let (c, r) = (idx % self.cols, idx / self.cols);
        let left = (c > 0).then(|| idx - 1);
        let right = (c + 1 < self.cols).then(|| idx + 1);
        let down = (r > 0).then(|| idx - self.cols);
        let up = (r + 1 < self.rows).then(|| idx + self.cols);
        [left, right, down, up].into_iter().flatten()
    }

    /// One gravity + relaxation + collision step. Returns the largest node
    /// displacement.
    fn step(&mut self, gravity_step: f64, rigidness: u8, scratch: &mut Vec<f64>) -> f64 {
        let before = self.height.clone();
        for (h, &m) in self.height.iter_mut().zip(&self.movable) {
            if m {
                *h -= gravity_step;
            }
        }
        for _ in 0..rigidness {
            scratch.clear();
            scratch.extend_from_slice(&self.height);
            for idx in 0..self.height.len() {
                if !self.movable[idx] {
                    continue;
                }
                let (sum, n) = self
                    .neighbors(idx)
                    .fold((0.0, 0usize), |(s, n), j| (s + scratch[j], n + 1));
                if n > 0 {
                    let mean = sum / n as f64;
                    self.height[idx] = scratch[idx] + RELAXATION * (mean - scratch[idx]);
                }
            }
        }
        for idx in 0..self.height.len() {
            if self.movable[idx] && self.height[idx] <= self.floor[idx] {
                self.height[idx] = self.floor[idx];
                self.movable[idx] = false;
            }
        }
        self.height
            .iter()
            .zip(&before)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Separates ground from everything else with a cloth simulation.
pub fn cloth_filter(cloud: &PointCloud, params: &ClothParams) -> Result<ClothResult> {
    params.validate()?;
    let (lo, hi) = cloud.bounds().ok_or(Error::EmptyCloud)?;
    let cell = params.cell_size;
    let cols = ((hi[0] - lo[0]) / cell).floor() as usize + 1 + 2 * BORDER_NODES;
    let rows = ((hi[1] - lo[1]) / cell).floor() as usize + 1 + 2 * BORDER_NODES;
    let border = BORDER_NODES as f64 * cell;
    let node_of = |x: f64, y: f64| -> usize {
        let c = ((x - lo[0] + border) / cell).round() as usize;
        let r = ((y - lo[1] + border) / cell).round() as usize;
        r.min(rows - 1) * cols + c.min(cols - 1)
    };

    // Flipped, zero-based heights: the lowest point sits at 0, everything
    // above it is negative.
    let flipped = |z: f64| lo[2] - z;
    let mut floor = vec![f64::NAN; cols * rows];
    for p in &cloud.points {
        let n = node_of(p.x, p.y);
        let v = flipped(p.z);
        if floor[n].is_nan() || v > floor[n] {
            floor[n] = v;
        }
    }
    fill_from_nearest(&mut floor, cols, rows);

    let start = floor.iter().copied().fold(f64::NEG_INFINITY, f64::max) + params.gravity_step;
    let mut cloth = Cloth {
        cols,
        rows,
        height: vec![start; cols * rows],
        floor,
        movable: vec![true; cols * rows],
    };

    let mut scratch = Vec::with_capacity(cols * rows);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < params.max_iterations {
        iterations += 1;
        let moved = cloth.step(params.gravity_step, params.rigidness, &mut scratch);
        if moved < params.convergence_epsilon {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!(
            "cloth did not settle within {} iterations; using the last surface",
            params.max_iterations
        );
    }

    let origin = [lo[0] - border - 0.5 * cell, lo[1] - border - 0.5 * cell];
    let mut surface = DigitalTerrainModel::new(origin, cell, cols, rows)?;
    for (dst, v) in surface.raw_mut().iter_mut().zip(&cloth.height) {
        *dst = lo[2] - v;
    }

    let ground_mask = cloud
        .points
        .iter()
        .map(|p| {
            let z = surface
                .height_at(p.x, p.y)
                .expect("cloth covers the cloud with data in every node");
            (p.z - z).abs() <= params.classification_threshold
        })
        .collect();

    Ok(ClothResult {
        ground_mask,
        surface,
        converged,
        iterations,
    })
}

/// Multi-source breadth-first fill of NaN entries from their nearest
/// (4-connected) non-NaN node. Sources are seeded in index order, so ties go
/// to the lower index.
fn fill_from_nearest(values: &mut [f64], cols: usize, rows: usize) {
    let mut queue: VecDeque<usize> = (0..values.len()).filter(|&i| !values[i].is_nan()).collect();
    while let Some(idx) = queue.pop_front() {
        let (c, r) = (idx % cols, idx / cols);
        let candidates = [
            (c > 0).then(|| idx - 1),
            (c + 1 < cols).then(|| idx + 1),
            (r > 0).then(|| idx - cols),
            (r + 1 < rows).then(|| idx + cols),
        ];
        for j in candidates.into_iter().flatten() {
            if values[j].is_nan() {
                values[j] = values[idx];
                queue.push_back(j);
            }
        }
    }
}
