// SPDX-License-Identifier: Apache-2.0

//! Three-parameter Hough voting for trunk cross-sections.
//!
//! Candidate centers form a regular grid over the points' bounding box grown
//! by `r_max`. Every (point, candidate center) pair casts one vote for the
//! radius bin containing their distance, so each point votes at most once per
//! center. The strongest (center, radius) cell seeds a geometric least-squares
//! refinement on the points near it.

use crate::error::{Error, Result};

use super::circle::{check_not_collinear, circle_objective, least_squares_circle, refine_circle, CircleFit};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoughParams {
    pub r_min: f64,
    pub r_max: f64,
    pub center_step: f64,
    pub radius_step: f64,
}

impl Default for HoughParams {
    fn default() -> Self {
        HoughParams {
            r_min: 0.025,
            r_max: 1.0,
            center_step: 0.02,
            radius_step: 0.01,
        }
    }
}

impl HoughParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0 && self.r_min < self.r_max && self.r_max.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "hough radius range ({}, {}) is invalid",
                self.r_min, self.r_max
            )));
        }
        if !(self.center_step > 0.0 && self.radius_step > 0.0) {
            return Err(Error::InvalidConfig("hough steps must be positive".into()));
        }
        Ok(())
    }

    /// Distance from the voted circle within which a point counts as inlier.
    pub fn inlier_band(&self) -> f64 {
        2.0 * self.radius_step
    }
}

/// Raw accumulator maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoughPeak {
    pub center: [f64; 2],
    pub radius: f64,
    pub votes: u32,
}

/// Returns the accumulator cell with the most votes. Ties keep the first cell
/// in (row, column, radius) order.
pub fn hough_peak(points: &[[f64; 2]], params: &HoughParams) -> Result<HoughPeak> {
    params.validate()?;
    check_not_collinear(points)?;
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in points {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let origin = [lo[0] - params.r_max, lo[1] - params.r_max];
    let cols = ((hi[0] - lo[0] + 2.0 * params.r_max) / params.center_step).floor() as usize + 1;
    let rows = ((hi[1] - lo[1] + 2.0 * params.r_max) / params.center_step).floor() as usize + 1;
    let bins = ((params.r_max - params.r_min) / params.radius_step).round() as usize + 1;

    let mut votes = vec![0u32; bins];
    let mut best = HoughPeak {
        center: [0.0; 2],
        radius: 0.0,
        votes: 0,
    };
    for row in 0..rows {
        let cy = origin[1] + row as f64 * params.center_step;
        for col in 0..cols {
            let cx = origin[0] + col as f64 * params.center_step;
            votes.iter_mut().for_each(|v| *v = 0);
            for p in points {
                let d = (p[0] - cx).hypot(p[1] - cy);
                let k = ((d - params.r_min) / params.radius_step).round();
                if k >= 0.0 && (k as usize) < bins {
                    votes[k as usize] += 1;
                }
            }
            for (k, &v) in votes.iter().enumerate() {
                if v > best.votes {
                    best = HoughPeak {
                        center: [cx, cy],
                        radius: params.r_min + k as f64 * params.radius_step,
                        votes: v,
                    };
                }
            }
        }
    }
    Ok(best)
}

/// Hough vote followed by least-squares refinement on the inliers of the
/// voted circle. The refined circle never has a larger inlier objective than
/// the raw peak; `rms_residual` and `inlier_count` refer to those inliers.
pub fn hough_circle(points: &[[f64; 2]], params: &HoughParams) -> Result<CircleFit> {
    let peak = hough_peak(points, params)?;
    let band = params.inlier_band();
    let inliers: Vec<[f64; 2]> = points
        .iter()
        .copied()
        .filter(|p| ((p[0] - peak.center[0]).hypot(p[1] - peak.center[1]) - peak.radius).abs() <= band)
        .collect();
    let n = inliers.len();
    let raw = CircleFit {
        center: peak.center,
        radius: peak.radius,
        rms_residual: (circle_objective(&inliers, peak.center, peak.radius) / n.max(1) as f64).sqrt(),
        inlier_count: n,
    };
    if check_not_collinear(&inliers).is_err() {
        return Ok(raw);
    }
    let peak_cost = circle_objective(&inliers, peak.center, peak.radius);
    let mut best = raw;
    let mut best_cost = peak_cost;
    let candidates = [
        least_squares_circle(&inliers).ok(),
        Some(refine_circle(&inliers, peak.center, peak.radius)),
    ];
    for fit in candidates.into_iter().flatten() {
        let cost = circle_objective(&inliers, fit.center, fit.radius);
        if cost <= best_cost && fit.radius > 0.0 {
            best = fit;
            best_cost = cost;
        }
    }
    Ok(best)
}
