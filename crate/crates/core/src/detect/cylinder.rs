// SPDX-License-Identifier: Apache-2.0

//! Gauss-Newton cylinder fitting for stem segments.
//!
//! The axis is a line through `axis_point` along the unit `axis_direction`.
//! Each step perturbs the point and the direction within the plane normal to
//! the current axis (two parameters each) plus the radius, then renormalizes
//! the direction and slides the point along the axis to the foot of the
//! centroid.

use nalgebra::{SMatrix, SVector, Vector3};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

use super::circle::least_squares_circle;

pub const MIN_CYLINDER_POINTS: usize = 10;
pub const MIN_CYLINDER_EXTENT_M: f64 = 0.5;
const MAX_ITERATIONS: usize = 100;
const STEP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderFit {
    /// Point on the axis closest to the centroid of the fitted points.
    pub axis_point: [f64; 3],
    /// Unit axis direction with non-negative `z`.
    pub axis_direction: [f64; 3],
    pub radius: f64,
    pub rms_residual: f64,
}

impl CylinderFit {
    pub fn dbh_cm(&self) -> f64 {
        200.0 * self.radius
    }

    /// Axis point at height `z`, or `None` for a horizontal axis.
    pub fn point_at_height(&self, z: f64) -> Option<[f64; 3]> {
        let [px, py, pz] = self.axis_point;
        let [dx, dy, dz] = self.axis_direction;
        if dz.abs() < 1e-12 {
            return None;
        }
        let t = (z - pz) / dz;
        Some([px + t * dx, py + t * dy, z])
    }
}

fn perpendicular_basis(d: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let helper = if d.x.abs() <= d.y.abs() && d.x.abs() <= d.z.abs() {
        Vector3::x()
    } else if d.y.abs() <= d.z.abs() {
        Vector3::y()
    } else {
        Vector3::z()
    };
    let u = d.cross(&helper).normalize();
    let v = d.cross(&u);
    (u, v)
}

fn objective(points: &[Vector3<f64>], p: &Vector3<f64>, d: &Vector3<f64>, r: f64) -> f64 {
    points
        .iter()
        .map(|x| {
            let w = x - p;
            let e = (w - d * w.dot(d)).norm() - r;
            e * e
        })
        .sum()
}

/// Fits a cylinder to stem points (at least 10, spanning at least 0.5 m in
/// `z`). Starts from a vertical axis through the least-squares circle of the
/// `xy` projection.
pub fn fit_cylinder(stem: &PointCloud) -> Result<CylinderFit> {
    let xyz: Vec<[f64; 3]> = stem.points.iter().map(|p| p.xyz()).collect();
    fit_cylinder_points(&xyz)
}

pub fn fit_cylinder_points(points: &[[f64; 3]]) -> Result<CylinderFit> {
    if points.len() < MIN_CYLINDER_POINTS {
        return Err(Error::DegenerateGeometry(format!(
            "{} points, need at least {MIN_CYLINDER_POINTS}",
            points.len()
        )));
    }
    let (zmin, zmax) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p[2]), b.max(p[2])));
    if zmax - zmin < MIN_CYLINDER_EXTENT_M {
        return Err(Error::DegenerateGeometry(format!(
            "vertical extent {:.3} m is below {MIN_CYLINDER_EXTENT_M} m",
            zmax - zmin
        )));
    }

    let n = points.len() as f64;
    let centroid = points
        .iter()
        .fold(Vector3::zeros(), |acc, p| acc + Vector3::new(p[0], p[1], p[2]))
        / n;
    let local: Vec<Vector3<f64>> = points
        .iter()
        .map(|p| Vector3::new(p[0], p[1], p[2]) - centroid)
        .collect();

    let xy: Vec<[f64; 2]> = local.iter().map(|p| [p.x, p.y]).collect();
    let start = least_squares_circle(&xy).map_err(|e| Error::DegenerateGeometry(e.to_string()))?;
    let mut p = Vector3::new(start.center[0], start.center[1], 0.0);
    let mut d = Vector3::z();
    let mut r = start.radius;
    let mut cost = objective(&local, &p, &d, r);

    for _ in 0..MAX_ITERATIONS {
        let (u, v) = perpendicular_basis(&d);
        let mut jtj = SMatrix::<f64, 5, 5>::zeros();
        let mut jte = SVector::<f64, 5>::zeros();
        for x in &local {
            let w = x - p;
            let along = w.dot(&d);
            let q = w - d * along;
            let dist = q.norm();
            if dist == 0.0 {
                continue;
            }
            let (qu, qv) = (q.dot(&u) / dist, q.dot(&v) / dist);
            let row = SVector::<f64, 5>::from([-qu, -qv, -along * qu, -along * qv, -1.0]);
            jtj += row * row.transpose();
            jte += row * (dist - r);
        }
        let chol = jtj
            .cholesky()
            .ok_or_else(|| Error::DegenerateGeometry("rank-deficient normal equations".into()))?;
        let step = chol.solve(&(-jte));

        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let s = step * scale;
            let d_new = (d + u * s[2] + v * s[3]).normalize();
            let p_moved = p + u * s[0] + v * s[1];
            // slide along the new axis to the foot of the centroid (origin)
            let p_new = p_moved - d_new * p_moved.dot(&d_new);
            let r_new = r + s[4];
            let new_cost = objective(&local, &p_new, &d_new, r_new);
            if new_cost <= cost {
                (p, d, r, cost) = (p_new, d_new, r_new, new_cost);
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted || scale * step.norm() < STEP_TOLERANCE {
            break;
        }
    }

    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::DegenerateGeometry(format!("fitted radius {r} is not positive")));
    }
    if d.z < 0.0 {
        d = -d;
    }
    let axis_point = p + centroid;
    Ok(CylinderFit {
        axis_point: [axis_point.x, axis_point.y, axis_point.z],
        axis_direction: [d.x, d.y, d.z],
        radius: r,
        rms_residual: (cost / n).sqrt(),
    })
}
