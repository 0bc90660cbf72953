// SPDX-License-Identifier: Apache-2.0

//! Least-squares circle fitting in the plane.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// A circle fitted to planar points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleFit {
    pub center: [f64; 2],
    pub radius: f64,
    /// RMS geometric distance of the supporting points to the circle.
    pub rms_residual: f64,
    pub inlier_count: usize,
}

const MAX_ITERATIONS: usize = 50;
const STEP_TOLERANCE: f64 = 1e-10;

/// Sum of squared geometric residuals `(|p - c| - r)^2`.
pub fn circle_objective(points: &[[f64; 2]], center: [f64; 2], radius: f64) -> f64 {
    points
        .iter()
        .map(|p| {
            let d = (p[0] - center[0]).hypot(p[1] - center[1]);
            (d - radius) * (d - radius)
        })
        .sum()
}

fn centroid(points: &[[f64; 2]]) -> [f64; 2] {
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(sx, sy), p| (sx + p[0], sy + p[1]));
    [sx / n, sy / n]
}

/// Fails when the points do not determine a circle: fewer than three, or all
/// on one line up to a relative tolerance.
pub(crate) fn check_not_collinear(points: &[[f64; 2]]) -> Result<()> {
    if points.len() < 3 {
        return Err(Error::DegenerateCluster(format!(
            "{} points cannot determine a circle",
            points.len()
        )));
    }
    let c = centroid(points);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for p in points {
        let (x, y) = (p[0] - c[0], p[1] - c[1]);
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
    }
    let half_trace = 0.5 * (sxx + syy);
    let disc = (0.25 * (sxx - syy) * (sxx - syy) + sxy * sxy).sqrt();
    let (major, minor) = (half_trace + disc, (half_trace - disc).max(0.0));
    if major <= 0.0 || minor.sqrt() <= 1e-9 * major.sqrt() {
        return Err(Error::DegenerateCluster("points are collinear".into()));
    }
    Ok(())
}

/// Algebraic (Kasa) circle: minimizes the squared power of each point with
/// respect to the circle. Coordinates must already be centered.
fn kasa(points: &[[f64; 2]]) -> Result<([f64; 2], f64)> {
    let mut a = Matrix3::<f64>::zeros();
    let mut b = Vector3::<f64>::zeros();
    for p in points {
        let (x, y) = (p[0], p[1]);
        let z = x * x + y * y;
        let row = Vector3::new(x, y, 1.0);
        a += row * row.transpose();
        b -= row * z;
    }
    let sol = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::DegenerateCluster("singular algebraic circle system".into()))?;
    let center = [-0.5 * sol[0], -0.5 * sol[1]];
    let r2 = center[0] * center[0] + center[1] * center[1] - sol[2];
    if !(r2 > 0.0 && r2.is_finite()) {
        return Err(Error::DegenerateCluster("algebraic fit has no real radius".into()));
    }
    Ok((center, r2.sqrt()))
}

/// Gauss-Newton refinement of `(cx, cy, r)` on the geometric objective.
/// Never returns parameters with a larger objective than the start.
fn gauss_newton(points: &[[f64; 2]], mut center: [f64; 2], mut radius: f64) -> ([f64; 2], f64) {
    let mut cost = circle_objective(points, center, radius);
    for _ in 0..MAX_ITERATIONS {
        let mut jtj = Matrix3::<f64>::zeros();
        let mut jte = Vector3::<f64>::zeros();
        for p in points {
            let (dx, dy) = (p[0] - center[0], p[1] - center[1]);
            let d = dx.hypot(dy);
            if d == 0.0 {
                continue;
            }
            let row = Vector3::new(-dx / d, -dy / d, -1.0);
            jtj += row * row.transpose();
            jte += row * (d - radius);
        }
        let Some(step) = jtj.cholesky().map(|c| c.solve(&(-jte))) else {
            break;
        };
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let c = [center[0] + scale * step[0], center[1] + scale * step[1]];
            let r = radius + scale * step[2];
            let new_cost = circle_objective(points, c, r);
            if new_cost <= cost {
                center = c;
                radius = r;
                cost = new_cost;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted || scale * step.norm() < STEP_TOLERANCE {
            break;
        }
    }
    (center, radius)
}

/// Fits a circle to planar points: algebraic start, geometric Gauss-Newton
/// finish. The residual is the RMS geometric distance over all points.
pub fn least_squares_circle(points: &[[f64; 2]]) -> Result<CircleFit> {
    check_not_collinear(points)?;
    let c = centroid(points);
    let local: Vec<[f64; 2]> = points.iter().map(|p| [p[0] - c[0], p[1] - c[1]]).collect();
    let (center0, radius0) = kasa(&local)?;
    let (center, radius) = gauss_newton(&local, center0, radius0);
    Ok(finish(points, &local, c, center, radius))
}

/// Refines a known starting circle (e.g. an accumulator peak) with
/// Gauss-Newton only.
pub(crate) fn refine_circle(points: &[[f64; 2]], center: [f64; 2], radius: f64) -> CircleFit {
    let c = centroid(points);
    let local: Vec<[f64; 2]> = points.iter().map(|p| [p[0] - c[0], p[1] - c[1]]).collect();
    let (lc, r) = gauss_newton(&local, [center[0] - c[0], center[1] - c[1]], radius);
    finish(points, &local, c, lc, r)
}

fn finish(points: &[[f64; 2]], local: &[[f64; 2]], offset: [f64; 2], center: [f64; 2], radius: f64) -> CircleFit {
    let n = points.len();
    CircleFit {
        center: [center[0] + offset[0], center[1] + offset[1]],
        radius: radius.abs(),
        rms_residual: (circle_objective(local, center, radius.abs()) / n as f64).sqrt(),
        inlier_count: n,
    }
}

/// Standard error of the fitted radius from the Gauss-Newton covariance
/// `s^2 (J^T J)^-1` with `s^2 = SSR / (n - 3)`. `None` for fewer than four
/// points or a singular system.
pub fn radius_std_error(points: &[[f64; 2]], center: [f64; 2], radius: f64) -> Option<f64> {
    if points.len() < 4 {
        return None;
    }
    let mut jtj = Matrix3::<f64>::zeros();
    for p in points {
        let (dx, dy) = (p[0] - center[0], p[1] - center[1]);
        let d = dx.hypot(dy);
        if d == 0.0 {
            continue;
        }
        let row = Vector3::new(-dx / d, -dy / d, -1.0);
        jtj += row * row.transpose();
    }
    let cov = jtj.try_inverse()?;
    let s2 = circle_objective(points, center, radius) / (points.len() - 3) as f64;
    let var = s2 * cov[(2, 2)];
    (var >= 0.0).then(|| var.sqrt())
}

/// Angular extent (radians) of the points as seen from `center`: a full
/// turn minus the largest empty angular gap.
pub fn arc_coverage(points: &[[f64; 2]], center: [f64; 2]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let mut angles: Vec<f64> = points
        .iter()
        .map(|p| (p[1] - center[1]).atan2(p[0] - center[0]))
        .collect();
    angles.sort_by(f64::total_cmp);
    let tau = std::f64::consts::TAU;
    let wrap_gap = angles[0] + tau - angles[angles.len() - 1];
    let max_gap = angles
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(wrap_gap, f64::max);
    tau - max_gap
}
