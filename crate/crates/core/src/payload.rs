// SPDX-License-Identifier: Apache-2.0

//! Accumulation of a scan stream into gravity-aligned payload clouds.
//!
//! Every scan is moved into the world frame with the trajectory pose at its
//! timestamp and appended to the open payload. A payload is closed once the
//! total path length crosses the next multiple of the window, so cut
//! positions never drift by more than one scan's travel. The last, partial
//! payload is closed at the end of the stream. Payloads do not overlap.

use nalgebra::{Isometry3, Point3 as NPoint3, Quaternion, Translation3, UnitQuaternion, Vector3};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

/// Distance window used when none is configured.
pub const DEFAULT_WINDOW_M: f64 = 20.0;

/// Rigid 6-DoF transform from a local frame into the world frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose(pub Isometry3<f64>);

impl Pose {
    pub fn identity() -> Self {
        Pose(Isometry3::identity())
    }

    /// Builds a pose from a translation and a `[w, x, y, z]` quaternion. The
    /// quaternion is normalized; a zero quaternion is rejected.
    pub fn new(translation: [f64; 3], quaternion_wxyz: [f64; 4]) -> Result<Self> {
        let [w, i, j, k] = quaternion_wxyz;
        let q = Quaternion::new(w, i, j, k);
        let norm = q.norm();
        if !(norm.is_finite() && norm > 1e-12) || translation.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidTrajectory(format!(
                "pose with translation {translation:?} and quaternion {quaternion_wxyz:?} is not a rigid transform"
            )));
        }
        Ok(Pose(Isometry3::from_parts(
            Translation3::new(translation[0], translation[1], translation[2]),
            UnitQuaternion::from_quaternion(q),
        )))
    }

    pub fn from_translation(x: f64, y: f64, z: f64) -> Self {
        Pose(Isometry3::translation(x, y, z))
    }

    pub fn translation(&self) -> [f64; 3] {
        let t = self.0.translation.vector;
        [t.x, t.y, t.z]
    }

    pub fn rotation(&self) -> UnitQuaternion<f64> {
        self.0.rotation
    }

    pub fn apply(&self, p: [f64; 3]) -> [f64; 3] {
        let q = self.0.transform_point(&NPoint3::new(p[0], p[1], p[2]));
        [q.x, q.y, q.z]
    }

    /// Linear interpolation of the translation, spherical-linear of the rotation.
    pub fn interpolate(&self, other: &Pose, t: f64) -> Pose {
        let a = self.0.translation.vector;
        let b = other.0.translation.vector;
        let translation: Vector3<f64> = a + (b - a) * t;
        let (qa, mut qb) = (self.0.rotation, other.0.rotation);
        // q and -q are the same rotation; take the short way round.
        if qa.coords.dot(&qb.coords) < 0.0 {
            qb = UnitQuaternion::new_unchecked(-qb.into_inner());
        }
        let rotation = qa.try_slerp(&qb, t, 1e-12).unwrap_or(qa);
        Pose(Isometry3::from_parts(Translation3::from(translation), rotation))
    }
}

/// Timestamped poses with strictly increasing timestamps.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    samples: Vec<(f64, Pose)>,
}

impl Trajectory {
    pub fn new(samples: Vec<(f64, Pose)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidTrajectory("no poses".into()));
        }
        for (i, w) in samples.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) {
                return Err(Error::InvalidTrajectory(format!(
                    "timestamps not strictly increasing at sample {}",
                    i + 1
                )));
            }
        }
        if samples.iter().any(|(t, _)| !t.is_finite()) {
            return Err(Error::InvalidTrajectory("non-finite timestamp".into()));
        }
        Ok(Trajectory { samples })
    }

    pub fn samples(&self) -> &[(f64, Pose)] {
        &self.samples
    }

    pub fn time_range(&self) -> (f64, f64) {
        (self.samples[0].0, self.samples[self.samples.len() - 1].0)
    }

    /// Pose at `timestamp`, interpolated between the bracketing samples.
    pub fn pose_at(&self, timestamp: f64) -> Result<Pose> {
        let (start, end) = self.time_range();
        if !(timestamp >= start && timestamp <= end) {
            return Err(Error::TimestampOutOfRange {
                timestamp,
                start,
                end,
            });
        }
        let upper = self.samples.partition_point(|(t, _)| *t < timestamp);
        if upper == 0 {
            return Ok(self.samples[0].1);
        }
        let (t1, p1) = self.samples[upper];
        if t1 == timestamp {
            return Ok(p1);
        }
        let (t0, p0) = self.samples[upper - 1];
        Ok(p0.interpolate(&p1, (timestamp - t0) / (t1 - t0)))
    }
}

/// One sensor sweep in the sensor frame.
#[derive(Debug, Clone)]
pub struct Scan {
    pub timestamp: f64,
    pub cloud: PointCloud,
}

/// A gravity-aligned, world-frame cloud accumulated over a stretch of travel.
///
/// `pose` is the sensor pose at the last accumulated scan; `odometry_distance`
/// is the total path length travelled when the payload was closed.
#[derive(Debug, Clone)]
pub struct PayloadCloud {
    pub id: usize,
    pub cloud: PointCloud,
    pub pose: Pose,
    pub odometry_distance: f64,
    pub timestamp: f64,
}

impl PayloadCloud {
    /// Wraps an already world-frame cloud, e.g. one read from disk.
    pub fn from_world_cloud(id: usize, cloud: PointCloud) -> Self {
        PayloadCloud {
            id,
            cloud,
            pose: Pose::identity(),
            odometry_distance: 0.0,
            timestamp: 0.0,
        }
    }
}

/// Splits a scan stream into payloads of roughly `window` meters of travel.
pub fn build_payloads(scans: &[Scan], trajectory: &Trajectory, window: f64) -> Result<Vec<PayloadCloud>> {
    if !(window > 0.0 && window.is_finite()) {
        return Err(Error::InvalidConfig(format!("payload window must be positive, got {window}")));
    }
    let mut payloads = Vec::new();
    let mut open: Option<PayloadCloud> = None;
    let mut travelled = 0.0;
    let mut next_cut = window;
    let mut last_position: Option<Vector3<f64>> = None;

    for scan in scans {
        let pose = trajectory.pose_at(scan.timestamp)?;
        let position = pose.0.translation.vector;
        if let Some(prev) = last_position {
            travelled += (position - prev).norm();
        }
        last_position = Some(position);

        let payload = open.get_or_insert_with(|| PayloadCloud {
            id: payloads.len(),
            cloud: PointCloud::new(Vec::new(), "world"),
            pose,
            odometry_distance: travelled,
            timestamp: scan.timestamp,
        });
        payload.cloud.points.extend(scan.cloud.points.iter().map(|p| {
            let [x, y, z] = pose.apply(p.xyz());
            let mut q = *p;
            (q.x, q.y, q.z) = (x, y, z);
            q
        }));
        payload.pose = pose;
        payload.odometry_distance = travelled;
        payload.timestamp = scan.timestamp;

        if travelled >= next_cut {
            payloads.push(open.take().expect("payload is open"));
            next_cut = window * ((travelled / window).floor() + 1.0);
        }
    }
    payloads.extend(open);
    Ok(payloads)
}
