// SPDX-License-Identifier: Apache-2.0

//! Point and point-cloud types shared by every stage of the pipeline.

use std::fmt;

use crate::error::{Error, Result};

/// Per-point semantic class.
///
/// Integer codes are fixed: Ground=0, Shrub=1, Stem=2, Canopy=3. The derived
/// Tree class (Stem or Canopy) is never stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SemanticLabel {
    Ground,
    Shrub,
    Stem,
    Canopy,
}

impl SemanticLabel {
    pub const ALL: [SemanticLabel; 4] = [
        SemanticLabel::Ground,
        SemanticLabel::Shrub,
        SemanticLabel::Stem,
        SemanticLabel::Canopy,
    ];

    pub fn code(self) -> u8 {
        match self {
            SemanticLabel::Ground => 0,
            SemanticLabel::Shrub => 1,
            SemanticLabel::Stem => 2,
            SemanticLabel::Canopy => 3,
        }
    }

    pub fn from_code(code: u64) -> Option<Self> {
        match code {
            0 => Some(SemanticLabel::Ground),
            1 => Some(SemanticLabel::Shrub),
            2 => Some(SemanticLabel::Stem),
            3 => Some(SemanticLabel::Canopy),
            _ => None,
        }
    }

    /// Stem and canopy points belong to the derived Tree class.
    pub fn is_tree(self) -> bool {
        matches!(self, SemanticLabel::Stem | SemanticLabel::Canopy)
    }
}

impl fmt::Display for SemanticLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SemanticLabel::Ground => "ground",
            SemanticLabel::Shrub => "shrub",
            SemanticLabel::Stem => "stem",
            SemanticLabel::Canopy => "canopy",
        };
        f.write_str(name)
    }
}

/// A single LiDAR return in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub intensity: Option<f64>,
    pub semantic: Option<SemanticLabel>,
    /// Tree instance id; only meaningful on stem/canopy points. Id 0 is
    /// reserved for "no instance" in the file encodings.
    pub instance: Option<u32>,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 {
            x,
            y,
            z,
            ..Default::default()
        }
    }

    pub fn labeled(x: f64, y: f64, z: f64, semantic: SemanticLabel, instance: Option<u32>) -> Self {
        Point3 {
            x,
            y,
            z,
            intensity: None,
            semantic: Some(semantic),
            instance,
        }
    }

    pub fn xyz(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn xy(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn is_tree(&self) -> bool {
        self.semantic.is_some_and(SemanticLabel::is_tree)
    }
}

/// An ordered sequence of points in a named frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    pub points: Vec<Point3>,
    pub frame_id: String,
}

impl PointCloud {
    pub fn new(points: Vec<Point3>, frame_id: impl Into<String>) -> Self {
        PointCloud {
            points,
            frame_id: frame_id.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn has_intensity(&self) -> bool {
        self.points.iter().any(|p| p.intensity.is_some())
    }

    pub fn has_semantic(&self) -> bool {
        self.points.iter().any(|p| p.semantic.is_some())
    }

    pub fn has_instance(&self) -> bool {
        self.points.iter().any(|p| p.instance.is_some())
    }

    /// Checks the point invariants: finite coordinates, and instance ids only
    /// on stem/canopy points.
    pub fn validate(&self) -> Result<()> {
        for (index, p) in self.points.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::NonFiniteCoordinate { index });
            }
            if let Some(instance) = p.instance {
                if !p.is_tree() || instance == 0 {
                    return Err(Error::InstanceOnNonTreePoint { index, instance });
                }
            }
        }
        Ok(())
    }

    /// Axis-aligned bounds as `(min, max)`, or `None` for an empty cloud.
    pub fn bounds(&self) -> Option<([f64; 3], [f64; 3])> {
        let first = self.points.first()?;
        let mut lo = first.xyz();
        let mut hi = lo;
        for p in &self.points[1..] {
            for (k, v) in p.xyz().into_iter().enumerate() {
                lo[k] = lo[k].min(v);
                hi[k] = hi[k].max(v);
            }
        }
        Some((lo, hi))
    }

    pub fn subset(&self, indices: &[usize]) -> PointCloud {
        PointCloud {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            frame_id: self.frame_id.clone(),
        }
    }
}

impl FromIterator<Point3> for PointCloud {
    fn from_iter<I: IntoIterator<Item = Point3>>(iter: I) -> Self {
        PointCloud::new(iter.into_iter().collect(), "")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_codes_are_fixed() {
        let codes: Vec<u8> = SemanticLabel::ALL.iter().map(|l| l.code()).collect();
        assert_eq!(codes, vec![0, 1, 2, 3]);
        for l in SemanticLabel::ALL {
            assert_eq!(SemanticLabel::from_code(l.code() as u64), Some(l));
        }
        assert_eq!(SemanticLabel::from_code(4), None);
    }

    #[test]
    fn validate_rejects_instance_on_ground() {
        let cloud: PointCloud = [Point3::labeled(0.0, 0.0, 0.0, SemanticLabel::Ground, Some(3))]
            .into_iter()
            .collect();
        assert!(matches!(
            cloud.validate(),
            Err(Error::InstanceOnNonTreePoint { index: 0, instance: 3 })
        ));
    }

    #[test]
    fn validate_reports_first_non_finite() {
        let cloud: PointCloud = [
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, f64::INFINITY, 0.0),
            Point3::new(f64::NAN, 0.0, 0.0),
        ]
        .into_iter()
        .collect();
        assert!(matches!(cloud.validate(), Err(Error::NonFiniteCoordinate { index: 1 })));
    }

    #[test]
    fn bounds_of_empty_is_none() {
        assert!(PointCloud::default().bounds().is_none());
    }
}
