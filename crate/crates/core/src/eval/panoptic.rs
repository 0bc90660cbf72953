// SPDX-License-Identifier: Apache-2.0

//! Panoptic quality over ground, shrub and tree.
//!
//! Ground and shrub are stuff classes scored by the IoU of their point sets.
//! Tree (stem or canopy) is the thing class; its instances are matched by
//! IoU > 0.5, which can pair each segment with at most one partner.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::cloud::{PointCloud, SemanticLabel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PanopticClass {
    Ground,
    Shrub,
    Tree,
}

impl PanopticClass {
    pub const ALL: [PanopticClass; 3] = [PanopticClass::Ground, PanopticClass::Shrub, PanopticClass::Tree];

    pub fn contains(self, label: SemanticLabel) -> bool {
        match self {
            PanopticClass::Ground => label == SemanticLabel::Ground,
            PanopticClass::Shrub => label == SemanticLabel::Shrub,
            PanopticClass::Tree => label.is_tree(),
        }
    }

    pub fn is_thing(self) -> bool {
        self == PanopticClass::Tree
    }
}

impl fmt::Display for PanopticClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PanopticClass::Ground => "ground",
            PanopticClass::Shrub => "shrub",
            PanopticClass::Tree => "tree",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameRole {
    Prediction,
    GroundTruth,
}

/// A fully labeled cloud: every point has a semantic label, and exactly the
/// tree points carry an instance id.
#[derive(Debug, Clone, PartialEq)]
pub struct PanopticFrame {
    cloud: PointCloud,
    role: FrameRole,
}

impl PanopticFrame {
    pub fn new(cloud: PointCloud, role: FrameRole) -> Result<Self> {
        cloud.validate()?;
        for (i, p) in cloud.points.iter().enumerate() {
            match (p.semantic, p.instance) {
                (None, _) => return Err(Error::InvalidFrame(format!("point {i} has no semantic label"))),
                (Some(s), None) if s.is_tree() => {
                    return Err(Error::InvalidFrame(format!("tree point {i} has no instance id")))
                }
                _ => {}
            }
        }
        Ok(PanopticFrame { cloud, role })
    }

    pub fn cloud(&self) -> &PointCloud {
        &self.cloud
    }

    pub fn role(&self) -> FrameRole {
        self.role
    }

    pub fn len(&self) -> usize {
        self.cloud.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cloud.is_empty()
    }

    pub fn label(&self, i: usize) -> SemanticLabel {
        self.cloud.points[i].semantic.expect("validated frame")
    }

    /// Tree instance of point `i`, `None` for non-tree points.
    pub fn instance(&self, i: usize) -> Option<u32> {
        self.cloud.points[i].instance
    }

    /// Point indices of every tree instance, keyed by id.
    pub fn instances(&self) -> BTreeMap<u32, Vec<usize>> {
        let mut out: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for i in 0..self.len() {
            if let Some(id) = self.instance(i) {
                out.entry(id).or_default().push(i);
            }
        }
        out
    }

    pub fn class_points(&self, class: PanopticClass) -> Vec<usize> {
        (0..self.len()).filter(|&i| class.contains(self.label(i))).collect()
    }

    pub fn label_points(&self, label: SemanticLabel) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.label(i) == label).collect()
    }
}

fn same_universe(pred: &PanopticFrame, gt: &PanopticFrame) -> Result<()> {
    if pred.len() != gt.len() {
        return Err(Error::PointCountMismatch {
            pred: pred.len(),
            gt: gt.len(),
        });
    }
    Ok(())
}

/// Intersection over union of two index sets.
pub fn iou(pred: &BTreeSet<usize>, gt: &BTreeSet<usize>) -> Result<f64> {
    if pred.is_empty() && gt.is_empty() {
        return Err(Error::BothEmpty);
    }
    let inter = pred.intersection(gt).count();
    Ok(inter as f64 / (pred.len() + gt.len() - inter) as f64)
}

fn iou_counts(inter: usize, a: usize, b: usize) -> f64 {
    inter as f64 / (a + b - inter) as f64
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Matching {
    /// `(pred id, gt id, iou)` sorted by prediction id.
    pub pairs: Vec<(u32, u32, f64)>,
    pub false_positives: Vec<u32>,
    pub false_negatives: Vec<u32>,
}

impl Matching {
    pub fn tp(&self) -> usize {
        self.pairs.len()
    }
}

/// Pairs tree instances whose IoU exceeds one half.
pub fn match_instances(pred: &PanopticFrame, gt: &PanopticFrame) -> Result<Matching> {
    same_universe(pred, gt)?;
    let pred_sizes: BTreeMap<u32, usize> = pred.instances().into_iter().map(|(k, v)| (k, v.len())).collect();
    let gt_sizes: BTreeMap<u32, usize> = gt.instances().into_iter().map(|(k, v)| (k, v.len())).collect();
    let mut overlap: BTreeMap<(u32, u32), usize> = BTreeMap::new();
    for i in 0..pred.len() {
        if let (Some(p), Some(g)) = (pred.instance(i), gt.instance(i)) {
            *overlap.entry((p, g)).or_default() += 1;
        }
    }
    let mut m = Matching::default();
    let mut matched_gt = BTreeSet::new();
    let mut matched_pred = BTreeSet::new();
    for (&(p, g), &inter) in &overlap {
        // 2·inter > |p| + |g| - inter  <=>  IoU > 1/2, decided in integers
        if 3 * inter > pred_sizes[&p] + gt_sizes[&g] {
            m.pairs.push((p, g, iou_counts(inter, pred_sizes[&p], gt_sizes[&g])));
            matched_pred.insert(p);
            matched_gt.insert(g);
        }
    }
    m.false_positives = pred_sizes.keys().copied().filter(|p| !matched_pred.contains(p)).collect();
    m.false_negatives = gt_sizes.keys().copied().filter(|g| !matched_gt.contains(g)).collect();
    Ok(m)
}

/// Score of one class. `vacuous` marks a class absent from both frames,
/// which scores 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassScore {
    pub value: f64,
    pub vacuous: bool,
}

fn stuff_iou(pred: &[usize], gt: &[usize]) -> ClassScore {
    let (a, b): (BTreeSet<usize>, BTreeSet<usize>) = (pred.iter().copied().collect(), gt.iter().copied().collect());
    match iou(&a, &b) {
        Ok(value) => ClassScore { value, vacuous: false },
        Err(_) => ClassScore {
            value: 1.0,
            vacuous: true,
        },
    }
}

/// Thing-class quality from a matching: summed pair IoU (in prediction id
/// order) over `TP + FP/2 + FN/2`.
pub fn thing_quality(m: &Matching) -> ClassScore {
    let denom = m.tp() as f64 + 0.5 * m.false_positives.len() as f64 + 0.5 * m.false_negatives.len() as f64;
    if denom == 0.0 {
        return ClassScore {
            value: 1.0,
            vacuous: true,
        };
    }
    let sum = m.pairs.iter().fold(0.0, |acc, (_, _, v)| acc + v);
    ClassScore {
        value: sum / denom,
        vacuous: false,
    }
}

pub fn pq_class(pred: &PanopticFrame, gt: &PanopticFrame, class: PanopticClass) -> Result<ClassScore> {
    same_universe(pred, gt)?;
    Ok(if class.is_thing() {
        thing_quality(&match_instances(pred, gt)?)
    } else {
        stuff_iou(&pred.class_points(class), &gt.class_points(class))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PQReport {
    pub ground: ClassScore,
    pub shrub: ClassScore,
    pub tree: ClassScore,
    /// Mean of the ground, shrub and tree scores.
    pub overall: f64,
    /// Semantic IoU of the stem label.
    pub stem_iou: ClassScore,
    /// Semantic IoU of the canopy label.
    pub canopy_iou: ClassScore,
    pub matching: Matching,
}

impl PQReport {
    pub fn class(&self, class: PanopticClass) -> ClassScore {
        match class {
            PanopticClass::Ground => self.ground,
            PanopticClass::Shrub => self.shrub,
            PanopticClass::Tree => self.tree,
        }
    }

    pub fn vacuous_classes(&self) -> Vec<PanopticClass> {
        PanopticClass::ALL.into_iter().filter(|c| self.class(*c).vacuous).collect()
    }
}

pub fn pq_overall(pred: &PanopticFrame, gt: &PanopticFrame) -> Result<PQReport> {
    same_universe(pred, gt)?;
    let matching = match_instances(pred, gt)?;
    let ground = stuff_iou(&pred.class_points(PanopticClass::Ground), &gt.class_points(PanopticClass::Ground));
    let shrub = stuff_iou(&pred.class_points(PanopticClass::Shrub), &gt.class_points(PanopticClass::Shrub));
    let tree = thing_quality(&matching);
    let stem_iou = stuff_iou(&pred.label_points(SemanticLabel::Stem), &gt.label_points(SemanticLabel::Stem));
    let canopy_iou = stuff_iou(
        &pred.label_points(SemanticLabel::Canopy),
        &gt.label_points(SemanticLabel::Canopy),
    );
    Ok(PQReport {
        overall: (ground.value + shrub.value + tree.value) / 3.0,
        ground,
        shrub,
        tree,
        stem_iou,
        canopy_iou,
        matching,
    })
}
