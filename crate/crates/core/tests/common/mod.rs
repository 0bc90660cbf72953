// SPDX-License-Identifier: Apache-2.0

//! Independent reference implementations and generators shared by the
//! integration tests. Everything here is deliberately naive: quadratic
//! loops, no spatial index, no shared code with the library under test.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use forest_inventory::cloud::{Point3, PointCloud, SemanticLabel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// O(n²) DBSCAN. Clusters are numbered by their lowest-index core point; a
/// border point joins the lowest-numbered cluster with a core point in
/// reach. Returns `(labels, core)`.
pub fn brute_dbscan<const D: usize>(points: &[[f64; D]], eps: f64, min_pts: usize) -> (Vec<Option<usize>>, Vec<bool>) {
    let n = points.len();
    let near = |i: usize, j: usize| {
        let d2: f64 = (0..D).map(|d| (points[i][d] - points[j][d]).powi(2)).sum();
        d2 <= eps * eps
    };
    let core: Vec<bool> = (0..n).map(|i| (0..n).filter(|&j| near(i, j)).count() >= min_pts).collect();

    // label propagation to a fixed point: each core point takes the smallest
    // index among the core points it is density-connected to
    let mut root: Vec<usize> = (0..n).collect();
    loop {
        let mut changed = false;
        for i in 0..n {
            if !core[i] {
                continue;
            }
            for j in 0..n {
                if core[j] && near(i, j) && root[j] < root[i] {
                    root[i] = root[j];
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let roots: BTreeSet<usize> = (0..n).filter(|&i| core[i]).map(|i| root[i]).collect();
    let number: BTreeMap<usize, usize> = roots.iter().enumerate().map(|(k, &r)| (r, k)).collect();
    let labels = (0..n)
        .map(|i| {
            if core[i] {
                Some(number[&root[i]])
            } else {
                (0..n).filter(|&j| core[j] && near(i, j)).map(|j| number[&root[j]]).min()
            }
        })
        .collect();
    (labels, core)
}

/// Per-point `(semantic, instance)` pairs of a panoptic frame.
pub type Labels = Vec<(SemanticLabel, Option<u32>)>;

pub fn labels_to_cloud(labels: &Labels) -> PointCloud {
    let points = labels
        .iter()
        .enumerate()
        .map(|(i, &(s, inst))| Point3::labeled(i as f64, 0.0, 0.0, s, inst))
        .collect();
    PointCloud::new(points, "test")
}

/// Random frame with at most `max_points` points and `max_instances` tree
/// instances.
pub fn random_labels(rng: &mut ChaCha8Rng, n: usize, max_instances: u32) -> Labels {
    (0..n)
        .map(|_| {
            let s = SemanticLabel::ALL[rng.gen_range(0..4)];
            let inst = s.is_tree().then(|| rng.gen_range(1..=max_instances.max(1)));
            (s, inst)
        })
        .collect()
}

/// Reference panoptic scores computed straight from the definitions with
/// floating-point IoU: `(ground, shrub, tree, overall, pairs)`, where `pairs`
/// lists `(pred id, gt id)` of every matched instance pair.
pub struct BrutePq {
    pub ground: f64,
    pub shrub: f64,
    pub tree: f64,
    pub overall: f64,
    pub pairs: Vec<(u32, u32)>,
}

fn set_iou(a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> Option<f64> {
    let union = a.union(b).count();
    (union > 0).then(|| a.intersection(b).count() as f64 / union as f64)
}

pub fn brute_pq(pred: &Labels, gt: &Labels) -> BrutePq {
    let stuff = |label: SemanticLabel| {
        let a: BTreeSet<usize> = (0..pred.len()).filter(|&i| pred[i].0 == label).collect();
        let b: BTreeSet<usize> = (0..gt.len()).filter(|&i| gt[i].0 == label).collect();
        set_iou(&a, &b).unwrap_or(1.0)
    };
    let segments = |labels: &Labels| {
        let mut m: BTreeMap<u32, BTreeSet<usize>> = BTreeMap::new();
        for (i, &(s, inst)) in labels.iter().enumerate() {
            if s.is_tree() {
                m.entry(inst.unwrap()).or_default().insert(i);
            }
        }
        m
    };
    let (ps, gs) = (segments(pred), segments(gt));
    let mut pairs = Vec::new();
    let mut sum = 0.0;
    for (&p, pset) in &ps {
        for (&g, gset) in &gs {
            let v = set_iou(pset, gset).unwrap();
            if v > 0.5 {
                pairs.push((p, g));
                sum += v;
            }
        }
    }
    let tp = pairs.len() as f64;
    let fp = (ps.len() - pairs.len()) as f64;
    let fneg = (gs.len() - pairs.len()) as f64;
    let denom = tp + 0.5 * fp + 0.5 * fneg;
    let tree = if denom == 0.0 { 1.0 } else { sum / denom };
    let (ground, shrub) = (stuff(SemanticLabel::Ground), stuff(SemanticLabel::Shrub));
    BrutePq {
        ground,
        shrub,
        tree,
        overall: (ground + shrub + tree) / 3.0,
        pairs,
    }
}

/// Sum of squared radial residuals.
pub fn circle_cost(points: &[[f64; 2]], c: [f64; 2], r: f64) -> f64 {
    points.iter().map(|p| ((p[0] - c[0]).hypot(p[1] - c[1]) - r).powi(2)).sum()
}

/// Points on a circle arc with Gaussian radial noise.
pub fn noisy_arc(rng: &mut ChaCha8Rng, c: [f64; 2], r: f64, arc: f64, n: usize, sigma: f64) -> Vec<[f64; 2]> {
    let start = rng.gen_range(0.0..std::f64::consts::TAU);
    (0..n)
        .map(|_| {
            let a = start + rng.gen_range(0.0..arc);
            let rr = r + sigma * gaussian(rng);
            [c[0] + rr * a.cos(), c[1] + rr * a.sin()]
        })
        .collect()
}

/// Standard normal draw by Box-Muller, kept local so the oracle does not
/// share a sampler with the generator under test.
pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
