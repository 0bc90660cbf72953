// SPDX-License-Identifier: Apache-2.0

//! Density-based clustering with a deterministic border-point rule.
//!
//! A point is core when at least `min_pts` points (itself included) lie
//! within `eps` of it. Clusters are the connected components of core points
//! and are numbered in order of their lowest core index. A border point joins
//! the lowest-numbered cluster that has a core point within `eps` of it.
//! Everything else is noise. The result does not depend on visiting order.

use std::collections::{HashMap, VecDeque};

use crate::cloud::PointCloud;

/// Raw clustering of `D`-dimensional points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DbscanLabels {
    /// Cluster number per point, `None` for noise.
    pub labels: Vec<Option<usize>>,
    pub core: Vec<bool>,
    pub n_clusters: usize,
}

struct GridIndex<'a, const D: usize> {
    points: &'a [[f64; D]],
    eps: f64,
    cells: HashMap<[i64; D], Vec<usize>>,
}

impl<'a, const D: usize> GridIndex<'a, D> {
    fn new(points: &'a [[f64; D]], eps: f64) -> Self {
        let mut cells: HashMap<[i64; D], Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(Self::key(p, eps)).or_default().push(i);
        }
        GridIndex { points, eps, cells }
    }

    fn key(p: &[f64; D], eps: f64) -> [i64; D] {
        let mut k = [0i64; D];
        for d in 0..D {
            k[d] = (p[d] / eps).floor() as i64;
        }
        k
    }

    /// Calls `f` for every point within `eps` of point `i` (including `i`).
    /// Stops early when `f` returns `false`.
    fn for_each_neighbor(&self, i: usize, mut f: impl FnMut(usize) -> bool) {
        let p = &self.points[i];
        let base = Self::key(p, self.eps);
        let eps2 = self.eps * self.eps;
        let combos = 3usize.pow(D as u32);
        for combo in 0..combos {
            let mut key = base;
            let mut rest = combo;
            for k in key.iter_mut() {
                *k += (rest % 3) as i64 - 1;
                rest /= 3;
            }
            let Some(bucket) = self.cells.get(&key) else {
                continue;
            };
            for &j in bucket {
                let q = &self.points[j];
                let d2: f64 = (0..D).map(|d| (p[d] - q[d]) * (p[d] - q[d])).sum();
                if d2 <= eps2 && !f(j) {
                    return;
                }
            }
        }
    }
}

/// Clusters `points`. `eps` must be positive and `min_pts` at least 1.
pub fn dbscan_labels<const D: usize>(points: &[[f64; D]], eps: f64, min_pts: usize) -> DbscanLabels {
    assert!(eps > 0.0 && eps.is_finite(), "eps must be positive");
    let min_pts = min_pts.max(1);
    let index = GridIndex::new(points, eps);
    let n = points.len();

    let core: Vec<bool> = (0..n)
        .map(|i| {
            let mut count = 0;
            index.for_each_neighbor(i, |_| {
                count += 1;
                count < min_pts
            });
            count >= min_pts
        })
        .collect();

    let mut labels: Vec<Option<usize>> = vec![None; n];
    let mut n_clusters = 0;
    let mut queue = VecDeque::new();
    for seed in 0..n {
        if !core[seed] || labels[seed].is_some() {
            continue;
        }
        let cluster = n_clusters;
        n_clusters += 1;
        labels[seed] = Some(cluster);
        queue.push_back(seed);
        while let Some(i) = queue.pop_front() {
            index.for_each_neighbor(i, |j| {
                if labels[j].is_none() {
                    labels[j] = Some(cluster);
                    if core[j] {
                        queue.push_back(j);
                    }
                }
                true
            });
        }
    }
    DbscanLabels {
        labels,
        core,
        n_clusters,
    }
}

/// A group of points from one source cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Ascending, unique indices into the source cloud.
    pub point_indices: Vec<usize>,
    pub centroid: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub clusters: Vec<Cluster>,
    pub noise: Vec<usize>,
}

/// Clusters a cloud on its `xy` projection.
pub fn dbscan(cloud: &PointCloud, eps: f64, min_pts: usize) -> Clustering {
    let xy: Vec<[f64; 2]> = cloud.points.iter().map(|p| p.xy()).collect();
    let labels = dbscan_labels(&xy, eps, min_pts);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); labels.n_clusters];
    let mut noise = Vec::new();
    for (i, label) in labels.labels.iter().enumerate() {
        match label {
            Some(c) => members[*c].push(i),
            None => noise.push(i),
        }
    }
    let clusters = members
        .into_iter()
        .map(|point_indices| {
            let n = point_indices.len() as f64;
            let mut centroid = [0.0; 3];
            for &i in &point_indices {
                for (c, v) in centroid.iter_mut().zip(cloud.points[i].xyz()) {
                    *c += v;
                }
            }
            centroid.iter_mut().for_each(|c| *c /= n);
            Cluster {
                point_indices,
                centroid,
            }
        })
        .collect();
    Clustering { clusters, noise }
}
