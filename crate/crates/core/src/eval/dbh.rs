// SPDX-License-Identifier: Apache-2.0

//! DBH recall and RMSE against a surveyed tree table.

use std::collections::BTreeMap;
use std::io::Read;

use pathfinding::prelude::{kuhn_munkres, Matrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inventory::ForestInventory;

pub const DEFAULT_MATCH_RADIUS_M: f64 = 0.5;

/// One surveyed tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthTree {
    pub plot_id: String,
    pub tree_id: u32,
    pub x: f64,
    pub y: f64,
    pub dbh_cm: f64,
}

/// Reads a `plot_id,tree_id,x,y,dbh_cm` table, grouped by plot.
pub fn read_ground_truth<R: Read>(reader: R) -> Result<BTreeMap<String, Vec<GroundTruthTree>>> {
    let mut r = csv::Reader::from_reader(reader);
    let expected = ["plot_id", "tree_id", "x", "y", "dbh_cm"];
    let header = r.headers()?.clone();
    if header.iter().ne(expected) {
        return Err(Error::MalformedHeader(format!(
            "expected ground-truth header {}, got {}",
            expected.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out: BTreeMap<String, Vec<GroundTruthTree>> = BTreeMap::new();
    for (index, row) in r.deserialize::<GroundTruthTree>().enumerate() {
        let tree = row.map_err(|e| Error::MalformedRecord {
            index,
            reason: e.to_string(),
        })?;
        if !(tree.x.is_finite() && tree.y.is_finite() && tree.dbh_cm.is_finite()) {
            return Err(Error::NonFiniteCoordinate { index });
        }
        out.entry(tree.plot_id.clone()).or_default().push(tree);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatchMode {
    /// One-to-one by ascending distance, ties by ground-truth id.
    #[default]
    Greedy,
    /// Most matches, then least total distance.
    Optimal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DbhPair {
    pub gt_tree_id: u32,
    pub pred_tree_id: u32,
    pub distance_m: f64,
    pub gt_dbh_cm: f64,
    pub pred_dbh_cm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotDbh {
    pub n_gt: usize,
    pub n_pred: usize,
    pub recall: f64,
    /// `None` when nothing matched.
    pub rmse_cm: Option<f64>,
    pub pairs: Vec<DbhPair>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DbhEvalReport {
    pub per_plot: BTreeMap<String, PlotDbh>,
    /// Matches over all ground-truth trees of all plots.
    pub overall_recall: f64,
    pub overall_rmse_cm: Option<f64>,
    /// Unweighted mean of the plot recalls.
    pub per_plot_avg_recall: f64,
    /// Unweighted mean over plots that have an RMSE.
    pub per_plot_avg_rmse_cm: Option<f64>,
}

fn rmse(pairs: &[&DbhPair]) -> Option<f64> {
    if pairs.is_empty() {
        return None;
    }
    let ss: f64 = pairs
        .iter()
        .map(|p| (p.pred_dbh_cm - p.gt_dbh_cm) * (p.pred_dbh_cm - p.gt_dbh_cm))
        .sum();
    Some((ss / pairs.len() as f64).sqrt())
}

struct Candidate {
    dist: f64,
    gt: usize,
    pred: usize,
}

fn candidates(pred: &[([f64; 2], u32)], gt: &[GroundTruthTree], radius: f64) -> Vec<Candidate> {
    let mut out = Vec::new();
    for (gi, g) in gt.iter().enumerate() {
        for (pi, (p, _)) in pred.iter().enumerate() {
            let dist = (p[0] - g.x).hypot(p[1] - g.y);
            if dist <= radius {
                out.push(Candidate { dist, gt: gi, pred: pi });
            }
        }
    }
    out
}

fn greedy(pred: &[([f64; 2], u32)], gt: &[GroundTruthTree], radius: f64) -> Vec<(usize, usize)> {
    let mut cands = candidates(pred, gt, radius);
    cands.sort_by(|a, b| {
        a.dist
            .total_cmp(&b.dist)
            .then(gt[a.gt].tree_id.cmp(&gt[b.gt].tree_id))
            .then(pred[a.pred].1.cmp(&pred[b.pred].1))
    });
    let (mut gt_used, mut pred_used) = (vec![false; gt.len()], vec![false; pred.len()]);
    let mut out = Vec::new();
    for c in cands {
        if !gt_used[c.gt] && !pred_used[c.pred] {
            gt_used[c.gt] = true;
            pred_used[c.pred] = true;
            out.push((c.gt, c.pred));
        }
    }
    out
}

fn optimal(pred: &[([f64; 2], u32)], gt: &[GroundTruthTree], radius: f64) -> Vec<(usize, usize)> {
    let cands = candidates(pred, gt, radius);
    if cands.is_empty() {
        return Vec::new();
    }
    // distances in micrometers; the per-match bonus outweighs any distance sum
    let micros = |d: f64| (d * 1e6).round() as i64;
    let bonus = (gt.len().min(pred.len()) as i64 + 1) * (micros(radius) + 1);
    let transpose = gt.len() > pred.len();
    let (rows, cols) = if transpose { (pred.len(), gt.len()) } else { (gt.len(), pred.len()) };
    let mut weights = Matrix::new(rows, cols, 0i64);
    for c in &cands {
        let (r, k) = if transpose { (c.pred, c.gt) } else { (c.gt, c.pred) };
        weights[(r, k)] = bonus - micros(c.dist);
    }
    let (_, assignment) = kuhn_munkres(&weights);
    assignment
        .into_iter()
        .enumerate()
        .filter(|&(r, k)| weights[(r, k)] > 0)
        .map(|(r, k)| if transpose { (k, r) } else { (r, k) })
        .collect()
}

/// Matches each plot's inventory against its surveyed trees and reports
/// recall and DBH RMSE per plot and pooled.
///
/// Plots are those of the ground truth; a plot without an inventory has
/// recall zero. An inventory for a plot missing from the ground truth is an
/// error.
pub fn eval_dbh(
    predictions: &BTreeMap<String, ForestInventory>,
    ground_truth: &BTreeMap<String, Vec<GroundTruthTree>>,
    match_radius: f64,
    mode: MatchMode,
) -> Result<DbhEvalReport> {
    if !(match_radius > 0.0 && match_radius.is_finite()) {
        return Err(Error::InvalidConfig(format!("match radius must be positive, got {match_radius}")));
    }
    for plot in predictions.keys() {
        if ground_truth.get(plot).is_none_or(Vec::is_empty) {
            return Err(Error::EmptyGroundTruth(plot.clone()));
        }
    }
    if let Some((plot, _)) = ground_truth.iter().find(|(_, trees)| trees.is_empty()) {
        return Err(Error::EmptyGroundTruth(plot.clone()));
    }
    if ground_truth.is_empty() {
        return Err(Error::EmptyGroundTruth("<none>".into()));
    }

    let empty = ForestInventory::default();
    let mut per_plot = BTreeMap::new();
    for (plot, gt) in ground_truth {
        let inv = predictions.get(plot).unwrap_or(&empty);
        let pred: Vec<([f64; 2], u32)> = inv.trees.values().map(|t| (t.position, t.tree_id)).collect();
        let matched = match mode {
            MatchMode::Greedy => greedy(&pred, gt, match_radius),
            MatchMode::Optimal => optimal(&pred, gt, match_radius),
        };
        let mut pairs: Vec<DbhPair> = matched
            .into_iter()
            .map(|(gi, pi)| {
                let g = &gt[gi];
                let t = &inv.trees[&pred[pi].1];
                DbhPair {
                    gt_tree_id: g.tree_id,
                    pred_tree_id: t.tree_id,
                    distance_m: (t.position[0] - g.x).hypot(t.position[1] - g.y),
                    gt_dbh_cm: g.dbh_cm,
                    pred_dbh_cm: t.dbh_cm,
                }
            })
            .collect();
        pairs.sort_by_key(|p| p.gt_tree_id);
        let refs: Vec<&DbhPair> = pairs.iter().collect();
        per_plot.insert(
            plot.clone(),
            PlotDbh {
                n_gt: gt.len(),
                n_pred: pred.len(),
                recall: pairs.len() as f64 / gt.len() as f64,
                rmse_cm: rmse(&refs),
                pairs,
            },
        );
    }

    let total_gt: usize = per_plot.values().map(|p| p.n_gt).sum();
    let pooled: Vec<&DbhPair> = per_plot.values().flat_map(|p| p.pairs.iter()).collect();
    let plot_rmses: Vec<f64> = per_plot.values().filter_map(|p| p.rmse_cm).collect();
    Ok(DbhEvalReport {
        overall_recall: pooled.len() as f64 / total_gt as f64,
        overall_rmse_cm: rmse(&pooled),
        per_plot_avg_recall: per_plot.values().map(|p| p.recall).sum::<f64>() / per_plot.len() as f64,
        per_plot_avg_rmse_cm: (!plot_rmses.is_empty())
            .then(|| plot_rmses.iter().sum::<f64>() / plot_rmses.len() as f64),
        per_plot,
    })
}
