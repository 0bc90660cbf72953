// SPDX-License-Identifier: Apache-2.0

//! Score a degraded copy of a labelled plot against the original.

use forest_inventory::eval::{pq_overall, pq_report_text, FrameRole, PanopticFrame};
use forest_inventory::synth::{synth_forest, SynthConfig};

fn main() -> forest_inventory::Result<()> {
    let (gt, _) = synth_forest(&SynthConfig {
        n_trees: 8,
        area: (25.0, 25.0),
        points_per_tree: 1500,
        ..Default::default()
    })?;

    // merge tree 2 into tree 1 and remove tree 3 from both frames
    let mut pred = gt.clone();
    for p in &mut pred.points {
        match p.instance {
            Some(2) => p.instance = Some(1),
            Some(3) => p.instance = None,
            _ => {}
        }
    }
    pred.points.retain(|p| !(p.is_tree() && p.instance.is_none()));
    // a prediction must cover the same points, so score on the shared subset
    let kept: Vec<usize> = gt
        .points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.instance != Some(3))
        .map(|(i, _)| i)
        .collect();
    let gt = gt.subset(&kept);

    let report = pq_overall(
        &PanopticFrame::new(pred, FrameRole::Prediction)?,
        &PanopticFrame::new(gt, FrameRole::GroundTruth)?,
    )?;
    print!("{}", pq_report_text(&report));
    println!(
        "matched {} trees, {} false positives, {} false negatives",
        report.matching.tp(),
        report.matching.false_positives.len(),
        report.matching.false_negatives.len()
    );
    Ok(())
}
