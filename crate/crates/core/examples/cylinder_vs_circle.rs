// SPDX-License-Identifier: Apache-2.0

//! Compare the breast-height circle detector with the stem cylinder detector
//! on a plot where a share of trunks is visible from one side only.

use std::collections::BTreeMap;

use forest_inventory::detect::{detect_trees, detect_trees_cylinder, DetectionConfig, TreeDetection, DEFAULT_STEM_BAND};
use forest_inventory::eval::{eval_dbh, read_ground_truth, MatchMode};
use forest_inventory::inventory::{associate, ForestInventory};
use forest_inventory::payload::PayloadCloud;
use forest_inventory::synth::{synth_forest, SynthConfig};

fn main() -> forest_inventory::Result<()> {
    let (cloud, truth) = synth_forest(&SynthConfig {
        seed: 4,
        n_trees: 30,
        area: (60.0, 60.0),
        occluded_fraction: 0.3,
        occluded_arc_deg: 60.0,
        ..Default::default()
    })?;
    let mut table = Vec::new();
    truth.write_tree_table("plot", &mut table)?;
    let gt = read_ground_truth(&table[..])?;

    let payload = PayloadCloud::from_world_cloud(0, cloud);
    let config = DetectionConfig::default();
    let score = |name: &str, dets: Vec<TreeDetection>| -> forest_inventory::Result<()> {
        let inv = associate(ForestInventory::default(), &dets, 0.5)?;
        let report = eval_dbh(&BTreeMap::from([("plot".to_string(), inv)]), &gt, 0.5, MatchMode::Greedy)?;
        println!(
            "{name:9} recall {:.2}, RMSE {:.2} cm",
            report.overall_recall,
            report.overall_rmse_cm.unwrap_or(f64::NAN)
        );
        Ok(())
    };
    score("circle", detect_trees(&payload, &config)?)?;
    score("cylinder", detect_trees_cylinder(&payload, &config, DEFAULT_STEM_BAND)?)?;
    Ok(())
}
