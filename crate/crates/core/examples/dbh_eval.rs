// SPDX-License-Identifier: Apache-2.0

//! Match an inventory against field measurements, greedily and optimally.

use std::collections::BTreeMap;

use forest_inventory::detect::{CircleFit, TreeDetection};
use forest_inventory::eval::{dbh_report_text, eval_dbh, read_ground_truth, MatchMode};
use forest_inventory::inventory::{associate, ForestInventory};

const FIELD: &str = "plot_id,tree_id,x,y,dbh_cm
north,1,0.0,0.0,30.0
north,2,0.8,0.0,24.0
north,3,5.0,5.0,41.0
";

fn main() -> forest_inventory::Result<()> {
    let gt = read_ground_truth(FIELD.as_bytes())?;
    // the first detection is in reach of both trees 1 and 2 but nearer tree 1;
    // the second reaches tree 1 only. Greedy matching takes the nearest pair
    // first and strands tree 2, optimal matching pairs all three.
    let dets: Vec<TreeDetection> = [([0.35, 0.0], 25.0), ([-0.45, 0.0], 29.0), ([5.1, 4.9], 40.0)]
        .into_iter()
        .map(|(center, dbh)| {
            TreeDetection::from_fit(CircleFit { center, radius: dbh / 200.0, rms_residual: 0.004, inlier_count: 50 }, 0)
        })
        .collect();
    let inventories = BTreeMap::from([("north".to_string(), associate(ForestInventory::default(), &dets, 0.2)?)]);

    for mode in [MatchMode::Greedy, MatchMode::Optimal] {
        let report = eval_dbh(&inventories, &gt, 0.5, mode)?;
        println!("{mode:?}");
        print!("{}", dbh_report_text(&report));
    }
    Ok(())
}
