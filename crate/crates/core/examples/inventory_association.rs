// SPDX-License-Identifier: Apache-2.0

//! Fold detections from several payloads into one inventory and export it.

use forest_inventory::detect::{CircleFit, TreeDetection};
use forest_inventory::inventory::{associate, read_inventory, write_inventory, ForestInventory};

fn detection(x: f64, y: f64, dbh_cm: f64, support: usize, payload: usize) -> TreeDetection {
    TreeDetection::from_fit(
        CircleFit {
            center: [x, y],
            radius: dbh_cm / 200.0,
            rms_residual: 0.004,
            inlier_count: support,
        },
        payload,
    )
}

fn main() -> forest_inventory::Result<()> {
    let passes = [
        vec![detection(1.0, 1.0, 30.0, 120, 0), detection(6.0, 2.0, 22.0, 80, 0)],
        vec![detection(1.1, 0.9, 31.0, 40, 1), detection(6.05, 2.0, 21.0, 80, 1), detection(9.0, 9.0, 45.0, 200, 1)],
        // an outlier reading on tree 1 pushes its spread over the flag threshold
        vec![detection(0.95, 1.05, 44.0, 160, 2)],
    ];
    let mut inventory = ForestInventory::new("demo", "local", "example");
    for batch in &passes {
        inventory = associate(inventory, batch, 0.5)?;
    }
    for t in inventory.trees.values() {
        println!(
            "tree {} ({:.3}, {:.3}) dbh {:.2} cm +- {:.2}, seen {}x in payloads {}..={}",
            t.tree_id,
            t.position[0],
            t.position[1],
            t.dbh_cm,
            t.dbh_std_cm(),
            t.observations,
            t.first_seen,
            t.last_seen
        );
    }
    println!("high variance: {:?}", inventory.high_variance_ids());

    let dir = tempfile::tempdir()?;
    write_inventory(&inventory, dir.path())?;
    for entry in std::fs::read_dir(dir.path())? {
        let entry = entry?;
        println!("wrote {} ({} bytes)", entry.file_name().to_string_lossy(), entry.metadata()?.len());
    }
    let back = read_inventory(dir.path())?;
    println!("read back {} trees for plot '{}'", back.len(), back.plot_id);
    Ok(())
}
