// SPDX-License-Identifier: Apache-2.0

//! Parse a run configuration, inspect its fingerprint and see errors.

use forest_inventory::config::{schema_hash, PipelineConfig};

fn main() -> forest_inventory::Result<()> {
    let defaults = PipelineConfig::default();
    println!("schema {}", schema_hash());
    println!("default fingerprint {}", defaults.fingerprint());

    let tuned = PipelineConfig::parse(
        "# sparse understory
dbscan.eps_m = 0.25
dbscan.min_pts = 15
inventory.plot_id = north_04
threads = 1
",
    )?;
    println!("tuned fingerprint   {}", tuned.fingerprint());
    let changed: Vec<String> = tuned
        .render()
        .lines()
        .zip(defaults.render().lines())
        .filter(|(a, b)| a != b)
        .map(|(a, _)| a.to_string())
        .collect();
    println!("changed lines:\n  {}", changed.join("\n  "));

    for bad in ["dbscan.eps = 0.2", "slice.low_m = 1.5\nslice.high_m = 1.0", "threads = 1\nthreads = 2"] {
        match PipelineConfig::parse(bad) {
            Ok(_) => println!("accepted {bad:?}"),
            Err(e) => println!("rejected: {e}"),
        }
    }
    Ok(())
}
