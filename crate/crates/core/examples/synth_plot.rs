// SPDX-License-Identifier: Apache-2.0

//! Generate a labelled synthetic plot and summarize what it contains.
//!
//!     cargo run --release --example synth_plot -- [seed]

use forest_inventory::cloud::SemanticLabel;
use forest_inventory::synth::{synth_forest, SynthConfig};

fn main() -> forest_inventory::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let cfg = SynthConfig {
        seed,
        n_trees: 20,
        area: (40.0, 40.0),
        ..Default::default()
    };
    let (cloud, truth) = synth_forest(&cfg)?;

    println!("{} points, {} trees", cloud.len(), truth.trees.len());
    for label in SemanticLabel::ALL {
        let n = cloud.points.iter().filter(|p| p.semantic == Some(label)).count();
        println!("  {label:?}: {n}");
    }
    for t in truth.trees.iter().take(5) {
        println!("  tree {} at ({:.2}, {:.2}) dbh {:.1} cm", t.id, t.x, t.y, t.dbh_cm);
    }
    truth.write_tree_table("demo", std::io::stdout().lock())?;
    Ok(())
}
