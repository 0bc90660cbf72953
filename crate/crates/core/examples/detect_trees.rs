// SPDX-License-Identifier: Apache-2.0

//! Detect trunks in one plot and compare each detection with the generator.
//!
//!     cargo run --release --example detect_trees -- [seed]

use forest_inventory::detect::{detect_trees, DetectionConfig};
use forest_inventory::payload::PayloadCloud;
use forest_inventory::synth::{synth_forest, SynthConfig};

fn main() -> forest_inventory::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let (cloud, truth) = synth_forest(&SynthConfig {
        seed,
        n_trees: 15,
        area: (40.0, 40.0),
        ..Default::default()
    })?;
    let payload = PayloadCloud::from_world_cloud(0, cloud);

    let t0 = std::time::Instant::now();
    let detections = detect_trees(&payload, &DetectionConfig::default())?;
    println!("{} detections in {:.2?}", detections.len(), t0.elapsed());

    for d in &detections {
        let nearest = truth
            .trees
            .iter()
            .min_by(|a, b| {
                let da = (a.x - d.position[0]).hypot(a.y - d.position[1]);
                let db = (b.x - d.position[0]).hypot(b.y - d.position[1]);
                da.total_cmp(&db)
            })
            .expect("plot has trees");
        println!(
            "  ({:6.2}, {:6.2}) dbh {:5.1} cm, true {:5.1}; rms {:.1} mm, {} points",
            d.position[0],
            d.position[1],
            d.dbh_cm,
            nearest.dbh_cm,
            1000.0 * d.fit.rms_residual,
            d.support
        );
    }
    Ok(())
}
