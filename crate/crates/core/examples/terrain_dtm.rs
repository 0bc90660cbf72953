// SPDX-License-Identifier: Apache-2.0

//! Separate ground with the cloth filter, rasterize it and normalize heights.

use forest_inventory::cloud::SemanticLabel;
use forest_inventory::synth::{synth_forest, SynthConfig};
use forest_inventory::terrain::{build_dtm, cloth_filter, normalize_heights, ClothParams};

fn main() -> forest_inventory::Result<()> {
    let (cloud, truth) = synth_forest(&SynthConfig {
        n_trees: 10,
        area: (30.0, 30.0),
        ..Default::default()
    })?;

    let cloth = cloth_filter(&cloud, &ClothParams::default())?;
    let labelled = cloud.points.iter().filter(|p| p.semantic == Some(SemanticLabel::Ground));
    let hits = labelled.clone().zip(0..).count();
    let agree = cloud
        .points
        .iter()
        .zip(&cloth.ground_mask)
        .filter(|(p, g)| **g && p.semantic == Some(SemanticLabel::Ground))
        .count();
    println!(
        "cloth: {} iterations (converged {}), {} ground points, {agree} of {hits} labelled ground recovered",
        cloth.iterations,
        cloth.converged,
        cloth.ground_count()
    );

    let dtm = build_dtm(&cloud, &cloth.ground_mask, 0.5, 1.5)?;
    println!("dtm: {} x {} cells at 0.5 m, {} with data", dtm.width(), dtm.height(), dtm.data_cells());
    for (x, y) in [(5.0, 5.0), (15.0, 12.5), (27.0, 3.0)] {
        let h = dtm.height_at(x, y).unwrap_or(f64::NAN);
        println!("  ground at ({x}, {y}): {h:.3} m, true {:.3} m", truth.ground_height(x, y));
    }

    let normalized = normalize_heights(&cloud, &dtm);
    let breast = normalized.cloud.points.iter().filter(|p| (1.0..1.6).contains(&p.z)).count();
    println!("{} points between 1.0 and 1.6 m above ground", breast);

    let mut asc = Vec::new();
    dtm.resample(1.0)?.write_esri_ascii(&mut asc)?;
    let text = String::from_utf8_lossy(&asc);
    println!("ESRI header at 1 m:\n{}", text.lines().take(6).collect::<Vec<_>>().join("\n"));
    Ok(())
}
