// SPDX-License-Identifier: Apache-2.0

//! Write a cloud as binary PLY, ASCII PLY and CSV, then read each back.

use forest_inventory::io::{read_point_cloud, write_point_cloud, Format};
use forest_inventory::synth::{synth_forest, SynthConfig};

fn main() -> forest_inventory::Result<()> {
    let (cloud, _) = synth_forest(&SynthConfig {
        n_trees: 3,
        area: (10.0, 10.0),
        points_per_tree: 500,
        canopy: false,
        ..Default::default()
    })?;
    let dir = tempfile::tempdir()?;

    for (name, format) in [
        ("cloud.ply", Format::PlyBinaryLe),
        ("cloud_ascii.ply", Format::PlyAscii),
        ("cloud.csv", Format::Csv),
    ] {
        let path = dir.path().join(name);
        write_point_cloud(&cloud, &path, format)?;
        let back = read_point_cloud(&path, format)?;
        let bytes = std::fs::metadata(&path)?.len();
        println!(
            "{name:16} {bytes:>9} bytes, {} points, points identical: {}, frame '{}'",
            back.len(),
            back.points == cloud.points,
            back.frame_id
        );
    }
    Ok(())
}
