// SPDX-License-Identifier: Apache-2.0

//! Cut a stream of sensor-frame scans into payloads by distance travelled.

use forest_inventory::payload::{build_payloads, Pose, Scan, Trajectory};
use forest_inventory::{Point3, PointCloud};

fn main() -> forest_inventory::Result<()> {
    // walk 45 m east, turning north halfway, one scan per second
    let mut samples = Vec::new();
    let mut scans = Vec::new();
    for i in 0..=45 {
        let t = i as f64;
        let (x, y) = if i <= 25 { (t, 0.0) } else { (25.0, t - 25.0) };
        samples.push((t, Pose::from_translation(x, y, 0.0)));
        let ring: Vec<Point3> = (0..8)
            .map(|k| {
                let a = k as f64 * std::f64::consts::FRAC_PI_4;
                Point3::new(3.0 * a.cos(), 3.0 * a.sin(), 1.3)
            })
            .collect();
        scans.push(Scan { timestamp: t, cloud: PointCloud::new(ring, "sensor") });
    }
    let trajectory = Trajectory::new(samples)?;

    for window in [10.0, 20.0, 50.0] {
        let payloads = build_payloads(&scans, &trajectory, window)?;
        println!("window {window} m -> {} payloads", payloads.len());
        for p in &payloads {
            let (lo, hi) = p.cloud.bounds().expect("non-empty payload");
            println!(
                "  #{} {:4} points, odometry {:5.1} m, x {:5.1}..{:5.1}, y {:5.1}..{:5.1}",
                p.id,
                p.cloud.len(),
                p.odometry_distance,
                lo[0],
                hi[0],
                lo[1],
                hi[1]
            );
        }
    }
    Ok(())
}
