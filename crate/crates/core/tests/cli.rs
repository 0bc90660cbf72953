// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use forest_inventory::io::{read_point_cloud, write_point_cloud, Format};
use forest_inventory::PointCloud;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_forest-inventory"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn synth_then_inventory_then_eval() {
    let dir = tempfile::tempdir().unwrap();
    let (plot, inv) = (dir.path().join("plot"), dir.path().join("inv"));
    let o = cli(&["synth", "forest", "--seed", "7", "--trees", "10", "--out", s(&plot)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = cli(&["inventory", "run", "--input", s(&plot.join("cloud.ply")), "--out", s(&inv)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(inv.join("inventory.csv")).unwrap();
    assert_eq!(csv.lines().count() - 1, 10);
    for f in ["inventory.geojson", "inventory.meta.json", "dtm.asc"] {
        assert!(inv.join(f).is_file(), "{f}");
    }

    let report = dir.path().join("dbh.csv");
    let o = cli(&["eval", "dbh", "--pred", s(&inv), "--gt", s(&plot.join("truth.csv")), "--radius", "0.5", "--out", s(&report)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&report).unwrap();
    let overall = text.lines().last().unwrap();
    assert!(overall.starts_with("overall,10,10,10,1.000000,100.00,"), "{overall}");

    // a second run over the same input writes identical bytes
    let again = dir.path().join("again");
    assert!(cli(&["inventory", "run", "--input", s(&plot.join("cloud.ply")), "--out", s(&again)]).status.success());
    for f in ["inventory.csv", "inventory.geojson", "inventory.meta.json", "dtm.asc"] {
        assert_eq!(fs::read(inv.join(f)).unwrap(), fs::read(again.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn missing_input_is_a_usage_error() {
    let o = cli(&["inventory", "run", "--out", "x"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("--input") && err.contains("Usage"), "{err}");
    assert!(o.stdout.is_empty());
}

#[test]
fn unreadable_input_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&["inventory", "run", "--input", s(&dir.path().join("nope.ply")), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    let bad = dir.path().join("bad.ply");
    fs::write(&bad, "ply\nformat ascii 1.0\nelement vertex 1\nend_header\n").unwrap();
    let o = cli(&["inventory", "run", "--input", s(&bad), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn pq_of_a_file_against_itself_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let plot = dir.path().join("plot");
    let o = cli(&[
        "synth", "forest", "--seed", "3", "--trees", "4", "--width", "20", "--height", "20", "--points-per-tree", "500",
        "--format", "csv", "--out", s(&plot),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let cloud = plot.join("cloud.csv");
    for (name, needle) in [("pq.txt", "100.0"), ("pq.csv", "percent,100.00,100.00,100.00,100.00,100.00,100.00")] {
        let out = dir.path().join(name);
        let o = cli(&["eval", "pq", "--pred", s(&cloud), "--gt", s(&cloud), "--out", s(&out)]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(fs::read_to_string(&out).unwrap().contains(needle), "{name}");
    }
    let json = dir.path().join("pq.json");
    assert!(cli(&["eval", "pq", "--pred", s(&cloud), "--gt", s(&cloud), "--out", s(&json)]).status.success());
    let v: serde_json::Value = serde_json::from_slice(&fs::read(json).unwrap()).unwrap();
    assert_eq!(v["overall"], 1.0);
}

#[test]
fn config_printing_and_version() {
    let printed = cli(&["config", "print"]);
    assert!(printed.status.success());
    assert_eq!(printed.stdout, cli(&["--print-config"]).stdout);
    let text = String::from_utf8(printed.stdout).unwrap();
    for key in ["payload.window_m", "cloth.cell_size_m", "dtm.resolution_m", "slice.low_m", "slice.high_m", "dbscan.eps_m",
        "dbscan.min_pts", "nms.radius_m", "hough.r_min_m", "fit.residual_max_m"] {
        assert!(text.lines().any(|l| l.starts_with(&format!("{key} = "))), "{key}");
    }

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# coarser clustering\ndbscan.eps_m = 0.2\n").unwrap();
    let o = cli(&["config", "print", "--config", s(&cfg)]);
    assert!(String::from_utf8(o.stdout).unwrap().contains("dbscan.eps_m = 0.2\n"));
    fs::write(&cfg, "dbscan.epsilon = 0.2\n").unwrap();
    let o = cli(&["config", "print", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("dbscan.epsilon"));

    let v = String::from_utf8(cli(&["--version"]).stdout).unwrap();
    let mut words = v.split_whitespace();
    assert_eq!(words.next(), Some("forest-inventory"));
    assert_eq!(words.next().unwrap().split('.').count(), 3);
    assert!(v.contains("schema"));
}

#[test]
fn scan_directory_with_trajectory_is_cut_into_payloads() {
    let dir = tempfile::tempdir().unwrap();
    let plot = dir.path().join("plot");
    let o = cli(&[
        "synth", "forest", "--seed", "5", "--trees", "6", "--width", "30", "--height", "10", "--points-per-tree", "2000",
        "--out", s(&plot),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let world = read_point_cloud(plot.join("cloud.ply"), Format::PlyBinaryLe).unwrap();

    // three scans taken from x = 0, 10 and 20 m, each in its sensor frame
    let scans = dir.path().join("scans");
    fs::create_dir_all(&scans).unwrap();
    let mut traj = String::from("timestamp,x,y,z,qw,qx,qy,qz\n");
    for k in 0..3 {
        let x0 = 10.0 * k as f64;
        traj.push_str(&format!("{k},{x0},0,0,1,0,0,0\n"));
        let local: PointCloud = world
            .points
            .iter()
            .filter(|p| p.x >= x0 && (p.x < x0 + 10.0 || k == 2))
            .map(|p| {
                let mut q = *p;
                q.x -= x0;
                q
            })
            .collect();
        write_point_cloud(&local, scans.join(format!("{k}.ply")), Format::PlyBinaryLe).unwrap();
    }
    fs::write(scans.join("trajectory.csv"), traj).unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "payload.window_m = 5\n").unwrap();

    let inv = dir.path().join("inv");
    let o = cli(&["inventory", "run", "--input", s(&scans), "--config", s(&cfg), "--out", s(&inv)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(inv.join("inventory.csv")).unwrap();
    assert!(csv.lines().count() > 1);
    // scans 0-1 form payload 0 and scan 2 payload 1
    let last_seen: Vec<&str> = csv.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert!(last_seen.iter().all(|v| *v == "0" || *v == "1"));
}
