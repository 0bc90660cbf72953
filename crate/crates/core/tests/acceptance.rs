// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::TAU;
use std::fs;
use std::time::{Duration, Instant};

use forest_inventory::cloud::SemanticLabel;
use forest_inventory::config::PipelineConfig;
use forest_inventory::detect::{
    dbscan_labels, detect_trees, detect_trees_cylinder, fit_cylinder_points, least_squares_circle, DetectionConfig,
    TreeDetection, DEFAULT_STEM_BAND,
};
use forest_inventory::eval::{
    eval_dbh, pq_overall, read_ground_truth, thing_quality, DbhEvalReport, FrameRole, MatchMode, Matching, PanopticFrame,
};
use forest_inventory::inventory::{associate, ForestInventory};
use forest_inventory::io::{read_csv, read_ply, write_csv, write_ply, PlyEncoding};
use forest_inventory::payload::{build_payloads, PayloadCloud, Pose, Scan, Trajectory};
use forest_inventory::synth::{synth_forest, SynthConfig, SynthTruth};
use forest_inventory::terrain::{build_dtm, cloth_filter, ClothParams};
use forest_inventory::workflow;
use forest_inventory::{Point3, PointCloud};
use nalgebra::{Rotation3, Vector3};
use rand::Rng;

use common::{brute_dbscan, brute_pq, labels_to_cloud, random_labels, rng};

const SEEDS: u64 = 10;

struct Verdict {
    pass: bool,
    summary: String,
}

fn verdict(pass: bool, summary: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        summary: summary.into(),
    }
}

fn score(truth: &SynthTruth, detections: &[TreeDetection]) -> DbhEvalReport {
    let mut table = Vec::new();
    truth.write_tree_table("plot", &mut table).unwrap();
    let gt = read_ground_truth(&table[..]).unwrap();
    let inv = associate(ForestInventory::default(), detections, 0.5).unwrap();
    eval_dbh(&BTreeMap::from([("plot".to_string(), inv)]), &gt, 0.5, MatchMode::Greedy).unwrap()
}

fn dbh_accuracy() -> Verdict {
    // one worker thread: the runtime bound is per desktop core
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let (mut worst_recall, mut worst_rmse, mut slowest) = (1.0f64, 0.0f64, Duration::ZERO);
    for seed in 0..SEEDS {
        let cfg = SynthConfig {
            seed,
            n_trees: 50,
            area: (100.0, 100.0),
            dbh_range: (10.0, 80.0),
            trunk_noise_sigma: 0.01,
            ..Default::default()
        };
        let (cloud, truth) = synth_forest(&cfg).unwrap();
        let payload = PayloadCloud::from_world_cloud(0, cloud);
        let t0 = Instant::now();
        let report = pool.install(|| score(&truth, &detect_trees(&payload, &DetectionConfig::default()).unwrap()));
        let elapsed = t0.elapsed();
        let rmse = report.overall_rmse_cm.unwrap_or(f64::INFINITY);
        println!(
            "    seed {seed}: recall {:.3}, RMSE {rmse:.3} cm, {:.2} s",
            report.overall_recall,
            elapsed.as_secs_f64()
        );
        worst_recall = worst_recall.min(report.overall_recall);
        worst_rmse = worst_rmse.max(rmse);
        slowest = slowest.max(elapsed);
    }
    verdict(
        worst_recall >= 0.95 && worst_rmse <= 2.0 && slowest <= Duration::from_secs(30),
        format!(
            "min recall {worst_recall:.3} (>= 0.95), max RMSE {worst_rmse:.3} cm (<= 2.0), max runtime {:.2} s (<= 30) over {SEEDS} seeds",
            slowest.as_secs_f64()
        ),
    )
}

fn recall_ordering() -> Verdict {
    let mut held = 0;
    for seed in 0..SEEDS {
        let cfg = SynthConfig {
            seed,
            occluded_fraction: 0.3,
            occluded_arc_deg: 60.0,
            ..Default::default()
        };
        let (cloud, truth) = synth_forest(&cfg).unwrap();
        let payload = PayloadCloud::from_world_cloud(0, cloud);
        let config = DetectionConfig::default();
        let circle = score(&truth, &detect_trees(&payload, &config).unwrap());
        let cylinder = score(&truth, &detect_trees_cylinder(&payload, &config, DEFAULT_STEM_BAND).unwrap());
        let (rc, ry) = (circle.overall_rmse_cm.unwrap(), cylinder.overall_rmse_cm.unwrap());
        let ok = cylinder.overall_recall > circle.overall_recall && rc <= ry;
        held += ok as usize;
        println!(
            "    seed {seed}: recall circle {:.2} < cylinder {:.2}; RMSE circle {rc:.3} <= cylinder {ry:.3} cm: {}",
            circle.overall_recall,
            cylinder.overall_recall,
            if ok { "holds" } else { "violated" }
        );
    }
    verdict(
        held == SEEDS as usize,
        format!("both orderings hold on {held}/{SEEDS} seeds with 30% of trunks visible over 60 degrees"),
    )
}

fn pq_oracle() -> Verdict {
    let t0 = Instant::now();
    let (mut mismatches, mut duplicates) = (0, 0);
    let mut r = rng(2024);
    for _ in 0..1000 {
        let n = r.gen_range(0..=30);
        let k = r.gen_range(1..=5);
        let gt = random_labels(&mut r, n, k);
        let pred = if r.gen_bool(0.5) {
            let mut p = gt.clone();
            for _ in 0..r.gen_range(0..=n / 3 + 1) {
                if n > 0 {
                    let i = r.gen_range(0..n);
                    p[i] = random_labels(&mut r, 1, k)[0];
                }
            }
            p
        } else {
            random_labels(&mut r, n, k)
        };
        let fast = pq_overall(
            &PanopticFrame::new(labels_to_cloud(&pred), FrameRole::Prediction).unwrap(),
            &PanopticFrame::new(labels_to_cloud(&gt), FrameRole::GroundTruth).unwrap(),
        )
        .unwrap();
        let slow = brute_pq(&pred, &gt);
        let same = [
            (fast.ground.value, slow.ground),
            (fast.shrub.value, slow.shrub),
            (fast.tree.value, slow.tree),
            (fast.overall, slow.overall),
        ]
        .iter()
        .all(|(a, b)| a.to_bits() == b.to_bits());
        let pairs: Vec<(u32, u32)> = fast.matching.pairs.iter().map(|p| (p.0, p.1)).collect();
        mismatches += (!same || pairs != slow.pairs) as usize;
        let p: BTreeSet<u32> = pairs.iter().map(|x| x.0).collect();
        let g: BTreeSet<u32> = pairs.iter().map(|x| x.1).collect();
        duplicates += (p.len() != pairs.len() || g.len() != pairs.len()) as usize;
    }
    let elapsed = t0.elapsed();
    verdict(
        mismatches == 0 && duplicates == 0 && elapsed <= Duration::from_secs(10),
        format!(
            "1000 random frames: {mismatches} score mismatches, {duplicates} non-unique matchings, {:.2} s (<= 10)",
            elapsed.as_secs_f64()
        ),
    )
}

fn pq_fixed_points() -> Verdict {
    let labels = random_labels(&mut rng(7), 30, 5);
    let cloud = labels_to_cloud(&labels);
    let r = pq_overall(
        &PanopticFrame::new(cloud.clone(), FrameRole::Prediction).unwrap(),
        &PanopticFrame::new(cloud, FrameRole::GroundTruth).unwrap(),
    )
    .unwrap();
    let perfect = [r.ground.value, r.shrub.value, r.tree.value, r.overall] == [1.0; 4];
    let one = thing_quality(&Matching {
        pairs: vec![(1, 1, 0.8)],
        ..Default::default()
    })
    .value;
    let penalized = thing_quality(&Matching {
        pairs: vec![(1, 1, 0.8)],
        false_positives: vec![2],
        false_negatives: vec![3],
    })
    .value;
    let worked = (one - 0.8).abs() < 1e-12 && (penalized - 0.4).abs() < 1e-12;
    verdict(
        perfect && worked,
        format!("perfect prediction scores exactly 1 on every class: {perfect}; worked Tree examples 0.8 and {penalized} (0.4 within 1e-12)"),
    )
}

fn clustering_oracle() -> Verdict {
    let mut r = rng(5);
    let mut mismatches = 0;
    for case in 0..500 {
        let n = r.gen_range(0..=200);
        let eps = r.gen_range(0.05..0.4);
        let min_pts = r.gen_range(1..10);
        let mismatch = if case % 2 == 0 {
            let pts: Vec<[f64; 2]> = (0..n)
                .map(|_| [r.gen_range(0..40) as f64 * 0.05, r.gen_range(0..40) as f64 * 0.05])
                .collect();
            let (labels, core) = brute_dbscan(&pts, eps, min_pts);
            let fast = dbscan_labels(&pts, eps, min_pts);
            fast.labels != labels || fast.core != core
        } else {
            let pts: Vec<[f64; 3]> = (0..n)
                .map(|_| [r.gen_range(0.0..2.0), r.gen_range(0.0..2.0), r.gen_range(0.0..2.0)])
                .collect();
            let (labels, core) = brute_dbscan(&pts, eps, min_pts);
            let fast = dbscan_labels(&pts, eps, min_pts);
            fast.labels != labels || fast.core != core
        };
        mismatches += mismatch as usize;
    }
    verdict(
        mismatches == 0,
        format!("500 random instances of <= 200 points: {mismatches} mismatches"),
    )
}

fn geometry_invariance() -> Verdict {
    let mut r = rng(17);
    // exact data
    let ring: Vec<[f64; 2]> = (0..64)
        .map(|k| {
            let a = TAU * k as f64 / 64.0;
            [1.5 + 0.3 * a.cos(), -2.0 + 0.3 * a.sin()]
        })
        .collect();
    let c = least_squares_circle(&ring).unwrap();
    let circle_exact = (c.radius - 0.3).abs().max((c.center[0] - 1.5).abs()).max((c.center[1] + 2.0).abs());

    let axis = Vector3::new(0.1, -0.05, 1.0).normalize();
    let (u, v) = {
        let u = axis.cross(&Vector3::x()).normalize();
        (u, axis.cross(&u))
    };
    let stem = |radius: f64, sigma: f64, r: &mut rand_chacha::ChaCha8Rng| -> Vec<[f64; 3]> {
        (0..400)
            .map(|_| {
                let (t, a) = (r.gen_range(0.0..2.0), r.gen_range(0.0..TAU));
                let rr = radius + sigma * common::gaussian(r);
                let p = Vector3::new(2.0, 3.0, 0.0) + t * axis + rr * (a.cos() * u + a.sin() * v);
                [p.x, p.y, p.z]
            })
            .collect()
    };
    let cyl = fit_cylinder_points(&stem(0.2, 0.0, &mut r)).unwrap();
    let cylinder_exact = (cyl.radius - 0.2)
        .abs()
        .max(Vector3::from(cyl.axis_direction).cross(&axis).norm());

    // rigid transforms of noisy data
    let arc: Vec<[f64; 2]> = common::noisy_arc(&mut r, [0.4, 0.1], 0.25, 4.0, 80, 0.005);
    let noisy_stem = stem(0.18, 0.004, &mut r);
    let (c0, y0) = (least_squares_circle(&arc).unwrap(), fit_cylinder_points(&noisy_stem).unwrap());
    let (mut circle_drift, mut cylinder_drift) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let (s, co) = r.gen_range(0.0..TAU).sin_cos();
        let (tx, ty) = (r.gen_range(-100.0..100.0), r.gen_range(-100.0..100.0));
        let moved: Vec<[f64; 2]> = arc.iter().map(|p| [co * p[0] - s * p[1] + tx, s * p[0] + co * p[1] + ty]).collect();
        circle_drift = circle_drift.max((least_squares_circle(&moved).unwrap().radius - c0.radius).abs());

        let rot = Rotation3::from_axis_angle(&Vector3::z_axis(), r.gen_range(0.0..TAU))
            * Rotation3::from_axis_angle(&Vector3::y_axis(), r.gen_range(-0.17..0.17));
        let t = Vector3::new(r.gen_range(-100.0..100.0), r.gen_range(-100.0..100.0), r.gen_range(-10.0..10.0));
        let moved: Vec<[f64; 3]> = noisy_stem
            .iter()
            .map(|p| {
                let q = rot * Vector3::from(*p) + t;
                [q.x, q.y, q.z]
            })
            .collect();
        cylinder_drift = cylinder_drift.max((fit_cylinder_points(&moved).unwrap().radius - y0.radius).abs());
    }
    let worst = circle_exact.max(cylinder_exact).max(circle_drift).max(cylinder_drift);
    verdict(
        worst < 1e-9,
        format!(
            "exact-data error circle {circle_exact:.1e} m, cylinder {cylinder_exact:.1e}; radius drift over 100 rigid transforms circle {circle_drift:.1e} m, cylinder {cylinder_drift:.1e} (all < 1e-9)"
        ),
    )
}

fn terrain_correctness() -> Verdict {
    let (mut worst_p, mut worst_r) = (1.0f64, 1.0f64);
    for seed in 0..3 {
        let (cloud, _) = synth_forest(&SynthConfig {
            seed,
            ..Default::default()
        })
        .unwrap();
        let res = cloth_filter(&cloud, &ClothParams::default()).unwrap();
        let (mut tp, mut fp, mut fneg) = (0usize, 0usize, 0usize);
        for (g, p) in res.ground_mask.iter().zip(&cloud.points) {
            match (*g, p.semantic == Some(SemanticLabel::Ground)) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fneg += 1,
                _ => {}
            }
        }
        let (precision, recall) = (tp as f64 / (tp + fp) as f64, tp as f64 / (tp + fneg) as f64);
        println!("    seed {seed}: ground precision {precision:.4}, recall {recall:.4}");
        worst_p = worst_p.min(precision);
        worst_r = worst_r.min(recall);
    }

    // a sampled plane: every cell within half a cell of slope of the plane
    let (a, b, c0, res) = (0.12, -0.07, 3.0, 0.25);
    let plane = |x: f64, y: f64| a * x + b * y + c0;
    let mut r = rng(1);
    let pts: Vec<Point3> = (0..20_000)
        .map(|_| {
            let (x, y) = (r.gen_range(0.0..10.0), r.gen_range(0.0..10.0));
            Point3::new(x, y, plane(x, y))
        })
        .collect();
    let cloud = PointCloud::new(pts, "plane");
    let dtm = build_dtm(&cloud, &vec![true; cloud.len()], res, 0.5).unwrap();
    let bound = 0.5 * res * (a.abs() + b.abs());
    let mut worst_dev = 0.0f64;
    for row in 0..dtm.height() {
        for col in 0..dtm.width() {
            let [x, y] = dtm.cell_center(col, row);
            if let Some(h) = dtm.get(col, row) {
                worst_dev = worst_dev.max((h - plane(x, y)).abs());
            }
        }
    }
    verdict(
        worst_p >= 0.98 && worst_r >= 0.98 && worst_dev <= bound,
        format!(
            "cloth ground precision {worst_p:.4}, recall {worst_r:.4} (>= 0.98); plane DTM deviation {worst_dev:.2e} m (<= {bound:.2e})"
        ),
    )
}

fn determinism_and_round_trips() -> Verdict {
    let base = tempfile::tempdir().unwrap();
    let cfg = SynthConfig {
        seed: 11,
        n_trees: 12,
        area: (30.0, 30.0),
        ..Default::default()
    };
    let mut runs = Vec::new();
    for k in 0..2 {
        let dir = base.path().join(format!("run{k}"));
        let truth = workflow::run_synth(&cfg, "plot", forest_inventory::io::Format::PlyBinaryLe, &dir.join("synth")).unwrap();
        let payloads = workflow::load_payloads(&dir.join("synth").join("cloud.ply"), 20.0).unwrap();
        workflow::run_inventory(&payloads, &PipelineConfig::default(), &dir.join("inv")).unwrap();
        workflow::run_eval_dbh(&dir.join("inv"), &dir.join("synth/truth.csv"), 0.5, MatchMode::Greedy, &dir.join("dbh.csv")).unwrap();
        workflow::run_eval_pq(&dir.join("synth/cloud.ply"), &dir.join("synth/cloud.ply"), &dir.join("pq.txt")).unwrap();
        runs.push((dir, truth));
    }
    let files = [
        "synth/cloud.ply",
        "synth/truth.csv",
        "inv/inventory.csv",
        "inv/inventory.geojson",
        "inv/inventory.meta.json",
        "inv/dtm.asc",
        "dbh.csv",
        "pq.txt",
    ];
    let identical = files
        .iter()
        .filter(|f| fs::read(runs[0].0.join(f)).unwrap() == fs::read(runs[1].0.join(f)).unwrap())
        .count();

    let (cloud, _) = synth_forest(&cfg).unwrap();
    let mut lossless = 0;
    for enc in [PlyEncoding::Ascii, PlyEncoding::BinaryLittleEndian] {
        let mut buf = Vec::new();
        write_ply(&cloud, &mut buf, enc).unwrap();
        lossless += (read_ply(&buf[..]).unwrap() == cloud) as usize;
    }
    let mut buf = Vec::new();
    write_csv(&cloud, &mut buf).unwrap();
    lossless += (read_csv(&buf[..]).unwrap().points == cloud.points) as usize;

    let csv_rows = fs::read_to_string(runs[0].0.join("inv/inventory.csv")).unwrap().lines().count() - 1;
    let geo: serde_json::Value = serde_json::from_slice(&fs::read(runs[0].0.join("inv/inventory.geojson")).unwrap()).unwrap();
    let features = geo["features"].as_array().unwrap().len();
    verdict(
        identical == files.len() && lossless == 3 && csv_rows == features,
        format!(
            "{identical}/{} output files byte-identical across runs; {lossless}/3 lossless round trips (PLY ascii, PLY binary, CSV); {csv_rows} CSV rows vs {features} GeoJSON features",
            files.len()
        ),
    )
}

fn payload_partition() -> Verdict {
    let samples: Vec<(f64, Pose)> = (0..=45).map(|i| (i as f64, Pose::from_translation(i as f64, 0.0, 0.0))).collect();
    let scans: Vec<Scan> = (0..=45)
        .map(|i| Scan {
            timestamp: i as f64,
            cloud: (0..5).map(|k| Point3::new(0.5 * k as f64, 1.0, 0.25 * i as f64)).collect(),
        })
        .collect();
    let payloads = build_payloads(&scans, &Trajectory::new(samples).unwrap(), 20.0).unwrap();
    let key = |p: &Point3| (p.x.to_bits(), p.y.to_bits(), p.z.to_bits());
    let mut expected: Vec<_> = scans
        .iter()
        .flat_map(|s| {
            s.cloud
                .points
                .iter()
                .map(move |p| Point3::new(p.x + s.timestamp, p.y, p.z))
        })
        .map(|p| key(&p))
        .collect();
    let mut got: Vec<_> = payloads.iter().flat_map(|p| p.cloud.points.iter().map(key)).collect();
    expected.sort();
    got.sort();
    verdict(
        payloads.len() == 3 && got == expected,
        format!(
            "45 m path with a 20 m window gives {} payloads (expect 3); point multiset conserved: {}",
            payloads.len(),
            got == expected
        ),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 9] = [
        ("DBH accuracy on synthetic plots", dbh_accuracy),
        ("recall and RMSE ordering, circle vs cylinder", recall_ordering),
        ("PQ oracle equivalence", pq_oracle),
        ("PQ fixed points", pq_fixed_points),
        ("clustering oracle", clustering_oracle),
        ("geometry invariances", geometry_invariance),
        ("terrain correctness", terrain_correctness),
        ("determinism and round trips", determinism_and_round_trips),
        ("payload partition", payload_partition),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        failed += (!v.pass) as usize;
        println!(
            "criterion {} [{}] {name}: {}",
            k + 1,
            if v.pass { "PASS" } else { "FAIL" },
            v.summary
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
