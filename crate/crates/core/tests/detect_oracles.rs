// SPDX-License-Identifier: Apache-2.0

//! Trunk detection checked against brute-force references and geometric
//! invariances.

mod common;

use std::f64::consts::{PI, TAU};

use forest_inventory::detect::{
    candidate_order, circle_objective, dbscan_labels, fit_cylinder_points, hough_circle, hough_peak,
    least_squares_circle, non_maxima_suppression, CircleFit, HoughParams, TreeDetection,
};
use forest_inventory::eval::cluster_offsets;
use forest_inventory::{Point3, PointCloud};
use nalgebra::{Rotation3, Vector3};
use proptest::prelude::*;
use rand::Rng;

use common::{brute_dbscan, circle_cost, gaussian, noisy_arc, rng};

fn points_2d(max: usize) -> impl Strategy<Value = Vec<[f64; 2]>> {
    // a coarse lattice makes exact eps-boundary distances common
    prop::collection::vec((0i32..40, 0i32..40), 0..=max)
        .prop_map(|v| v.into_iter().map(|(a, b)| [a as f64 * 0.05, b as f64 * 0.05]).collect())
}

fn points_3d(max: usize) -> impl Strategy<Value = Vec<[f64; 3]>> {
    prop::collection::vec((0.0..2.0f64, 0.0..2.0f64, 0.0..2.0f64), 0..=max)
        .prop_map(|v| v.into_iter().map(|(a, b, c)| [a, b, c]).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dbscan_2d_matches_brute_force(pts in points_2d(200), eps in prop::sample::select(vec![0.05, 0.1, 0.15, 0.2]), min_pts in 1usize..10) {
        let fast = dbscan_labels(&pts, eps, min_pts);
        let (labels, core) = brute_dbscan(&pts, eps, min_pts);
        prop_assert_eq!(fast.core, core);
        prop_assert_eq!(fast.labels, labels);
    }

    #[test]
    fn dbscan_3d_matches_brute_force(pts in points_3d(200), eps in 0.05..0.5f64, min_pts in 1usize..8) {
        let fast = dbscan_labels(&pts, eps, min_pts);
        let (labels, core) = brute_dbscan(&pts, eps, min_pts);
        prop_assert_eq!(fast.core, core);
        prop_assert_eq!(fast.labels, labels);
    }

    #[test]
    fn offsets_of_zero_equal_plain_dbscan(pts in points_3d(120), eps in 0.1..0.5f64, min_pts in 1usize..6) {
        let cloud: PointCloud = pts.iter().map(|p| Point3::new(p[0], p[1], p[2])).collect();
        let ids = cluster_offsets(&cloud, &vec![[0.0; 3]; pts.len()], eps, min_pts).unwrap();
        let plain = dbscan_labels(&pts, eps, min_pts);
        let expected: Vec<Option<u32>> = plain.labels.iter().map(|l| l.map(|c| c as u32 + 1)).collect();
        prop_assert_eq!(ids, expected);
    }

    #[test]
    fn nms_keeps_a_maximal_separated_subset(
        raw in prop::collection::vec((0.0..5.0f64, 0.0..5.0f64, 20usize..40, 0.0..0.03f64), 0..60),
        radius in 0.1..1.5f64,
    ) {
        let cands: Vec<CircleFit> = raw
            .iter()
            .map(|&(x, y, n, rms)| CircleFit { center: [x, y], radius: 0.1, rms_residual: rms, inlier_count: n })
            .collect();
        let kept = non_maxima_suppression(&cands, radius);
        let d2 = |a: &CircleFit, b: &CircleFit| (a.center[0] - b.center[0]).powi(2) + (a.center[1] - b.center[1]).powi(2);
        for (i, a) in kept.iter().enumerate() {
            prop_assert!(cands.contains(a));
            for b in &kept[i + 1..] {
                prop_assert!(d2(a, b) > radius * radius);
            }
        }
        // every dropped candidate is blocked by a kept one that outranks it
        for c in &cands {
            if !kept.contains(c) {
                prop_assert!(kept.iter().any(|k| d2(k, c) <= radius * radius
                    && candidate_order(k, c) != std::cmp::Ordering::Greater));
            }
        }
    }

    #[test]
    fn least_squares_circle_beats_a_grid_search(seed in any::<u64>(), arc in 1.0..TAU, sigma in 0.0..0.01f64) {
        let mut r = rng(seed);
        let pts = noisy_arc(&mut r, [1.0, -2.0], 0.2, arc, 60, sigma);
        let fit = least_squares_circle(&pts).unwrap();
        let best = circle_cost(&pts, fit.center, fit.radius);
        // a 21^3 grid of ±5 mm around the fitted optimum never does better
        for i in -10..=10 {
            for j in -10..=10 {
                for k in -10..=10 {
                    let c = [fit.center[0] + 5e-4 * i as f64, fit.center[1] + 5e-4 * j as f64];
                    let rr = fit.radius + 5e-4 * k as f64;
                    prop_assert!(best <= circle_cost(&pts, c, rr) * (1.0 + 1e-12) + 1e-18);
                }
            }
        }
    }

    #[test]
    fn hough_refinement_never_raises_the_objective(seed in any::<u64>(), arc in 1.6..TAU, r0 in 0.05..0.5f64) {
        let mut r = rng(seed);
        let mut pts = noisy_arc(&mut r, [0.0, 0.0], r0, arc, 80, 0.005);
        for _ in 0..10 {
            pts.push([r.gen_range(-0.6..0.6), r.gen_range(-0.6..0.6)]);
        }
        let params = HoughParams::default();
        let peak = hough_peak(&pts, &params).unwrap();
        let fit = hough_circle(&pts, &params).unwrap();
        let band = params.inlier_band();
        let inliers: Vec<[f64; 2]> = pts
            .iter()
            .copied()
            .filter(|p| ((p[0] - peak.center[0]).hypot(p[1] - peak.center[1]) - peak.radius).abs() <= band)
            .collect();
        prop_assert!(circle_objective(&inliers, fit.center, fit.radius) <= circle_objective(&inliers, peak.center, peak.radius));
    }

    #[test]
    fn circle_fit_is_rigidly_invariant(seed in any::<u64>(), angle in 0.0..TAU, tx in -100.0..100.0f64, ty in -100.0..100.0f64) {
        let mut r = rng(seed);
        let pts = noisy_arc(&mut r, [0.3, 0.7], 0.25, PI, 50, 0.005);
        let (s, c) = angle.sin_cos();
        let map = |p: [f64; 2]| [c * p[0] - s * p[1] + tx, s * p[0] + c * p[1] + ty];
        let moved: Vec<[f64; 2]> = pts.iter().map(|&p| map(p)).collect();
        let (a, b) = (least_squares_circle(&pts).unwrap(), least_squares_circle(&moved).unwrap());
        let expect = map(a.center);
        prop_assert!((a.radius - b.radius).abs() < 1e-9);
        prop_assert!((a.rms_residual - b.rms_residual).abs() < 1e-9);
        prop_assert!((expect[0] - b.center[0]).abs() < 1e-9 && (expect[1] - b.center[1]).abs() < 1e-9);
    }

    #[test]
    fn dbh_is_exactly_twice_the_radius_in_cm(radius in 0.01..2.0f64) {
        let d = TreeDetection::from_fit(CircleFit { center: [0.0, 0.0], radius, rms_residual: 0.0, inlier_count: 20 }, 0);
        prop_assert_eq!(d.dbh_cm, 200.0 * radius);
    }
}

/// Points on a cylinder of the given axis and radius.
fn cylinder(base: Vector3<f64>, axis: Vector3<f64>, radius: f64, length: f64, n: usize, sigma: f64, seed: u64) -> Vec<[f64; 3]> {
    let mut r = rng(seed);
    let d = axis.normalize();
    let u = d.cross(&if d.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() }).normalize();
    let v = d.cross(&u);
    (0..n)
        .map(|_| {
            let (t, a) = (r.gen_range(0.0..length), r.gen_range(0.0..TAU));
            let rr = radius + sigma * gaussian(&mut r);
            let p = base + t * d + rr * (a.cos() * u + a.sin() * v);
            [p.x, p.y, p.z]
        })
        .collect()
}

#[test]
fn tilted_exact_cylinder_is_recovered() {
    let axis = Vector3::new(0.15, -0.1, 1.0);
    let pts = cylinder(Vector3::new(3.0, 4.0, 0.0), axis, 0.21, 2.5, 400, 0.0, 11);
    let fit = fit_cylinder_points(&pts).unwrap();
    let d = Vector3::from(fit.axis_direction);
    assert!((fit.radius - 0.21).abs() < 1e-9, "radius {}", fit.radius);
    assert!(d.cross(&axis.normalize()).norm() < 1e-9);
    assert!(fit.rms_residual < 1e-9);
    // the axis passes through the base point
    let off = Vector3::new(3.0, 4.0, 0.0) - Vector3::from(fit.axis_point);
    assert!((off - off.dot(&d) * d).norm() < 1e-9);
}

#[test]
fn cylinder_fit_is_rigidly_invariant() {
    let pts = cylinder(Vector3::zeros(), Vector3::new(0.05, 0.02, 1.0), 0.18, 2.0, 300, 0.004, 5);
    let reference = fit_cylinder_points(&pts).unwrap();
    let mut r = rng(99);
    for _ in 0..100 {
        // yaw anywhere, tilt up to 10 degrees, translation up to 100 m
        let rot = Rotation3::from_axis_angle(&Vector3::z_axis(), r.gen_range(0.0..TAU))
            * Rotation3::from_axis_angle(&Vector3::x_axis(), r.gen_range(-0.17..0.17));
        let t = Vector3::new(r.gen_range(-100.0..100.0), r.gen_range(-100.0..100.0), r.gen_range(-10.0..10.0));
        let moved: Vec<[f64; 3]> = pts
            .iter()
            .map(|p| {
                let q = rot * Vector3::from(*p) + t;
                [q.x, q.y, q.z]
            })
            .collect();
        let fit = fit_cylinder_points(&moved).unwrap();
        assert!((fit.radius - reference.radius).abs() < 1e-9, "{} vs {}", fit.radius, reference.radius);
    }
}
