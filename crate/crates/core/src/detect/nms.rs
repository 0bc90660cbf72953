// SPDX-License-Identifier: Apache-2.0

use std::cmp::Ordering;

use super::circle::CircleFit;

/// Total order used to rank trunk candidates: more inliers first, then lower
/// residual, then lower `x`, then lower `y`.
pub fn candidate_order(a: &CircleFit, b: &CircleFit) -> Ordering {
    b.inlier_count
        .cmp(&a.inlier_count)
        .then(a.rms_residual.total_cmp(&b.rms_residual))
        .then(a.center[0].total_cmp(&b.center[0]))
        .then(a.center[1].total_cmp(&b.center[1]))
}

/// Greedy suppression: walk candidates in rank order and keep one only if its
/// center is farther than `radius` from every center kept so far.
pub fn non_maxima_suppression(candidates: &[CircleFit], radius: f64) -> Vec<CircleFit> {
    let mut ranked = candidates.to_vec();
    ranked.sort_by(candidate_order);
    let r2 = radius * radius;
    let mut kept: Vec<CircleFit> = Vec::new();
    for c in ranked {
        let clear = kept.iter().all(|k| {
            let (dx, dy) = (c.center[0] - k.center[0], c.center[1] - k.center[1]);
            dx * dx + dy * dy > r2
        });
        if clear {
            kept.push(c);
        }
    }
    kept
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fit(x: f64, y: f64, inliers: usize, rms: f64) -> CircleFit {
        CircleFit {
            center: [x, y],
            radius: 0.2,
            rms_residual: rms,
            inlier_count: inliers,
        }
    }

    #[test]
    fn stronger_of_two_close_candidates_survives() {
        let out = non_maxima_suppression(&[fit(0.0, 0.0, 30, 0.01), fit(0.1, 0.0, 50, 0.01)], 0.5);
        assert_eq!(out, vec![fit(0.1, 0.0, 50, 0.01)]);
    }

    #[test]
    fn distant_candidates_all_survive() {
        let input = [fit(0.0, 0.0, 30, 0.01), fit(1.0, 0.0, 20, 0.01), fit(0.0, 2.0, 25, 0.02)];
        assert_eq!(non_maxima_suppression(&input, 0.5).len(), 3);
    }

    #[test]
    fn ties_break_on_residual_then_position() {
        let out = non_maxima_suppression(&[fit(0.2, 0.0, 30, 0.02), fit(0.0, 0.0, 30, 0.01)], 0.5);
        assert_eq!(out[0].center, [0.0, 0.0]);
        let out = non_maxima_suppression(&[fit(0.2, 0.0, 30, 0.01), fit(0.0, 0.1, 30, 0.01)], 0.5);
        assert_eq!(out[0].center, [0.0, 0.1]);
    }
}
