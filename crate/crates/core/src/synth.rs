// SPDX-License-Identifier: Apache-2.0

//! Synthetic labeled forest plots with known trees.
//!
//! Ground follows `h(x, y) = A sin(2πx/λ) cos(2πy/λ)`. Trunks are vertical
//! cylinders standing on that surface; canopies are ellipsoids above the
//! trunk tops and shrubs are loose points under breast height. Every point is
//! labeled, and tree points carry their tree id and the offset to their
//! tree's centroid.

use std::f64::consts::TAU;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::cloud::{Point3, PointCloud, SemanticLabel};
use crate::error::{Error, Result};

/// Placement attempts per tree before giving up.
pub const MAX_PLACEMENT_TRIES: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_trees: usize,
    /// Plot extent `(width, height)` in meters, starting at the origin.
    pub area: (f64, f64),
    pub dbh_range: (f64, f64),
    pub min_spacing: f64,
    pub ground_amplitude: f64,
    pub ground_wavelength: f64,
    pub trunk_noise_sigma: f64,
    /// Stem points per tree.
    pub points_per_tree: usize,
    /// Shrub points per square meter.
    pub shrub_density: f64,
    pub canopy: bool,
    /// Ground points per square meter.
    pub ground_density: f64,
    pub ground_noise_sigma: f64,
    pub trunk_height: f64,
    /// Share of trees whose trunk is visible only over `occluded_arc_deg`;
    /// those trunks keep the matching share of `points_per_tree`.
    pub occluded_fraction: f64,
    pub occluded_arc_deg: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            n_trees: 50,
            area: (100.0, 100.0),
            dbh_range: (10.0, 80.0),
            min_spacing: 2.0,
            ground_amplitude: 0.5,
            ground_wavelength: 25.0,
            trunk_noise_sigma: 0.01,
            points_per_tree: 6000,
            shrub_density: 0.5,
            canopy: true,
            ground_density: 40.0,
            ground_noise_sigma: 0.005,
            trunk_height: 5.0,
            occluded_fraction: 0.0,
            occluded_arc_deg: 60.0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        let (w, h) = self.area;
        if !(w > 0.0 && h > 0.0 && w.is_finite() && h.is_finite()) {
            return bad(format!("area ({w}, {h}) must be positive"));
        }
        let (lo, hi) = self.dbh_range;
        if !(lo > 5.0 && hi < 200.0 && lo <= hi) {
            return bad(format!("dbh range ({lo}, {hi}) must lie within (5, 200) cm"));
        }
        if !(self.min_spacing > hi / 100.0) {
            return bad(format!(
                "min spacing {} m must exceed the largest trunk diameter {} m",
                self.min_spacing,
                hi / 100.0
            ));
        }
        if !(self.ground_wavelength > 0.0 && self.ground_amplitude >= 0.0) {
            return bad("ground wavelength must be positive and amplitude non-negative".into());
        }
        let non_negative = [
            ("trunk noise", self.trunk_noise_sigma),
            ("ground noise", self.ground_noise_sigma),
            ("shrub density", self.shrub_density),
            ("ground density", self.ground_density),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be non-negative, got {v}"));
            }
        }
        if !(self.trunk_height > 0.0) {
            return bad("trunk height must be positive".into());
        }
        if self.n_trees > 0 && self.points_per_tree == 0 {
            return bad("points per tree must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.occluded_fraction) || !(self.occluded_arc_deg > 0.0 && self.occluded_arc_deg <= 360.0)
        {
            return bad("occluded fraction must lie in [0, 1] and the arc in (0, 360] degrees".into());
        }
        Ok(())
    }

    pub fn ground_height(&self, x: f64, y: f64) -> f64 {
        let k = TAU / self.ground_wavelength;
        self.ground_amplitude * (k * x).sin() * (k * y).cos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthTree {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub dbh_cm: f64,
    /// Trunk visible only over a partial arc.
    pub occluded: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointTruth {
    pub semantic: SemanticLabel,
    pub instance: Option<u32>,
    /// From the point to its tree's centroid; `None` off trees.
    pub offset: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthTruth {
    pub trees: Vec<SynthTree>,
    pub points: Vec<PointTruth>,
    pub ground_amplitude: f64,
    pub ground_wavelength: f64,
}

impl SynthTruth {
    pub fn ground_height(&self, x: f64, y: f64) -> f64 {
        let k = TAU / self.ground_wavelength;
        self.ground_amplitude * (k * x).sin() * (k * y).cos()
    }

    /// Offsets of the tree points, in point order, with their indices.
    pub fn tree_offsets(&self) -> (Vec<usize>, Vec<[f64; 3]>) {
        self.points
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.offset.map(|o| (i, o)))
            .unzip()
    }

    /// Writes the trees as a `plot_id,tree_id,x,y,dbh_cm` table.
    pub fn write_tree_table<W: Write>(&self, plot_id: &str, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        w.write_record(["plot_id", "tree_id", "x", "y", "dbh_cm"])?;
        for t in &self.trees {
            w.write_record([
                plot_id.to_string(),
                t.id.to_string(),
                t.x.to_string(),
                t.y.to_string(),
                t.dbh_cm.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn place_trees(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Result<Vec<[f64; 2]>> {
    let (w, h) = cfg.area;
    let s2 = cfg.min_spacing * cfg.min_spacing;
    let mut placed: Vec<[f64; 2]> = Vec::with_capacity(cfg.n_trees);
    for _ in 0..cfg.n_trees {
        let mut ok = false;
        for _ in 0..MAX_PLACEMENT_TRIES {
            let c = [rng.gen_range(0.0..w), rng.gen_range(0.0..h)];
            let clear = placed.iter().all(|p| {
                let (dx, dy) = (p[0] - c[0], p[1] - c[1]);
                dx * dx + dy * dy >= s2
            });
            if clear {
                placed.push(c);
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::PlacementFailure {
                placed: placed.len(),
                requested: cfg.n_trees,
            });
        }
    }
    Ok(placed)
}

/// Generates a labeled plot. The same configuration always yields the same
/// points in the same order.
pub fn synth_forest(cfg: &SynthConfig) -> Result<(PointCloud, SynthTruth)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (w, h) = cfg.area;
    let centers = place_trees(cfg, &mut rng)?;

    let n_occluded = (cfg.occluded_fraction * centers.len() as f64).round() as usize;
    let mut occluded = vec![false; centers.len()];
    for i in rand::seq::index::sample(&mut rng, centers.len(), n_occluded) {
        occluded[i] = true;
    }
    let mut trees = Vec::with_capacity(centers.len());
    for (k, c) in centers.iter().enumerate() {
        let dbh_cm = if cfg.dbh_range.0 == cfg.dbh_range.1 {
            cfg.dbh_range.0
        } else {
            rng.gen_range(cfg.dbh_range.0..cfg.dbh_range.1)
        };
        trees.push(SynthTree {
            id: k as u32 + 1,
            x: c[0],
            y: c[1],
            dbh_cm,
            occluded: occluded[k],
        });
    }

    let mut points: Vec<Point3> = Vec::new();
    let mut labels: Vec<PointTruth> = Vec::new();
    let mut push = |p: Point3, semantic: SemanticLabel, instance: Option<u32>| {
        points.push(Point3 {
            semantic: Some(semantic),
            instance,
            ..p
        });
        labels.push(PointTruth {
            semantic,
            instance,
            offset: None,
        });
    };

    let ground_noise = Normal::new(0.0, cfg.ground_noise_sigma).expect("finite sigma");
    let n_ground = (cfg.ground_density * w * h).round() as usize;
    for _ in 0..n_ground {
        let (x, y) = (rng.gen_range(0.0..w), rng.gen_range(0.0..h));
        let z = cfg.ground_height(x, y) + ground_noise.sample(&mut rng);
        push(Point3::new(x, y, z), SemanticLabel::Ground, None);
    }

    let n_shrub = (cfg.shrub_density * w * h).round() as usize;
    for _ in 0..n_shrub {
        let (x, y) = (rng.gen_range(0.0..w), rng.gen_range(0.0..h));
        let z = cfg.ground_height(x, y) + rng.gen_range(0.2..0.8);
        push(Point3::new(x, y, z), SemanticLabel::Shrub, None);
    }

    let radial = Normal::new(0.0, cfg.trunk_noise_sigma).expect("finite sigma");
    for t in &trees {
        let r = t.dbh_cm / 200.0;
        let foot = cfg.ground_height(t.x, t.y);
        // hidden parts of an occluded trunk return no points
        let (arc_start, arc, n_stem) = if t.occluded {
            let visible = cfg.occluded_arc_deg / 360.0;
            let n = (cfg.points_per_tree as f64 * visible).round() as usize;
            (rng.gen_range(0.0..TAU), cfg.occluded_arc_deg.to_radians(), n)
        } else {
            (0.0, TAU, cfg.points_per_tree)
        };
        for _ in 0..n_stem {
            let a = arc_start + rng.gen_range(0.0..arc);
            let rr = r + radial.sample(&mut rng);
            let z = foot + rng.gen_range(0.0..cfg.trunk_height);
            push(Point3::new(t.x + rr * a.cos(), t.y + rr * a.sin(), z), SemanticLabel::Stem, Some(t.id));
        }
        if cfg.canopy {
            let (rx, rz) = (rng.gen_range(1.0..2.5), rng.gen_range(1.0..2.0));
            let cz = foot + cfg.trunk_height + rz;
            let mut made = 0;
            while made < cfg.points_per_tree / 2 {
                let u = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                if u[0] * u[0] + u[1] * u[1] + u[2] * u[2] > 1.0 {
                    continue;
                }
                let p = Point3::new(t.x + rx * u[0], t.y + rx * u[1], cz + rz * u[2]);
                push(p, SemanticLabel::Canopy, Some(t.id));
                made += 1;
            }
        }
    }

    // offsets to each tree's centroid
    let mut sums = vec![([0.0f64; 3], 0usize); trees.len()];
    for (p, l) in points.iter().zip(&labels) {
        if let Some(id) = l.instance {
            let s = &mut sums[id as usize - 1];
            s.0[0] += p.x;
            s.0[1] += p.y;
            s.0[2] += p.z;
            s.1 += 1;
        }
    }
    for (p, l) in points.iter().zip(labels.iter_mut()) {
        if let Some(id) = l.instance {
            let (s, n) = sums[id as usize - 1];
            let n = n as f64;
            l.offset = Some([s[0] / n - p.x, s[1] / n - p.y, s[2] / n - p.z]);
        }
    }

    let truth = SynthTruth {
        trees,
        points: labels,
        ground_amplitude: cfg.ground_amplitude,
        ground_wavelength: cfg.ground_wavelength,
    };
    Ok((PointCloud::new(points, "synth"), truth))
}
