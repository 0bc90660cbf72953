// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// NODATA marker used by the ESRI ASCII grid export.
pub const ESRI_NODATA: f64 = -9999.0;

/// 2.5D height raster with an explicit no-data state per cell.
///
/// Cell `(col, row)` covers `x` in `(ox + col*res, ox + (col+1)*res]` and the
/// same for `y`; the first column and row also own their left/bottom edge.
/// A coordinate exactly on a shared edge therefore belongs to the
/// lower-index cell. Heights are stored row-major with row 0 at the minimum `y`.
#[derive(Debug, Clone)]
pub struct DigitalTerrainModel {
    origin: [f64; 2],
    resolution: f64,
    width: usize,
    height: usize,
    heights: Vec<f64>,
}

impl PartialEq for DigitalTerrainModel {
    fn eq(&self, other: &Self) -> bool {
        self.origin == other.origin
            && self.resolution == other.resolution
            && self.width == other.width
            && self.height == other.height
            && self
                .heights
                .iter()
                .zip(&other.heights)
                .all(|(a, b)| a == b || (a.is_nan() && b.is_nan()))
    }
}

impl DigitalTerrainModel {
    /// An all-no-data grid.
    pub fn new(origin: [f64; 2], resolution: f64, width: usize, height: usize) -> Result<Self> {
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(Error::InvalidConfig(format!("grid resolution must be positive, got {resolution}")));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidConfig("grid must have at least one cell".into()));
        }
        Ok(DigitalTerrainModel {
            origin,
            resolution,
            width,
            height,
            heights: vec![f64::NAN; width * height],
        })
    }

    /// Smallest grid with lower-left corner `min` that contains `max`.
    pub fn covering(min: [f64; 2], max: [f64; 2], resolution: f64) -> Result<Self> {
        let mut grid = DigitalTerrainModel::new(min, resolution, 1, 1)?;
        grid.width = grid.axis_index(max[0] - min[0]) + 1;
        grid.height = grid.axis_index(max[1] - min[1]) + 1;
        grid.heights = vec![f64::NAN; grid.width * grid.height];
        Ok(grid)
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    fn axis_index(&self, offset: f64) -> usize {
        let t = offset / self.resolution;
        if t <= 0.0 {
            0
        } else {
            (t.ceil() as usize).saturating_sub(1)
        }
    }

    /// Cell owning `(x, y)`, or `None` outside the grid.
    pub fn cell_of(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let (dx, dy) = (x - self.origin[0], y - self.origin[1]);
        if !(dx >= 0.0 && dy >= 0.0) {
            return None;
        }
        let (col, row) = (self.axis_index(dx), self.axis_index(dy));
        (col < self.width && row < self.height).then_some((col, row))
    }

    pub fn cell_center(&self, col: usize, row: usize) -> [f64; 2] {
        [
            self.origin[0] + (col as f64 + 0.5) * self.resolution,
            self.origin[1] + (row as f64 + 0.5) * self.resolution,
        ]
    }

    pub fn get(&self, col: usize, row: usize) -> Option<f64> {
        let h = self.heights[row * self.width + col];
        (!h.is_nan()).then_some(h)
    }

    /// Sets a cell height; `None` marks it as no-data. Non-finite heights are
    /// stored as no-data.
    pub fn set(&mut self, col: usize, row: usize, h: Option<f64>) {
        self.heights[row * self.width + col] = h.filter(|v| v.is_finite()).unwrap_or(f64::NAN);
    }

    pub(crate) fn raw(&self) -> &[f64] {
        &self.heights
    }

    pub(crate) fn raw_mut(&mut self) -> &mut [f64] {
        &mut self.heights
    }

    pub fn data_cells(&self) -> usize {
        self.heights.iter().filter(|h| !h.is_nan()).count()
    }

    /// Height at `(x, y)` by bilinear interpolation between cell centers.
    ///
    /// Corners without data are dropped and the remaining weights
    /// renormalized. Returns `None` outside the grid or when no contributing
    /// corner has data.
    pub fn height_at(&self, x: f64, y: f64) -> Option<f64> {
        let (dx, dy) = (x - self.origin[0], y - self.origin[1]);
        let (ext_x, ext_y) = (self.width as f64 * self.resolution, self.height as f64 * self.resolution);
        if !(dx >= 0.0 && dy >= 0.0 && dx <= ext_x && dy <= ext_y) {
            return None;
        }
        let (c0, fx) = Self::lerp_axis(dx / self.resolution - 0.5, self.width);
        let (r0, fy) = Self::lerp_axis(dy / self.resolution - 0.5, self.height);
        let corners = [
            (c0, r0, (1.0 - fx) * (1.0 - fy)),
            (c0 + 1, r0, fx * (1.0 - fy)),
            (c0, r0 + 1, (1.0 - fx) * fy),
            (c0 + 1, r0 + 1, fx * fy),
        ];
        let mut first: Option<f64> = None;
        let mut all_equal = true;
        let (mut sum, mut weight) = (0.0, 0.0);
        for (c, r, w) in corners {
            if w <= 0.0 || c >= self.width || r >= self.height {
                continue;
            }
            if let Some(h) = self.get(c, r) {
                match first {
                    None => first = Some(h),
                    Some(f) if f != h => all_equal = false,
                    _ => {}
                }
                sum += w * h;
                weight += w;
            }
        }
        match first {
            None => None,
            Some(h) if all_equal => Some(h),
            Some(_) => Some(sum / weight),
        }
    }

    /// Splits a continuous cell coordinate into a base index and fraction,
    /// clamping to the outermost cell centers.
    fn lerp_axis(u: f64, n: usize) -> (usize, f64) {
        if u <= 0.0 {
            (0, 0.0)
        } else if u >= (n - 1) as f64 {
            (n - 1, 0.0)
        } else {
            let base = u.floor();
            (base as usize, u - base)
        }
    }

    /// Resamples onto a grid of `resolution` covering the same extent, taking
    /// each target cell's height from `height_at` its center.
    pub fn resample(&self, resolution: f64) -> Result<Self> {
        let max = [
            self.origin[0] + self.width as f64 * self.resolution,
            self.origin[1] + self.height as f64 * self.resolution,
        ];
        let mut out = DigitalTerrainModel::covering(self.origin, max, resolution)?;
        for row in 0..out.height {
            for col in 0..out.width {
                let [cx, cy] = out.cell_center(col, row);
                out.set(col, row, self.height_at(cx, cy));
            }
        }
        Ok(out)
    }

    /// Merges several grids onto one raster of `resolution` spanning all of
    /// them. Each cell takes the first grid, in slice order, that has a
    /// height at its center.
    pub fn mosaic(grids: &[&DigitalTerrainModel], resolution: f64) -> Result<Self> {
        let first = grids
            .first()
            .ok_or_else(|| Error::InvalidConfig("cannot mosaic zero terrain grids".into()))?;
        let (mut min, mut max) = (first.origin, [f64::NEG_INFINITY; 2]);
        for g in grids {
            min = [min[0].min(g.origin[0]), min[1].min(g.origin[1])];
            max = [
                max[0].max(g.origin[0] + g.width as f64 * g.resolution),
                max[1].max(g.origin[1] + g.height as f64 * g.resolution),
            ];
        }
        let mut out = DigitalTerrainModel::covering(min, max, resolution)?;
        for row in 0..out.height {
            for col in 0..out.width {
                let [cx, cy] = out.cell_center(col, row);
                out.set(col, row, grids.iter().find_map(|g| g.height_at(cx, cy)));
            }
        }
        Ok(out)
    }

    /// Writes the classic ESRI ASCII grid: six header lines, then rows from
    /// north (max `y`) to south, space separated.
    pub fn write_esri_ascii<W: Write>(&self, w: &mut W) -> Result<()> {
        let mut text = String::new();
        writeln!(text, "ncols {}", self.width).unwrap();
        writeln!(text, "nrows {}", self.height).unwrap();
        writeln!(text, "xllcorner {}", self.origin[0]).unwrap();
        writeln!(text, "yllcorner {}", self.origin[1]).unwrap();
        writeln!(text, "cellsize {}", self.resolution).unwrap();
        writeln!(text, "NODATA_value {ESRI_NODATA}").unwrap();
        for row in (0..self.height).rev() {
            for col in 0..self.width {
                if col > 0 {
                    text.push(' ');
                }
                write!(text, "{}", self.get(col, row).unwrap_or(ESRI_NODATA)).unwrap();
            }
            text.push('\n');
        }
        w.write_all(text.as_bytes())?;
        Ok(())
    }

    pub fn read_esri_ascii<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let mut header = |key: &str| -> Result<String> {
            let line = lines
                .next()
                .ok_or_else(|| Error::MalformedHeader(format!("missing '{key}'")))??;
            let mut parts = line.split_whitespace();
            match (parts.next(), parts.next()) {
                (Some(k), Some(v)) if k.eq_ignore_ascii_case(key) => Ok(v.to_string()),
                _ => Err(Error::MalformedHeader(format!("expected '{key}', found '{line}'"))),
            }
        };
        let num = |s: String| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::MalformedHeader(format!("bad number '{s}'")))
        };
        let ncols = num(header("ncols")?)? as usize;
        let nrows = num(header("nrows")?)? as usize;
        let xll = num(header("xllcorner")?)?;
        let yll = num(header("yllcorner")?)?;
        let cellsize = num(header("cellsize")?)?;
        let nodata = num(header("NODATA_value")?)?;
        let mut grid = DigitalTerrainModel::new([xll, yll], cellsize, ncols, nrows)?;
        let mut values = Vec::with_capacity(ncols * nrows);
        for line in lines {
            for tok in line?.split_whitespace() {
                values.push(tok.parse::<f64>().map_err(|_| Error::MalformedRecord {
                    index: values.len(),
                    reason: format!("bad height '{tok}'"),
                })?);
            }
        }
        if values.len() != ncols * nrows {
            return Err(Error::MalformedRecord {
                index: values.len(),
                reason: format!("expected {} heights", ncols * nrows),
            });
        }
        for (k, v) in values.into_iter().enumerate() {
            let (row, col) = (nrows - 1 - k / ncols, k % ncols);
            grid.set(col, row, (v != nodata).then_some(v));
        }
        Ok(grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shared_edge_belongs_to_lower_cell() {
        let grid = DigitalTerrainModel::new([0.0, 0.0], 0.5, 4, 4).unwrap();
        assert_eq!(grid.cell_of(0.0, 0.0), Some((0, 0)));
        assert_eq!(grid.cell_of(0.5, 0.25), Some((0, 0)));
        assert_eq!(grid.cell_of(0.5000001, 1.0), Some((1, 1)));
        assert_eq!(grid.cell_of(2.0, 2.0), Some((3, 3)));
        assert_eq!(grid.cell_of(2.01, 0.0), None);
        assert_eq!(grid.cell_of(-0.01, 0.0), None);
    }

    #[test]
    fn covering_contains_max_corner() {
        let grid = DigitalTerrainModel::covering([1.0, 2.0], [2.0, 2.0], 0.25).unwrap();
        assert_eq!((grid.width(), grid.height()), (4, 1));
        assert_eq!(grid.cell_of(2.0, 2.0), Some((3, 0)));
    }

    #[test]
    fn mosaic_prefers_earlier_grids() {
        let mut a = DigitalTerrainModel::new([0.0, 0.0], 1.0, 2, 1).unwrap();
        a.set(0, 0, Some(1.0));
        a.set(1, 0, Some(1.0));
        let mut b = DigitalTerrainModel::new([1.0, 0.0], 1.0, 2, 1).unwrap();
        b.set(0, 0, Some(5.0));
        b.set(1, 0, Some(5.0));
        let m = DigitalTerrainModel::mosaic(&[&a, &b], 1.0).unwrap();
        assert_eq!(m.origin(), [0.0, 0.0]);
        assert_eq!(m.get(1, 0), Some(1.0));
        assert_eq!(m.get(2, 0), Some(5.0));
        assert!(DigitalTerrainModel::mosaic(&[], 1.0).is_err());
    }

    #[test]
    fn bilinear_between_centers() {
        let mut grid = DigitalTerrainModel::new([0.0, 0.0], 1.0, 2, 2).unwrap();
        grid.set(0, 0, Some(0.0));
        grid.set(1, 0, Some(1.0));
        grid.set(0, 1, Some(2.0));
        grid.set(1, 1, Some(3.0));
        assert_eq!(grid.height_at(0.5, 0.5), Some(0.0));
        assert!((grid.height_at(1.0, 1.0).unwrap() - 1.5).abs() < 1e-15);
        // clamped outside the outer centers
        assert_eq!(grid.height_at(0.1, 0.1), Some(0.0));
        assert_eq!(grid.height_at(2.5, 0.5), None);
    }

    #[test]
    fn missing_corners_are_renormalized() {
        let mut grid = DigitalTerrainModel::new([0.0, 0.0], 1.0, 2, 1).unwrap();
        grid.set(0, 0, Some(4.0));
        assert_eq!(grid.height_at(1.2, 0.5), Some(4.0));
        let empty = DigitalTerrainModel::new([0.0, 0.0], 1.0, 2, 1).unwrap();
        assert_eq!(empty.height_at(0.5, 0.5), None);
    }

    #[test]
    fn esri_ascii_round_trip() {
        let mut grid = DigitalTerrainModel::new([10.0, -3.5], 0.04, 3, 2).unwrap();
        grid.set(0, 0, Some(1.25));
        grid.set(2, 1, Some(-0.1));
        let mut out = Vec::new();
        grid.write_esri_ascii(&mut out).unwrap();
        let text = String::from_utf8(out.clone()).unwrap();
        assert!(text.starts_with("ncols 3\nnrows 2\nxllcorner 10\nyllcorner -3.5\ncellsize 0.04\nNODATA_value -9999\n"));
        assert!(text.ends_with("-9999 -9999 -0.1\n1.25 -9999 -9999\n"));
        assert_eq!(DigitalTerrainModel::read_esri_ascii(out.as_slice()).unwrap(), grid);
    }
}
