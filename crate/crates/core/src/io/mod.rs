// SPDX-License-Identifier: Apache-2.0

//! Point-cloud readers and writers.
//!
//! Two containers are supported: PLY (ASCII or binary little-endian) and a
//! plain comma-separated text format. Both carry `x, y, z` as 64-bit floats
//! plus optional `intensity`, `semantic` and `instance` columns. The exact
//! byte layouts are documented in `docs/formats.md`.

mod csv_cloud;
mod ply;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::cloud::{PointCloud, SemanticLabel};
use crate::error::{Error, Result};

pub use csv_cloud::{read_csv, write_csv};
pub use ply::{read_ply, write_ply, PlyEncoding};

/// On-disk point-cloud format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    PlyAscii,
    PlyBinaryLe,
    Csv,
}

impl Format {
    /// Guesses the format from a file extension. PLY files default to the
    /// binary encoding for writing; reading honors whatever the header says.
    pub fn from_path(path: &Path) -> Option<Format> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "ply" => Some(Format::PlyBinaryLe),
            "csv" => Some(Format::Csv),
            _ => None,
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ply-ascii" => Ok(Format::PlyAscii),
            "ply-binary-le" => Ok(Format::PlyBinaryLe),
            "csv" => Ok(Format::Csv),
            other => Err(Error::InvalidConfig(format!("unknown point format '{other}'"))),
        }
    }
}

/// Reads a point cloud. For either PLY variant the encoding declared in the
/// file header is used.
pub fn read_point_cloud(path: impl AsRef<Path>, format: Format) -> Result<PointCloud> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    match format {
        Format::PlyAscii | Format::PlyBinaryLe => read_ply(reader),
        Format::Csv => read_csv(reader),
    }
}

pub fn write_point_cloud(cloud: &PointCloud, path: impl AsRef<Path>, format: Format) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    match format {
        Format::PlyAscii => write_ply(cloud, &mut writer, PlyEncoding::Ascii),
        Format::PlyBinaryLe => write_ply(cloud, &mut writer, PlyEncoding::BinaryLittleEndian),
        Format::Csv => write_csv(cloud, &mut writer),
    }?;
    writer.flush().map_err(|e| Error::io(path, e))
}

/// Semantic code written for points without a label.
pub(crate) const SEMANTIC_ABSENT: u8 = 255;

/// Decodes the raw semantic/instance pair of point `index`.
pub(crate) fn decode_labels(
    index: usize,
    semantic: Option<f64>,
    instance: Option<f64>,
) -> Result<(Option<SemanticLabel>, Option<u32>)> {
    let semantic = match semantic {
        None => None,
        Some(v) => {
            let code = integral(index, v, "semantic")?;
            if code == SEMANTIC_ABSENT as u64 {
                None
            } else {
                Some(SemanticLabel::from_code(code).ok_or(Error::UnknownLabelCode { index, code })?)
            }
        }
    };
    let instance = match instance {
        None => None,
        Some(v) => {
            let id = integral(index, v, "instance")?;
            let id = u32::try_from(id).map_err(|_| Error::MalformedRecord {
                index,
                reason: format!("instance id {id} exceeds 32 bits"),
            })?;
            (id != 0).then_some(id)
        }
    };
    if let Some(instance) = instance {
        if !semantic.is_some_and(SemanticLabel::is_tree) {
            return Err(Error::InstanceOnNonTreePoint { index, instance });
        }
    }
    Ok((semantic, instance))
}

fn integral(index: usize, v: f64, what: &str) -> Result<u64> {
    if v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64 {
        Ok(v as u64)
    } else {
        Err(Error::MalformedRecord {
            index,
            reason: format!("{what} value {v} is not a non-negative integer"),
        })
    }
}

/// Optional intensity: NaN in a file means "absent".
pub(crate) fn decode_intensity(v: Option<f64>) -> Option<f64> {
    v.filter(|x| !x.is_nan())
}
