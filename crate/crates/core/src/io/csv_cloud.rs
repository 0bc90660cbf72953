// SPDX-License-Identifier: Apache-2.0

//! Comma-separated point format: a header row `x,y,z[,intensity][,semantic][,instance]`
//! followed by one row per point. Coordinates use the shortest decimal form
//! that parses back to the identical 64-bit float. Absent optional values are
//! empty fields.

use std::io::{Read, Write};

use crate::cloud::{Point3, PointCloud};
use crate::error::{Error, Result};

use super::{decode_intensity, decode_labels};

pub fn read_csv<R: Read>(reader: R) -> Result<PointCloud> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::MalformedHeader(e.to_string()))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (x, y, z) = match (col("x"), col("y"), col("z")) {
        (Some(x), Some(y), Some(z)) => (x, y, z),
        _ => return Err(Error::MalformedHeader("csv header must name x, y and z".into())),
    };
    let (ci, cs, cn) = (col("intensity"), col("semantic"), col("instance"));

    let mut points = Vec::new();
    for (index, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::MalformedRecord {
            index,
            reason: e.to_string(),
        })?;
        let field = |c: usize| -> Result<Option<f64>> {
            match record.get(c) {
                None | Some("") => Ok(None),
                Some(s) => s.parse::<f64>().map(Some).map_err(|_| Error::MalformedRecord {
                    index,
                    reason: format!("cannot parse '{s}' as a number"),
                }),
            }
        };
        let required = |c: usize| -> Result<f64> {
            field(c)?.ok_or_else(|| Error::MalformedRecord {
                index,
                reason: "missing coordinate".into(),
            })
        };
        let (px, py, pz) = (required(x)?, required(y)?, required(z)?);
        if !(px.is_finite() && py.is_finite() && pz.is_finite()) {
            return Err(Error::NonFiniteCoordinate { index });
        }
        let optional = |c: Option<usize>| -> Result<Option<f64>> { c.map_or(Ok(None), field) };
        let (semantic, instance) = decode_labels(index, optional(cs)?, optional(cn)?)?;
        points.push(Point3 {
            x: px,
            y: py,
            z: pz,
            intensity: decode_intensity(optional(ci)?),
            semantic,
            instance,
        });
    }
    Ok(PointCloud::new(points, ""))
}

pub fn write_csv<W: Write>(cloud: &PointCloud, w: &mut W) -> Result<()> {
    let with_intensity = cloud.has_intensity();
    let with_semantic = cloud.has_semantic();
    let with_instance = cloud.has_instance();

    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w);
    let mut header = vec!["x", "y", "z"];
    if with_intensity {
        header.push("intensity");
    }
    if with_semantic {
        header.push("semantic");
    }
    if with_instance {
        header.push("instance");
    }
    wtr.write_record(&header)?;

    let mut row: Vec<String> = Vec::with_capacity(header.len());
    for p in &cloud.points {
        row.clear();
        row.extend([p.x.to_string(), p.y.to_string(), p.z.to_string()]);
        if with_intensity {
            row.push(p.intensity.map(|v| v.to_string()).unwrap_or_default());
        }
        if with_semantic {
            row.push(p.semantic.map(|s| s.code().to_string()).unwrap_or_default());
        }
        if with_instance {
            row.push(p.instance.map(|v| v.to_string()).unwrap_or_default());
        }
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::SemanticLabel;

    #[test]
    fn header_only_for_empty_cloud() {
        let mut out = Vec::new();
        write_csv(&PointCloud::default(), &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "x,y,z\n");
    }

    #[test]
    fn columns_by_name_and_empty_optional_fields() {
        let text = "semantic,z,y,x,extra,instance\n2,3,2,1,foo,5\n,0.5,0,0,bar,\n";
        let cloud = read_csv(text.as_bytes()).unwrap();
        assert_eq!(cloud.points[0].xyz(), [1.0, 2.0, 3.0]);
        assert_eq!(cloud.points[0].semantic, Some(SemanticLabel::Stem));
        assert_eq!(cloud.points[0].instance, Some(5));
        assert_eq!(cloud.points[1].semantic, None);
    }

    #[test]
    fn nan_row_is_rejected_with_index() {
        let text = "x,y,z\n0,0,0\n0,0,0\n1,NaN,2\n";
        assert!(matches!(
            read_csv(text.as_bytes()),
            Err(Error::NonFiniteCoordinate { index: 2 })
        ));
    }

    #[test]
    fn missing_axis_is_malformed_header() {
        assert!(matches!(
            read_csv("x,y,intensity\n1,2,3\n".as_bytes()),
            Err(Error::MalformedHeader(_))
        ));
    }

    #[test]
    fn mixed_optional_fields_round_trip() {
        let mut a = Point3::labeled(0.1, 0.2, 0.3, SemanticLabel::Stem, Some(1));
        a.intensity = Some(17.25);
        let b = Point3::new(1e-300, -2.5e17, 1.0 / 3.0);
        let cloud = PointCloud::new(vec![a, b], "");
        let mut out = Vec::new();
        write_csv(&cloud, &mut out).unwrap();
        assert_eq!(read_csv(out.as_slice()).unwrap(), cloud);
    }
}
