// SPDX-License-Identifier: Apache-2.0

//! PLY reader/writer for the `vertex` element.
//!
//! The reader understands the full scalar type set and list properties so it
//! can skip elements and properties it does not use. Big-endian bodies are
//! rejected.

use std::io::{BufRead, Read, Write};

use crate::cloud::{Point3, PointCloud};
use crate::error::{Error, Result};

use super::{decode_intensity, decode_labels, SEMANTIC_ABSENT};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyEncoding {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Scalar> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn decode_le(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::U32 => u32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::F32 => f32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar { name: String, ty: Scalar },
    List { count: Scalar, item: Scalar },
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

#[derive(Debug)]
struct Header {
    encoding: PlyEncoding,
    frame_id: String,
    elements: Vec<Element>,
}

/// Column slots of the vertex element that the reader extracts.
#[derive(Debug, Default)]
struct VertexLayout {
    x: Option<usize>,
    y: Option<usize>,
    z: Option<usize>,
    intensity: Option<usize>,
    semantic: Option<usize>,
    instance: Option<usize>,
}

const FRAME_COMMENT: &str = "frame_id ";

fn malformed(msg: impl Into<String>) -> Error {
    Error::MalformedHeader(msg.into())
}

fn read_header<R: BufRead>(reader: &mut R) -> Result<Header> {
    let mut line = String::new();
    let mut next_line = |line: &mut String| -> Result<bool> {
        line.clear();
        let n = reader.read_line(line)?;
        while line.ends_with('\n') || line.ends_with('\r') {
            line.pop();
        }
        Ok(n > 0)
    };

    if !next_line(&mut line)? || line != "ply" {
        return Err(malformed("missing 'ply' magic"));
    }
    let mut encoding = None;
    let mut frame_id = String::new();
    let mut elements: Vec<Element> = Vec::new();
    loop {
        if !next_line(&mut line)? {
            return Err(malformed("unexpected end of file before end_header"));
        }
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("end_header") => break,
            Some("format") => {
                encoding = Some(match tokens.next() {
                    Some("ascii") => PlyEncoding::Ascii,
                    Some("binary_little_endian") => PlyEncoding::BinaryLittleEndian,
                    Some(other) => return Err(malformed(format!("unsupported format '{other}'"))),
                    None => return Err(malformed("format line without encoding")),
                });
            }
            Some("comment") => {
                let rest = line.trim_start()["comment".len()..].trim_start();
                if let Some(id) = rest.strip_prefix(FRAME_COMMENT) {
                    frame_id = id.to_string();
                }
            }
            Some("obj_info") | None => {}
            Some("element") => {
                let name = tokens.next().ok_or_else(|| malformed("element without name"))?;
                let count = tokens
                    .next()
                    .and_then(|c| c.parse::<usize>().ok())
                    .ok_or_else(|| malformed(format!("element '{name}' has no valid count")))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            Some("property") => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| malformed("property before any element"))?;
                let ty = tokens.next().ok_or_else(|| malformed("property without type"))?;
                let property = if ty == "list" {
                    let count = tokens.next().and_then(Scalar::parse);
                    let item = tokens.next().and_then(Scalar::parse);
                    match (count, item, tokens.next()) {
                        (Some(count), Some(item), Some(_)) => Property::List { count, item },
                        _ => return Err(malformed(format!("bad list property: '{line}'"))),
                    }
                } else {
                    let ty = Scalar::parse(ty)
                        .ok_or_else(|| malformed(format!("unknown property type '{ty}'")))?;
                    let name = tokens.next().ok_or_else(|| malformed("property without name"))?;
                    Property::Scalar {
                        name: name.to_string(),
                        ty,
                    }
                };
                element.properties.push(property);
            }
            Some(other) => return Err(malformed(format!("unexpected header keyword '{other}'"))),
        }
    }
    let encoding = encoding.ok_or_else(|| malformed("missing format line"))?;
    Ok(Header {
        encoding,
        frame_id,
        elements,
    })
}

fn vertex_layout(element: &Element) -> Result<VertexLayout> {
    let mut layout = VertexLayout::default();
    for (slot, property) in element.properties.iter().enumerate() {
        if let Property::Scalar { name, .. } = property {
            let target = match name.as_str() {
                "x" => &mut layout.x,
                "y" => &mut layout.y,
                "z" => &mut layout.z,
                "intensity" => &mut layout.intensity,
                "semantic" => &mut layout.semantic,
                "instance" => &mut layout.instance,
                _ => continue,
            };
            *target = Some(slot);
        }
    }
    if layout.x.is_none() || layout.y.is_none() || layout.z.is_none() {
        return Err(malformed("vertex element must declare x, y and z"));
    }
    Ok(layout)
}

fn build_point(index: usize, layout: &VertexLayout, values: &[f64]) -> Result<Point3> {
    let get = |slot: Option<usize>| slot.map(|s| values[s]);
    let (x, y, z) = (values[layout.x.unwrap()], values[layout.y.unwrap()], values[layout.z.unwrap()]);
    if !(x.is_finite() && y.is_finite() && z.is_finite()) {
        return Err(Error::NonFiniteCoordinate { index });
    }
    let (semantic, instance) = decode_labels(index, get(layout.semantic), get(layout.instance))?;
    Ok(Point3 {
        x,
        y,
        z,
        intensity: decode_intensity(get(layout.intensity)),
        semantic,
        instance,
    })
}

/// Reads the vertex element of a PLY stream. Non-vertex elements and unknown
/// properties are skipped.
pub fn read_ply<R: BufRead>(mut reader: R) -> Result<PointCloud> {
    let header = read_header(&mut reader)?;
    let vertex_pos = header
        .elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| malformed("no vertex element"))?;
    let layout = vertex_layout(&header.elements[vertex_pos])?;
    let points = match header.encoding {
        PlyEncoding::Ascii => read_ascii_body(reader, &header.elements, vertex_pos, &layout)?,
        PlyEncoding::BinaryLittleEndian => {
            read_binary_body(reader, &header.elements, vertex_pos, &layout)?
        }
    };
    Ok(PointCloud {
        points,
        frame_id: header.frame_id,
    })
}

fn truncated(index: usize) -> Error {
    Error::MalformedRecord {
        index,
        reason: "unexpected end of data".into(),
    }
}

fn read_ascii_body<R: BufRead>(
    mut reader: R,
    elements: &[Element],
    vertex_pos: usize,
    layout: &VertexLayout,
) -> Result<Vec<Point3>> {
    let mut body = String::new();
    reader.read_to_string(&mut body)?;
    let mut tokens = body.split_ascii_whitespace();
    let mut points = Vec::with_capacity(elements[vertex_pos].count);
    let mut values = Vec::new();

    for (pos, element) in elements.iter().enumerate().take(vertex_pos + 1) {
        for row in 0..element.count {
            values.clear();
            for property in &element.properties {
                match property {
                    Property::Scalar { .. } => {
                        let tok = tokens.next().ok_or_else(|| truncated(row))?;
                        values.push(parse_ascii(tok, row)?);
                    }
                    Property::List { .. } => {
                        let tok = tokens.next().ok_or_else(|| truncated(row))?;
                        let n = parse_ascii(tok, row)? as usize;
                        for _ in 0..n {
                            tokens.next().ok_or_else(|| truncated(row))?;
                        }
                        values.push(f64::NAN);
                    }
                }
            }
            if pos == vertex_pos {
                points.push(build_point(row, layout, &values)?);
            }
        }
    }
    Ok(points)
}

fn parse_ascii(tok: &str, index: usize) -> Result<f64> {
    tok.parse::<f64>().map_err(|_| Error::MalformedRecord {
        index,
        reason: format!("cannot parse '{tok}' as a number"),
    })
}

fn read_binary_body<R: Read>(
    mut reader: R,
    elements: &[Element],
    vertex_pos: usize,
    layout: &VertexLayout,
) -> Result<Vec<Point3>> {
    let mut body = Vec::new();
    reader.read_to_end(&mut body)?;
    let mut offset = 0usize;
    let mut points = Vec::with_capacity(elements[vertex_pos].count);
    let mut values = Vec::new();

    for (pos, element) in elements.iter().enumerate().take(vertex_pos + 1) {
        for row in 0..element.count {
            values.clear();
            for property in &element.properties {
                match *property {
                    Property::Scalar { ty, .. } => {
                        let end = offset + ty.size();
                        let bytes = body.get(offset..end).ok_or_else(|| truncated(row))?;
                        values.push(ty.decode_le(bytes));
                        offset = end;
                    }
                    Property::List { count, item } => {
                        let end = offset + count.size();
                        let bytes = body.get(offset..end).ok_or_else(|| truncated(row))?;
                        let n = count.decode_le(bytes) as usize;
                        offset = end + n * item.size();
                        if offset > body.len() {
                            return Err(truncated(row));
                        }
                        values.push(f64::NAN);
                    }
                }
            }
            if pos == vertex_pos {
                points.push(build_point(row, layout, &values)?);
            }
        }
    }
    Ok(points)
}

/// Writes `cloud` as a single `vertex` element. Optional properties are
/// declared when at least one point carries them; points lacking a value are
/// written with the "absent" code (NaN intensity, semantic 255, instance 0).
pub fn write_ply<W: Write>(cloud: &PointCloud, w: &mut W, encoding: PlyEncoding) -> Result<()> {
    let with_intensity = cloud.has_intensity();
    let with_semantic = cloud.has_semantic();
    let with_instance = cloud.has_instance();

    let mut header = String::from("ply\n");
    header.push_str(match encoding {
        PlyEncoding::Ascii => "format ascii 1.0\n",
        PlyEncoding::BinaryLittleEndian => "format binary_little_endian 1.0\n",
    });
    if !cloud.frame_id.is_empty() {
        let id = cloud.frame_id.replace(['\n', '\r'], " ");
        header.push_str(&format!("comment {FRAME_COMMENT}{id}\n"));
    }
    header.push_str(&format!("element vertex {}\n", cloud.len()));
    header.push_str("property double x\nproperty double y\nproperty double z\n");
    if with_intensity {
        header.push_str("property double intensity\n");
    }
    if with_semantic {
        header.push_str("property uchar semantic\n");
    }
    if with_instance {
        header.push_str("property uint instance\n");
    }
    header.push_str("end_header\n");
    w.write_all(header.as_bytes())?;

    let semantic_code = |p: &Point3| p.semantic.map_or(SEMANTIC_ABSENT, |s| s.code());
    match encoding {
        PlyEncoding::Ascii => {
            let mut line = String::new();
            for p in &cloud.points {
                line.clear();
                line.push_str(&format!("{} {} {}", p.x, p.y, p.z));
                if with_intensity {
                    line.push_str(&format!(" {}", p.intensity.unwrap_or(f64::NAN)));
                }
                if with_semantic {
                    line.push_str(&format!(" {}", semantic_code(p)));
                }
                if with_instance {
                    line.push_str(&format!(" {}", p.instance.unwrap_or(0)));
                }
                line.push('\n');
                w.write_all(line.as_bytes())?;
            }
        }
        PlyEncoding::BinaryLittleEndian => {
            let mut buf = Vec::with_capacity(cloud.len() * 37);
            for p in &cloud.points {
                buf.extend_from_slice(&p.x.to_le_bytes());
                buf.extend_from_slice(&p.y.to_le_bytes());
                buf.extend_from_slice(&p.z.to_le_bytes());
                if with_intensity {
                    buf.extend_from_slice(&p.intensity.unwrap_or(f64::NAN).to_le_bytes());
                }
                if with_semantic {
                    buf.push(semantic_code(p));
                }
                if with_instance {
                    buf.extend_from_slice(&p.instance.unwrap_or(0).to_le_bytes());
                }
            }
            w.write_all(&buf)?;
        }
    }
    Ok(())
}
