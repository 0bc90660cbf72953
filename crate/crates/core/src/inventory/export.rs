// SPDX-License-Identifier: Apache-2.0

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ForestInventory, TreeInstance};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 8] = [
    "tree_id",
    "x",
    "y",
    "dbh_cm",
    "observations",
    "rms_residual_cm",
    "first_seen",
    "last_seen",
];

const METERS_DP: usize = 6;
const CM_DP: usize = 2;

fn fixed(v: f64, dp: usize) -> String {
    let s = format!("{v:.dp$}");
    // avoid "-0.00" for values that round to zero
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// The value a reader of the fixed-point column gets back.
fn rounded(v: f64, dp: usize) -> f64 {
    fixed(v, dp).parse().expect("formatted float parses")
}

/// Writes the inventory table: one row per tree in id order, meters with six
/// decimals and centimeters with two.
pub fn export_csv<W: Write>(inventory: &ForestInventory, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for t in inventory.trees.values() {
        w.write_record([
            t.tree_id.to_string(),
            fixed(t.position[0], METERS_DP),
            fixed(t.position[1], METERS_DP),
            fixed(t.dbh_cm, CM_DP),
            t.observations.to_string(),
            fixed(t.rms_residual_cm, CM_DP),
            t.first_seen.to_string(),
            t.last_seen.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a table written by [`export_csv`]. Plot, CRS and fingerprint are
/// left empty; they live in the sidecar metadata.
pub fn import_csv<R: Read>(reader: R) -> Result<ForestInventory> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::MalformedHeader(format!(
            "expected inventory header {}, got {}",
            CSV_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut inventory = ForestInventory::default();
    for (index, record) in r.records().enumerate() {
        let record = record?;
        let bad = |reason: String| Error::MalformedRecord { index, reason };
        let field = |k: usize| record.get(k).ok_or_else(|| bad(format!("missing column {}", CSV_HEADER[k])));
        let float = |k: usize| -> Result<f64> {
            let v: f64 = field(k)?
                .parse()
                .map_err(|e| bad(format!("{}: {e}", CSV_HEADER[k])))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(bad(format!("{} is not finite", CSV_HEADER[k])))
            }
        };
        let int = |k: usize| -> Result<u64> {
            field(k)?
                .parse()
                .map_err(|e| bad(format!("{}: {e}", CSV_HEADER[k])))
        };
        let tree_id = u32::try_from(int(0)?).map_err(|e| bad(e.to_string()))?;
        if tree_id == 0 || inventory.trees.contains_key(&tree_id) {
            return Err(bad(format!("tree id {tree_id} is zero or repeated")));
        }
        let observations = u32::try_from(int(4)?).map_err(|e| bad(e.to_string()))?;
        if observations == 0 {
            return Err(bad("observations must be at least 1".into()));
        }
        let tree = TreeInstance::from_summary(
            tree_id,
            [float(1)?, float(2)?],
            float(3)?,
            observations,
            float(5)?,
            int(6)? as usize,
            int(7)? as usize,
        );
        inventory.trees.insert(tree_id, tree);
    }
    Ok(inventory)
}

#[derive(Serialize)]
struct FeatureCollection {
    #[serde(rename = "type")]
    kind: &'static str,
    features: Vec<Feature>,
}

#[derive(Serialize)]
struct Feature {
    #[serde(rename = "type")]
    kind: &'static str,
    geometry: Geometry,
    properties: Properties,
}

#[derive(Serialize)]
struct Geometry {
    #[serde(rename = "type")]
    kind: &'static str,
    coordinates: [f64; 2],
}

#[derive(Serialize)]
struct Properties {
    tree_id: u32,
    x: f64,
    y: f64,
    dbh_cm: f64,
    observations: u32,
    rms_residual_cm: f64,
    first_seen: usize,
    last_seen: usize,
}

/// Writes a compact GeoJSON FeatureCollection with one Point per tree. The
/// numbers carry the same rounding as the CSV columns.
pub fn export_geojson<W: Write>(inventory: &ForestInventory, mut writer: W) -> Result<()> {
    let features = inventory
        .trees
        .values()
        .map(|t| {
            let (x, y) = (rounded(t.position[0], METERS_DP), rounded(t.position[1], METERS_DP));
            Feature {
                kind: "Feature",
                geometry: Geometry {
                    kind: "Point",
                    coordinates: [x, y],
                },
                properties: Properties {
                    tree_id: t.tree_id,
                    x,
                    y,
                    dbh_cm: rounded(t.dbh_cm, CM_DP),
                    observations: t.observations,
                    rms_residual_cm: rounded(t.rms_residual_cm, CM_DP),
                    first_seen: t.first_seen,
                    last_seen: t.last_seen,
                },
            }
        })
        .collect();
    let fc = FeatureCollection {
        kind: "FeatureCollection",
        features,
    };
    serde_json::to_writer(&mut writer, &fc)?;
    writer.flush()?;
    Ok(())
}

/// Sidecar describing an exported inventory table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InventoryMeta {
    pub plot_id: String,
    pub crs: String,
    pub config_fingerprint: String,
    pub tree_count: usize,
    /// Trees whose DBH observations have a standard deviation above 3 cm.
    pub high_variance_tree_ids: Vec<u32>,
}

impl InventoryMeta {
    pub fn of(inventory: &ForestInventory) -> Self {
        InventoryMeta {
            plot_id: inventory.plot_id.clone(),
            crs: inventory.crs.clone(),
            config_fingerprint: inventory.config_fingerprint.clone(),
            tree_count: inventory.len(),
            high_variance_tree_ids: inventory.high_variance_ids(),
        }
    }
}

pub const CSV_FILE: &str = "inventory.csv";
pub const GEOJSON_FILE: &str = "inventory.geojson";
pub const META_FILE: &str = "inventory.meta.json";

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Writes `inventory.csv`, `inventory.geojson` and `inventory.meta.json`
/// into `dir`, creating it if needed.
pub fn write_inventory(inventory: &ForestInventory, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    export_csv(inventory, create(&dir.join(CSV_FILE))?)?;
    export_geojson(inventory, create(&dir.join(GEOJSON_FILE))?)?;
    let mut meta = create(&dir.join(META_FILE))?;
    serde_json::to_writer_pretty(&mut meta, &InventoryMeta::of(inventory))?;
    meta.write_all(b"\n")?;
    meta.flush()?;
    Ok(())
}

/// Reads an inventory table, picking up the sidecar metadata next to it when
/// present. `path` may be the CSV file or the directory holding it.
pub fn read_inventory(path: &Path) -> Result<ForestInventory> {
    let csv_path = if path.is_dir() { path.join(CSV_FILE) } else { path.to_path_buf() };
    let file = File::open(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    let mut inventory = import_csv(std::io::BufReader::new(file))?;
    let meta_path = csv_path.with_file_name(META_FILE);
    if meta_path.is_file() {
        let text = std::fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
        let meta: InventoryMeta = serde_json::from_str(&text)?;
        inventory.plot_id = meta.plot_id;
        inventory.crs = meta.crs;
        inventory.config_fingerprint = meta.config_fingerprint;
    }
    Ok(inventory)
}
