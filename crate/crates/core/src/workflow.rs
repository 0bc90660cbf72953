// SPDX-License-Identifier: Apache-2.0

//! File-level workflows, one per command-line subcommand.
//!
//! Each function reads its inputs from disk, runs the library pipeline and
//! writes its outputs, so the binary only parses arguments.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;
use serde::Deserialize;

use crate::config::PipelineConfig;
use crate::detect::detect_trees_with_terrain;
use crate::error::{Error, Result};
use crate::eval::{
    dbh_report_csv, dbh_report_text, eval_dbh, pq_overall, pq_report_csv, pq_report_text, read_ground_truth,
    DbhEvalReport, FrameRole, MatchMode, PQReport, PanopticFrame,
};
use crate::inventory::{associate, read_inventory, write_inventory, ForestInventory, CSV_FILE};
use crate::io::{read_point_cloud, write_point_cloud, Format};
use crate::payload::{build_payloads, PayloadCloud, Pose, Scan, Trajectory};
use crate::synth::{synth_forest, SynthConfig, SynthTruth};
use crate::terrain::DigitalTerrainModel;

/// Trajectory file that turns an input directory into a scan stream.
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const DTM_FILE: &str = "dtm.asc";
pub const SYNTH_CLOUD_FILE: &str = "cloud.ply";
pub const SYNTH_TRUTH_FILE: &str = "truth.csv";

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn cloud_format(path: &Path) -> Result<Format> {
    Format::from_path(path)
        .ok_or_else(|| Error::InvalidConfig(format!("{}: expected a .ply or .csv point cloud", path.display())))
}

fn cloud_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && Format::from_path(&path).is_some() && path.file_name() != Some(TRAJECTORY_FILE.as_ref()) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

#[derive(Deserialize)]
struct TrajectoryRow {
    timestamp: f64,
    x: f64,
    y: f64,
    z: f64,
    qw: f64,
    qx: f64,
    qy: f64,
    qz: f64,
}

/// Reads `timestamp,x,y,z,qw,qx,qy,qz` rows.
pub fn read_trajectory(path: &Path) -> Result<Trajectory> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut samples = Vec::new();
    for (index, row) in csv::Reader::from_reader(BufReader::new(file)).deserialize::<TrajectoryRow>().enumerate() {
        let r = row.map_err(|e| Error::MalformedRecord {
            index,
            reason: e.to_string(),
        })?;
        samples.push((r.timestamp, Pose::new([r.x, r.y, r.z], [r.qw, r.qx, r.qy, r.qz])?));
    }
    Trajectory::new(samples)
}

/// Loads the payloads of an `inventory run` input.
///
/// A single cloud file is one world-frame payload. A directory holding
/// `trajectory.csv` is a scan stream: every other cloud file is a
/// sensor-frame scan whose file stem is its timestamp, and the stream is cut
/// into payloads of `window_m` meters of travel. Any other directory
/// contributes one world-frame payload per cloud file, in file-name order.
pub fn load_payloads(input: &Path, window_m: f64) -> Result<Vec<PayloadCloud>> {
    if input.is_file() {
        let cloud = read_point_cloud(input, cloud_format(input)?)?;
        return Ok(vec![PayloadCloud::from_world_cloud(0, cloud)]);
    }
    if !input.is_dir() {
        return Err(Error::io(
            input,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory"),
        ));
    }
    let files = cloud_files(input)?;
    let trajectory_path = input.join(TRAJECTORY_FILE);
    if trajectory_path.is_file() {
        let trajectory = read_trajectory(&trajectory_path)?;
        let mut scans = Vec::with_capacity(files.len());
        for path in &files {
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
            let timestamp = stem.parse::<f64>().map_err(|_| {
                Error::InvalidConfig(format!("{}: scan file names must be timestamps", path.display()))
            })?;
            scans.push(Scan {
                timestamp,
                cloud: read_point_cloud(path, cloud_format(path)?)?,
            });
        }
        scans.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
        return build_payloads(&scans, &trajectory, window_m);
    }
    if files.is_empty() {
        return Err(Error::EmptyCloud);
    }
    files
        .iter()
        .enumerate()
        .map(|(id, path)| Ok(PayloadCloud::from_world_cloud(id, read_point_cloud(path, cloud_format(path)?)?)))
        .collect()
}

/// Runs detection on every payload, associates the detections in payload
/// order and writes the inventory files plus `dtm.asc` into `out`.
pub fn run_inventory(payloads: &[PayloadCloud], config: &PipelineConfig, out: &Path) -> Result<ForestInventory> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    let results = pool.install(|| {
        payloads
            .par_iter()
            .map(|p| detect_trees_with_terrain(p, &config.detection))
            .collect::<Result<Vec<_>>>()
    })?;

    let mut inventory = ForestInventory::new(config.plot_id.clone(), config.crs.clone(), config.fingerprint());
    for (payload, result) in payloads.iter().zip(&results) {
        info!("payload {}: {} detections", payload.id, result.detections.len());
        inventory = associate(inventory, &result.detections, config.association_radius_m)?;
    }
    write_inventory(&inventory, out)?;

    let grids: Vec<&DigitalTerrainModel> = results.iter().map(|r| &r.dtm).collect();
    let dtm = DigitalTerrainModel::mosaic(&grids, config.export_resolution_m)?;
    let dtm_path = out.join(DTM_FILE);
    let mut w = create(&dtm_path)?;
    dtm.write_esri_ascii(&mut w)?;
    w.flush().map_err(|e| Error::io(&dtm_path, e))?;
    info!("{} trees written to {}", inventory.len(), out.display());
    Ok(inventory)
}

/// Generates a synthetic plot and writes the labeled cloud and tree table.
pub fn run_synth(config: &SynthConfig, plot_id: &str, format: Format, out: &Path) -> Result<SynthTruth> {
    let (cloud, truth) = synth_forest(config)?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let name = match format {
        Format::Csv => "cloud.csv",
        Format::PlyAscii | Format::PlyBinaryLe => SYNTH_CLOUD_FILE,
    };
    write_point_cloud(&cloud, out.join(name), format)?;
    let table_path = out.join(SYNTH_TRUTH_FILE);
    let mut w = create(&table_path)?;
    truth.write_tree_table(plot_id, &mut w)?;
    w.flush().map_err(|e| Error::io(&table_path, e))?;
    Ok(truth)
}

/// Report rendering chosen from the output file extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    Text,
}

impl ReportFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("csv") => ReportFormat::Csv,
            Some("json") => ReportFormat::Json,
            _ => ReportFormat::Text,
        }
    }
}

fn write_report(out: &Path, text: &str) -> Result<()> {
    let mut w = create(out)?;
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(out, e))
}

fn json(value: &impl serde::Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

/// Scores a labeled prediction cloud against a labeled reference cloud.
pub fn run_eval_pq(pred: &Path, gt: &Path, out: &Path) -> Result<PQReport> {
    let pred = PanopticFrame::new(read_point_cloud(pred, cloud_format(pred)?)?, FrameRole::Prediction)?;
    let gt = PanopticFrame::new(read_point_cloud(gt, cloud_format(gt)?)?, FrameRole::GroundTruth)?;
    let report = pq_overall(&pred, &gt)?;
    let text = match ReportFormat::from_path(out) {
        ReportFormat::Csv => pq_report_csv(&report),
        ReportFormat::Json => json(&report)?,
        ReportFormat::Text => pq_report_text(&report),
    };
    write_report(out, &text)?;
    Ok(report)
}

/// Loads the inventories below `pred`, keyed by plot.
///
/// `pred` is either one inventory directory or a directory of them. A plot
/// is named by its sidecar metadata, or by its directory name when the
/// sidecar is missing.
pub fn load_inventories(pred: &Path) -> Result<BTreeMap<String, ForestInventory>> {
    let dirs: Vec<PathBuf> = if pred.join(CSV_FILE).is_file() {
        vec![pred.to_path_buf()]
    } else {
        let mut dirs = Vec::new();
        for entry in std::fs::read_dir(pred).map_err(|e| Error::io(pred, e))? {
            let path = entry.map_err(|e| Error::io(pred, e))?.path();
            if path.join(CSV_FILE).is_file() {
                dirs.push(path);
            }
        }
        dirs.sort();
        dirs
    };
    if dirs.is_empty() {
        return Err(Error::InvalidConfig(format!("no {CSV_FILE} found under {}", pred.display())));
    }
    let mut out = BTreeMap::new();
    for dir in dirs {
        let mut inv = read_inventory(&dir)?;
        if inv.plot_id.is_empty() {
            inv.plot_id = dir
                .canonicalize()
                .map_err(|e| Error::io(&dir, e))?
                .file_name()
                .and_then(|n| n.to_str())
                .unwrap_or_default()
                .to_string();
        }
        let plot = inv.plot_id.clone();
        if out.insert(plot.clone(), inv).is_some() {
            return Err(Error::InvalidConfig(format!("two inventories claim plot '{plot}'")));
        }
    }
    Ok(out)
}

/// Scores inventories against a surveyed tree table.
pub fn run_eval_dbh(pred: &Path, gt: &Path, radius: f64, mode: MatchMode, out: &Path) -> Result<DbhEvalReport> {
    let predictions = load_inventories(pred)?;
    let file = File::open(gt).map_err(|e| Error::io(gt, e))?;
    let truth = read_ground_truth(BufReader::new(file))?;
    let report = eval_dbh(&predictions, &truth, radius, mode)?;
    let text = match ReportFormat::from_path(out) {
        ReportFormat::Csv => dbh_report_csv(&report),
        ReportFormat::Json => json(&report)?,
        ReportFormat::Text => dbh_report_text(&report),
    };
    write_report(out, &text)?;
    Ok(report)
}
