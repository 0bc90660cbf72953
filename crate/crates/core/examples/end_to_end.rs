// SPDX-License-Identifier: Apache-2.0

//! Synthesize a plot, run the inventory workflow on it and score the result,
//! writing every artifact the command line tool would.
//!
//!     cargo run --release --example end_to_end -- [out_dir]

use std::path::PathBuf;

use forest_inventory::config::PipelineConfig;
use forest_inventory::eval::MatchMode;
use forest_inventory::io::Format;
use forest_inventory::synth::SynthConfig;
use forest_inventory::workflow;

fn main() -> forest_inventory::Result<()> {
    let scratch = tempfile::tempdir()?;
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| scratch.path().to_path_buf());

    let synth = SynthConfig { seed: 9, n_trees: 12, area: (30.0, 30.0), ..Default::default() };
    workflow::run_synth(&synth, "demo", Format::PlyBinaryLe, &out.join("plot"))?;

    let config = PipelineConfig::parse("inventory.plot_id = demo\n")?;
    let payloads = workflow::load_payloads(&out.join("plot").join(workflow::SYNTH_CLOUD_FILE), config.window_m)?;
    let inventory = workflow::run_inventory(&payloads, &config, &out.join("inventory"))?;
    println!("{} trees inventoried", inventory.len());

    let report = workflow::run_eval_dbh(
        &out.join("inventory"),
        &out.join("plot").join(workflow::SYNTH_TRUTH_FILE),
        0.5,
        MatchMode::Optimal,
        &out.join("dbh.txt"),
    )?;
    println!(
        "recall {:.2}, RMSE {:.2} cm",
        report.overall_recall,
        report.overall_rmse_cm.unwrap_or(f64::NAN)
    );
    let pq = workflow::run_eval_pq(
        &out.join("plot").join(workflow::SYNTH_CLOUD_FILE),
        &out.join("plot").join(workflow::SYNTH_CLOUD_FILE),
        &out.join("pq.json"),
    )?;
    println!("self PQ {:.3}", pq.overall);
    for entry in walk(&out) {
        println!("  {}", entry.strip_prefix(&out).unwrap_or(&entry).display());
    }
    Ok(())
}

fn walk(dir: &std::path::Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut entries: Vec<_> = std::fs::read_dir(dir).into_iter().flatten().flatten().map(|e| e.path()).collect();
    entries.sort();
    for p in entries {
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}
