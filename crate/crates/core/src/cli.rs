// SPDX-License-Identifier: Apache-2.0

//! Command-line front end. Exit status 0 is success, 1 a usage or input
//! error and 2 an internal failure. Diagnostics go to standard error.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{schema_hash, PipelineConfig};
use crate::error::{Error, Result};
use crate::eval::{MatchMode, DEFAULT_MATCH_RADIUS_M};
use crate::io::Format;
use crate::synth::SynthConfig;
use crate::workflow;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INTERNAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "forest-inventory",
    about = "Tree inventory from ground-level LiDAR",
    disable_version_flag = true,
    arg_required_else_help = true
)]
struct Cli {
    /// Print the version and the config schema hash
    #[arg(long)]
    version: bool,
    /// Print the effective configuration and exit
    #[arg(long)]
    print_config: bool,
    /// Configuration file used by --print-config
    #[arg(long, value_name = "FILE", requires = "print_config")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a tree inventory from point clouds
    #[command(subcommand)]
    Inventory(InventoryCommand),
    /// Generate synthetic data
    #[command(subcommand)]
    Synth(SynthCommand),
    /// Score predictions against ground truth
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Inspect configuration
    #[command(subcommand)]
    Config(ConfigCommand),
}

#[derive(Debug, Subcommand)]
enum InventoryCommand {
    /// Detect trunks in every payload and write the inventory and terrain
    Run {
        /// A cloud file, a directory of payload clouds, or a scan directory with trajectory.csv
        #[arg(long, value_name = "FILE|DIR")]
        input: PathBuf,
        /// key = value configuration file; defaults apply to missing keys
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum SynthCommand {
    /// Write a labeled synthetic plot (cloud.ply) and its tree table (truth.csv)
    Forest(ForestArgs),
}

#[derive(Debug, Args)]
struct ForestArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    trees: Option<usize>,
    /// Plot extent along x in meters
    #[arg(long)]
    width: Option<f64>,
    /// Plot extent along y in meters
    #[arg(long)]
    height: Option<f64>,
    #[arg(long)]
    dbh_min: Option<f64>,
    #[arg(long)]
    dbh_max: Option<f64>,
    /// Minimum distance between trunk centers in meters
    #[arg(long)]
    spacing: Option<f64>,
    /// Radial trunk noise standard deviation in meters
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    points_per_tree: Option<usize>,
    /// Shrub points per square meter
    #[arg(long)]
    shrub_density: Option<f64>,
    /// Ground points per square meter
    #[arg(long)]
    ground_density: Option<f64>,
    /// Ground undulation amplitude in meters
    #[arg(long)]
    ground_amplitude: Option<f64>,
    #[arg(long)]
    no_canopy: bool,
    /// Share of trees seen from one side only
    #[arg(long)]
    occluded_fraction: Option<f64>,
    #[arg(long, default_value = "plot")]
    plot_id: String,
    /// ply-binary-le, ply-ascii or csv
    #[arg(long, default_value = "ply-binary-le")]
    format: String,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum EvalCommand {
    /// Panoptic quality of a labeled cloud; report format follows the --out extension
    Pq {
        #[arg(long, value_name = "FILE")]
        pred: PathBuf,
        #[arg(long, value_name = "FILE")]
        gt: PathBuf,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// DBH recall and RMSE of inventories against a surveyed tree table
    Dbh {
        /// An inventory directory or a directory of them
        #[arg(long, value_name = "DIR")]
        pred: PathBuf,
        #[arg(long, value_name = "CSV")]
        gt: PathBuf,
        /// Match radius in meters
        #[arg(long, default_value_t = DEFAULT_MATCH_RADIUS_M)]
        radius: f64,
        /// Maximize the number of matches instead of matching greedily
        #[arg(long)]
        optimal: bool,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum ConfigCommand {
    /// Print every configuration key with its effective value
    Print {
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
    },
}

fn load_config(path: Option<&PathBuf>) -> Result<PipelineConfig> {
    match path {
        Some(p) => PipelineConfig::load(p),
        None => Ok(PipelineConfig::default()),
    }
}

fn synth_config(a: &ForestArgs) -> SynthConfig {
    let d = SynthConfig::default();
    SynthConfig {
        seed: a.seed,
        n_trees: a.trees.unwrap_or(d.n_trees),
        area: (a.width.unwrap_or(d.area.0), a.height.unwrap_or(d.area.1)),
        dbh_range: (a.dbh_min.unwrap_or(d.dbh_range.0), a.dbh_max.unwrap_or(d.dbh_range.1)),
        min_spacing: a.spacing.unwrap_or(d.min_spacing),
        trunk_noise_sigma: a.noise.unwrap_or(d.trunk_noise_sigma),
        points_per_tree: a.points_per_tree.unwrap_or(d.points_per_tree),
        shrub_density: a.shrub_density.unwrap_or(d.shrub_density),
        ground_density: a.ground_density.unwrap_or(d.ground_density),
        ground_amplitude: a.ground_amplitude.unwrap_or(d.ground_amplitude),
        canopy: !a.no_canopy,
        occluded_fraction: a.occluded_fraction.unwrap_or(d.occluded_fraction),
        ..d
    }
}

pub fn version_line() -> String {
    format!(
        "forest-inventory {} (config schema {})",
        env!("CARGO_PKG_VERSION"),
        schema_hash()
    )
}

fn execute(cli: Cli) -> Result<()> {
    if cli.version {
        println!("{}", version_line());
        return Ok(());
    }
    if cli.print_config {
        print!("{}", load_config(cli.config.as_ref())?.render());
        return Ok(());
    }
    let Some(command) = cli.command else {
        return Err(Error::InvalidConfig("no subcommand given".into()));
    };
    match command {
        Command::Inventory(InventoryCommand::Run { input, config, out }) => {
            let cfg = load_config(config.as_ref())?;
            let payloads = workflow::load_payloads(&input, cfg.window_m)?;
            workflow::run_inventory(&payloads, &cfg, &out)?;
        }
        Command::Synth(SynthCommand::Forest(args)) => {
            let format: Format = args.format.parse()?;
            workflow::run_synth(&synth_config(&args), &args.plot_id, format, &args.out)?;
        }
        Command::Eval(EvalCommand::Pq { pred, gt, out }) => {
            workflow::run_eval_pq(&pred, &gt, &out)?;
        }
        Command::Eval(EvalCommand::Dbh {
            pred,
            gt,
            radius,
            optimal,
            out,
        }) => {
            let mode = if optimal { MatchMode::Optimal } else { MatchMode::Greedy };
            workflow::run_eval_dbh(&pred, &gt, radius, mode, &out)?;
        }
        Command::Config(ConfigCommand::Print { config }) => {
            print!("{}", load_config(config.as_ref())?.render());
        }
    }
    Ok(())
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                EXIT_INPUT
            } else {
                EXIT_INTERNAL
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_subcommand() {
        for argv in [
            vec!["fi", "inventory", "run", "--input", "a.ply", "--out", "o"],
            vec!["fi", "synth", "forest", "--seed", "7", "--trees", "10", "--out", "o"],
            vec!["fi", "eval", "pq", "--pred", "a.ply", "--gt", "b.ply", "--out", "r.txt"],
            vec!["fi", "eval", "dbh", "--pred", "d", "--gt", "t.csv", "--radius", "0.4", "--out", "r.csv"],
            vec!["fi", "config", "print"],
            vec!["fi", "--print-config"],
            vec!["fi", "--version"],
        ] {
            Cli::try_parse_from(&argv).unwrap_or_else(|e| panic!("{argv:?}: {e}"));
        }
    }

    #[test]
    fn missing_input_is_a_usage_error() {
        let e = Cli::try_parse_from(["fi", "inventory", "run", "--out", "o"]).unwrap_err();
        assert!(e.use_stderr());
        assert!(e.to_string().contains("--input"));
    }

    #[test]
    fn synth_flags_override_defaults() {
        let Cli {
            command: Some(Command::Synth(SynthCommand::Forest(a))),
            ..
        } = Cli::try_parse_from(["fi", "synth", "forest", "--trees", "3", "--no-canopy", "--out", "o"]).unwrap()
        else {
            panic!("wrong subcommand");
        };
        let cfg = synth_config(&a);
        assert_eq!(cfg.n_trees, 3);
        assert!(!cfg.canopy);
        assert_eq!(cfg.area, SynthConfig::default().area);
    }
}
