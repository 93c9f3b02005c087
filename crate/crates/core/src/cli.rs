//! Command-line front end: `build-map`, `gen-encounters`, `run` and `report`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::encounters::{load_specs, sample_batch, save_specs};
use crate::error::{Error, Result};
use crate::mdp::{load_map, save_map, IntruderMotionModel, MdpConfig, StateGrid, WaitMap};
use crate::sim::{BatchReport, Group, GroupRun, SimConfig, SimParams};

/// Every tunable constant, as read by `--config` and written by
/// `--print-config`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToolConfig {
    pub grid: StateGrid,
    pub motion: IntruderMotionModel,
    pub mdp: MdpConfig,
    pub sim: SimParams,
}

impl ToolConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
    }
}

/// Written beside every `run` output; `run --manifest` repeats the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config_file: Option<PathBuf>,
    pub groups: Vec<Group>,
    pub reference: Group,
    pub encounters: PathBuf,
    pub encounters_sha256: String,
    pub map: Option<PathBuf>,
    pub map_sha256: Option<String>,
    pub dump_traces: bool,
    pub params: SimParams,
}

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Parser)]
#[command(name = "daa-waitmap", version, about = "Wait maps and latency-aware control allocation for remotely piloted aircraft")]
pub struct Cli {
    /// JSON file overriding the built-in defaults.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Print the resolved configuration as JSON and exit.
    #[arg(long)]
    pub print_config: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the wait MDP and save the wait map.
    BuildMap(BuildMapArgs),
    /// Sample an encounter set.
    GenEncounters(GenEncountersArgs),
    /// Simulate experiment groups over an encounter set.
    Run(RunArgs),
    /// Merge group reports into comparison tables.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct BuildMapArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Weight of horizontal intruder maneuvers.
    #[arg(long)]
    pub class_mix: Option<f64>,
    /// Turn-rate bias of the intruder, deg/s.
    #[arg(long, allow_negative_numbers = true)]
    pub turn_bias: Option<f64>,
    /// `default`, `coarse`, or a JSON grid file.
    #[arg(long, value_name = "PRESET|FILE")]
    pub grid: Option<String>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_sweeps: Option<usize>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Histogram bin width for the printed summary, s.
    #[arg(long, default_value_t = 5.0)]
    pub bin: f64,
}

#[derive(Debug, Args)]
pub struct GenEncountersArgs {
    #[arg(long)]
    pub count: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// A group name or `all`.
    #[arg(long, default_value = "all")]
    pub group: String,
    #[arg(long, required_unless_present = "manifest")]
    pub encounters: Option<PathBuf>,
    #[arg(long)]
    pub map: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write one CSV trace per encounter and group.
    #[arg(long)]
    pub dump_traces: bool,
    #[arg(long, default_value = "B-2")]
    pub reference: Group,
    /// Repeat the run recorded in a manifest; other inputs are ignored.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["encounters", "map", "seed", "dump_traces"])]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Report files written by `run`.
    #[arg(required = true, num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, default_value = "B-2")]
    pub reference: Group,
    #[arg(long)]
    pub out: PathBuf,
}

impl Error {
    /// Process exit status: 2 configuration, 3 I/O and file formats,
    /// 4 non-convergence, 5 validation.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::InvalidConfig(_)
            | Error::MissingMap(_)
            | Error::NotNormalState(_)
            | Error::NoIntent
            | Error::InfeasibleGeometry(_) => 2,
            Error::Io { .. }
            | Error::CorruptFile { .. }
            | Error::DimensionMismatch { .. }
            | Error::VersionMismatch { .. }
            | Error::Schema { .. }
            | Error::Json(_)
            | Error::Csv(_) => 3,
            Error::NonConvergence { .. } => 4,
            Error::Validation(_) | Error::UnpairedBatch(..) => 5,
        }
    }
}

pub fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(path) => ToolConfig::load(path)?,
        None => ToolConfig::default(),
    };
    if cli.print_config {
        println!("{}", serde_json::to_string_pretty(&config)?);
        return Ok(());
    }
    match cli.command {
        Some(Command::BuildMap(a)) => build_map(config, &a),
        Some(Command::GenEncounters(a)) => gen_encounters(&a),
        Some(Command::Run(a)) => run_groups(config, cli.config, &a),
        Some(Command::Report(a)) => report(&a),
        None => Err(Error::InvalidConfig("no subcommand given (see --help)".into())),
    }
}

fn set_threads(threads: Option<usize>) -> Result<()> {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

fn grid_arg(arg: &str) -> Result<StateGrid> {
    match arg {
        "default" => Ok(StateGrid::default()),
        "coarse" => Ok(StateGrid::with_bins([4, 4, 2, 2, 2, 2])),
        file => {
            let path = Path::new(file);
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{file}: {e}")))
        }
    }
}

fn build_map(mut config: ToolConfig, a: &BuildMapArgs) -> Result<()> {
    set_threads(a.threads)?;
    if let Some(g) = &a.grid {
        config.grid = grid_arg(g)?;
    }
    if let Some(v) = a.gamma {
        config.mdp.gamma = v;
    }
    if let Some(v) = a.tol {
        config.mdp.convergence_tol = v;
    }
    if let Some(v) = a.max_sweeps {
        config.mdp.max_sweeps = v;
    }
    if let Some(v) = a.class_mix {
        config.motion.class_mix = v;
    }
    if let Some(v) = a.turn_bias {
        config.motion.turn_bias = v;
    }
    if !(a.bin > 0.0) {
        return Err(Error::InvalidConfig("histogram bin must be positive".into()));
    }
    eprintln!("building wait map over {} cells", config.grid.normal_cells());
    let map = WaitMap::build(config.grid, config.motion, config.mdp)?;
    save_map(&map, &a.out)?;
    let h = map.histogram(a.bin);
    println!("cells {}  sweeps {}  residual {:.2e}", map.grid.normal_cells(), map.metadata.sweeps, map.metadata.residual);
    println!(
        "wait s: min {:.1}  max {:.1}  mean {:.2}  mode [{}, {})",
        h.min_s,
        h.max_s,
        h.mean_s,
        h.mode_lo_s,
        h.mode_lo_s + h.bin_width_s
    );
    println!("in loss of well clear {}  never reached {}", h.in_lowc, h.unreachable);
    for (i, c) in h.counts.iter().enumerate() {
        let lo = i as f64 * h.bin_width_s;
        println!("  [{:>4.0}, {:>4.0})  {c}", lo, lo + h.bin_width_s);
    }
    Ok(())
}

fn gen_encounters(a: &GenEncountersArgs) -> Result<()> {
    let specs = sample_batch(a.count, a.seed);
    save_specs(&a.out, &specs)?;
    eprintln!("wrote {} encounters to {}", specs.len(), a.out.display());
    Ok(())
}

fn parse_groups(arg: &str) -> Result<Vec<Group>> {
    if arg.eq_ignore_ascii_case("all") {
        Ok(Group::ALL.to_vec())
    } else {
        arg.split(',').map(str::parse).collect()
    }
}

fn run_groups(config: ToolConfig, config_file: Option<PathBuf>, a: &RunArgs) -> Result<()> {
    set_threads(a.threads)?;
    let manifest = match &a.manifest {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let m: RunManifest = serde_json::from_str(&text).map_err(|e| Error::Schema {
                path: path.clone(),
                reason: e.to_string(),
            })?;
            if sha256_file(&m.encounters)? != m.encounters_sha256 {
                return Err(Error::Validation(format!("{} changed since the manifest was written", m.encounters.display())));
            }
            if let (Some(map), Some(hash)) = (&m.map, &m.map_sha256) {
                if &sha256_file(map)? != hash {
                    return Err(Error::Validation(format!("{} changed since the manifest was written", map.display())));
                }
            }
            m
        }
        None => {
            let encounters = a.encounters.clone().expect("required by clap");
            let mut params = config.sim;
            if let Some(seed) = a.seed {
                params.seed = seed;
            }
            RunManifest {
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                config_file,
                groups: parse_groups(&a.group)?,
                reference: a.reference,
                encounters_sha256: sha256_file(&encounters)?,
                encounters,
                map_sha256: a.map.as_deref().map(sha256_file).transpose()?,
                map: a.map.clone(),
                dump_traces: a.dump_traces,
                params,
            }
        }
    };
    execute(&manifest, &a.out)
}

/// Runs what `manifest` describes and writes the report, the tables and
/// the manifest into `out`.
pub fn execute(m: &RunManifest, out: &Path) -> Result<()> {
    m.params.validate()?;
    let specs = load_specs(&m.encounters)?;
    let map = match &m.map {
        Some(path) => Some(load_map(path)?),
        None => None,
    };
    if let Some(g) = m.groups.iter().find(|g| g.needs_map()) {
        if map.is_none() {
            return Err(Error::MissingMap(format!("{g} (pass --map)")));
        }
    }
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut runs = Vec::new();
    for &group in &m.groups {
        eprintln!("running {group} over {} encounters", specs.len());
        let cfg = SimConfig::new(group, m.params.clone());
        let run = if m.dump_traces {
            let dir = out.join("traces").join(group.name());
            std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            GroupRun::streamed(&specs, &cfg, map.as_ref(), |log| {
                let path = dir.join(format!("{}.csv", log.spec.seed));
                let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
                log.write_trace(std::io::BufWriter::new(file))
            })?
        } else {
            GroupRun::streamed(&specs, &cfg, map.as_ref(), |_| Ok(()))?
        };
        runs.push(run);
    }
    let report = BatchReport::new(&specs, &runs)?;
    report.check_consistency()?;
    report.save_json(out.join("report.json"))?;
    if report.group(m.reference).is_some() {
        report.write_tables(out, m.reference)?;
    } else {
        eprintln!("reference group {} not run; comparison tables skipped", m.reference);
    }
    let path = out.join(MANIFEST_FILE);
    std::fs::write(&path, serde_json::to_string_pretty(m)? + "\n").map_err(|e| Error::io(&path, e))?;
    eprintln!("wrote {}", out.display());
    Ok(())
}

fn report(a: &ReportArgs) -> Result<()> {
    let reports = a.inputs.iter().map(BatchReport::load_json).collect::<Result<Vec<_>>>()?;
    let merged = BatchReport::merge(reports)?;
    merged.check_consistency()?;
    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    merged.write_all(&a.out, a.reference)?;
    for (name, text) in merged.tables(a.reference)? {
        println!("== {name}\n{text}");
    }
    Ok(())
}
