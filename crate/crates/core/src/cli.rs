//! Command-line front end: `generate`, `run`, `sweep` and `export`.
//!
//! Exit codes: 0 on success, 1 on usage or input errors, 2 when a
//! simulation fails to terminate.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::engine::{
    self, read_trace, replay, to_dot, to_svg, write_trace, CdsOrder, EngineError, Furthest, Policy,
    RunOptions, Topology, TraceError,
};
use crate::experiments::{
    self, gen_scenario, Axis, ExperimentConfig, ExperimentError, DEFAULT_DENSITY, DEFAULT_FIELD,
    DEFAULT_RADIUS, DEFAULT_REGION, DEFAULT_TRIALS,
};
use crate::netgraph::{DeviceId, NetError, Scenario, ScenarioError};
use crate::protocol::Algorithm;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error(transparent)]
    Network(#[from] NetError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("cannot write csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("trace does not replay: {0}")]
    Replay(EngineError),
    #[error("simulation fault: {0}")]
    Fault(EngineError),
    #[error("{0} of the sweep's trials hit a simulation fault")]
    SweepFaults(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Fault(_) | CliError::SweepFaults(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "geocast", version, about = "Stateless geocast routing simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random scenario file.
    Generate(GenerateArgs),
    /// Run one algorithm on a scenario.
    Run(RunArgs),
    /// Sweep one parameter and write a results table.
    Sweep(SweepArgs),
    /// Render a scenario, optionally with the links a trace used.
    Export(ExportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CdsArg {
    None,
    CdsOfGabriel,
    GabrielOfCds,
}

impl CdsArg {
    fn order(self) -> Option<CdsOrder> {
        match self {
            CdsArg::None => None,
            CdsArg::CdsOfGabriel => Some(CdsOrder::CdsOfGabriel),
            CdsArg::GabrielOfCds => Some(CdsOrder::GabrielOfCds),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FurthestArg {
    Hops,
    Euclidean,
}

impl From<FurthestArg> for Furthest {
    fn from(f: FurthestArg) -> Self {
        match f {
            FurthestArg::Hops => Furthest::Hops,
            FurthestArg::Euclidean => Furthest::Euclidean,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Dot,
    Svg,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Devices per unit-disk area.
    #[arg(long, default_value_t = DEFAULT_DENSITY)]
    pub density: f64,
    /// Side of the square field.
    #[arg(long, default_value_t = DEFAULT_FIELD)]
    pub field: f64,
    /// Side of the square geocast region.
    #[arg(long, default_value_t = DEFAULT_REGION)]
    pub region: f64,
    #[arg(long, default_value_t = DEFAULT_RADIUS)]
    pub radius: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Trial index within the seed's stream.
    #[arg(long, default_value_t = 0)]
    pub trial: usize,
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, default_value = "sf")]
    pub alg: Algorithm,
    /// fifo, lifo, random or random:<seed>; plain random uses the scenario seed.
    #[arg(long, default_value = "fifo")]
    pub policy: String,
    #[arg(long, value_enum, default_value_t = CdsArg::None)]
    pub cds: CdsArg,
    #[arg(long, value_enum, default_value_t = FurthestArg::Hops)]
    pub furthest: FurthestArg,
    /// Write one JSON line per transmission.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Step budget; 50 · n · max degree when omitted.
    #[arg(long)]
    pub max_steps: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value = "density")]
    pub axis: Axis,
    /// `a..b` (inclusive, step 1) or a comma-separated list; the axis
    /// default range when omitted.
    #[arg(long)]
    pub values: Option<String>,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    pub trials: usize,
    /// `all` or a comma-separated list of sf, spg, sf-spg, sf-spg-g.
    #[arg(long, default_value = "all")]
    pub algs: String,
    #[arg(long, default_value_t = DEFAULT_DENSITY)]
    pub density: f64,
    #[arg(long, default_value_t = DEFAULT_FIELD)]
    pub field: f64,
    #[arg(long, default_value_t = DEFAULT_REGION)]
    pub region: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// fifo, lifo, random or random:<seed>.
    #[arg(long, default_value = "fifo")]
    pub policy: String,
    #[arg(long, value_enum, default_value_t = CdsArg::None)]
    pub cds: CdsArg,
    #[arg(long, value_enum, default_value_t = FurthestArg::Hops)]
    pub furthest: FurthestArg,
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Trace whose links are highlighted.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Replay the trace under this algorithm and highlight the replayed links.
    #[arg(long)]
    pub alg: Option<Algorithm>,
    #[arg(long, value_enum, default_value_t = CdsArg::None)]
    pub cds: CdsArg,
    #[arg(long, value_enum, default_value_t = Format::Dot)]
    pub format: Format,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Generate(a) => generate(a, out),
        Command::Run(a) => run(a, out),
        Command::Sweep(a) => sweep(a, out),
        Command::Export(a) => export(a, out),
    }
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn emit(output: Option<&Path>, out: &mut dyn Write, bytes: &[u8]) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, bytes).map_err(io_error(path)),
        None => out.write_all(bytes).map_err(io_error(Path::new("<stdout>"))),
    }
}

fn parse_policy(s: &str, seed: u64) -> Result<Policy, CliError> {
    if s == "random" {
        return Ok(Policy::Random(seed));
    }
    s.parse().map_err(CliError::Usage)
}

/// `a..b` inclusive with step 1, or `v1,v2,...`.
pub fn parse_values(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("invalid --values `{s}`"));
    let values: Vec<f64> = if let Some((a, b)) = s.split_once("..") {
        let (a, b): (f64, f64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if !(a.is_finite() && b.is_finite()) || b < a {
            return Err(bad());
        }
        let steps = (b - a).floor() as usize;
        (0..=steps).map(|i| a + i as f64).collect()
    } else {
        s.split(',')
            .map(|v| v.trim().parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    if values.is_empty() {
        return Err(bad());
    }
    Ok(values)
}

pub fn parse_algorithms(s: &str) -> Result<Vec<Algorithm>, CliError> {
    if s == "all" {
        return Ok(Algorithm::ALL.to_vec());
    }
    s.split(',')
        .map(|a| a.trim().parse().map_err(CliError::Usage))
        .collect()
}

fn generate(a: GenerateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = ExperimentConfig {
        field_side: a.field,
        density: a.density,
        region_side: a.region,
        radius: a.radius,
        seed: a.seed,
        ..Default::default()
    };
    let scenario = gen_scenario(&cfg, a.trial)?;
    let mut json = scenario.to_json();
    json.push('\n');
    emit(a.output.as_deref(), out, json.as_bytes())
}

fn fmt_opt<T: std::fmt::Debug>(v: Option<T>) -> String {
    v.map_or_else(|| "none".to_string(), |v| format!("{v:?}"))
}

fn run(a: RunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let scenario = Scenario::load(&a.scenario)?;
    let policy = parse_policy(&a.policy, scenario.seed)?;
    let topology = Topology::new(scenario.unit_disk()?, a.cds.order());
    let inst = scenario.instance(&topology.udg);
    let options = RunOptions {
        policy,
        furthest: a.furthest.into(),
        budget: a.max_steps,
    };
    let (state, m) = engine::run(&topology, &inst, a.alg, options).map_err(CliError::Fault)?;
    if let Some(path) = &a.trace {
        let file = File::create(path).map_err(io_error(path))?;
        write_trace(BufWriter::new(file), &state.transcript).map_err(io_error(path))?;
    }
    let line = format!(
        "cost={} latency={} stretch={} normalized_cost={} delivery_rate={} targets={} annihilated={}\n",
        m.message_cost,
        fmt_opt(m.latency),
        fmt_opt(m.path_stretch),
        fmt_opt(m.normalized_cost),
        fmt_opt(m.delivery_rate),
        m.targets,
        m.annihilated,
    );
    emit(None, out, line.as_bytes())
}

fn sweep(a: SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let values = match &a.values {
        Some(v) => parse_values(v)?,
        None => a.axis.default_values(),
    };
    let cfg = ExperimentConfig {
        field_side: a.field,
        density: a.density,
        region_side: a.region,
        radius: DEFAULT_RADIUS,
        algorithms: parse_algorithms(&a.algs)?,
        trials: a.trials,
        seed: a.seed,
        policy: parse_policy(&a.policy, a.seed)?,
        cds: a.cds.order(),
        furthest: a.furthest.into(),
    };
    for &v in &values {
        cfg.at(a.axis, v).validate()?;
    }
    let rows = experiments::sweep(&cfg, a.axis, &values)?;
    emit(a.output.as_deref(), out, experiments::csv_string(&rows).as_bytes())?;
    let faults: usize = rows.iter().map(|r| r.faults).sum();
    if faults > 0 {
        return Err(CliError::SweepFaults(faults));
    }
    Ok(())
}

fn export(a: ExportArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let scenario = Scenario::load(&a.scenario)?;
    let topology = Topology::new(scenario.unit_disk()?, a.cds.order());
    let used = match &a.trace {
        None => Default::default(),
        Some(path) => {
            let file = File::open(path).map_err(io_error(path))?;
            let records = read_trace(BufReader::new(file))?;
            for r in &records {
                for d in [r.sender, r.receiver] {
                    if d.index() >= topology.udg.len() {
                        return Err(CliError::Usage(format!(
                            "trace step {} names device {d}, scenario has {}",
                            r.step,
                            topology.udg.len()
                        )));
                    }
                }
            }
            match a.alg {
                Some(alg) => {
                    let inst = scenario.instance(&topology.udg);
                    let prepared = topology.prepare(alg, &inst);
                    replay(prepared.router(&topology.udg), alg, &prepared.inst, &records)
                        .map_err(CliError::Replay)?
                        .used_edges()
                }
                None => records
                    .iter()
                    .map(|r| (r.sender.min(r.receiver), r.sender.max(r.receiver)))
                    .collect::<std::collections::BTreeSet<(DeviceId, DeviceId)>>(),
            }
        }
    };
    let text = match a.format {
        Format::Dot => to_dot(&topology.udg, scenario.region, scenario.source, &used),
        Format::Svg => to_svg(&topology.udg, scenario.region, scenario.source, &used),
    };
    emit(a.output.as_deref(), out, text.as_bytes())
}

/// Entry point for the binary.
pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    main_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
