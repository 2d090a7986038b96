//! Random scenarios, parameter sweeps and aggregated results.
//!
//! All randomness comes from one 64-bit seed. Each (sweep point, trial,
//! purpose) triple reads its own ChaCha20 stream, so a trial's scenario does
//! not depend on how many trials ran before it or on which thread ran it.

use std::collections::HashSet;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{self, CdsOrder, EngineError, Furthest, Metrics, Policy, RunOptions, Topology};
use crate::geometry::{Point, Rect};
use crate::netgraph::{DeviceId, NetError, Scenario};
use crate::protocol::Algorithm;

pub const DEFAULT_DENSITY: f64 = 7.0;
pub const DEFAULT_FIELD: f64 = 10.0;
pub const DEFAULT_REGION: f64 = 3.0;
pub const DEFAULT_RADIUS: f64 = 1.0;
pub const DEFAULT_TRIALS: usize = 100;

const PURPOSE_POSITIONS: u64 = 1;
const PURPOSE_SOURCE: u64 = 2;
const PURPOSE_REGION: u64 = 3;
const PURPOSE_POLICY: u64 = 4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid {field}: {message}")]
    Config { field: &'static str, message: String },
    #[error(transparent)]
    Network(#[from] NetError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub field_side: f64,
    /// Devices per unit-disk area.
    pub density: f64,
    pub region_side: f64,
    pub radius: f64,
    pub algorithms: Vec<Algorithm>,
    pub trials: usize,
    pub seed: u64,
    pub policy: Policy,
    pub cds: Option<CdsOrder>,
    pub furthest: Furthest,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            field_side: DEFAULT_FIELD,
            density: DEFAULT_DENSITY,
            region_side: DEFAULT_REGION,
            radius: DEFAULT_RADIUS,
            algorithms: Algorithm::ALL.to_vec(),
            trials: DEFAULT_TRIALS,
            seed: 0,
            policy: Policy::Fifo,
            cds: None,
            furthest: Furthest::Hops,
        }
    }
}

fn config_error(field: &'static str, message: impl Into<String>) -> ExperimentError {
    ExperimentError::Config {
        field,
        message: message.into(),
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if !(self.field_side.is_finite() && self.field_side > 0.0) {
            return Err(config_error("field", format!("side must be positive, got {}", self.field_side)));
        }
        if !(self.density.is_finite() && self.density > 0.0) {
            return Err(config_error("density", format!("must be positive, got {}", self.density)));
        }
        if !(self.region_side.is_finite() && self.region_side > 0.0) {
            return Err(config_error("region", format!("side must be positive, got {}", self.region_side)));
        }
        if self.region_side > self.field_side {
            return Err(config_error(
                "region",
                format!("side {} exceeds field side {}", self.region_side, self.field_side),
            ));
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(config_error("radius", format!("must be positive, got {}", self.radius)));
        }
        if self.trials == 0 {
            return Err(config_error("trials", "must be at least 1"));
        }
        if self.algorithms.is_empty() {
            return Err(config_error("algorithms", "list is empty"));
        }
        if device_count(self.density, self.field_side, self.radius) == 0 {
            return Err(config_error("density", "field would hold no devices"));
        }
        Ok(())
    }

    /// The configuration at one point of a sweep along `axis`.
    pub fn at(&self, axis: Axis, value: f64) -> Self {
        let mut cfg = self.clone();
        match axis {
            Axis::Density => cfg.density = value,
            Axis::Region => cfg.region_side = value,
            Axis::Field => cfg.field_side = value,
        }
        cfg
    }
}

/// `round(density · side² / (π r²))`.
pub fn device_count(density: f64, field_side: f64, radius: f64) -> usize {
    (density * field_side * field_side / (std::f64::consts::PI * radius * radius)).round() as usize
}

fn stream(seed: u64, point: usize, trial: usize, purpose: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(((point as u64) << 40) | ((trial as u64) << 8) | purpose);
    rng
}

/// Scenario for trial `trial` of sweep point 0.
pub fn gen_scenario(cfg: &ExperimentConfig, trial: usize) -> Result<Scenario, ExperimentError> {
    gen_scenario_at(cfg, 0, trial)
}

pub fn gen_scenario_at(
    cfg: &ExperimentConfig,
    point: usize,
    trial: usize,
) -> Result<Scenario, ExperimentError> {
    cfg.validate()?;
    let side = cfg.field_side;
    let n = device_count(cfg.density, side, cfg.radius);

    let mut rng = stream(cfg.seed, point, trial, PURPOSE_POSITIONS);
    let mut seen = HashSet::with_capacity(n);
    let mut devices = Vec::with_capacity(n);
    while devices.len() < n {
        let p = Point::new(rng.random_range(0.0..side), rng.random_range(0.0..side));
        if seen.insert((p.x.to_bits(), p.y.to_bits())) {
            devices.push(p);
        }
    }

    let source = DeviceId::from(stream(cfg.seed, point, trial, PURPOSE_SOURCE).random_range(0..n));

    let mut rng = stream(cfg.seed, point, trial, PURPOSE_REGION);
    let slack = side - cfg.region_side;
    let corner = |rng: &mut ChaCha20Rng| if slack > 0.0 { rng.random_range(0.0..=slack) } else { 0.0 };
    let min = Point::new(corner(&mut rng), corner(&mut rng));
    let region = Rect::square(min, cfg.region_side)
        .ok_or_else(|| config_error("region", "degenerate region"))?;

    Ok(Scenario {
        radius: cfg.radius,
        field: [side, side],
        devices,
        source,
        region,
        seed: cfg.seed,
    })
}

/// Scheduling policy for one trial; a random policy gets its own stream.
fn trial_policy(cfg: &ExperimentConfig, point: usize, trial: usize) -> Policy {
    match cfg.policy {
        Policy::Random(base) => {
            let mut rng = stream(cfg.seed ^ base, point, trial, PURPOSE_POLICY);
            Policy::Random(rng.next_u64())
        }
        other => other,
    }
}

/// One algorithm's outcome on one scenario.
pub type TrialResult = Result<Metrics, EngineError>;

pub fn run_trial(
    scenario: &Scenario,
    algorithm: Algorithm,
    policy: Policy,
    cds: Option<CdsOrder>,
    furthest: Furthest,
) -> Result<TrialResult, ExperimentError> {
    let topology = Topology::new(scenario.unit_disk()?, cds);
    Ok(run_on(
        &topology,
        scenario,
        algorithm,
        RunOptions {
            policy,
            furthest,
            budget: None,
        },
    ))
}

fn run_on(topology: &Topology, scenario: &Scenario, algorithm: Algorithm, options: RunOptions) -> TrialResult {
    let inst = scenario.instance(&topology.udg);
    engine::run(topology, &inst, algorithm, options).map(|(_, m)| m)
}

/// Results of every configured algorithm on trials `0..cfg.trials` of one
/// sweep point, in trial order: `results[trial][algorithm]`.
pub fn run_point(cfg: &ExperimentConfig, point: usize) -> Result<Vec<Vec<TrialResult>>, ExperimentError> {
    cfg.validate()?;
    (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let scenario = gen_scenario_at(cfg, point, trial)?;
            let topology = Topology::new(scenario.unit_disk()?, cfg.cds);
            let options = RunOptions {
                policy: trial_policy(cfg, point, trial),
                furthest: cfg.furthest,
                budget: None,
            };
            Ok(cfg
                .algorithms
                .iter()
                .map(|&alg| run_on(&topology, &scenario, alg, options))
                .collect())
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Density,
    Region,
    Field,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Density => "density",
            Axis::Region => "region",
            Axis::Field => "field",
        }
    }

    /// Sweep values used when none are given.
    pub fn default_values(self) -> Vec<f64> {
        match self {
            Axis::Density => (3..=16).map(f64::from).collect(),
            Axis::Region => (1..=9).map(f64::from).collect(),
            Axis::Field => vec![5.0, 10.0, 15.0, 20.0],
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "density" => Ok(Axis::Density),
            "region" => Ok(Axis::Region),
            "field" => Ok(Axis::Field),
            _ => Err(format!("unknown axis `{s}` (expected density, region or field)")),
        }
    }
}

/// Mean and 95% normal-approximation half-width; `None` without samples.
/// A single sample has an undefined spread.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub ci: Option<f64>,
    pub samples: usize,
}

impl Estimate {
    pub fn of(values: &[f64]) -> Option<Estimate> {
        let k = values.len();
        if k == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / k as f64;
        let ci = (k > 1).then(|| {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
            1.96 * var.sqrt() / (k as f64).sqrt()
        });
        Some(Estimate { mean, ci, samples: k })
    }

    pub fn std_error(&self) -> f64 {
        self.ci.unwrap_or(0.0) / 1.96
    }

    pub fn low(&self) -> f64 {
        self.mean - self.ci.unwrap_or(0.0)
    }

    pub fn high(&self) -> f64 {
        self.mean + self.ci.unwrap_or(0.0)
    }
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub trials: usize,
    pub faults: usize,
    pub cost: Option<Estimate>,
    pub norm_cost: Option<Estimate>,
    pub stretch: Option<Estimate>,
    pub median_cost: Option<f64>,
    pub delivery_rate: Option<f64>,
}

/// Aggregates one algorithm's trials. Faulted trials are counted and
/// otherwise left out; each metric uses the trials where it is defined.
pub fn aggregate<'a>(results: impl IntoIterator<Item = &'a TrialResult>) -> Aggregate {
    let mut trials = 0;
    let mut faults = 0;
    let (mut cost, mut norm, mut stretch, mut rate) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for r in results {
        trials += 1;
        match r {
            Ok(m) => {
                cost.push(m.message_cost as f64);
                norm.extend(m.normalized_cost);
                stretch.extend(m.path_stretch);
                rate.extend(m.delivery_rate);
            }
            Err(_) => faults += 1,
        }
    }
    Aggregate {
        trials,
        faults,
        cost: Estimate::of(&cost),
        norm_cost: Estimate::of(&norm),
        stretch: Estimate::of(&stretch),
        median_cost: median(&cost),
        delivery_rate: Estimate::of(&rate).map(|e| e.mean),
    }
}

/// One line of the results table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub axis: Axis,
    pub value: f64,
    pub algorithm: Algorithm,
    pub trials: usize,
    pub faults: usize,
    pub mean_cost: Option<f64>,
    pub ci_cost: Option<f64>,
    pub mean_norm_cost: Option<f64>,
    pub ci_norm_cost: Option<f64>,
    pub mean_stretch: Option<f64>,
    pub ci_stretch: Option<f64>,
    pub median_cost: Option<f64>,
    pub delivery_rate: Option<f64>,
}

impl ResultRow {
    pub fn new(axis: Axis, value: f64, algorithm: Algorithm, agg: &Aggregate) -> Self {
        Self {
            axis,
            value,
            algorithm,
            trials: agg.trials,
            faults: agg.faults,
            mean_cost: agg.cost.map(|e| e.mean),
            ci_cost: agg.cost.and_then(|e| e.ci),
            mean_norm_cost: agg.norm_cost.map(|e| e.mean),
            ci_norm_cost: agg.norm_cost.and_then(|e| e.ci),
            mean_stretch: agg.stretch.map(|e| e.mean),
            ci_stretch: agg.stretch.and_then(|e| e.ci),
            median_cost: agg.median_cost,
            delivery_rate: agg.delivery_rate,
        }
    }
}

/// Runs `cfg.trials` trials per value, every other parameter held at `cfg`.
pub fn sweep(cfg: &ExperimentConfig, axis: Axis, values: &[f64]) -> Result<Vec<ResultRow>, ExperimentError> {
    if values.is_empty() {
        return Err(config_error("values", "list is empty"));
    }
    let mut rows = Vec::with_capacity(values.len() * cfg.algorithms.len());
    for (point, &value) in values.iter().enumerate() {
        let at = cfg.at(axis, value);
        let results = run_point(&at, point)?;
        for (a, &alg) in at.algorithms.iter().enumerate() {
            let agg = aggregate(results.iter().map(|trial| &trial[a]));
            rows.push(ResultRow::new(axis, value, alg, &agg));
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(out: W, rows: &[ResultRow]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(rows: &[ResultRow]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}
