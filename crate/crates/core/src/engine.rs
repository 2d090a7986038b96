//! Atomic-step scheduler over per-device send queues.
//!
//! Every queued message carries a global sequence number. A policy picks one
//! queued message per step, the message is transmitted to its receiver and
//! the receiver's handler runs, all within the same step.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{Rect, Rule};
use crate::netgraph::{
    bfs_hops, cds_backbone, components, gabriel_subgraph, DeviceId, GeocastInstance, Network,
};
use crate::protocol::{Algorithm, Delivery, Message, Mode, Outcome, ProtocolError, Router, SendQueue};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    /// Oldest queued message across all devices.
    Fifo,
    /// Newest queued message.
    Lifo,
    /// Uniform over queued messages, from a seeded stream.
    Random(u64),
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::Fifo => f.write_str("fifo"),
            Policy::Lifo => f.write_str("lifo"),
            Policy::Random(seed) => write!(f, "random({seed})"),
        }
    }
}

impl FromStr for Policy {
    type Err = String;

    /// `fifo`, `lifo`, `random` (seed 0) or `random:<seed>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fifo" => Ok(Policy::Fifo),
            "lifo" => Ok(Policy::Lifo),
            "random" => Ok(Policy::Random(0)),
            _ => s
                .strip_prefix("random:")
                .and_then(|seed| seed.parse().ok())
                .map(Policy::Random)
                .ok_or_else(|| format!("unknown policy `{s}` (expected fifo, lifo, random or random:<seed>)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error("no quiescence after {steps} steps (budget {budget}); {queued} messages still queued")]
    NonTermination {
        steps: u64,
        budget: u64,
        queued: usize,
    },
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("handler at {device} emitted a message from {sender}")]
    ForeignSender { device: DeviceId, sender: DeviceId },
    #[error("trace step {step}: no queued message matches the recorded transmission")]
    ReplayMismatch { step: u64 },
    #[error("trace ended with {queued} messages still queued")]
    ReplayIncomplete { queued: usize },
}

/// One transmission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub step: u64,
    pub seq: u64,
    pub message: Message,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub queues: Vec<SendQueue>,
    pub transcript: Vec<Event>,
    /// Smallest depth at which each device received a message.
    pub arrival: Vec<Option<u32>>,
    pub steps: u64,
    pub enqueued: u64,
    pub annihilated: u64,
    /// Queued sequence numbers and the device holding each.
    pending: BTreeMap<u64, DeviceId>,
}

impl SimState {
    fn new(n: usize, source: DeviceId) -> Self {
        let mut arrival = vec![None; n];
        arrival[source.index()] = Some(0);
        Self {
            queues: vec![SendQueue::new(); n],
            transcript: Vec::new(),
            arrival,
            steps: 0,
            enqueued: 0,
            annihilated: 0,
            pending: BTreeMap::new(),
        }
    }

    pub fn queued(&self) -> usize {
        self.pending.len()
    }

    pub fn is_quiescent(&self) -> bool {
        self.pending.is_empty()
    }

    pub fn transmissions(&self) -> u64 {
        self.transcript.len() as u64
    }

    /// Undirected links that carried at least one transmission, `(low, high)`.
    pub fn used_edges(&self) -> BTreeSet<(DeviceId, DeviceId)> {
        self.transcript
            .iter()
            .map(|e| ordered(e.message.sender, e.message.receiver))
            .collect()
    }

    fn enqueue(&mut self, m: Message) {
        let seq = self.enqueued;
        self.enqueued += 1;
        self.queues[m.sender.index()].push(seq, m);
        self.pending.insert(seq, m.sender);
    }
}

fn ordered(a: DeviceId, b: DeviceId) -> (DeviceId, DeviceId) {
    (a.min(b), a.max(b))
}

#[derive(Clone)]
enum Selector {
    Fifo,
    Lifo,
    Random(ChaCha20Rng),
}

impl Selector {
    fn new(policy: Policy) -> Self {
        match policy {
            Policy::Fifo => Selector::Fifo,
            Policy::Lifo => Selector::Lifo,
            Policy::Random(seed) => Selector::Random(ChaCha20Rng::seed_from_u64(seed)),
        }
    }

    fn pick(&mut self, pending: &BTreeMap<u64, DeviceId>) -> Option<u64> {
        match self {
            Selector::Fifo => pending.keys().next().copied(),
            Selector::Lifo => pending.keys().next_back().copied(),
            Selector::Random(rng) => {
                if pending.is_empty() {
                    None
                } else {
                    let i = rng.random_range(0..pending.len());
                    pending.keys().nth(i).copied()
                }
            }
        }
    }
}

/// Default step budget: 50 · n · k_max.
pub fn default_budget(net: &Network) -> u64 {
    50 * net.len().max(1) as u64 * net.max_degree().max(1) as u64
}

#[derive(Clone)]
pub struct Simulation<'a> {
    router: Router<'a>,
    algorithm: Algorithm,
    state: SimState,
    selector: Selector,
    budget: u64,
}

impl<'a> Simulation<'a> {
    /// Queues the source's initial messages.
    pub fn new(
        router: Router<'a>,
        algorithm: Algorithm,
        inst: &GeocastInstance,
        policy: Policy,
    ) -> Self {
        let mut state = SimState::new(router.flood.len(), inst.source);
        for m in algorithm.initiate(&router, inst) {
            state.enqueue(m);
        }
        let budget = default_budget(router.delivery.map_or(router.flood, |d| d.physical));
        Self {
            router,
            algorithm,
            state,
            selector: Selector::new(policy),
            budget,
        }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn into_state(self) -> SimState {
        self.state
    }

    /// Sequence numbers of all queued messages, oldest first.
    pub fn pending(&self) -> Vec<u64> {
        self.state.pending.keys().copied().collect()
    }

    /// Transmits the queued message with sequence number `seq`, bypassing
    /// the policy. `Ok(None)` if no such message is queued.
    pub fn step_seq(&mut self, seq: u64) -> Result<Option<Event>, EngineError> {
        if !self.state.pending.contains_key(&seq) {
            return Ok(None);
        }
        self.transmit(seq).map(Some)
    }

    /// Transmits one message. `Ok(None)` means the queues were already empty.
    pub fn step(&mut self) -> Result<Option<Event>, EngineError> {
        let Some(seq) = self.selector.pick(&self.state.pending) else {
            return Ok(None);
        };
        self.transmit(seq).map(Some)
    }

    pub fn run(&mut self) -> Result<(), EngineError> {
        while !self.state.is_quiescent() {
            if self.state.steps >= self.budget {
                return Err(self.fault());
            }
            self.step()?;
        }
        Ok(())
    }

    fn fault(&self) -> EngineError {
        EngineError::NonTermination {
            steps: self.state.steps,
            budget: self.budget,
            queued: self.state.queued(),
        }
    }

    fn transmit(&mut self, seq: u64) -> Result<Event, EngineError> {
        let state = &mut self.state;
        let holder = state.pending.remove(&seq).expect("selected message is pending");
        let queue = &mut state.queues[holder.index()];
        let position = queue.position_of_seq(seq).expect("pending message is queued");
        let message = queue.remove(position).expect("position is valid").msg;

        let event = Event {
            step: state.steps,
            seq,
            message,
        };
        state.steps += 1;
        state.transcript.push(event);

        let d = message.receiver;
        let slot = &mut state.arrival[d.index()];
        *slot = Some(slot.map_or(message.depth, |a| a.min(message.depth)));

        match self
            .algorithm
            .handle(&self.router, d, &message, &state.queues[d.index()])?
        {
            Outcome::Annihilate { position } => {
                let mate = state.queues[d.index()]
                    .remove(position)
                    .expect("mate position is valid");
                state.pending.remove(&mate.seq);
                state.annihilated += 1;
            }
            Outcome::Emit(out) => {
                for m in out {
                    if m.sender != d {
                        return Err(EngineError::ForeignSender {
                            device: d,
                            sender: m.sender,
                        });
                    }
                    state.enqueue(m);
                }
            }
        }
        Ok(event)
    }

    /// Transmits the oldest queued message matching `record`.
    fn replay_step(&mut self, record: &TraceRecord) -> Result<Event, EngineError> {
        let sender = record.sender;
        let seq = self
            .state
            .queues
            .get(sender.index())
            .and_then(|q| q.iter().find(|e| record.matches(&e.msg)))
            .map(|e| e.seq)
            .ok_or(EngineError::ReplayMismatch { step: record.step })?;
        self.transmit(seq)
    }
}

/// Re-applies a recorded trace to a fresh simulation, rejecting any
/// transmission the state does not admit.
pub fn replay(
    router: Router<'_>,
    algorithm: Algorithm,
    inst: &GeocastInstance,
    trace: &[TraceRecord],
) -> Result<SimState, EngineError> {
    let mut sim = Simulation::new(router, algorithm, inst, Policy::Fifo);
    for record in trace {
        sim.replay_step(record)?;
    }
    if !sim.state.is_quiescent() {
        return Err(EngineError::ReplayIncomplete {
            queued: sim.state.queued(),
        });
    }
    Ok(sim.into_state())
}

// ---- topology ----

/// Order in which backbone restriction and planarization are applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CdsOrder {
    /// Backbone of the Gabriel graph; planar routing on the Gabriel edges
    /// among backbone devices.
    CdsOfGabriel,
    /// Backbone of the unit-disk graph; planar routing on the Gabriel graph
    /// of the backbone.
    GabrielOfCds,
}

/// The graphs one scenario routes on.
#[derive(Debug, Clone)]
pub struct Topology {
    pub udg: Network,
    pub gabriel: Network,
    pub cds: Option<(CdsOrder, Vec<DeviceId>)>,
}

/// Graphs and instance ready for one run.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub flood: Network,
    pub planar: Network,
    pub members: Option<Vec<bool>>,
    pub inst: GeocastInstance,
    pub target: Rect,
}

impl Topology {
    pub fn new(udg: Network, cds: Option<CdsOrder>) -> Self {
        let gabriel = gabriel_subgraph(&udg);
        let cds = cds.map(|order| {
            let backbone = match order {
                CdsOrder::CdsOfGabriel => cds_backbone(&gabriel),
                CdsOrder::GabrielOfCds => cds_backbone(&udg),
            };
            (order, backbone)
        });
        Self { udg, gabriel, cds }
    }

    /// Graphs for `algorithm`. With a backbone, routing covers the backbone
    /// plus the source, and the routing region is grown by one radius so
    /// backbone devices adjacent to any target take part.
    pub fn prepare(&self, algorithm: Algorithm, inst: &GeocastInstance) -> Prepared {
        match &self.cds {
            Some((order, backbone)) if algorithm.uses_planar() => {
                let mut members = vec![false; self.udg.len()];
                for d in backbone {
                    members[d.index()] = true;
                }
                members[inst.source.index()] = true;
                let flood = self.udg.induced(&members);
                let planar = match order {
                    CdsOrder::CdsOfGabriel => self.gabriel.induced(&members),
                    CdsOrder::GabrielOfCds => gabriel_subgraph(&flood),
                };
                let routed = GeocastInstance::anchored(
                    inst.source,
                    inst.source_point,
                    inst.region.inflate(self.udg.radius()),
                );
                Prepared {
                    flood,
                    planar,
                    members: Some(members),
                    inst: routed,
                    target: inst.region,
                }
            }
            _ => Prepared {
                flood: self.udg.clone(),
                planar: self.gabriel.clone(),
                members: None,
                inst: *inst,
                target: inst.region,
            },
        }
    }
}

impl Prepared {
    pub fn router<'a>(&'a self, physical: &'a Network) -> Router<'a> {
        Router {
            flood: &self.flood,
            planar: &self.planar,
            delivery: self.members.as_deref().map(|members| Delivery {
                physical,
                members,
                targets: self.target,
            }),
        }
    }
}

// ---- metrics ----

/// How the furthest target is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Furthest {
    /// Largest hop distance on the full unit-disk graph.
    #[default]
    Hops,
    /// Largest Euclidean distance from the source.
    Euclidean,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub message_cost: u64,
    pub annihilated: u64,
    pub visited: BTreeSet<DeviceId>,
    /// In-region devices that received the message.
    pub region_covered: BTreeSet<DeviceId>,
    /// In-region devices connected to the source.
    pub targets: usize,
    pub furthest: Option<DeviceId>,
    pub latency: Option<u32>,
    pub path_stretch: Option<f64>,
    pub normalized_cost: Option<f64>,
    pub delivery_rate: Option<f64>,
}

pub fn compute_metrics(
    state: &SimState,
    udg: &Network,
    source: DeviceId,
    region: Rect,
    furthest: Furthest,
) -> Metrics {
    let hops = bfs_hops(udg, source);
    let visited: BTreeSet<DeviceId> = udg
        .devices()
        .filter(|d| state.arrival[d.index()].is_some())
        .collect();
    let targets: Vec<DeviceId> = udg
        .devices()
        .filter(|&d| hops[d.index()].is_some() && region.contains(udg.position(d)))
        .collect();
    let region_covered: BTreeSet<DeviceId> = targets
        .iter()
        .copied()
        .filter(|d| visited.contains(d))
        .collect();

    let far = match furthest {
        Furthest::Hops => targets
            .iter()
            .copied()
            .max_by(|a, b| hops[a.index()].cmp(&hops[b.index()]).then(b.cmp(a))),
        Furthest::Euclidean => {
            let s = udg.position(source);
            targets.iter().copied().max_by(|a, b| {
                udg.position(*a)
                    .dist2(s)
                    .total_cmp(&udg.position(*b).dist2(s))
                    .then(b.cmp(a))
            })
        }
    };
    let latency = far.and_then(|t| state.arrival[t.index()]);
    let path_stretch = match (far, latency) {
        (Some(t), Some(l)) => match hops[t.index()] {
            Some(h) if h > 0 => Some(l as f64 / h as f64),
            _ => None,
        },
        _ => None,
    };
    let message_cost = state.transmissions();
    let (normalized_cost, delivery_rate) = if targets.is_empty() {
        (None, None)
    } else {
        let t = targets.len() as f64;
        (
            Some(message_cost as f64 / t),
            Some(region_covered.len() as f64 / t),
        )
    };
    Metrics {
        message_cost,
        annihilated: state.annihilated,
        visited,
        region_covered,
        targets: targets.len(),
        furthest: far,
        latency,
        path_stretch,
        normalized_cost,
        delivery_rate,
    }
}

/// Edges of the component of `net` containing `d`.
pub fn component_edge_count(net: &Network, d: DeviceId) -> usize {
    let labels = components(net);
    let c = labels[d.index()];
    net.edges().filter(|(u, _)| labels[u.index()] == c).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub policy: Policy,
    pub furthest: Furthest,
    /// Step budget; [`default_budget`] of the unit-disk graph when `None`.
    pub budget: Option<u64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            policy: Policy::Fifo,
            furthest: Furthest::Hops,
            budget: None,
        }
    }
}

/// Initiates `algorithm` at the instance source and runs to quiescence.
pub fn run(
    topology: &Topology,
    inst: &GeocastInstance,
    algorithm: Algorithm,
    options: RunOptions,
) -> Result<(SimState, Metrics), EngineError> {
    let prepared = topology.prepare(algorithm, inst);
    let router = prepared.router(&topology.udg);
    let mut sim = Simulation::new(router, algorithm, &prepared.inst, options.policy);
    if let Some(budget) = options.budget {
        sim = sim.with_budget(budget);
    }
    sim.run()?;
    let state = sim.into_state();
    let metrics = compute_metrics(&state, &topology.udg, inst.source, inst.region, options.furthest);
    Ok((state, metrics))
}

// ---- trace ----

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceMode {
    Flood,
    Planar,
    Greedy,
    Deliver,
}

/// One transmission as written to a JSON-lines trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceRecord {
    pub step: u64,
    pub mode: TraceMode,
    pub dir: Option<Rule>,
    pub sender: DeviceId,
    pub receiver: DeviceId,
    pub depth: u32,
}

impl TraceRecord {
    pub fn of(event: &Event) -> Self {
        let m = &event.message;
        let (mode, dir) = match m.mode {
            Mode::Flood => (TraceMode::Flood, None),
            Mode::Planar(r) => (TraceMode::Planar, Some(r)),
            Mode::Greedy => (TraceMode::Greedy, None),
            Mode::Deliver => (TraceMode::Deliver, None),
        };
        Self {
            step: event.step,
            mode,
            dir,
            sender: m.sender,
            receiver: m.receiver,
            depth: m.depth,
        }
    }

    fn matches(&self, m: &Message) -> bool {
        let mode = match (self.mode, self.dir) {
            (TraceMode::Flood, None) => Mode::Flood,
            (TraceMode::Planar, Some(r)) => Mode::Planar(r),
            (TraceMode::Greedy, None) => Mode::Greedy,
            (TraceMode::Deliver, None) => Mode::Deliver,
            _ => return false,
        };
        m.mode == mode && m.sender == self.sender && m.receiver == self.receiver && m.depth == self.depth
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("cannot read trace: {0}")]
    Io(#[from] std::io::Error),
    #[error("trace line {line}: {message}")]
    Syntax { line: usize, message: String },
}

pub fn write_trace<W: Write>(mut out: W, transcript: &[Event]) -> std::io::Result<()> {
    for e in transcript {
        serde_json::to_writer(&mut out, &TraceRecord::of(e))?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_trace<R: BufRead>(input: R) -> Result<Vec<TraceRecord>, TraceError> {
    let mut records = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| TraceError::Syntax {
            line: i + 1,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}

// ---- graph export ----

/// Graphviz rendering with nodes pinned at their positions. Used edges are
/// drawn bold red, targets filled.
pub fn to_dot(net: &Network, region: Rect, source: DeviceId, used: &BTreeSet<(DeviceId, DeviceId)>) -> String {
    let mut s = String::from("graph network {\n  node [shape=circle, width=0.08, label=\"\"];\n");
    for d in net.devices() {
        let p = net.position(d);
        let style = if d == source {
            ", style=filled, fillcolor=blue"
        } else if region.contains(p) {
            ", style=filled, fillcolor=orange"
        } else {
            ""
        };
        let _ = writeln!(s, "  {} [pos=\"{},{}!\"{}];", d.0, p.x, p.y, style);
    }
    for (u, v) in net.edges() {
        let attr = if used.contains(&(u, v)) {
            " [color=red, penwidth=2]"
        } else {
            " [color=gray]"
        };
        let _ = writeln!(s, "  {} -- {}{};", u.0, v.0, attr);
    }
    s.push_str("}\n");
    s
}

/// Standalone SVG rendering, y axis pointing up.
pub fn to_svg(net: &Network, region: Rect, source: DeviceId, used: &BTreeSet<(DeviceId, DeviceId)>) -> String {
    const SCALE: f64 = 40.0;
    const MARGIN: f64 = 10.0;
    let (mut max_x, mut max_y) = (region.max.x, region.max.y);
    for p in net.positions() {
        max_x = max_x.max(p.x);
        max_y = max_y.max(p.y);
    }
    let (mut min_x, mut min_y) = (region.min.x, region.min.y);
    for p in net.positions() {
        min_x = min_x.min(p.x);
        min_y = min_y.min(p.y);
    }
    let w = (max_x - min_x) * SCALE + 2.0 * MARGIN;
    let h = (max_y - min_y) * SCALE + 2.0 * MARGIN;
    let tx = |x: f64| (x - min_x) * SCALE + MARGIN;
    let ty = |y: f64| (max_y - y) * SCALE + MARGIN;

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.1}\" height=\"{h:.1}\" viewBox=\"0 0 {w:.1} {h:.1}\">"
    );
    let _ = writeln!(
        s,
        "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#fde9c8\" stroke=\"orange\"/>",
        tx(region.min.x),
        ty(region.max.y),
        (region.max.x - region.min.x) * SCALE,
        (region.max.y - region.min.y) * SCALE
    );
    for (u, v) in net.edges() {
        let (a, b) = (net.position(u), net.position(v));
        let (stroke, width) = if used.contains(&(u, v)) {
            ("red", 2.0)
        } else {
            ("#bbbbbb", 0.7)
        };
        let _ = writeln!(
            s,
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{stroke}\" stroke-width=\"{width}\"/>",
            tx(a.x),
            ty(a.y),
            tx(b.x),
            ty(b.y)
        );
    }
    for d in net.devices() {
        let p = net.position(d);
        let fill = if d == source { "blue" } else { "black" };
        let _ = writeln!(
            s,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{fill}\"/>",
            tx(p.x),
            ty(p.y)
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Rect {
        Rect::new(p(x0, y0), p(x1, y1)).unwrap()
    }

    fn path() -> Network {
        Network::unit_disk(&[p(0.0, 0.0), p(0.9, 0.0), p(1.8, 0.0)], 1.0).unwrap()
    }

    #[test]
    fn empty_queues_are_quiescent() {
        let net = Network::unit_disk(&[p(0.0, 0.0)], 1.0).unwrap();
        let inst = GeocastInstance::new(&net, DeviceId(0), rect(0.0, 0.0, 1.0, 1.0));
        let mut sim = Simulation::new(Router::new(&net, &net), Algorithm::Sf, &inst, Policy::Fifo);
        assert_eq!(sim.step().unwrap(), None);
        assert!(sim.state().is_quiescent());
    }

    #[test]
    fn single_message_to_a_leaf() {
        let net = Network::unit_disk(&[p(0.0, 0.0), p(0.5, 0.0)], 1.0).unwrap();
        let inst = GeocastInstance::new(&net, DeviceId(0), rect(0.0, 0.0, 1.0, 1.0));
        let mut sim = Simulation::new(Router::new(&net, &net), Algorithm::Sf, &inst, Policy::Fifo);
        assert!(sim.step().unwrap().is_some());
        assert_eq!(sim.step().unwrap(), None);
        assert_eq!(sim.state().transmissions(), 1);
    }

    #[test]
    fn sf_on_a_path() {
        let topo = Topology::new(path(), None);
        let inst = GeocastInstance::new(&topo.udg, DeviceId(0), rect(1.7, -0.1, 1.9, 0.1));
        let (state, m) = run(&topo, &inst, Algorithm::Sf, RunOptions::default()).unwrap();
        assert_eq!(m.message_cost, 2);
        assert_eq!(m.latency, Some(2));
        assert_eq!(m.path_stretch, Some(1.0));
        assert_eq!(m.normalized_cost, Some(2.0));
        assert_eq!(state.arrival, vec![Some(0), Some(1), Some(2)]);
    }

    #[test]
    fn spg_on_a_triangle_within_two_e() {
        let net = Network::unit_disk(&[p(0.0, 0.0), p(0.6, 0.0), p(0.3, 0.5)], 1.0).unwrap();
        let topo = Topology::new(net, None);
        let inst = GeocastInstance::new(&topo.udg, DeviceId(0), rect(-0.5, -0.5, 1.0, 1.0));
        for policy in [Policy::Fifo, Policy::Lifo, Policy::Random(3)] {
            let (state, m) = run(&topo, &inst, Algorithm::Spg, RunOptions { policy, ..Default::default() }).unwrap();
            assert!(m.message_cost <= 6, "{}", m.message_cost);
            assert_eq!(m.region_covered.len(), 3);
            assert!(state.is_quiescent());
        }
    }

    #[test]
    fn source_alone_in_region() {
        let topo = Topology::new(path(), None);
        let inst = GeocastInstance::new(&topo.udg, DeviceId(0), rect(-0.1, -0.1, 0.1, 0.1));
        let (_, m) = run(&topo, &inst, Algorithm::Sf, RunOptions::default()).unwrap();
        assert_eq!(m.latency, Some(0));
        assert_eq!(m.path_stretch, None);
    }

    #[test]
    fn disconnected_targets_are_not_counted() {
        let net = Network::unit_disk(&[p(0.0, 0.0), p(0.9, 0.0), p(5.0, 0.0)], 1.0).unwrap();
        let topo = Topology::new(net, None);
        let inst = GeocastInstance::new(&topo.udg, DeviceId(0), rect(4.0, -1.0, 6.0, 1.0));
        for alg in Algorithm::ALL {
            let (_, m) = run(&topo, &inst, alg, RunOptions::default()).unwrap();
            assert_eq!(m.targets, 0, "{alg}");
            assert_eq!(m.latency, None);
            assert!(m.normalized_cost.is_none());
        }
    }

    #[test]
    fn budget_exhaustion_is_a_fault() {
        let topo = Topology::new(path(), None);
        let inst = GeocastInstance::new(&topo.udg, DeviceId(0), rect(1.7, -0.1, 1.9, 0.1));
        let prepared = topo.prepare(Algorithm::Sf, &inst);
        let mut sim = Simulation::new(prepared.router(&topo.udg), Algorithm::Sf, &inst, Policy::Fifo).with_budget(1);
        assert!(matches!(sim.run(), Err(EngineError::NonTermination { steps: 1, budget: 1, .. })));
    }

    #[test]
    fn trace_round_trip_and_replay() {
        let pts: Vec<Point> = (0..12).map(|i| p((i % 4) as f64 * 0.7, (i / 4) as f64 * 0.7)).collect();
        let topo = Topology::new(Network::unit_disk(&pts, 1.0).unwrap(), None);
        let inst = GeocastInstance::new(&topo.udg, DeviceId(0), rect(1.5, 1.0, 2.2, 1.5));
        for alg in Algorithm::ALL {
            let opts = RunOptions { policy: Policy::Random(9), ..Default::default() };
            let (state, _) = run(&topo, &inst, alg, opts).unwrap();
            let mut buf = Vec::new();
            write_trace(&mut buf, &state.transcript).unwrap();
            let records = read_trace(buf.as_slice()).unwrap();
            assert_eq!(records.len(), state.transcript.len());
            let prepared = topo.prepare(alg, &inst);
            let again = replay(prepared.router(&topo.udg), alg, &prepared.inst, &records).unwrap();
            assert_eq!(again.arrival, state.arrival);
            assert_eq!(again.used_edges(), state.used_edges());
            assert_eq!(again.annihilated, state.annihilated);
        }
    }

    #[test]
    fn trace_record_shape() {
        let net = path();
        let inst = GeocastInstance::new(&net, DeviceId(0), rect(1.7, -0.1, 1.9, 0.1));
        let e = Event {
            step: 4,
            seq: 9,
            message: Message::new(Mode::Planar(Rule::R), DeviceId(1), DeviceId(2), inst, 3),
        };
        let line = serde_json::to_string(&TraceRecord::of(&e)).unwrap();
        assert_eq!(line, r#"{"step":4,"mode":"planar","dir":"R","sender":1,"receiver":2,"depth":3}"#);
        let e = Event {
            message: Message::new(Mode::Flood, DeviceId(1), DeviceId(2), inst, 3),
            ..e
        };
        assert!(serde_json::to_string(&TraceRecord::of(&e)).unwrap().contains(r#""dir":null"#));
        assert!(matches!(
            read_trace("{\"step\":0}\n".as_bytes()),
            Err(TraceError::Syntax { line: 1, .. })
        ));
    }

    #[test]
    fn policy_parsing() {
        assert_eq!("fifo".parse::<Policy>().unwrap(), Policy::Fifo);
        assert_eq!("random:17".parse::<Policy>().unwrap(), Policy::Random(17));
        assert!("oldest".parse::<Policy>().is_err());
    }

    #[test]
    fn backbone_run_reaches_every_target() {
        let pts: Vec<Point> = (0..30).map(|i| p((i % 6) as f64 * 0.6, (i / 6) as f64 * 0.6)).collect();
        let udg = Network::unit_disk(&pts, 1.0).unwrap();
        for order in [CdsOrder::CdsOfGabriel, CdsOrder::GabrielOfCds] {
            let topo = Topology::new(udg.clone(), Some(order));
            let inst = GeocastInstance::new(&topo.udg, DeviceId(0), rect(1.7, 1.7, 3.0, 2.4));
            for alg in Algorithm::ALL {
                let (_, m) = run(&topo, &inst, alg, RunOptions::default()).unwrap();
                assert_eq!(m.delivery_rate, Some(1.0), "{alg} {order:?}");
            }
        }
    }

    #[test]
    fn dot_and_svg_mark_used_edges() {
        let net = path();
        let used: BTreeSet<_> = [(DeviceId(0), DeviceId(1))].into_iter().collect();
        let region = rect(1.7, -0.1, 1.9, 0.1);
        let dot = to_dot(&net, region, DeviceId(0), &used);
        assert!(dot.contains("0 -- 1 [color=red"));
        assert!(dot.contains("1 -- 2 [color=gray]"));
        let svg = to_svg(&net, region, DeviceId(0), &used);
        assert_eq!(svg.matches("stroke=\"red\"").count(), 1);
        assert_eq!(svg.matches("<circle").count(), 3);
    }
}
