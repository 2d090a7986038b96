//! The stateless geocast algorithms as pure handlers.
//!
//! A handler sees the network, the device it runs on, the message that just
//! arrived and the device's send queue. It answers with an [`Outcome`]: either
//! a queued mate to discard or the messages to append. Devices keep nothing
//! else between transmissions.
//!
//! A planar message does not name the face it traverses. The face follows
//! from `(sender, receiver, rule)`: with neighbors kept in counter-clockwise
//! order, a right-hand message from neighbor `i` is in the wedge between
//! neighbors `i - 1` and `i`, a left-hand one in the wedge between `i` and
//! `i + 1`. Injecting a pair into the wedge `(cw_side, ccw_side)` therefore
//! sends the right-hand message to `cw_side` and the left-hand one to
//! `ccw_side`, exactly as if each had arrived from the opposite side.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geometry::{Point, Rect, Rule};
use crate::netgraph::{
    local_faces, wedge_qualifies, wedge_toward, DeviceId, GeocastInstance, Network, Wedge,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    Flood,
    Planar(Rule),
    /// Single-path forwarding toward the region center.
    Greedy,
    /// Final one-hop hand-off from a backbone device; never forwarded.
    Deliver,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Flood => "flood",
            Mode::Planar(_) => "planar",
            Mode::Greedy => "greedy",
            Mode::Deliver => "deliver",
        }
    }

    pub fn rule(self) -> Option<Rule> {
        match self {
            Mode::Planar(r) => Some(r),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub mode: Mode,
    pub sender: DeviceId,
    pub receiver: DeviceId,
    pub inst: GeocastInstance,
    pub depth: u32,
}

impl Message {
    pub fn new(
        mode: Mode,
        sender: DeviceId,
        receiver: DeviceId,
        inst: GeocastInstance,
        depth: u32,
    ) -> Self {
        Self {
            mode,
            sender,
            receiver,
            inst,
            depth,
        }
    }
}

/// Two messages are mates when each one's sender is the other's receiver,
/// they belong to the same geocast, and they are either both flood messages
/// or planar messages with opposite rules.
pub fn mate_matches(m1: &Message, m2: &Message) -> bool {
    let modes = match (m1.mode, m2.mode) {
        (Mode::Flood, Mode::Flood) => true,
        (Mode::Planar(a), Mode::Planar(b)) => a != b,
        _ => false,
    };
    modes && m1.sender == m2.receiver && m1.receiver == m2.sender && m1.inst == m2.inst
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Queued {
    /// Global enqueue order, assigned by the engine.
    pub seq: u64,
    pub msg: Message,
}

/// Messages waiting at one device, oldest first.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SendQueue {
    entries: VecDeque<Queued>,
}

impl SendQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, seq: u64, msg: Message) {
        self.entries.push_back(Queued { seq, msg });
    }

    pub fn remove(&mut self, position: usize) -> Option<Queued> {
        self.entries.remove(position)
    }

    pub fn position_of_seq(&self, seq: u64) -> Option<usize> {
        self.entries.iter().position(|q| q.seq == seq)
    }

    /// Oldest queued mate of `m`.
    pub fn mate_position(&self, m: &Message) -> Option<usize> {
        self.entries.iter().position(|q| mate_matches(&q.msg, m))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Queued> {
        self.entries.iter()
    }

    pub fn messages(&self) -> impl Iterator<Item = &Message> {
        self.entries.iter().map(|q| &q.msg)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    /// Discard the queued mate at this position; nothing is sent.
    Annihilate { position: usize },
    Emit(Vec<Message>),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProtocolError {
    #[error("device {device} received a planar message from non-neighbor {sender}")]
    NotNeighbor { device: DeviceId, sender: DeviceId },
    #[error("device {device} cannot handle a {mode} message under {algorithm}")]
    UnexpectedMode {
        device: DeviceId,
        mode: &'static str,
        algorithm: Algorithm,
    },
}

/// Backbone restriction: routing runs on backbone devices only, and each
/// backbone device hands the message to its non-backbone target neighbors.
#[derive(Debug, Clone, Copy)]
pub struct Delivery<'a> {
    pub physical: &'a Network,
    pub members: &'a [bool],
    pub targets: Rect,
}

/// The graphs a run routes on.
#[derive(Debug, Clone, Copy)]
pub struct Router<'a> {
    /// Flooding and greedy forwarding.
    pub flood: &'a Network,
    /// Face traversal; must be planar.
    pub planar: &'a Network,
    pub delivery: Option<Delivery<'a>>,
}

impl<'a> Router<'a> {
    pub fn new(flood: &'a Network, planar: &'a Network) -> Self {
        Self {
            flood,
            planar,
            delivery: None,
        }
    }

    fn in_region(&self, inst: &GeocastInstance, d: DeviceId) -> bool {
        inst.region.contains(self.flood.position(d))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "sf")]
    Sf,
    #[serde(rename = "spg")]
    Spg,
    #[serde(rename = "sf-spg")]
    SfSpg,
    #[serde(rename = "sf-spg-g")]
    SfSpgG,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Sf,
        Algorithm::Spg,
        Algorithm::SfSpg,
        Algorithm::SfSpgG,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Sf => "sf",
            Algorithm::Spg => "spg",
            Algorithm::SfSpg => "sf-spg",
            Algorithm::SfSpgG => "sf-spg-g",
        }
    }

    /// SF floods the whole unit-disk graph and ignores any backbone.
    pub fn uses_planar(self) -> bool {
        self != Algorithm::Sf
    }

    /// Messages the source queues to start the geocast.
    pub fn initiate(self, router: &Router<'_>, inst: &GeocastInstance) -> Vec<Message> {
        let mut out = match self {
            Algorithm::Sf => sf_initiate(router.flood, inst),
            Algorithm::Spg => spg_initiate(router.planar, inst),
            Algorithm::SfSpg => combined_initiate(router, inst),
            Algorithm::SfSpgG => greedy_initiate(router, inst),
        };
        deliver_from(router, inst.source, inst, 1, &mut out);
        out
    }

    pub fn handle(
        self,
        router: &Router<'_>,
        d: DeviceId,
        m: &Message,
        sq: &SendQueue,
    ) -> Result<Outcome, ProtocolError> {
        if m.mode == Mode::Deliver {
            return Ok(Outcome::Emit(Vec::new()));
        }
        let outcome = match self {
            Algorithm::Sf => match m.mode {
                Mode::Flood => sf_handle(router.flood, d, m, sq),
                other => return Err(self.unexpected(d, other)),
            },
            Algorithm::Spg => match m.mode {
                Mode::Planar(_) => spg_handle(router.planar, d, m, sq)?,
                other => return Err(self.unexpected(d, other)),
            },
            Algorithm::SfSpg => match m.mode {
                Mode::Flood | Mode::Planar(_) => combined_handle(router, d, m, sq)?,
                other => return Err(self.unexpected(d, other)),
            },
            Algorithm::SfSpgG => greedy_handle(router, d, m, sq)?,
        };
        Ok(match outcome {
            Outcome::Emit(mut out) => {
                deliver_from(router, d, &m.inst, m.depth + 1, &mut out);
                Outcome::Emit(out)
            }
            annihilate => annihilate,
        })
    }

    fn unexpected(self, device: DeviceId, mode: Mode) -> ProtocolError {
        ProtocolError::UnexpectedMode {
            device,
            mode: mode.name(),
            algorithm: self,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm `{s}` (expected sf, spg, sf-spg or sf-spg-g)"))
    }
}

fn deliver_from(
    router: &Router<'_>,
    d: DeviceId,
    inst: &GeocastInstance,
    depth: u32,
    out: &mut Vec<Message>,
) {
    let Some(delivery) = router.delivery else {
        return;
    };
    if !delivery.members[d.index()] {
        return;
    }
    for &t in delivery.physical.neighbors(d) {
        if !delivery.members[t.index()] && delivery.targets.contains(delivery.physical.position(t)) {
            out.push(Message::new(Mode::Deliver, d, t, *inst, depth));
        }
    }
}

// ---- SF ----

pub fn sf_initiate(net: &Network, inst: &GeocastInstance) -> Vec<Message> {
    net.neighbors(inst.source)
        .iter()
        .map(|&n| Message::new(Mode::Flood, inst.source, n, *inst, 1))
        .collect()
}

pub fn sf_handle(net: &Network, d: DeviceId, m: &Message, sq: &SendQueue) -> Outcome {
    if let Some(position) = sq.mate_position(m) {
        return Outcome::Annihilate { position };
    }
    Outcome::Emit(
        net.neighbors(d)
            .iter()
            .filter(|&&n| n != m.sender)
            .map(|&n| Message::new(Mode::Flood, d, n, m.inst, m.depth + 1))
            .collect(),
    )
}

// ---- SPG ----

fn push_pair(
    out: &mut Vec<Message>,
    d: DeviceId,
    wedge: &Wedge,
    inst: &GeocastInstance,
    depth: u32,
) {
    out.push(Message::new(Mode::Planar(Rule::L), d, wedge.ccw_side, *inst, depth));
    out.push(Message::new(Mode::Planar(Rule::R), d, wedge.cw_side, *inst, depth));
}

/// Starts a pair of opposite traversals at `d` in the face the sr-line of
/// `inst` leaves `d` through. When that face qualifies, `d` also splits into
/// every other qualifying face, as a juncture does on its first visit, so no
/// later arrival at `d` reopens a face already traversed from here.
fn spg_start(net: &Network, d: DeviceId, inst: &GeocastInstance, depth: u32) -> Vec<Message> {
    let faces = local_faces(net, d);
    if faces.is_empty() {
        return Vec::new();
    }
    let chosen = if inst.sr_line.is_degenerate() {
        faces
            .iter()
            .copied()
            .find(|w| wedge_qualifies(net, d, w, inst))
            .unwrap_or(faces[0])
    } else {
        wedge_toward(net, d, inst.sr_line.b).unwrap_or(faces[0])
    };
    let mut out = Vec::with_capacity(2);
    push_pair(&mut out, d, &chosen, inst, depth);
    if wedge_qualifies(net, d, &chosen, inst) {
        for w in &faces {
            if w.index != chosen.index && wedge_qualifies(net, d, w, inst) {
                push_pair(&mut out, d, w, inst, depth);
            }
        }
    }
    out
}

pub fn spg_initiate(net: &Network, inst: &GeocastInstance) -> Vec<Message> {
    spg_start(net, inst.source, inst, 1)
}

pub fn spg_handle(
    net: &Network,
    d: DeviceId,
    m: &Message,
    sq: &SendQueue,
) -> Result<Outcome, ProtocolError> {
    if let Some(position) = sq.mate_position(m) {
        return Ok(Outcome::Annihilate { position });
    }
    let Mode::Planar(rule) = m.mode else {
        return Err(ProtocolError::UnexpectedMode {
            device: d,
            mode: m.mode.name(),
            algorithm: Algorithm::Spg,
        });
    };
    let i = net
        .rotation_index(d, m.sender)
        .ok_or(ProtocolError::NotNeighbor {
            device: d,
            sender: m.sender,
        })?;
    let nbrs = net.neighbors(d);
    let k = nbrs.len();
    let (next, current) = match rule {
        Rule::R => ((i + k - 1) % k, (i + k - 1) % k),
        Rule::L => ((i + 1) % k, i),
    };
    let depth = m.depth + 1;
    let mut out = vec![Message::new(m.mode, d, nbrs[next], m.inst, depth)];

    let qualifies: Vec<bool> = nbrs
        .iter()
        .map(|&v| m.inst.edge_qualifies(net.segment(d, v)))
        .collect();
    let wedge_ok = |j: usize| qualifies[j] || qualifies[(j + 1) % k];
    if wedge_ok(current) {
        for w in local_faces(net, d) {
            if w.index != current && wedge_ok(w.index) {
                push_pair(&mut out, d, &w, &m.inst, depth);
            }
        }
    }
    Ok(Outcome::Emit(out))
}

// ---- SF+SPG ----

/// In-region rule: flood every in-region neighbor, start a pair of planar
/// traversals toward every outside planar neighbor, and bounce a planar
/// arrival back to its sender with its rule unchanged.
fn in_region_emit(
    router: &Router<'_>,
    d: DeviceId,
    inst: &GeocastInstance,
    arrival: Option<&Message>,
    depth: u32,
) -> Vec<Message> {
    let flood_from = arrival.filter(|m| m.mode == Mode::Flood).map(|m| m.sender);
    let planar_from = arrival.and_then(|m| m.mode.rule().map(|r| (m.sender, r)));
    let mut out = Vec::new();
    for &v in router.flood.neighbors(d) {
        if Some(v) != flood_from && router.in_region(inst, v) {
            out.push(Message::new(Mode::Flood, d, v, *inst, depth));
        }
    }
    for &v in router.planar.neighbors(d) {
        if router.in_region(inst, v) {
            continue;
        }
        match planar_from {
            Some((sender, rule)) if sender == v => {
                out.push(Message::new(Mode::Planar(rule), d, v, *inst, depth));
            }
            _ => {
                out.push(Message::new(Mode::Planar(Rule::L), d, v, *inst, depth));
                out.push(Message::new(Mode::Planar(Rule::R), d, v, *inst, depth));
            }
        }
    }
    out
}

fn combined_initiate(router: &Router<'_>, inst: &GeocastInstance) -> Vec<Message> {
    if router.in_region(inst, inst.source) {
        in_region_emit(router, inst.source, inst, None, 1)
    } else {
        spg_initiate(router.planar, inst)
    }
}

pub fn combined_handle(
    router: &Router<'_>,
    d: DeviceId,
    m: &Message,
    sq: &SendQueue,
) -> Result<Outcome, ProtocolError> {
    if !router.in_region(&m.inst, d) {
        return spg_handle(router.planar, d, m, sq);
    }
    if let Some(position) = sq.mate_position(m) {
        return Ok(Outcome::Annihilate { position });
    }
    Ok(Outcome::Emit(in_region_emit(
        router,
        d,
        &m.inst,
        Some(m),
        m.depth + 1,
    )))
}

// ---- SF+SPG+G ----

/// Neighbor strictly closer to `target` than `d`, nearest first, ties to the
/// lowest id.
fn greedy_next(net: &Network, d: DeviceId, target: Point) -> Option<DeviceId> {
    let here = net.position(d).dist2(target);
    net.neighbors(d)
        .iter()
        .copied()
        .map(|v| (net.position(v).dist2(target), v))
        .filter(|(dist, _)| *dist < here)
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(_, v)| v)
}

/// Greedy step at `d`: forward, hand over to the in-region rule, or at a
/// local minimum restart face traversal with the sr-line anchored at `d`.
fn greedy_step(
    router: &Router<'_>,
    d: DeviceId,
    inst: &GeocastInstance,
    arrival: Option<&Message>,
    depth: u32,
) -> Vec<Message> {
    if router.in_region(inst, d) {
        let local = inst.reanchor(router.flood, d);
        return in_region_emit(router, d, &local, arrival, depth);
    }
    match greedy_next(router.flood, d, inst.region.center()) {
        Some(next) => vec![Message::new(Mode::Greedy, d, next, *inst, depth)],
        None => spg_start(router.planar, d, &inst.reanchor(router.planar, d), depth),
    }
}

pub fn greedy_initiate(router: &Router<'_>, inst: &GeocastInstance) -> Vec<Message> {
    greedy_step(router, inst.source, inst, None, 1)
}

pub fn greedy_handle(
    router: &Router<'_>,
    d: DeviceId,
    m: &Message,
    sq: &SendQueue,
) -> Result<Outcome, ProtocolError> {
    match m.mode {
        Mode::Greedy => Ok(Outcome::Emit(greedy_step(
            router,
            d,
            &m.inst,
            Some(m),
            m.depth + 1,
        ))),
        _ => combined_handle(router, d, m, sq),
    }
}
