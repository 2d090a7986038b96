//! Network construction: unit-disk graphs, the Gabriel planar overlay, a
//! connected dominating set backbone, and the graph oracles the protocol and
//! the metrics are checked against.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::{
    angular_cmp, in_ccw_sweep, orientation, segment_intersects_rect, segments_intersect,
    Orientation, Point, Rect, Segment,
};

pub mod scenario;

pub use scenario::{Scenario, ScenarioError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DeviceId(pub u32);

impl DeviceId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for DeviceId {
    fn from(i: usize) -> Self {
        DeviceId(i as u32)
    }
}

impl fmt::Display for DeviceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NetError {
    #[error("devices {0} and {1} share coordinates")]
    DuplicatePoint(DeviceId, DeviceId),
    #[error("device {0} has non-finite coordinates")]
    NonFinite(DeviceId),
    #[error("radius must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error("edge {0}-{1} is invalid: {2}")]
    BadEdge(DeviceId, DeviceId, &'static str),
}

/// Devices embedded in the plane with a symmetric adjacency. Each neighbor
/// list is sorted counter-clockwise around its device starting at the
/// positive x axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    positions: Vec<Point>,
    adjacency: Vec<Vec<DeviceId>>,
    radius: f64,
}

impl Network {
    /// Unit-disk graph: an edge joins every pair at distance at most `radius`.
    pub fn unit_disk(points: &[Point], radius: f64) -> Result<Network, NetError> {
        validate_points(points, radius)?;
        let r2 = radius * radius;
        let mut adjacency = vec![Vec::new(); points.len()];
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if points[i].dist2(points[j]) <= r2 {
                    adjacency[i].push(DeviceId::from(j));
                    adjacency[j].push(DeviceId::from(i));
                }
            }
        }
        Ok(Network::sorted(points.to_vec(), adjacency, radius))
    }

    /// Network with an explicit edge list. Edges must join distinct devices
    /// and be no longer than `radius`.
    pub fn from_edges(
        points: &[Point],
        edges: &[(usize, usize)],
        radius: f64,
    ) -> Result<Network, NetError> {
        validate_points(points, radius)?;
        let mut adjacency: Vec<Vec<DeviceId>> = vec![Vec::new(); points.len()];
        for &(u, v) in edges {
            let (du, dv) = (DeviceId::from(u), DeviceId::from(v));
            if u >= points.len() || v >= points.len() {
                return Err(NetError::BadEdge(du, dv, "endpoint out of range"));
            }
            if u == v {
                return Err(NetError::BadEdge(du, dv, "self-loop"));
            }
            if points[u].dist2(points[v]) > radius * radius {
                return Err(NetError::BadEdge(du, dv, "longer than radius"));
            }
            if adjacency[u].contains(&dv) {
                continue;
            }
            adjacency[u].push(dv);
            adjacency[v].push(du);
        }
        Ok(Network::sorted(points.to_vec(), adjacency, radius))
    }

    fn sorted(positions: Vec<Point>, mut adjacency: Vec<Vec<DeviceId>>, radius: f64) -> Network {
        for (i, nbrs) in adjacency.iter_mut().enumerate() {
            let c = positions[i];
            nbrs.sort_by(|a, b| angular_cmp(c, positions[a.index()], positions[b.index()]));
        }
        Network {
            positions,
            adjacency,
            radius,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn position(&self, d: DeviceId) -> Point {
        self.positions[d.index()]
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    /// Neighbors in counter-clockwise order.
    pub fn neighbors(&self, d: DeviceId) -> &[DeviceId] {
        &self.adjacency[d.index()]
    }

    pub fn degree(&self, d: DeviceId) -> usize {
        self.adjacency[d.index()].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn devices(&self) -> impl Iterator<Item = DeviceId> + '_ {
        (0..self.len()).map(DeviceId::from)
    }

    /// Each undirected edge once, as `(lower, higher)`.
    pub fn edges(&self) -> impl Iterator<Item = (DeviceId, DeviceId)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(i, nbrs)| {
            let u = DeviceId::from(i);
            nbrs.iter().filter(move |v| u < **v).map(move |v| (u, *v))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn segment(&self, u: DeviceId, v: DeviceId) -> Segment {
        Segment::new(self.position(u), self.position(v))
    }

    /// Rotation index of `nbr` in the neighbor list of `d`.
    pub fn rotation_index(&self, d: DeviceId, nbr: DeviceId) -> Option<usize> {
        let c = self.position(d);
        let target = self.position(nbr);
        let nbrs = self.neighbors(d);
        let at = nbrs
            .binary_search_by(|x| angular_cmp(c, self.position(*x), target))
            .ok()?;
        (nbrs[at] == nbr).then_some(at)
    }

    pub fn is_neighbor(&self, d: DeviceId, nbr: DeviceId) -> bool {
        self.rotation_index(d, nbr).is_some()
    }

    /// Counter-clockwise successor of `nbr` around `d`.
    pub fn ccw_next(&self, d: DeviceId, nbr: DeviceId) -> Option<DeviceId> {
        let i = self.rotation_index(d, nbr)?;
        let nbrs = self.neighbors(d);
        Some(nbrs[(i + 1) % nbrs.len()])
    }

    /// Clockwise successor of `nbr` around `d`.
    pub fn cw_next(&self, d: DeviceId, nbr: DeviceId) -> Option<DeviceId> {
        let i = self.rotation_index(d, nbr)?;
        let nbrs = self.neighbors(d);
        Some(nbrs[(i + nbrs.len() - 1) % nbrs.len()])
    }

    /// Same vertex set, keeping only edges with both endpoints in `keep`.
    pub fn induced(&self, keep: &[bool]) -> Network {
        let adjacency = self
            .adjacency
            .iter()
            .enumerate()
            .map(|(i, nbrs)| {
                if keep[i] {
                    nbrs.iter().copied().filter(|v| keep[v.index()]).collect()
                } else {
                    Vec::new()
                }
            })
            .collect();
        Network {
            positions: self.positions.clone(),
            adjacency,
            radius: self.radius,
        }
    }
}

fn validate_points(points: &[Point], radius: f64) -> Result<(), NetError> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(NetError::BadRadius(radius));
    }
    if let Some(i) = points.iter().position(|p| !p.is_finite()) {
        return Err(NetError::NonFinite(DeviceId::from(i)));
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (points[a], points[b]);
        pa.x.total_cmp(&pb.x).then(pa.y.total_cmp(&pb.y))
    });
    for w in order.windows(2) {
        if points[w[0]] == points[w[1]] {
            let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
            return Err(NetError::DuplicatePoint(DeviceId::from(a), DeviceId::from(b)));
        }
    }
    Ok(())
}

/// `w` lies strictly inside the disk whose diameter is `u`-`v`.
fn strictly_in_diametral_disk(u: Point, v: Point, w: Point) -> bool {
    u.sub(w).dot(v.sub(w)) < 0.0
}

/// Gabriel subgraph: keeps `uv` unless another device lies strictly inside
/// the disk with diameter `uv`. Any such witness is within `|uv|` of `u`,
/// hence a neighbor of `u` in a unit-disk graph.
pub fn gabriel_subgraph(net: &Network) -> Network {
    let adjacency = net
        .devices()
        .map(|u| {
            let pu = net.position(u);
            net.neighbors(u)
                .iter()
                .copied()
                .filter(|&v| {
                    let pv = net.position(v);
                    !net.neighbors(u)
                        .iter()
                        .any(|&w| w != v && strictly_in_diametral_disk(pu, pv, net.position(w)))
                })
                .collect()
        })
        .collect();
    Network {
        positions: net.positions.clone(),
        adjacency,
        radius: net.radius,
    }
}

/// Component label per device, labels numbered in order of lowest member.
pub fn components(net: &Network) -> Vec<usize> {
    let mut label = vec![usize::MAX; net.len()];
    let mut next = 0;
    for start in 0..net.len() {
        if label[start] != usize::MAX {
            continue;
        }
        label[start] = next;
        let mut queue = VecDeque::from([DeviceId::from(start)]);
        while let Some(u) = queue.pop_front() {
            for &v in net.neighbors(u) {
                if label[v.index()] == usize::MAX {
                    label[v.index()] = next;
                    queue.push_back(v);
                }
            }
        }
        next += 1;
    }
    label
}

/// Breadth-first hop distances from `src`; `None` marks unreachable devices.
pub fn bfs_hops(net: &Network, src: DeviceId) -> Vec<Option<u32>> {
    let mut dist = vec![None; net.len()];
    dist[src.index()] = Some(0);
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u.index()].unwrap_or(0);
        for &v in net.neighbors(u) {
            if dist[v.index()].is_none() {
                dist[v.index()] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Connected dominating set, computed per component: a greedy maximal
/// independent set (highest degree first) joined by shortest connector paths.
/// Returned sorted by id.
pub fn cds_backbone(net: &Network) -> Vec<DeviceId> {
    let n = net.len();
    let mut in_set = vec![false; n];
    let mut dominated = vec![false; n];

    let mut order: Vec<DeviceId> = net.devices().collect();
    order.sort_by(|a, b| net.degree(*b).cmp(&net.degree(*a)).then(a.cmp(b)));
    let mut dominators = Vec::new();
    for &u in &order {
        if !dominated[u.index()] {
            in_set[u.index()] = true;
            dominators.push(u);
            dominated[u.index()] = true;
            for &v in net.neighbors(u) {
                dominated[v.index()] = true;
            }
        }
    }

    let label = components(net);
    let comp_count = label.iter().copied().max().map_or(0, |m| m + 1);
    for comp in 0..comp_count {
        let members: Vec<DeviceId> = dominators
            .iter()
            .copied()
            .filter(|d| label[d.index()] == comp)
            .collect();
        let Some(&root) = members.first() else {
            continue;
        };
        // grow a connected tree over the set, one nearest dominator at a time
        let mut connected = vec![false; n];
        connected[root.index()] = true;
        while members.iter().any(|m| !connected[m.index()]) {
            let mut parent: Vec<Option<DeviceId>> = vec![None; n];
            let mut seen = connected.clone();
            let mut queue: VecDeque<DeviceId> =
                net.devices().filter(|d| connected[d.index()]).collect();
            let mut found = None;
            'bfs: while let Some(u) = queue.pop_front() {
                for &v in net.neighbors(u) {
                    if seen[v.index()] {
                        continue;
                    }
                    seen[v.index()] = true;
                    parent[v.index()] = Some(u);
                    if in_set[v.index()] {
                        found = Some(v);
                        break 'bfs;
                    }
                    queue.push_back(v);
                }
            }
            let Some(mut cur) = found else {
                break;
            };
            while !connected[cur.index()] {
                connected[cur.index()] = true;
                in_set[cur.index()] = true;
                match parent[cur.index()] {
                    Some(p) => cur = p,
                    None => break,
                }
            }
        }
    }

    net.devices().filter(|d| in_set[d.index()]).collect()
}

/// Geocast instance: where the message comes from and where it must go.
/// The sr-line runs from the source position to the region center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeocastInstance {
    pub source: DeviceId,
    pub source_point: Point,
    pub region: Rect,
    pub sr_line: Segment,
}

impl GeocastInstance {
    pub fn new(net: &Network, source: DeviceId, region: Rect) -> Self {
        Self::anchored(source, net.position(source), region)
    }

    pub fn anchored(source: DeviceId, source_point: Point, region: Rect) -> Self {
        Self {
            source,
            source_point,
            region,
            sr_line: Segment::new(source_point, region.center()),
        }
    }

    /// Same region, with the sr-line restarted at another device.
    pub fn reanchor(&self, net: &Network, at: DeviceId) -> Self {
        Self::anchored(at, net.position(at), self.region)
    }

    /// An edge meets the sr-line somewhere other than the anchor point itself.
    /// A zero-length sr-line meets nothing.
    pub fn edge_meets_sr_line(&self, edge: Segment) -> bool {
        let sr = self.sr_line;
        if sr.is_degenerate() || !segments_intersect(edge, sr) {
            return false;
        }
        let other = if edge.a == sr.a {
            edge.b
        } else if edge.b == sr.a {
            edge.a
        } else {
            return true;
        };
        orientation(sr.a, sr.b, other) == Orientation::Collinear
            && other.sub(sr.a).dot(sr.b.sub(sr.a)) > 0.0
    }

    pub fn edge_qualifies(&self, edge: Segment) -> bool {
        segment_intersects_rect(edge, self.region) || self.edge_meets_sr_line(edge)
    }
}

/// Local face at a device: the angular sector swept counter-clockwise from
/// `cw_side` to `ccw_side`, two rotation-consecutive neighbors. A degree-1
/// device has the single wedge `(u, u)` covering the full turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Wedge {
    pub index: usize,
    pub cw_side: DeviceId,
    pub ccw_side: DeviceId,
}

pub fn local_faces(net: &Network, d: DeviceId) -> Vec<Wedge> {
    let nbrs = net.neighbors(d);
    (0..nbrs.len())
        .map(|i| Wedge {
            index: i,
            cw_side: nbrs[i],
            ccw_side: nbrs[(i + 1) % nbrs.len()],
        })
        .collect()
}

pub fn wedge_qualifies(net: &Network, d: DeviceId, wedge: &Wedge, inst: &GeocastInstance) -> bool {
    inst.edge_qualifies(net.segment(d, wedge.cw_side))
        || inst.edge_qualifies(net.segment(d, wedge.ccw_side))
}

pub fn is_juncture(net: &Network, d: DeviceId, inst: &GeocastInstance) -> bool {
    inst.region.contains(net.position(d))
        || net
            .neighbors(d)
            .iter()
            .any(|&v| inst.edge_qualifies(net.segment(d, v)))
}

/// Wedge at `d` whose sector contains the direction to `target`. When the
/// direction lies exactly along an edge, the first wedge in rotation order wins.
pub fn wedge_toward(net: &Network, d: DeviceId, target: Point) -> Option<Wedge> {
    let c = net.position(d);
    let t = target.sub(c);
    local_faces(net, d).into_iter().find(|w| {
        in_ccw_sweep(
            net.position(w.cw_side).sub(c),
            net.position(w.ccw_side).sub(c),
            t,
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    fn d(i: u32) -> DeviceId {
        DeviceId(i)
    }

    #[test]
    fn unit_disk_threshold_is_closed() {
        let net = Network::unit_disk(&[p(0.0, 0.0), p(0.9, 0.0)], 1.0).unwrap();
        assert_eq!(net.edge_count(), 1);
        let net = Network::unit_disk(&[p(0.0, 0.0), p(1.0, 0.0)], 1.0).unwrap();
        assert_eq!(net.edge_count(), 1);
        let net = Network::unit_disk(&[p(0.0, 0.0), p(1.1, 0.0)], 1.0).unwrap();
        assert_eq!(net.edge_count(), 0);
    }

    #[test]
    fn duplicate_points_are_rejected() {
        let err = Network::unit_disk(&[p(0.0, 0.0), p(0.5, 0.5), p(0.0, 0.0)], 1.0).unwrap_err();
        assert_eq!(err, NetError::DuplicatePoint(d(0), d(2)));
        assert!(matches!(
            Network::unit_disk(&[p(0.0, 0.0)], 0.0),
            Err(NetError::BadRadius(_))
        ));
    }

    #[test]
    fn adjacency_is_sorted_ccw() {
        let pts = [p(0.0, 0.0), p(0.0, -0.5), p(-0.5, 0.0), p(0.5, 0.0), p(0.0, 0.5)];
        let net = Network::unit_disk(&pts, 1.0).unwrap();
        assert_eq!(net.neighbors(d(0)), &[d(3), d(4), d(2), d(1)]);
        assert_eq!(net.ccw_next(d(0), d(1)), Some(d(3)));
        assert_eq!(net.cw_next(d(0), d(3)), Some(d(1)));
        assert_eq!(net.rotation_index(d(0), d(2)), Some(2));
    }

    /// Oracle: a witness is inside the diametral disk when its distance to the
    /// midpoint is below half the edge length.
    fn diametral_oracle(u: Point, v: Point, w: Point) -> bool {
        let mid = p(0.5 * (u.x + v.x), 0.5 * (u.y + v.y));
        w.dist(mid) < 0.5 * u.dist(v)
    }

    #[test]
    fn gabriel_examples() {
        let (u, v) = (p(0.0, 0.0), p(0.8, 0.0));
        for (w, kept) in [(p(0.4, 0.2), false), (p(0.4, 0.6), true)] {
            assert_eq!(diametral_oracle(u, v, w), !kept);
            let net = Network::unit_disk(&[u, v, w], 1.0).unwrap();
            let g = gabriel_subgraph(&net);
            assert_eq!(g.is_neighbor(d(0), d(1)), kept);
            assert_eq!(g.is_neighbor(d(1), d(0)), kept);
        }
        let net = Network::unit_disk(&[u, v], 1.0).unwrap();
        assert_eq!(gabriel_subgraph(&net).edge_count(), 1);
    }

    #[test]
    fn gabriel_keeps_cocircular_edges() {
        // w on the diametral circle: not strictly inside
        let net = Network::unit_disk(&[p(0.0, 0.0), p(0.8, 0.0), p(0.4, 0.4)], 1.0).unwrap();
        assert!(gabriel_subgraph(&net).is_neighbor(d(0), d(1)));
    }

    fn is_cds(net: &Network, set: &[DeviceId]) -> bool {
        let mut keep = vec![false; net.len()];
        for s in set {
            keep[s.index()] = true;
        }
        let dominating = net
            .devices()
            .all(|v| keep[v.index()] || net.neighbors(v).iter().any(|u| keep[u.index()]));
        let sub = net.induced(&keep);
        let labels = components(&sub);
        let comp = components(net);
        let connected = set.iter().all(|a| {
            set.iter()
                .all(|b| comp[a.index()] != comp[b.index()] || labels[a.index()] == labels[b.index()])
        });
        dominating && connected
    }

    /// Oracle: smallest connected dominating set by exhaustive search.
    fn brute_force_min_cds(net: &Network) -> Vec<DeviceId> {
        let n = net.len();
        let mut best: Option<Vec<DeviceId>> = None;
        for mask in 1u32..(1 << n) {
            let set: Vec<DeviceId> = (0..n).filter(|i| mask >> i & 1 == 1).map(DeviceId::from).collect();
            if best.as_ref().is_some_and(|b| b.len() <= set.len()) {
                continue;
            }
            if is_cds(net, &set) {
                best = Some(set);
            }
        }
        best.unwrap_or_default()
    }

    #[test]
    fn cds_examples_match_brute_force() {
        let star: Vec<Point> = std::iter::once(p(0.0, 0.0))
            .chain((0..5).map(|k| {
                let a = k as f64 * 1.2;
                p(0.9 * a.cos(), 0.9 * a.sin())
            }))
            .collect();
        let star = Network::from_edges(&star, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)], 1.0).unwrap();
        assert_eq!(brute_force_min_cds(&star), vec![d(0)]);
        assert_eq!(cds_backbone(&star), vec![d(0)]);

        let single = Network::unit_disk(&[p(0.0, 0.0)], 1.0).unwrap();
        assert_eq!(cds_backbone(&single), vec![d(0)]);

        let path = Network::unit_disk(&[p(0.0, 0.0), p(0.9, 0.0), p(1.8, 0.0)], 1.0).unwrap();
        assert_eq!(brute_force_min_cds(&path), vec![d(1)]);
        assert_eq!(cds_backbone(&path), vec![d(1)]);
    }

    #[test]
    fn cds_is_valid_on_long_paths_and_split_graphs() {
        let pts: Vec<Point> = (0..9)
            .map(|i| p(0.9 * i as f64, 0.0))
            .chain((0..4).map(|i| p(0.9 * i as f64, 20.0)))
            .collect();
        let net = Network::unit_disk(&pts, 1.0).unwrap();
        assert!(is_cds(&net, &cds_backbone(&net)));
    }

    #[test]
    fn bfs_examples() {
        let path = Network::unit_disk(&[p(0.0, 0.0), p(0.9, 0.0), p(1.8, 0.0)], 1.0).unwrap();
        assert_eq!(bfs_hops(&path, d(0)), vec![Some(0), Some(1), Some(2)]);
        let pair = Network::unit_disk(&[p(0.0, 0.0), p(5.0, 0.0)], 1.0).unwrap();
        assert_eq!(bfs_hops(&pair, d(0)), vec![Some(0), None]);
        let tri = Network::unit_disk(&[p(0.0, 0.0), p(0.5, 0.0), p(0.2, 0.4)], 1.0).unwrap();
        for s in 0..3 {
            let h = bfs_hops(&tri, d(s));
            assert!(h.iter().enumerate().all(|(i, x)| *x == Some(if i == s as usize { 0 } else { 1 })));
        }
    }

    #[test]
    fn local_face_counts() {
        let pts = [p(0.0, 0.0), p(0.5, 0.0), p(0.0, 0.5), p(-0.5, 0.0), p(0.0, -0.5)];
        let star = Network::from_edges(&pts, &[(0, 1), (0, 2), (0, 3), (0, 4)], 1.0).unwrap();
        assert_eq!(local_faces(&star, d(0)).len(), 4);
        let leaf = local_faces(&star, d(1));
        assert_eq!(leaf.len(), 1);
        assert_eq!((leaf[0].cw_side, leaf[0].ccw_side), (d(0), d(0)));
        let path = Network::from_edges(&pts[..3], &[(0, 1), (0, 2)], 1.0).unwrap();
        assert_eq!(local_faces(&path, d(0)).len(), 2);
        let lonely = Network::unit_disk(&[p(0.0, 0.0)], 1.0).unwrap();
        assert!(local_faces(&lonely, d(0)).is_empty());
    }

    fn inst_for(net: &Network, src: u32, region: Rect) -> GeocastInstance {
        GeocastInstance::new(net, d(src), region)
    }

    #[test]
    fn juncture_and_wedge_examples() {
        // source at origin, region up north; device 1 sits to the east with an
        // edge to device 2 crossing the sr-line; device 3 is far away
        let pts = [p(0.0, 0.0), p(0.4, 1.0), p(-0.4, 1.0), p(5.0, -5.0), p(5.5, -5.0), p(0.2, 3.0)];
        let region = Rect::new(p(-0.5, 2.5), p(0.5, 3.5)).unwrap();
        let net = Network::from_edges(&pts, &[(0, 1), (0, 2), (1, 2), (3, 4), (1, 5)], 3.0).unwrap();
        let inst = inst_for(&net, 0, region);

        assert!(is_juncture(&net, d(5), &inst));
        assert!(is_juncture(&net, d(1), &inst));
        assert!(!is_juncture(&net, d(3), &inst));
        let far = Network::unit_disk(&[p(0.0, 0.0), p(9.0, 9.0)], 1.0).unwrap();
        let far_inst = GeocastInstance::new(&far, d(0), Rect::new(p(-1.0, -1.0), p(1.0, 1.0)).unwrap());
        assert!(!is_juncture(&far, d(1), &far_inst));

        for w in local_faces(&net, d(1)) {
            let crossing = [w.cw_side, w.ccw_side].contains(&d(2));
            let into_region = [w.cw_side, w.ccw_side].contains(&d(5));
            assert_eq!(wedge_qualifies(&net, d(1), &w, &inst), crossing || into_region);
        }
        for w in local_faces(&net, d(3)) {
            assert!(!wedge_qualifies(&net, d(3), &w, &inst));
        }
    }

    #[test]
    fn sr_line_contact_at_the_anchor_does_not_count() {
        let region = Rect::new(p(-0.5, 2.5), p(0.5, 3.5)).unwrap();
        let inst = GeocastInstance::anchored(d(0), p(0.0, 0.0), region);
        assert!(!inst.edge_meets_sr_line(Segment::new(p(0.0, 0.0), p(0.5, 0.5))));
        assert!(inst.edge_meets_sr_line(Segment::new(p(0.0, 0.0), p(0.0, 0.5))));
        assert!(!inst.edge_meets_sr_line(Segment::new(p(0.0, 0.0), p(0.0, -0.5))));
        assert!(inst.edge_meets_sr_line(Segment::new(p(-0.5, 1.0), p(0.5, 1.0))));
        let degenerate = GeocastInstance::anchored(d(0), region.center(), region);
        assert!(!degenerate.edge_meets_sr_line(Segment::new(p(-1.0, 3.0), p(1.0, 3.0))));
        assert!(degenerate.edge_qualifies(Segment::new(p(-1.0, 3.0), p(1.0, 3.0))));
    }

    #[test]
    fn wedge_toward_brackets_direction() {
        let pts = [p(0.0, 0.0), p(0.5, 0.0), p(0.0, 0.5), p(-0.5, 0.0)];
        let net = Network::from_edges(&pts, &[(0, 1), (0, 2), (0, 3)], 1.0).unwrap();
        let w = wedge_toward(&net, d(0), p(1.0, 1.0)).unwrap();
        assert_eq!((w.cw_side, w.ccw_side), (d(1), d(2)));
        let w = wedge_toward(&net, d(0), p(0.0, -3.0)).unwrap();
        assert_eq!((w.cw_side, w.ccw_side), (d(3), d(1)));
        // exactly along an edge: first wedge in rotation order
        let w = wedge_toward(&net, d(0), p(0.0, 2.0)).unwrap();
        assert_eq!(w.index, 0);
    }
}
