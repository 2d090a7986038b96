//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};

use geocast::engine::SimState;
use geocast::geometry::Point;
use geocast::netgraph::{DeviceId, Network};
use geocast::protocol::Mode;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Adjacency lists straight from the distance rule.
pub fn brute_adjacency(pts: &[Point], radius: f64) -> Vec<Vec<usize>> {
    (0..pts.len())
        .map(|i| {
            (0..pts.len())
                .filter(|&j| j != i && pts[i].dist(pts[j]) <= radius)
                .collect()
        })
        .collect()
}

pub fn brute_bfs(adj: &[Vec<usize>], src: usize) -> Vec<Option<u32>> {
    let mut dist = vec![None; adj.len()];
    dist[src] = Some(0);
    let mut q = VecDeque::from([src]);
    while let Some(u) = q.pop_front() {
        for &v in &adj[u] {
            if dist[v].is_none() {
                dist[v] = Some(dist[u].unwrap() + 1);
                q.push_back(v);
            }
        }
    }
    dist
}

/// Undirected edges with both ends reached from `src`.
pub fn brute_component_edges(adj: &[Vec<usize>], src: usize) -> usize {
    let d = brute_bfs(adj, src);
    adj.iter()
        .enumerate()
        .filter(|(u, _)| d[*u].is_some())
        .map(|(_, nbrs)| nbrs.len())
        .sum::<usize>()
        / 2
}

pub fn adjacency_of(net: &Network) -> Vec<Vec<usize>> {
    net.devices()
        .map(|d| net.neighbors(d).iter().map(|v| v.index()).collect())
        .collect()
}

pub fn random_points(rng: &mut ChaCha8Rng, n: usize, side: f64) -> Vec<Point> {
    (0..n)
        .map(|_| Point::new(rng.random_range(0.0..side), rng.random_range(0.0..side)))
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Border condition for flooding: a visited device holds exactly one flood
/// message per unused incident link and none per used link; an unvisited
/// device holds nothing. Returns a description of the first violation.
pub fn flood_border_violation(net: &Network, state: &SimState) -> Option<String> {
    let used = state.used_edges();
    for d in net.devices() {
        let mut held: HashMap<DeviceId, usize> = HashMap::new();
        for m in state.queues[d.index()].messages() {
            if m.mode != Mode::Flood {
                return Some(format!("{d} holds a non-flood message"));
            }
            *held.entry(m.receiver).or_default() += 1;
        }
        let visited = state.arrival[d.index()].is_some();
        for &v in net.neighbors(d) {
            let count = held.get(&v).copied().unwrap_or(0);
            let link_used = used.contains(&(d.min(v), d.max(v)));
            let expected = usize::from(visited && !link_used);
            if count != expected {
                return Some(format!(
                    "step {}: {d} holds {count} messages for {v} (visited {visited}, used {link_used})",
                    state.steps
                ));
            }
        }
        if held.keys().any(|v| !net.is_neighbor(d, *v)) {
            return Some(format!("{d} holds a message for a non-neighbor"));
        }
    }
    None
}
