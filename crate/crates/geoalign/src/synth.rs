//! Synthetic road networks and routes for simulation studies and tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roadrough_core::{haversine, GeoPoint, Polyline};

use crate::error::{GeoError, Result};
use crate::network::RoadNetwork;

struct Builder {
    nodes: Vec<(u64, GeoPoint)>,
    edges: Vec<(u64, u64, f64)>,
}

impl Builder {
    fn new() -> Self {
        Self { nodes: Vec::new(), edges: Vec::new() }
    }

    fn node(&mut self, p: GeoPoint) -> u64 {
        let id = self.nodes.len() as u64;
        self.nodes.push((id, p));
        id
    }

    fn edge(&mut self, a: u64, b: u64) -> usize {
        let d = haversine(&self.nodes[a as usize].1, &self.nodes[b as usize].1);
        self.edges.push((a, b, d));
        self.edges.len() - 1
    }

    fn build(self) -> Result<RoadNetwork> {
        RoadNetwork::new(self.nodes, self.edges)
    }
}

/// A `rows × cols` street grid with `spacing` metre blocks, node id
/// `row * cols + col`, plus one diagonal across the first block when
/// `diagonal` is set. Horizontal edges come first, then vertical ones.
pub fn grid_network(origin: GeoPoint, rows: usize, cols: usize, spacing: f64, diagonal: bool) -> Result<RoadNetwork> {
    if rows < 2 || cols < 2 || !(spacing > 0.0) {
        return Err(GeoError::InvalidInput("grid needs at least 2×2 nodes and positive spacing".into()));
    }
    let mut b = Builder::new();
    for r in 0..rows {
        for c in 0..cols {
            b.node(origin.offset(c as f64 * spacing, r as f64 * spacing));
        }
    }
    let id = |r: usize, c: usize| (r * cols + c) as u64;
    for r in 0..rows {
        for c in 0..cols - 1 {
            b.edge(id(r, c), id(r, c + 1));
        }
    }
    for r in 0..rows - 1 {
        for c in 0..cols {
            b.edge(id(r, c), id(r + 1, c));
        }
    }
    if diagonal {
        b.edge(id(0, 0), id(1, 1));
    }
    b.build()
}

/// The 5 × 6 grid with one diagonal: 50 edges.
pub fn toy_grid(origin: GeoPoint) -> RoadNetwork {
    grid_network(origin, 5, 6, 120.0, true).expect("valid grid")
}

/// A random walk of `n_edges` edges from `start` that never turns straight back.
pub fn random_route(net: &RoadNetwork, start: usize, n_edges: usize, seed: u64) -> Result<(Vec<usize>, Polyline)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut node = start;
    let mut edges = Vec::with_capacity(n_edges);
    let mut points = vec![net.node_point(start)];
    for _ in 0..n_edges {
        let options: Vec<(usize, usize)> =
            net.neighbours(node).iter().copied().filter(|&(_, k)| edges.last() != Some(&k)).collect();
        if options.is_empty() {
            return Err(GeoError::InvalidInput(format!("dead end at node {}", net.node_id(node))));
        }
        let (next, k) = options[rng.random_range(0..options.len())];
        edges.push(k);
        points.push(net.node_point(next));
        node = next;
    }
    Ok((edges, Polyline::new(points)?))
}

/// A long main road with side spurs and occasional parallel service roads.
pub struct Corridor {
    pub network: RoadNetwork,
    pub route: Polyline,
    /// Edge indices of the main road, in driving order.
    pub route_edges: Vec<usize>,
}

/// Build a gently winding main road of about `length` metres with nodes
/// every `spacing` metres. Every 5th node carries a 200 m side road, and a
/// service road runs 30 m alongside for 1 km out of every 4 km.
pub fn corridor(origin: GeoPoint, length: f64, spacing: f64, seed: u64) -> Result<Corridor> {
    if !(spacing > 0.0 && length >= 2.0 * spacing) {
        return Err(GeoError::InvalidInput(format!("corridor of {length} m with {spacing} m spacing")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = (length / spacing).round() as usize;
    let base: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let mut drift = 0.0f64;
    let mut main = vec![origin];
    let mut headings = Vec::with_capacity(n);
    for _ in 0..n {
        drift = (drift + rng.random_range(-0.08..0.08)).clamp(-0.7, 0.7);
        let h = base + drift;
        headings.push(h);
        let last = *main.last().expect("non-empty");
        main.push(last.offset(spacing * h.sin(), spacing * h.cos()));
    }

    let mut b = Builder::new();
    let ids: Vec<u64> = main.iter().map(|p| b.node(*p)).collect();
    let route_edges: Vec<usize> = ids.windows(2).map(|w| b.edge(w[0], w[1])).collect();
    // unit normal to the left of travel at node i
    let normal = |i: usize| {
        let h = headings[i.min(n - 1)];
        (-h.cos(), h.sin())
    };

    for i in (5..n).step_by(5) {
        let (ne, nn) = normal(i);
        let side = if (i / 5) % 2 == 0 { 1.0 } else { -1.0 };
        let mid = b.node(main[i].offset(-side * 100.0 * ne, -side * 100.0 * nn));
        let end = b.node(main[i].offset(-side * 200.0 * ne, -side * 200.0 * nn));
        b.edge(ids[i], mid);
        b.edge(mid, end);
    }

    let per_block = (4000.0 / spacing).round() as usize;
    let run = (1000.0 / spacing).round() as usize;
    let mut start = per_block / 2;
    while start + run < n {
        let lane: Vec<u64> = (start..=start + run)
            .map(|i| {
                let (ne, nn) = normal(i);
                b.node(main[i].offset(30.0 * ne, 30.0 * nn))
            })
            .collect();
        for w in lane.windows(2) {
            b.edge(w[0], w[1]);
        }
        b.edge(ids[start], lane[0]);
        b.edge(ids[start + run], lane[run]);
        start += per_block;
    }

    Ok(Corridor { network: b.build()?, route: Polyline::new(main)?, route_edges })
}
