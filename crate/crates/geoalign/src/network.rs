//! Undirected road graph with a grid index over edge geometry.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use roadrough_core::{haversine, geo::project_onto_segment, GeoPoint};

use crate::error::{GeoError, Result};

/// Relative tolerance between a stated edge length and its endpoint distance.
pub const LENGTH_TOLERANCE: f64 = 0.005;

const CELL_M: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    /// Node indices; offsets along the edge are measured from `a`.
    pub a: usize,
    pub b: usize,
    pub length: f64,
}

/// A projection of a point onto one edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeProjection {
    pub edge: usize,
    pub offset: f64,
    pub point: GeoPoint,
    pub distance: f64,
}

#[derive(Debug, Clone)]
pub struct RoadNetwork {
    ids: Vec<u64>,
    points: Vec<GeoPoint>,
    index_of: HashMap<u64, usize>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, usize)>>,
    origin: GeoPoint,
    grid: HashMap<(i64, i64), Vec<usize>>,
}

#[derive(PartialEq)]
struct Frontier(f64, usize);

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl RoadNetwork {
    /// Build from `(id, position)` nodes and `(id_a, id_b, length)` edges.
    ///
    /// Edge indices follow the order of `edges`.
    pub fn new(nodes: Vec<(u64, GeoPoint)>, edges: Vec<(u64, u64, f64)>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(GeoError::InvalidNetwork("network has no nodes".into()));
        }
        let mut index_of = HashMap::with_capacity(nodes.len());
        let mut ids = Vec::with_capacity(nodes.len());
        let mut points = Vec::with_capacity(nodes.len());
        for (id, p) in nodes {
            if index_of.insert(id, ids.len()).is_some() {
                return Err(GeoError::InvalidNetwork(format!("duplicate node id {id}")));
            }
            ids.push(id);
            points.push(p);
        }
        let mut out = Vec::with_capacity(edges.len());
        let mut adjacency = vec![Vec::new(); ids.len()];
        for (k, (ia, ib, length)) in edges.into_iter().enumerate() {
            let lookup = |id: u64| {
                index_of
                    .get(&id)
                    .copied()
                    .ok_or_else(|| GeoError::InvalidNetwork(format!("edge {k} references unknown node {id}")))
            };
            let (a, b) = (lookup(ia)?, lookup(ib)?);
            if a == b {
                return Err(GeoError::InvalidNetwork(format!("edge {k} is a self-loop")));
            }
            if !(length > 0.0 && length.is_finite()) {
                return Err(GeoError::InvalidNetwork(format!("edge {k} has length {length}")));
            }
            let gc = haversine(&points[a], &points[b]);
            if (length - gc).abs() > LENGTH_TOLERANCE * gc {
                return Err(GeoError::InvalidNetwork(format!(
                    "edge {k} length {length} m differs from endpoint distance {gc:.3} m"
                )));
            }
            adjacency[a].push((b, k));
            adjacency[b].push((a, k));
            out.push(Edge { a, b, length });
        }
        let origin = points[0];
        let mut net = Self { ids, points, index_of, edges: out, adjacency, origin, grid: HashMap::new() };
        net.build_grid();
        Ok(net)
    }

    fn cell(&self, p: &GeoPoint) -> (f64, f64) {
        let (e, n) = self.origin.local_xy(p);
        (e / CELL_M, n / CELL_M)
    }

    fn build_grid(&mut self) {
        let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (k, e) in self.edges.iter().enumerate() {
            let (x0, y0) = self.cell(&self.points[e.a]);
            let (x1, y1) = self.cell(&self.points[e.b]);
            for cx in x0.min(x1).floor() as i64..=x0.max(x1).floor() as i64 {
                for cy in y0.min(y1).floor() as i64..=y0.max(y1).floor() as i64 {
                    grid.entry((cx, cy)).or_default().push(k);
                }
            }
        }
        self.grid = grid;
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, k: usize) -> &Edge {
        &self.edges[k]
    }

    pub fn node_id(&self, idx: usize) -> u64 {
        self.ids[idx]
    }

    pub fn node_index(&self, id: u64) -> Option<usize> {
        self.index_of.get(&id).copied()
    }

    pub fn node_point(&self, idx: usize) -> GeoPoint {
        self.points[idx]
    }

    /// `(node id, position)` in insertion order.
    pub fn nodes(&self) -> impl Iterator<Item = (u64, GeoPoint)> + '_ {
        self.ids.iter().copied().zip(self.points.iter().copied())
    }

    /// `(neighbour node, edge)` pairs.
    pub fn neighbours(&self, node: usize) -> &[(usize, usize)] {
        &self.adjacency[node]
    }

    /// Point at `offset` metres from node `a` along edge `k`.
    pub fn point_on_edge(&self, k: usize, offset: f64) -> GeoPoint {
        let e = &self.edges[k];
        let f = (offset / e.length).clamp(0.0, 1.0);
        self.points[e.a].lerp(&self.points[e.b], f)
    }

    pub fn project(&self, k: usize, p: &GeoPoint) -> EdgeProjection {
        let e = &self.edges[k];
        let (f, q) = project_onto_segment(&self.points[e.a], &self.points[e.b], p);
        EdgeProjection { edge: k, offset: f * e.length, point: q, distance: haversine(p, &q) }
    }

    /// Up to `max` edge projections within `radius` metres, nearest first.
    pub fn nearby_edges(&self, p: &GeoPoint, radius: f64, max: usize) -> Vec<EdgeProjection> {
        let (x, y) = self.cell(p);
        let r = radius / CELL_M;
        let mut seen = Vec::new();
        for cx in (x - r).floor() as i64..=(x + r).floor() as i64 {
            for cy in (y - r).floor() as i64..=(y + r).floor() as i64 {
                if let Some(list) = self.grid.get(&(cx, cy)) {
                    seen.extend_from_slice(list);
                }
            }
        }
        seen.sort_unstable();
        seen.dedup();
        let mut found: Vec<EdgeProjection> = seen
            .into_iter()
            .map(|k| self.project(k, p))
            .filter(|c| c.distance <= radius)
            .collect();
        found.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.edge.cmp(&b.edge)));
        found.truncate(max);
        found
    }

    /// Shortest distances from `source` to every node reachable within `limit` m.
    pub fn distances_from(&self, source: usize, limit: f64) -> BTreeMap<usize, (f64, Option<usize>)> {
        let mut best: BTreeMap<usize, (f64, Option<usize>)> = BTreeMap::new();
        let mut heap = BinaryHeap::new();
        best.insert(source, (0.0, None));
        heap.push(Frontier(0.0, source));
        while let Some(Frontier(d, u)) = heap.pop() {
            if d > best[&u].0 {
                continue;
            }
            for &(v, k) in &self.adjacency[u] {
                let nd = d + self.edges[k].length;
                if nd > limit {
                    continue;
                }
                if best.get(&v).is_none_or(|&(old, _)| nd < old) {
                    best.insert(v, (nd, Some(k)));
                    heap.push(Frontier(nd, v));
                }
            }
        }
        best
    }

    /// Edge indices of a shortest path between two nodes, or `None` when
    /// none exists within `limit` metres.
    pub fn shortest_path(&self, from: usize, to: usize, limit: f64) -> Option<(f64, Vec<usize>)> {
        let tree = self.distances_from(from, limit);
        let &(dist, _) = tree.get(&to)?;
        let mut edges = Vec::new();
        let mut node = to;
        while let Some(&(_, Some(k))) = tree.get(&node) {
            edges.push(k);
            let e = &self.edges[k];
            node = if e.a == node { e.b } else { e.a };
        }
        edges.reverse();
        Some((dist, edges))
    }
}
