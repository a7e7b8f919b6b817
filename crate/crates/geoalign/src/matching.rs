//! Hidden Markov map matching: road-edge projections are the hidden states,
//! GPS fixes the observations.

use std::collections::HashMap;

use roadrough_core::{haversine, GeoPoint, Polyline};
use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::network::{EdgeProjection, RoadNetwork};

pub type Candidate = EdgeProjection;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatchParams {
    /// Emission standard deviation, m.
    pub sigma: f64,
    /// Transition scale, m.
    pub beta: f64,
    /// Candidate search radius, m.
    pub radius: f64,
    pub max_candidates: usize,
}

impl Default for MatchParams {
    fn default() -> Self {
        Self { sigma: 4.07, beta: 20.0, radius: 50.0, max_candidates: 8 }
    }
}

impl MatchParams {
    fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.beta > 0.0 && self.radius > 0.0 && self.max_candidates > 0) {
            return Err(GeoError::InvalidInput(format!("bad matching parameters {self:?}")));
        }
        Ok(())
    }
}

pub fn log_emission(distance: f64, sigma: f64) -> f64 {
    -0.5 * (distance / sigma).powi(2) - (sigma * (2.0 * std::f64::consts::PI).sqrt()).ln()
}

pub fn log_transition(route: f64, great_circle: f64, beta: f64) -> f64 {
    -(route - great_circle).abs() / beta - beta.ln()
}

/// Most probable state sequence.
///
/// `transitions[t][i][j]` scores moving from state `i` of step `t` to state
/// `j` of step `t + 1`. Ties go to the lower state index. On failure the
/// error carries the first step that no state can reach.
pub fn viterbi(emissions: &[Vec<f64>], transitions: &[Vec<Vec<f64>>]) -> std::result::Result<(Vec<usize>, f64), usize> {
    if emissions.is_empty() {
        return Ok((Vec::new(), 0.0));
    }
    let mut score = emissions[0].clone();
    let mut back: Vec<Vec<usize>> = Vec::with_capacity(emissions.len());
    back.push(vec![0; score.len()]);
    for t in 1..emissions.len() {
        let trans = &transitions[t - 1];
        let mut next = vec![f64::NEG_INFINITY; emissions[t].len()];
        let mut from = vec![0; emissions[t].len()];
        for (j, e) in emissions[t].iter().enumerate() {
            for (i, s) in score.iter().enumerate() {
                let v = s + trans[i][j] + e;
                if v > next[j] {
                    next[j] = v;
                    from[j] = i;
                }
            }
        }
        if next.iter().all(|v| *v == f64::NEG_INFINITY) {
            return Err(t);
        }
        score = next;
        back.push(from);
    }
    let (mut state, best) = score
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (j, &v)| if v > acc.1 { (j, v) } else { acc });
    let mut path = vec![0; emissions.len()];
    for t in (0..emissions.len()).rev() {
        path[t] = state;
        state = back[t][state];
    }
    Ok((path, best))
}

/// How the route between two consecutive matched positions runs.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Leg {
    Along,
    /// Leave edge via node `exit`, re-enter the next edge via node `entry`.
    Via { exit: usize, entry: usize },
}

/// Route options from every candidate of one fix to every candidate of the next.
type StepLegs = Vec<Vec<Option<(f64, Leg)>>>;

/// Shortest on-network distance between two candidates.
fn route_between(
    net: &RoadNetwork,
    from: &Candidate,
    to: &Candidate,
    trees: &mut HashMap<usize, std::collections::BTreeMap<usize, (f64, Option<usize>)>>,
    limit: f64,
) -> Option<(f64, Leg)> {
    let ef = net.edge(from.edge);
    let et = net.edge(to.edge);
    let mut best = None::<(f64, Leg)>;
    if from.edge == to.edge {
        best = Some(((to.offset - from.offset).abs(), Leg::Along));
    }
    for (exit, exit_len) in [(ef.a, from.offset), (ef.b, ef.length - from.offset)] {
        let tree = trees.entry(exit).or_insert_with(|| net.distances_from(exit, limit));
        for (entry, entry_len) in [(et.a, to.offset), (et.b, et.length - to.offset)] {
            if let Some(&(d, _)) = tree.get(&entry) {
                let total = exit_len + d + entry_len;
                if best.is_none_or(|(b, _)| total < b) {
                    best = Some((total, Leg::Via { exit, entry }));
                }
            }
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchedFix {
    pub t: f64,
    pub observed: GeoPoint,
    pub point: GeoPoint,
    pub edge: usize,
    /// Distance from the edge's first node, m.
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedTrace {
    pub fixes: Vec<MatchedFix>,
    /// Edges traversed in order, without repeats of consecutive edges.
    pub edge_path: Vec<usize>,
    /// Geometry of the travelled path from the first to the last snapped fix.
    pub path: Polyline,
    /// Chainage of every snapped fix along `path`.
    pub fix_chainage: Vec<f64>,
    pub log_score: f64,
}

/// The HMM scores of a fix sequence.
#[derive(Debug, Clone)]
pub struct Lattice {
    pub candidates: Vec<Vec<Candidate>>,
    pub emissions: Vec<Vec<f64>>,
    /// `transitions[t][i][j]`: candidate `i` of fix `t` to candidate `j` of fix `t + 1`.
    pub transitions: Vec<Vec<Vec<f64>>>,
    legs: Vec<StepLegs>,
}

/// Candidates and log-probabilities for time-stamped GPS fixes `(t, position)`.
pub fn build_lattice(fixes: &[(f64, GeoPoint)], net: &RoadNetwork, params: &MatchParams) -> Result<Lattice> {
    params.validate()?;
    if fixes.len() < 2 {
        return Err(GeoError::InvalidInput(format!("need at least 2 GPS fixes, got {}", fixes.len())));
    }
    if fixes.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(GeoError::InvalidInput("GPS fix times must increase".into()));
    }

    let candidates: Vec<Vec<Candidate>> = fixes
        .iter()
        .enumerate()
        .map(|(index, (_, p))| {
            let c = net.nearby_edges(p, params.radius, params.max_candidates);
            if c.is_empty() {
                Err(GeoError::UnmatchedFix { index, radius: params.radius })
            } else {
                Ok(c)
            }
        })
        .collect::<Result<_>>()?;

    let emissions: Vec<Vec<f64>> = candidates
        .iter()
        .map(|cs| cs.iter().map(|c| log_emission(c.distance, params.sigma)).collect())
        .collect();
    let mut transitions = Vec::with_capacity(fixes.len() - 1);
    let mut legs: Vec<StepLegs> = Vec::with_capacity(fixes.len() - 1);
    for t in 1..fixes.len() {
        let gc = haversine(&fixes[t - 1].1, &fixes[t].1);
        let limit = 2.0 * gc + 2.0 * params.radius + 200.0;
        let mut trees = HashMap::new();
        let step: StepLegs = candidates[t - 1]
            .iter()
            .map(|a| candidates[t].iter().map(|b| route_between(net, a, b, &mut trees, limit)).collect())
            .collect();
        transitions.push(
            step.iter()
                .map(|row| {
                    row.iter()
                        .map(|r| r.map_or(f64::NEG_INFINITY, |(d, _)| log_transition(d, gc, params.beta)))
                        .collect()
                })
                .collect(),
        );
        legs.push(step);
    }
    Ok(Lattice { candidates, emissions, transitions, legs })
}

/// Snap time-stamped GPS fixes `(t, position)` to the network.
pub fn map_match(fixes: &[(f64, GeoPoint)], net: &RoadNetwork, params: &MatchParams) -> Result<MatchedTrace> {
    let Lattice { candidates, emissions, transitions, legs } = build_lattice(fixes, net, params)?;
    let (states, log_score) = viterbi(&emissions, &transitions).map_err(|t| GeoError::BrokenTrace { from: t - 1, to: t })?;
    let chosen: Vec<Candidate> = states.iter().enumerate().map(|(t, &s)| candidates[t][s]).collect();

    // Walk the chosen legs, collecting geometry and traversed edge lengths.
    let mut points = vec![chosen[0].point];
    let mut fix_vertex = vec![0];
    let mut traversed: Vec<(usize, f64)> = Vec::new();
    for t in 1..chosen.len() {
        let (a, b) = (&chosen[t - 1], &chosen[t]);
        let (_, leg) = legs[t - 1][states[t - 1]][states[t]].expect("viterbi chose a reachable leg");
        match leg {
            Leg::Along => traversed.push((a.edge, (b.offset - a.offset).abs())),
            Leg::Via { exit, entry } => {
                let ea = net.edge(a.edge);
                traversed.push((a.edge, if exit == ea.a { a.offset } else { ea.length - a.offset }));
                points.push(net.node_point(exit));
                let (_, path) = net.shortest_path(exit, entry, f64::INFINITY).expect("reachable node");
                let mut node = exit;
                for k in path {
                    let e = net.edge(k);
                    node = if e.a == node { e.b } else { e.a };
                    traversed.push((k, e.length));
                    points.push(net.node_point(node));
                }
                let eb = net.edge(b.edge);
                traversed.push((b.edge, if entry == eb.a { b.offset } else { eb.length - b.offset }));
            }
        }
        points.push(b.point);
        fix_vertex.push(points.len() - 1);
    }
    let mut edge_path: Vec<usize> = Vec::new();
    for (k, len) in traversed {
        if len > 1e-6 && edge_path.last() != Some(&k) {
            edge_path.push(k);
        }
    }
    if edge_path.is_empty() {
        edge_path.push(chosen[0].edge);
    }

    let path = Polyline::new(points)?;
    let fix_chainage = fix_vertex.iter().map(|&v| path.chainage()[v]).collect();
    let fixes = fixes
        .iter()
        .zip(&chosen)
        .map(|(&(t, observed), c)| MatchedFix { t, observed, point: c.point, edge: c.edge, offset: c.offset })
        .collect();
    Ok(MatchedTrace { fixes, edge_path, path, fix_chainage, log_score })
}
