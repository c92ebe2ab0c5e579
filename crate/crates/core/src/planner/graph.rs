use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{PlanError, Route, RoutePlanner};
use crate::geo::{haversine_distance, polyline_length, MEAN_EARTH_RADIUS_M};
use crate::roadnet::RoadNetwork;
use crate::LatLng;

/// Heuristic shrink that absorbs the chord check slack and haversine rounding.
const HEURISTIC_SHRINK: f64 = 1.0 - 4e-6;
/// Relative tolerance under which two path costs count as equal.
const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy)]
struct Costs<'a> {
    network: &'a RoadNetwork,
    factors: Option<&'a [f64]>,
    /// Lower bound on cost per meter of chord.
    heuristic_scale: f64,
}

impl Costs<'_> {
    #[inline]
    fn edge(&self, edge: usize) -> f64 {
        let length = self.network.edges()[edge].length;
        match self.factors {
            Some(f) => length * f[edge],
            None => length,
        }
    }
}

#[derive(PartialEq)]
struct Entry {
    key: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    // Min-heap on key, then on node index.
    fn cmp(&self, other: &Self) -> Ordering {
        other.key.total_cmp(&self.key).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimum-cost path from `source` to `target` as `(nodes, edges, cost)`.
///
/// A* runs backwards from the target with a great-circle heuristic toward the
/// source and keeps expanding until no unexpanded node can still lie on an
/// optimal path. A forward walk then picks, at each node, the smallest
/// neighbor that stays on an optimal path, which yields the optimal path
/// with the lexicographically smallest node-id sequence.
fn shortest_path(costs: Costs<'_>, source: usize, target: usize) -> Option<(Vec<usize>, Vec<usize>, f64)> {
    if source == target {
        return Some((vec![source], Vec::new(), 0.0));
    }
    let network = costs.network;
    let n = network.nodes().len();
    let source_pos = network.node(source).pos;
    let h = |v: usize| costs.heuristic_scale * haversine_distance(network.node(v).pos, source_pos, MEAN_EARTH_RADIUS_M);

    let mut to_target = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    to_target[target] = 0.0;
    heap.push(Entry { key: h(target), node: target });

    while let Some(Entry { key, node }) = heap.pop() {
        let best = to_target[source];
        if best.is_finite() && key > best + TIE_TOLERANCE * best.max(1.0) {
            break;
        }
        let g = to_target[node];
        if key > g + h(node) {
            continue;
        }
        for &(pred, edge) in network.incoming(node) {
            let candidate = g + costs.edge(edge);
            if candidate < to_target[pred] {
                to_target[pred] = candidate;
                heap.push(Entry { key: candidate + h(pred), node: pred });
            }
        }
    }

    let total = to_target[source];
    if !total.is_finite() {
        return None;
    }
    let tolerance = TIE_TOLERANCE * total.max(1.0);
    let mut nodes = vec![source];
    let mut edges = Vec::new();
    let mut cost = 0.0;
    let mut u = source;
    while u != target {
        let (v, edge) = network
            .outgoing(u)
            .iter()
            .copied()
            .find(|&(v, e)| (costs.edge(e) + to_target[v] - to_target[u]).abs() <= tolerance && to_target[v] < to_target[u])
            .expect("an optimal successor exists for every node on an optimal path");
        cost += costs.edge(edge);
        nodes.push(v);
        edges.push(edge);
        u = v;
        if nodes.len() > n {
            unreachable!("optimal path walk revisited a node");
        }
    }
    Some((nodes, edges, cost))
}

/// Plain forward Dijkstra cost between two node indices, with optional
/// per-edge cost factors. Kept as a reference for the A* planner.
pub fn dijkstra_cost(network: &RoadNetwork, source: usize, target: usize, factors: Option<&[f64]>) -> Option<f64> {
    let costs = Costs { network, factors, heuristic_scale: 0.0 };
    let mut dist = vec![f64::INFINITY; network.nodes().len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Entry { key: 0.0, node: source });
    while let Some(Entry { key, node }) = heap.pop() {
        if node == target {
            return Some(key);
        }
        if key > dist[node] {
            continue;
        }
        for &(next, edge) in network.outgoing(node) {
            let d = key + costs.edge(edge);
            if d < dist[next] {
                dist[next] = d;
                heap.push(Entry { key: d, node: next });
            }
        }
    }
    None
}

fn plan_on_graph(costs: Costs<'_>, planner_id: &str, origin: LatLng, destination: LatLng) -> Result<Route, PlanError> {
    let network = costs.network;
    let source = network.nearest_node_index(origin)?;
    let target = network.nearest_node_index(destination)?;
    let (nodes, _edges, cost) = shortest_path(costs, source, target).ok_or_else(|| PlanError::NoRoute {
        from: network.node(source).id.clone(),
        to: network.node(target).id.clone(),
    })?;
    let points: Vec<LatLng> = nodes.iter().map(|&i| network.node(i).pos).collect();
    Ok(Route {
        total_length: polyline_length(&points, MEAN_EARTH_RADIUS_M),
        points,
        cost,
        planner_id: planner_id.to_string(),
        nodes: nodes.iter().map(|&i| network.node(i).id.clone()).collect(),
    })
}

/// Shortest routes by edge length on a shared network.
#[derive(Debug, Clone)]
pub struct GraphPlanner {
    network: Arc<RoadNetwork>,
}

impl GraphPlanner {
    pub const ID: &'static str = "internal";

    pub fn new(network: Arc<RoadNetwork>) -> Self {
        Self { network }
    }

    pub fn network(&self) -> &Arc<RoadNetwork> {
        &self.network
    }

    fn costs(&self) -> Costs<'_> {
        Costs { network: &self.network, factors: None, heuristic_scale: HEURISTIC_SHRINK }
    }

    /// Optimal cost between two node indices.
    pub fn node_cost(&self, source: usize, target: usize) -> Option<f64> {
        shortest_path(self.costs(), source, target).map(|(_, _, c)| c)
    }
}

impl RoutePlanner for GraphPlanner {
    fn id(&self) -> &str {
        Self::ID
    }

    fn plan(&self, origin: LatLng, destination: LatLng) -> Result<Route, PlanError> {
        plan_on_graph(self.costs(), Self::ID, origin, destination)
    }

    fn composes_legs(&self) -> bool {
        true
    }
}

/// Graph planner whose edge costs are scaled by seeded factors drawn
/// uniformly from `[1 - delta, 1 + delta]`, one per edge in file order.
#[derive(Debug, Clone)]
pub struct PerturbedPlanner {
    network: Arc<RoadNetwork>,
    delta: f64,
    seed: u64,
    factors: Vec<f64>,
}

impl PerturbedPlanner {
    pub const ID: &'static str = "perturbed";
    pub const DEFAULT_DELTA: f64 = 0.2;

    pub fn new(network: Arc<RoadNetwork>, delta: f64, seed: u64) -> Result<Self, PlanError> {
        if !(0.0..1.0).contains(&delta) {
            return Err(PlanError::InvalidConfig(format!("perturbation delta must be in [0, 1), got {delta}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let factors = network
            .edges()
            .iter()
            .map(|_| if delta == 0.0 { 1.0 } else { rng.random_range(1.0 - delta..=1.0 + delta) })
            .collect();
        Ok(Self { network, delta, seed, factors })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn factors(&self) -> &[f64] {
        &self.factors
    }

    fn costs(&self) -> Costs<'_> {
        Costs { network: &self.network, factors: Some(&self.factors), heuristic_scale: HEURISTIC_SHRINK * (1.0 - self.delta) }
    }

    pub fn node_cost(&self, source: usize, target: usize) -> Option<f64> {
        shortest_path(self.costs(), source, target).map(|(_, _, c)| c)
    }
}

impl RoutePlanner for PerturbedPlanner {
    fn id(&self) -> &str {
        Self::ID
    }

    fn plan(&self, origin: LatLng, destination: LatLng) -> Result<Route, PlanError> {
        plan_on_graph(self.costs(), Self::ID, origin, destination)
    }

    fn composes_legs(&self) -> bool {
        true
    }
}
