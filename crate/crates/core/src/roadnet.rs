//! Road network model, JSON loading, synthetic grid generation, snapping of
//! points onto the graph, and an offline gazetteer for named places.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::path::Path;

use indexmap::IndexMap;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{haversine_distance, GeoError, MEAN_EARTH_RADIUS_M};
use crate::LatLng;

/// Relative slack when checking that an edge is at least as long as its chord.
const CHORD_SLACK: f64 = 1e-6;
const MAX_GRID_SEED_RETRIES: u64 = 10_000;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed network file: {0}")]
    Parse(String),
    #[error("duplicate node id {0:?}")]
    DuplicateNode(String),
    #[error("node {node:?}: {source}")]
    InvalidCoordinate { node: String, source: GeoError },
    #[error("edge #{edge} references missing node {node:?}")]
    DanglingEndpoint { edge: usize, node: String },
    #[error("edge #{edge} is a self-loop on node {node:?}")]
    SelfLoop { edge: usize, node: String },
    #[error("edge #{edge} ({from:?} -> {to:?}) has non-positive length {length}")]
    NonPositiveLength { edge: usize, from: String, to: String, length: f64 },
    #[error("edge #{edge} ({from:?} -> {to:?}) length {length} m is shorter than the {chord:.3} m great-circle chord")]
    ChordViolation { edge: usize, from: String, to: String, length: f64, chord: f64 },
    #[error("network has no nodes")]
    Empty,
    #[error("invalid grid parameter: {0}")]
    InvalidParameter(String),
    #[error("no connected grid found after {0} seeds")]
    NoConnectedGrid(u64),
}

#[derive(Debug, Error)]
pub enum PlaceError {
    #[error("unknown place {name:?}; closest known names: {}", suggestions.join(", "))]
    UnknownName { name: String, suggestions: Vec<String> },
    #[error("duplicate gazetteer name {0:?}")]
    DuplicateName(String),
    #[error("malformed gazetteer: {0}")]
    Parse(String),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    pub pos: LatLng,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub length: f64,
    pub oneway: bool,
}

/// Immutable road graph. Nodes are stored sorted by id, so comparing node
/// indices is the same as comparing ids lexicographically.
#[derive(Debug, Clone)]
pub struct RoadNetwork {
    name: Option<String>,
    seed: Option<u64>,
    nodes: Vec<Node>,
    index: HashMap<String, usize>,
    edges: Vec<Edge>,
    outgoing: Vec<Vec<(usize, usize)>>,
    incoming: Vec<Vec<(usize, usize)>>,
}

impl PartialEq for RoadNetwork {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.seed == other.seed && self.nodes == other.nodes && self.edges == other.edges
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct NetworkFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    nodes: Vec<NodeRecord>,
    edges: Vec<EdgeRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct NodeRecord {
    id: String,
    lat: f64,
    lng: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeRecord {
    from: String,
    to: String,
    length_m: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    oneway: bool,
}

/// Raw edge description used when building a network in code.
#[derive(Debug, Clone)]
pub struct EdgeSpec {
    pub from: String,
    pub to: String,
    pub length: f64,
    pub oneway: bool,
}

impl RoadNetwork {
    /// Builds and validates a network.
    pub fn new(
        name: Option<String>,
        nodes: impl IntoIterator<Item = (String, LatLng)>,
        edges: impl IntoIterator<Item = EdgeSpec>,
    ) -> Result<Self, NetworkError> {
        let mut nodes: Vec<Node> = nodes.into_iter().map(|(id, pos)| Node { id, pos }).collect();
        nodes.sort_by(|a, b| a.id.cmp(&b.id));
        for w in nodes.windows(2) {
            if w[0].id == w[1].id {
                return Err(NetworkError::DuplicateNode(w[0].id.clone()));
            }
        }
        let index: HashMap<String, usize> = nodes.iter().enumerate().map(|(i, n)| (n.id.clone(), i)).collect();

        let mut built = Vec::new();
        for (i, e) in edges.into_iter().enumerate() {
            let lookup = |id: &str| {
                index
                    .get(id)
                    .copied()
                    .ok_or_else(|| NetworkError::DanglingEndpoint { edge: i, node: id.to_string() })
            };
            let from = lookup(&e.from)?;
            let to = lookup(&e.to)?;
            if from == to {
                return Err(NetworkError::SelfLoop { edge: i, node: e.from });
            }
            if !(e.length.is_finite() && e.length > 0.0) {
                return Err(NetworkError::NonPositiveLength { edge: i, from: e.from, to: e.to, length: e.length });
            }
            let chord = haversine_distance(nodes[from].pos, nodes[to].pos, MEAN_EARTH_RADIUS_M);
            if e.length + CHORD_SLACK * chord.max(1.0) < chord {
                return Err(NetworkError::ChordViolation { edge: i, from: e.from, to: e.to, length: e.length, chord });
            }
            built.push(Edge { from, to, length: e.length, oneway: e.oneway });
        }

        let mut outgoing = vec![Vec::new(); nodes.len()];
        let mut incoming = vec![Vec::new(); nodes.len()];
        for (i, e) in built.iter().enumerate() {
            outgoing[e.from].push((e.to, i));
            incoming[e.to].push((e.from, i));
            if !e.oneway {
                outgoing[e.to].push((e.from, i));
                incoming[e.from].push((e.to, i));
            }
        }
        for adj in outgoing.iter_mut().chain(incoming.iter_mut()) {
            adj.sort_unstable();
        }

        Ok(Self { name, seed: None, nodes, index, edges: built, outgoing, incoming })
    }

    pub fn from_json_str(json: &str) -> Result<Self, NetworkError> {
        let file: NetworkFile = serde_json::from_str(json).map_err(|e| NetworkError::Parse(e.to_string()))?;
        let mut nodes = Vec::with_capacity(file.nodes.len());
        for n in file.nodes {
            let pos = LatLng::new(n.lat, n.lng).map_err(|source| NetworkError::InvalidCoordinate { node: n.id.clone(), source })?;
            nodes.push((n.id, pos));
        }
        let edges = file
            .edges
            .into_iter()
            .map(|e| EdgeSpec { from: e.from, to: e.to, length: e.length_m, oneway: e.oneway });
        let mut network = Self::new(file.name, nodes, edges)?;
        network.seed = file.seed;
        Ok(network)
    }

    pub fn to_json_string(&self) -> String {
        let file = NetworkFile {
            name: self.name.clone(),
            seed: self.seed,
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeRecord { id: n.id.clone(), lat: n.pos.lat(), lng: n.pos.lng() })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeRecord {
                    from: self.nodes[e.from].id.clone(),
                    to: self.nodes[e.to].id.clone(),
                    length_m: e.length,
                    oneway: e.oneway,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("network serializes")
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// Seed actually used by the grid generator, if this network was generated.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, index: usize) -> &Node {
        &self.nodes[index]
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// `(neighbor, edge index)` pairs leaving `node`, sorted by neighbor.
    pub fn outgoing(&self, node: usize) -> &[(usize, usize)] {
        &self.outgoing[node]
    }

    /// `(neighbor, edge index)` pairs entering `node`, sorted by neighbor.
    pub fn incoming(&self, node: usize) -> &[(usize, usize)] {
        &self.incoming[node]
    }

    /// Index of the node closest to `point`; ties go to the smallest id.
    pub fn nearest_node_index(&self, point: LatLng) -> Result<usize, NetworkError> {
        let mut best: Option<(usize, f64)> = None;
        for (i, n) in self.nodes.iter().enumerate() {
            let d = haversine_distance(point, n.pos, MEAN_EARTH_RADIUS_M);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        best.map(|(i, _)| i).ok_or(NetworkError::Empty)
    }

    pub fn nearest_node(&self, point: LatLng) -> Result<&str, NetworkError> {
        self.nearest_node_index(point).map(|i| self.nodes[i].id.as_str())
    }

    /// True when every node is reachable from every other ignoring edge direction.
    pub fn is_weakly_connected(&self) -> bool {
        if self.nodes.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &(v, _) in self.outgoing[u].iter().chain(&self.incoming[u]) {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.nodes.len()
    }
}

pub fn load_network(path: impl AsRef<Path>) -> Result<RoadNetwork, NetworkError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| NetworkError::Io { path: path.display().to_string(), source })?;
    RoadNetwork::from_json_str(&text)
}

/// Parameters of the synthetic lattice generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    pub spacing_m: f64,
    pub origin: LatLng,
    pub jitter_fraction: f64,
    pub drop_probability: f64,
    pub seed: u64,
}

impl GridSpec {
    fn validate(&self) -> Result<(), NetworkError> {
        let bad = |msg: String| Err(NetworkError::InvalidParameter(msg));
        if self.rows < 2 || self.cols < 2 {
            return bad(format!("grid must be at least 2x2, got {}x{}", self.rows, self.cols));
        }
        if !(self.spacing_m.is_finite() && self.spacing_m > 0.0) {
            return bad(format!("spacing must be positive, got {}", self.spacing_m));
        }
        if !(0.0..0.5).contains(&self.jitter_fraction) {
            return bad(format!("jitter fraction must be in [0, 0.5), got {}", self.jitter_fraction));
        }
        if !(0.0..0.3).contains(&self.drop_probability) {
            return bad(format!("drop probability must be in [0, 0.3), got {}", self.drop_probability));
        }
        if self.origin.lat().abs() > 80.0 {
            return bad(format!("origin latitude {} too close to a pole", self.origin.lat()));
        }
        Ok(())
    }
}

/// Generates a jittered lattice with randomly dropped edges. Seeds are tried
/// in sequence from `spec.seed` until the result is connected; the seed that
/// produced the network is recorded on it.
pub fn generate_grid_network(spec: &GridSpec) -> Result<RoadNetwork, NetworkError> {
    spec.validate()?;
    for attempt in 0..MAX_GRID_SEED_RETRIES {
        let seed = spec.seed.wrapping_add(attempt);
        let mut network = grid_with_seed(spec, seed)?;
        if network.is_weakly_connected() {
            network.seed = Some(seed);
            return Ok(network);
        }
    }
    Err(NetworkError::NoConnectedGrid(MAX_GRID_SEED_RETRIES))
}

fn grid_node_id(row: usize, col: usize) -> String {
    format!("n{row:03}_{col:03}")
}

fn grid_with_seed(spec: &GridSpec, seed: u64) -> Result<RoadNetwork, NetworkError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let deg_per_m_lat = (1.0 / MEAN_EARTH_RADIUS_M).to_degrees();
    let deg_per_m_lng = deg_per_m_lat / spec.origin.lat().to_radians().cos();
    let jitter = spec.jitter_fraction * spec.spacing_m;

    let mut nodes = Vec::with_capacity(spec.rows * spec.cols);
    for r in 0..spec.rows {
        for c in 0..spec.cols {
            let dy = rng.random_range(-1.0..=1.0) * jitter;
            let dx = rng.random_range(-1.0..=1.0) * jitter;
            let north = r as f64 * spec.spacing_m + dy;
            let east = c as f64 * spec.spacing_m + dx;
            let pos = LatLng::new(
                spec.origin.lat() + north * deg_per_m_lat,
                spec.origin.lng() + east * deg_per_m_lng,
            )
            .map_err(|source| NetworkError::InvalidCoordinate { node: grid_node_id(r, c), source })?;
            nodes.push((grid_node_id(r, c), pos));
        }
    }
    let pos = |r: usize, c: usize| nodes[r * spec.cols + c].1;

    let mut edges = Vec::new();
    for r in 0..spec.rows {
        for c in 0..spec.cols {
            let mut neighbors = Vec::with_capacity(2);
            if c + 1 < spec.cols {
                neighbors.push((r, c + 1));
            }
            if r + 1 < spec.rows {
                neighbors.push((r + 1, c));
            }
            for (nr, nc) in neighbors {
                let dropped = rng.random::<f64>() < spec.drop_probability;
                if dropped {
                    continue;
                }
                edges.push(EdgeSpec {
                    from: grid_node_id(r, c),
                    to: grid_node_id(nr, nc),
                    length: haversine_distance(pos(r, c), pos(nr, nc), MEAN_EARTH_RADIUS_M),
                    oneway: false,
                });
            }
        }
    }
    let name = format!("grid-{}x{}-{}m", spec.rows, spec.cols, spec.spacing_m);
    RoadNetwork::new(Some(name), nodes, edges)
}

/// A place given either by gazetteer name or by explicit coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PlaceRef {
    Coords(LatLng),
    Name(String),
}

impl PlaceRef {
    /// Label used for the place in traces and payloads.
    pub fn label(&self) -> String {
        match self {
            PlaceRef::Name(name) => name.clone(),
            PlaceRef::Coords(p) => format!("[{}, {}]", p.lat(), p.lng()),
        }
    }
}

impl fmt::Display for PlaceRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl From<LatLng> for PlaceRef {
    fn from(p: LatLng) -> Self {
        PlaceRef::Coords(p)
    }
}

impl From<&str> for PlaceRef {
    fn from(name: &str) -> Self {
        PlaceRef::Name(name.to_string())
    }
}

pub(crate) fn fold_name(name: &str) -> String {
    name.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Offline name-to-coordinate lookup, case and whitespace insensitive.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Gazetteer {
    entries: IndexMap<String, LatLng>,
    folded: HashMap<String, usize>,
}

impl Gazetteer {
    pub fn new(entries: impl IntoIterator<Item = (String, LatLng)>) -> Result<Self, PlaceError> {
        let mut gazetteer = Self::default();
        for (name, pos) in entries {
            gazetteer.insert(name, pos)?;
        }
        Ok(gazetteer)
    }

    pub fn insert(&mut self, name: String, pos: LatLng) -> Result<(), PlaceError> {
        let key = fold_name(&name);
        if self.folded.contains_key(&key) {
            return Err(PlaceError::DuplicateName(name));
        }
        self.folded.insert(key, self.entries.len());
        self.entries.insert(name, pos);
        Ok(())
    }

    pub fn from_json_str(json: &str) -> Result<Self, PlaceError> {
        let raw: IndexMap<String, LatLng> = serde_json::from_str(json).map_err(|e| PlaceError::Parse(e.to_string()))?;
        Self::new(raw)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PlaceError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| PlaceError::Io { path: path.display().to_string(), source })?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.entries).expect("gazetteer serializes")
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, LatLng)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn get(&self, name: &str) -> Option<LatLng> {
        self.folded.get(&fold_name(name)).map(|&i| self.entries[i])
    }

    /// Up to `limit` known names ordered by edit distance to `name`.
    pub fn suggestions(&self, name: &str, limit: usize) -> Vec<String> {
        let key = fold_name(name);
        let mut scored: Vec<(usize, &String)> = self
            .entries
            .keys()
            .map(|k| (strsim::levenshtein(&key, &fold_name(k)), k))
            .collect();
        scored.sort();
        scored.into_iter().take(limit).map(|(_, k)| k.clone()).collect()
    }

    /// Names `count` distinct network nodes chosen by `seed`, as `{prefix}-01`, ...
    pub fn sample_nodes(network: &RoadNetwork, count: usize, seed: u64, prefix: &str) -> Result<Self, PlaceError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let count = count.min(network.nodes().len());
        let mut picked = sample(&mut rng, network.nodes().len(), count).into_vec();
        picked.sort_unstable();
        let width = count.to_string().len().max(2);
        Self::new(
            picked
                .into_iter()
                .enumerate()
                .map(|(i, node)| (format!("{prefix}-{:0width$}", i + 1), network.node(node).pos)),
        )
    }
}

pub fn resolve_place(gazetteer: &Gazetteer, place: &PlaceRef) -> Result<LatLng, PlaceError> {
    match place {
        PlaceRef::Coords(p) => Ok(*p),
        PlaceRef::Name(name) => gazetteer.get(name).ok_or_else(|| PlaceError::UnknownName {
            name: name.clone(),
            suggestions: gazetteer.suggestions(name, 3),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(lat: f64, lng: f64) -> LatLng {
        LatLng::new(lat, lng).unwrap()
    }

    // Two nodes on the equator exactly 100 m apart.
    fn two_node_json(length: f64, to: &str) -> String {
        let lng = (100.0 / MEAN_EARTH_RADIUS_M).to_degrees();
        format!(
            r#"{{"name":"pair","nodes":[{{"id":"a","lat":0,"lng":0}},{{"id":"b","lat":0,"lng":{lng}}}],
               "edges":[{{"from":"a","to":"{to}","length_m":{length}}}]}}"#
        )
    }

    #[test]
    fn loads_two_node_network() {
        let net = RoadNetwork::from_json_str(&two_node_json(120.0, "b")).unwrap();
        assert_eq!(net.nodes().len(), 2);
        assert_eq!(net.edges().len(), 1);
        assert_eq!(net.outgoing(1), &[(0, 0)]);
    }

    #[test]
    fn dangling_endpoint_is_named() {
        let err = RoadNetwork::from_json_str(&two_node_json(120.0, "x")).unwrap_err();
        assert!(matches!(&err, NetworkError::DanglingEndpoint { node, .. } if node == "x"));
        assert!(err.to_string().contains("\"x\""));
    }

    #[test]
    fn edge_shorter_than_chord_is_rejected() {
        let err = RoadNetwork::from_json_str(&two_node_json(80.0, "b")).unwrap_err();
        match err {
            NetworkError::ChordViolation { chord, .. } => assert!((chord - 100.0).abs() < 1e-6),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn other_validation_failures() {
        assert!(matches!(
            RoadNetwork::from_json_str(&two_node_json(0.0, "b")),
            Err(NetworkError::NonPositiveLength { .. })
        ));
        assert!(matches!(
            RoadNetwork::from_json_str(&two_node_json(10.0, "a")),
            Err(NetworkError::SelfLoop { .. })
        ));
        assert!(matches!(RoadNetwork::from_json_str("{"), Err(NetworkError::Parse(_))));
        let dup = r#"{"nodes":[{"id":"a","lat":0,"lng":0},{"id":"a","lat":1,"lng":0}],"edges":[]}"#;
        assert!(matches!(RoadNetwork::from_json_str(dup), Err(NetworkError::DuplicateNode(_))));
    }

    fn grid(rows: usize, cols: usize, jitter: f64, drop: f64, seed: u64) -> RoadNetwork {
        generate_grid_network(&GridSpec {
            rows,
            cols,
            spacing_m: 100.0,
            origin: p(51.5, -0.1),
            jitter_fraction: jitter,
            drop_probability: drop,
            seed,
        })
        .unwrap()
    }

    #[test]
    fn smallest_grid() {
        let net = generate_grid_network(&GridSpec {
            rows: 2,
            cols: 2,
            spacing_m: 100.0,
            origin: p(0.0, 0.0),
            jitter_fraction: 0.0,
            drop_probability: 0.0,
            seed: 1,
        })
        .unwrap();
        assert_eq!(net.nodes().len(), 4);
        assert_eq!(net.edges().len(), 4);
        assert_eq!(net.seed(), Some(1));
        for e in net.edges() {
            assert!((e.length - 100.0).abs() < 1e-6);
        }
    }

    #[test]
    fn jittered_grid_is_connected_and_deterministic() {
        let a = grid(5, 5, 0.1, 0.1, 7);
        assert_eq!(a.nodes().len(), 25);
        assert!(a.is_weakly_connected());
        let b = grid(5, 5, 0.1, 0.1, 7);
        assert_eq!(a.to_json_string(), b.to_json_string());
    }

    #[test]
    fn grid_parameters_are_checked() {
        let mut spec = GridSpec {
            rows: 1,
            cols: 5,
            spacing_m: 100.0,
            origin: p(0.0, 0.0),
            jitter_fraction: 0.0,
            drop_probability: 0.0,
            seed: 0,
        };
        assert!(generate_grid_network(&spec).is_err());
        spec.rows = 3;
        spec.jitter_fraction = 0.5;
        assert!(generate_grid_network(&spec).is_err());
        spec.jitter_fraction = 0.0;
        spec.drop_probability = 0.3;
        assert!(generate_grid_network(&spec).is_err());
    }

    #[test]
    fn json_round_trip() {
        let net = grid(4, 6, 0.2, 0.2, 3);
        let back = RoadNetwork::from_json_str(&net.to_json_string()).unwrap();
        assert_eq!(net, back);
    }

    #[test]
    fn nearest_node_exact_and_tie() {
        let net = grid(3, 3, 0.0, 0.0, 1);
        let n = &net.nodes()[4];
        assert_eq!(net.nearest_node(n.pos).unwrap(), n.id);

        let pair = RoadNetwork::new(
            None,
            [("b".to_string(), p(0.0, 0.001)), ("a".to_string(), p(0.0, -0.001))],
            [],
        )
        .unwrap();
        assert_eq!(pair.nearest_node(p(0.0, 0.0)).unwrap(), "a");

        let empty = RoadNetwork::new(None, [], []).unwrap();
        assert!(matches!(empty.nearest_node(p(0.0, 0.0)), Err(NetworkError::Empty)));
    }

    #[test]
    fn gazetteer_lookup_is_folded() {
        let g = Gazetteer::new([("Tower Bridge London".to_string(), p(51.5055, -0.0754))]).unwrap();
        let hit = resolve_place(&g, &PlaceRef::Name("  tower   BRIDGE london ".into())).unwrap();
        assert_eq!(hit, p(51.5055, -0.0754));
        let coords = p(51.502179, -0.1746681);
        assert_eq!(resolve_place(&g, &PlaceRef::Coords(coords)).unwrap(), coords);
        match resolve_place(&g, &"Atlantis".into()) {
            Err(PlaceError::UnknownName { suggestions, .. }) => assert_eq!(suggestions, vec!["Tower Bridge London"]),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            Gazetteer::new([("A".to_string(), coords), ("a ".to_string(), coords)]),
            Err(PlaceError::DuplicateName(_))
        ));
    }

    #[test]
    fn place_ref_wire_forms() {
        let name: PlaceRef = serde_json::from_str("\"London Bridge\"").unwrap();
        assert_eq!(name, PlaceRef::Name("London Bridge".into()));
        let coords: PlaceRef = serde_json::from_str("[51.5, -0.1]").unwrap();
        assert_eq!(coords, PlaceRef::Coords(p(51.5, -0.1)));
    }
}
