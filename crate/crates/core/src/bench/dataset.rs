use std::sync::Arc;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::BenchError;
use crate::geo::{point_along, MEAN_EARTH_RADIUS_M};
use crate::planner::PlannerSpec;
use crate::recognizer::RecognitionProblem;
use crate::roadnet::{generate_grid_network, resolve_place, Gazetteer, GridSpec, PlaceRef, RoadNetwork};
use crate::LatLng;

pub const BENCHMARK_GAZETTEER_SIZE: usize = 30;
const DEFAULT_INITIAL_LOCATIONS: usize = 5;

fn default_intention_group_sizes() -> Vec<usize> {
    vec![2, 5, 10, 15]
}

fn default_observation_group_sizes() -> Vec<usize> {
    vec![1, 3, 5, 10, 15]
}

fn default_problems_total() -> usize {
    100
}

/// Dataset layout. An empty `initial_locations` list means five seeded
/// network nodes that are not gazetteer entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    #[serde(default)]
    pub initial_locations: Vec<PlaceRef>,
    #[serde(default = "default_intention_group_sizes")]
    pub intention_group_sizes: Vec<usize>,
    #[serde(default = "default_observation_group_sizes")]
    pub observation_group_sizes: Vec<usize>,
    #[serde(default = "default_problems_total")]
    pub problems_total: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub generation_planner: PlannerSpec,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            initial_locations: Vec::new(),
            intention_group_sizes: default_intention_group_sizes(),
            observation_group_sizes: default_observation_group_sizes(),
            problems_total: default_problems_total(),
            seed: 0,
            generation_planner: PlannerSpec::Internal,
        }
    }
}

impl DatasetConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |msg: String| Err(BenchError::InvalidConfig(msg));
        if self.intention_group_sizes.is_empty() || self.observation_group_sizes.is_empty() {
            return bad("group size lists must not be empty".into());
        }
        if self.observation_group_sizes.contains(&0) {
            return bad("observation group sizes must be positive".into());
        }
        if self.intention_group_sizes.iter().any(|&n| n < 2) {
            return bad("intention group sizes must be at least 2".into());
        }
        if self.problems_total == 0 || !self.problems_total.is_multiple_of(self.observation_group_sizes.len()) {
            return bad(format!(
                "problems_total {} is not a positive multiple of {} observation groups",
                self.problems_total,
                self.observation_group_sizes.len()
            ));
        }
        Ok(())
    }
}

/// Picks `count` distinct nodes that do not coincide with gazetteer entries.
pub fn default_initial_locations(network: &RoadNetwork, gazetteer: &Gazetteer, count: usize, seed: u64) -> Vec<PlaceRef> {
    let taken: Vec<LatLng> = gazetteer.iter().map(|(_, p)| p).collect();
    let free: Vec<LatLng> = network.nodes().iter().map(|n| n.pos).filter(|p| !taken.contains(p)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_1417);
    let count = count.min(free.len());
    sample(&mut rng, free.len(), count).into_iter().map(|i| PlaceRef::Coords(free[i])).collect()
}

/// Builds the problem set. Problems are laid out observation group by
/// observation group; within a group, intention sizes cycle fastest and
/// initial locations next.
pub fn generate_dataset(cfg: &DatasetConfig, network: &Arc<RoadNetwork>, gazetteer: &Gazetteer) -> Result<Vec<RecognitionProblem>, BenchError> {
    cfg.validate()?;
    let inits = if cfg.initial_locations.is_empty() {
        default_initial_locations(network, gazetteer, DEFAULT_INITIAL_LOCATIONS, cfg.seed)
    } else {
        cfg.initial_locations.clone()
    };
    if inits.is_empty() {
        return Err(BenchError::InvalidConfig("no initial locations available".into()));
    }
    let init_positions = inits.iter().map(|p| resolve_place(gazetteer, p)).collect::<Result<Vec<_>, _>>()?;
    let planner = cfg.generation_planner.build(network.clone())?;

    let per_group = cfg.problems_total / cfg.observation_group_sizes.len();
    let n_sizes = cfg.intention_group_sizes.len();
    let cycle = n_sizes * inits.len();
    let entries: Vec<(&str, LatLng)> = gazetteer.iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut problems = Vec::with_capacity(cfg.problems_total);

    for &n_obs in &cfg.observation_group_sizes {
        for j in 0..per_group {
            let n_int = cfg.intention_group_sizes[j % n_sizes];
            let init_idx = (j / n_sizes) % inits.len();
            let init = init_positions[init_idx];
            let init_node = network.nearest_node_index(init)?;

            // Candidates sharing the start node, or a node with an earlier
            // entry, would make the problem degenerate.
            let mut used_nodes = vec![init_node];
            let mut pool = Vec::new();
            for &(name, pos) in &entries {
                let node = network.nearest_node_index(pos)?;
                if !used_nodes.contains(&node) {
                    used_nodes.push(node);
                    pool.push((name, pos));
                }
            }
            if pool.len() < n_int {
                return Err(BenchError::GazetteerTooSmall { requested: n_int, available: pool.len(), init: inits[init_idx].label() });
            }
            let mut chosen = sample(&mut rng, pool.len(), n_int).into_vec();
            chosen.sort_unstable();
            let intentions: Vec<(&str, LatLng)> = chosen.iter().map(|&i| pool[i]).collect();
            let (intent_name, intent_pos) = intentions[rng.random_range(0..n_int)];

            let route = planner.plan(init, intent_pos).map_err(|source| BenchError::Unreachable {
                from: inits[init_idx].label(),
                to: intent_name.to_string(),
                source,
            })?;
            let length = route.total_length;
            let observations = (1..=n_obs)
                .map(|i| point_along(&route.points, length * i as f64 / (n_obs + 1) as f64, MEAN_EARTH_RADIUS_M))
                .collect::<Result<Vec<_>, _>>()?;

            let round = j / cycle;
            let mut problem_id = format!("{}.{}.{}", init_idx + 1, n_int, n_obs);
            if round > 0 {
                problem_id.push_str(&format!("-{}", round + 1));
            }
            problems.push(RecognitionProblem {
                problem_id,
                init: inits[init_idx].clone(),
                intent_location: PlaceRef::Name(intent_name.to_string()),
                intentions: intentions.iter().map(|(n, _)| PlaceRef::Name(n.to_string())).collect(),
                observations,
            });
        }
    }
    Ok(problems)
}

/// The standard benchmark map: a seeded 20x20 jittered grid with a
/// 30-entry synthetic gazetteer.
#[derive(Debug, Clone)]
pub struct BenchmarkWorld {
    pub network: Arc<RoadNetwork>,
    pub gazetteer: Arc<Gazetteer>,
}

pub fn benchmark_world(seed: u64) -> Result<BenchmarkWorld, BenchError> {
    let spec = GridSpec {
        rows: 20,
        cols: 20,
        spacing_m: 100.0,
        origin: LatLng::new(51.5, -0.1)?,
        jitter_fraction: 0.15,
        drop_probability: 0.1,
        seed,
    };
    let network = generate_grid_network(&spec)?;
    let gazetteer = Gazetteer::sample_nodes(&network, BENCHMARK_GAZETTEER_SIZE, seed.wrapping_add(1), "site")?;
    Ok(BenchmarkWorld { network: Arc::new(network), gazetteer: Arc::new(gazetteer) })
}
