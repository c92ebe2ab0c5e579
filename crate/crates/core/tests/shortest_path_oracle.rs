use std::sync::Arc;

use destrec_core::bench::benchmark_world;
use destrec_core::planner::{dijkstra_cost, GraphPlanner, PerturbedPlanner, PlanError, RoutePlanner};
use destrec_core::roadnet::EdgeSpec;
use destrec_core::{LatLng, RoadNetwork};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Small {
    network: Arc<RoadNetwork>,
    // (to, edge index) lists in node-index order, mirroring the loader.
    adj: Vec<Vec<(usize, usize)>>,
}

fn random_graph(seed: u64) -> Small {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=10usize);
    // Nodes within about a meter of each other so any integer length >= 2
    // respects the chord bound.
    let nodes: Vec<(String, LatLng)> = (0..n)
        .map(|i| {
            let lat = 10.0 + rng.random_range(0.0..1e-5);
            let lng = 20.0 + rng.random_range(0.0..1e-5);
            (format!("v{i}"), LatLng::new(lat, lng).unwrap())
        })
        .collect();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a < b && rng.random_bool(0.45) {
                let oneway = rng.random_bool(0.3);
                let (from, to) = if oneway && rng.random_bool(0.5) { (b, a) } else { (a, b) };
                let length = rng.random_range(2..=12u32) as f64;
                edges.push(EdgeSpec { from: format!("v{from}"), to: format!("v{to}"), length, oneway });
            }
        }
    }
    let mut adj = vec![Vec::new(); n];
    for (i, e) in edges.iter().enumerate() {
        let f: usize = e.from[1..].parse().unwrap();
        let t: usize = e.to[1..].parse().unwrap();
        adj[f].push((t, i));
        if !e.oneway {
            adj[t].push((f, i));
        }
    }
    let network = RoadNetwork::new(Some(format!("random-{seed}")), nodes, edges).unwrap();
    Small { network: Arc::new(network), adj }
}

/// Cheapest simple path by exhaustive enumeration; among equally cheap
/// paths the lexicographically smallest node sequence wins.
fn brute_force(g: &Small, s: usize, t: usize, cost: &dyn Fn(usize) -> f64) -> Option<(f64, Vec<usize>)> {
    fn go(
        g: &Small,
        u: usize,
        t: usize,
        cost: &dyn Fn(usize) -> f64,
        path: &mut Vec<usize>,
        acc: f64,
        best: &mut Option<(f64, Vec<usize>)>,
    ) {
        if u == t {
            let better = match best {
                None => true,
                Some((c, p)) => acc < *c || (acc == *c && path < p),
            };
            if better {
                *best = Some((acc, path.clone()));
            }
            return;
        }
        for &(v, e) in &g.adj[u] {
            if !path.contains(&v) {
                path.push(v);
                go(g, v, t, cost, path, acc + cost(e), best);
                path.pop();
            }
        }
    }
    let mut best = None;
    go(g, s, t, cost, &mut vec![s], 0.0, &mut best);
    best
}

fn indices(route_nodes: &[String]) -> Vec<usize> {
    route_nodes.iter().map(|id| id[1..].parse().unwrap()).collect()
}

#[test]
fn astar_matches_exhaustive_search_on_small_graphs() {
    let mut compared = 0;
    for seed in 0..50 {
        let g = random_graph(seed);
        let planner = GraphPlanner::new(g.network.clone());
        let lengths: Vec<f64> = g.network.edges().iter().map(|e| e.length).collect();
        let n = g.network.nodes().len();
        for s in 0..n {
            for t in 0..n {
                let from = g.network.node(s).pos;
                let to = g.network.node(t).pos;
                let expected = brute_force(&g, s, t, &|e| lengths[e]);
                match (planner.plan(from, to), expected) {
                    (Ok(route), Some((cost, path))) => {
                        assert_eq!(route.cost, cost, "graph {seed}: v{s} -> v{t}");
                        assert_eq!(indices(&route.nodes), path, "graph {seed}: v{s} -> v{t}");
                        compared += 1;
                    }
                    (Err(PlanError::NoRoute { .. }), None) => {}
                    (got, want) => panic!("graph {seed}: v{s} -> v{t}: got {got:?}, brute force {want:?}"),
                }
            }
        }
    }
    assert!(compared > 500, "only {compared} reachable pairs");
}

#[test]
fn perturbed_astar_matches_exhaustive_search() {
    for seed in 0..50 {
        let g = random_graph(seed);
        let planner = PerturbedPlanner::new(g.network.clone(), 0.2, seed).unwrap();
        let lengths: Vec<f64> = g.network.edges().iter().map(|e| e.length).collect();
        let factors = planner.factors().to_vec();
        let n = g.network.nodes().len();
        for s in 0..n {
            for t in 0..n {
                let expected = brute_force(&g, s, t, &|e| lengths[e] * factors[e]);
                let got = planner.node_cost(s, t);
                match (got, expected) {
                    (Some(c), Some((b, _))) => assert!((c - b).abs() <= 1e-12 * b.max(1.0), "graph {seed}: {c} vs {b}"),
                    (None, None) => {}
                    other => panic!("graph {seed}: v{s} -> v{t}: {other:?}"),
                }
            }
        }
    }
}

#[test]
fn astar_matches_dijkstra_on_benchmark_networks() {
    for world_seed in [42, 7] {
        let world = benchmark_world(world_seed).unwrap();
        let network = world.network.clone();
        let internal = GraphPlanner::new(network.clone());
        let perturbed = PerturbedPlanner::new(network.clone(), 0.2, world_seed).unwrap();
        let n = network.nodes().len();
        let mut rng = ChaCha8Rng::seed_from_u64(world_seed);
        for _ in 0..300 {
            let (s, t) = (rng.random_range(0..n), rng.random_range(0..n));
            let a = internal.node_cost(s, t).unwrap();
            let d = dijkstra_cost(&network, s, t, None).unwrap();
            assert!((a - d).abs() <= 1e-9 * d.max(1.0), "internal {s}->{t}: {a} vs {d}");
            let a = perturbed.node_cost(s, t).unwrap();
            let d = dijkstra_cost(&network, s, t, Some(perturbed.factors())).unwrap();
            assert!((a - d).abs() <= 1e-9 * d.max(1.0), "perturbed {s}->{t}: {a} vs {d}");
        }
    }
}
