use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use destrec_core::bench::{
    benchmark_world, evaluate_dataset, generate_dataset, render_table, DatasetConfig, EvalOptions, BENCHMARK_GAZETTEER_SIZE,
};
use destrec_core::fixtures::{EXAMPLE_PROBLEM_JSON, LONDON_GAZETTEER_JSON, LONDON_NETWORK_JSON};
use destrec_core::planner::{plan_with, PlanRequest};
use destrec_core::recognizer::{parse_problems, problems_to_json, solve_problem, Environment, ProblemTrace};
use destrec_core::roadnet::{generate_grid_network, load_network, GridSpec};
use destrec_core::{Gazetteer, GeoConfig, LatLng, PlaceRef, RoadNetwork};
use destrec_service::{AppState, ServiceConfig, World};
use serde_json::json;

use crate::{Cli, Command, Global};

const DEFAULT_SEED: u64 = 42;

// Like print! but a closed stdout (e.g. `| head`) is not an error.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

pub struct Failure {
    pub code: u8,
    pub message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 1, message: message.into() }
}

fn domain(e: impl std::fmt::Display) -> Failure {
    Failure { code: 2, message: e.to_string() }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| domain(format!("cannot read {}: {e}", path.display())))
}

fn write_or_print(output: Option<&Path>, text: &str) -> Outcome {
    match output {
        Some(path) => fs::write(path, format!("{text}\n")).map_err(|e| domain(format!("cannot write {}: {e}", path.display()))),
        None => {
            out!("{text}");
            Ok(())
        }
    }
}

fn print_json(value: &impl serde::Serialize) {
    out!("{}", serde_json::to_string_pretty(value).expect("output serializes"));
}

/// "lat,lng" (or "[lat, lng]") is a coordinate, anything else a name.
fn place_arg(text: &str) -> PlaceRef {
    let inner = text.trim().trim_start_matches('[').trim_end_matches(']');
    if let Some((a, b)) = inner.split_once(',') {
        if let (Ok(lat), Ok(lng)) = (a.trim().parse::<f64>(), b.trim().parse::<f64>()) {
            if let Ok(p) = LatLng::new(lat, lng) {
                return PlaceRef::Coords(p);
            }
        }
    }
    PlaceRef::Name(text.to_string())
}

struct Loaded {
    name: String,
    env: Environment,
}

fn load(global: &Global) -> Result<Loaded, Failure> {
    let geo = GeoConfig::new(global.radius, global.tau, global.spacing).map_err(|e| usage(e.to_string()))?;
    let (name, network) = match &global.network {
        Some(path) => {
            let network = load_network(path).map_err(domain)?;
            let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            (network.name().map(str::to_string).unwrap_or(stem), network)
        }
        None => ("london".to_string(), RoadNetwork::from_json_str(LONDON_NETWORK_JSON).map_err(domain)?),
    };
    let gazetteer = match &global.gazetteer {
        Some(path) => Gazetteer::load(path).map_err(domain)?,
        None if global.network.is_none() => Gazetteer::from_json_str(LONDON_GAZETTEER_JSON).map_err(domain)?,
        None => Gazetteer::default(),
    };
    let network = Arc::new(network);
    let planner = global.planner.build(network.clone()).map_err(|e| usage(e.to_string()))?;
    let env = Environment { network, gazetteer: Arc::new(gazetteer), planner, geo };
    Ok(Loaded { name, env })
}

pub fn run(cli: Cli) -> Outcome {
    let g = &cli.global;
    match &cli.command {
        Command::Route { origin, destination, via } => route(g, origin, destination, via),
        Command::Solve { problems } => solve(g, problems),
        Command::Generate { config, output } => generate(g, config.as_deref(), output.as_deref()),
        Command::Eval { dataset, per_problem } => eval(g, dataset, *per_problem),
        Command::Genmap { rows, cols, grid_spacing, origin, jitter, drop, places, output } => {
            let origin = match place_arg(origin) {
                PlaceRef::Coords(p) => p,
                PlaceRef::Name(n) => return Err(usage(format!("--origin must be \"lat,lng\", got {n:?}"))),
            };
            let spec = GridSpec {
                rows: *rows,
                cols: *cols,
                spacing_m: *grid_spacing,
                origin,
                jitter_fraction: *jitter,
                drop_probability: *drop,
                seed: g.seed.unwrap_or(DEFAULT_SEED),
            };
            genmap(&spec, *places, output.as_deref())
        }
        Command::Serve { idle_timeout } => serve(g, Duration::from_secs(*idle_timeout)),
        Command::Fixtures { dir } => fixtures(g, dir),
    }
}

fn route(g: &Global, origin: &str, destination: &str, via: &[String]) -> Outcome {
    let loaded = load(g)?;
    let env = &loaded.env;
    let resolve = |s: &str| env.resolve(&place_arg(s)).map_err(domain);
    let request = PlanRequest {
        origin: resolve(origin)?,
        via: via.iter().map(|v| resolve(v)).collect::<Result<_, _>>()?,
        destination: resolve(destination)?,
    };
    let route = plan_with(env.planner.as_ref(), &request).map_err(domain)?;
    if g.json {
        print_json(&route);
    } else {
        out!(
            "{} -> {}: {} points, {:.1} m (cost {:.1}, planner {})",
            origin,
            destination,
            route.points.len(),
            route.total_length,
            route.cost,
            route.planner_id
        );
        for (i, p) in route.points.iter().enumerate() {
            let node = route.nodes.get(i).map(|n| format!("  {n}")).unwrap_or_default();
            out!("{:>4}. ({}, {}){node}", i + 1, p.lat(), p.lng());
        }
    }
    Ok(())
}

fn solve(g: &Global, path: &Path) -> Outcome {
    let problems = parse_problems(&read(path)?).map_err(domain)?;
    let loaded = load(g)?;
    let mut traces = Vec::with_capacity(problems.len());
    for problem in &problems {
        let steps = solve_problem(problem, &loaded.env).map_err(|e| domain(format!("problem {:?}: {e}", problem.problem_id)))?;
        traces.push(ProblemTrace::new(problem, &steps));
    }
    if g.json {
        print_json(&traces);
        return Ok(());
    }
    for t in &traces {
        out!("problem {} (intent {})", t.problem_id, t.intent_location);
        for step in &t.trace {
            let posterior: Vec<String> = step.posterior.iter().map(|(k, v)| format!("{k}={v:.4}")).collect();
            out!("  step {}: argmax [{}]  {}", step.step, step.argmax.join(", "), posterior.join(" "));
        }
        out!(
            "  final argmax: [{}]; contains {:?}: {}",
            t.final_argmax.join(", "),
            t.intent_location,
            if t.intent_in_argmax { "yes" } else { "no" }
        );
    }
    Ok(())
}

fn generate(g: &Global, config: Option<&Path>, output: Option<&Path>) -> Outcome {
    let mut cfg = match config {
        Some(path) => serde_json::from_str::<DatasetConfig>(&read(path)?).map_err(|e| domain(format!("{}: {e}", path.display())))?,
        None => DatasetConfig { seed: DEFAULT_SEED, ..DatasetConfig::default() },
    };
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    let loaded = load(g)?;
    let problems = generate_dataset(&cfg, &loaded.env.network, &loaded.env.gazetteer).map_err(domain)?;
    write_or_print(output, &problems_to_json(&problems))?;
    if output.is_some() && !g.json {
        eprintln!("wrote {} problems", problems.len());
    }
    Ok(())
}

fn eval(g: &Global, path: &Path, per_problem: bool) -> Outcome {
    let problems = parse_problems(&read(path)?).map_err(domain)?;
    let loaded = load(g)?;
    let result = evaluate_dataset(&problems, &loaded.env, EvalOptions::default()).map_err(domain)?;
    if g.json {
        let mut out = serde_json::to_value(&result.report).expect("report serializes");
        if per_problem {
            out["problems"] = json!(result.problems.iter().map(|p| &p.metrics).collect::<Vec<_>>());
        }
        print_json(&out);
        return Ok(());
    }
    out!("planner {} on {} ({} problems)", loaded.env.planner.id(), loaded.name, problems.len());
    out!("{}", render_table(&result.report).trim_end());
    if per_problem {
        for p in &result.problems {
            let m = &p.metrics;
            out!(
                "{:>10}  tpr {:.2} fpr {:.2} f1 {:.2}  argmax [{}]",
                m.problem_id,
                m.last.tpr,
                m.last.fpr,
                m.last.f1,
                m.argmax.join(", ")
            );
        }
    }
    Ok(())
}

fn genmap(spec: &GridSpec, places: Option<usize>, output: Option<&Path>) -> Outcome {
    let network = generate_grid_network(spec).map_err(|e| usage(e.to_string()))?;
    write_or_print(output, &network.to_json_string())?;
    if let Some(count) = places {
        let gazetteer = Gazetteer::sample_nodes(&network, count, spec.seed.wrapping_add(1), "site").map_err(domain)?;
        let path = match output {
            Some(p) => p.with_extension("gazetteer.json"),
            None => PathBuf::from("gazetteer.json"),
        };
        fs::write(&path, gazetteer.to_json_string()).map_err(|e| domain(format!("cannot write {}: {e}", path.display())))?;
        eprintln!("wrote gazetteer to {}", path.display());
    }
    Ok(())
}

fn serve(g: &Global, idle_timeout: Duration) -> Outcome {
    let loaded = load(g)?;
    let state = AppState::new(vec![World { name: loaded.name, env: loaded.env }], ServiceConfig { idle_timeout }).map_err(domain)?;
    let runtime = tokio::runtime::Runtime::new().map_err(domain)?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(&g.bind).await.map_err(|e| domain(format!("cannot bind {}: {e}", g.bind)))?;
        let addr = listener.local_addr().map_err(domain)?;
        eprintln!("listening on http://{addr}");
        destrec_service::serve(listener, Arc::new(state)).await.map_err(domain)
    })
}

fn fixtures(g: &Global, dir: &Path) -> Outcome {
    fs::create_dir_all(dir).map_err(|e| domain(format!("cannot create {}: {e}", dir.display())))?;
    let seed = g.seed.unwrap_or(DEFAULT_SEED);
    let world = benchmark_world(seed).map_err(domain)?;
    let files = [
        ("london_network.json", LONDON_NETWORK_JSON.trim_end().to_string()),
        ("london_gazetteer.json", LONDON_GAZETTEER_JSON.trim_end().to_string()),
        ("example_problem.json", EXAMPLE_PROBLEM_JSON.trim_end().to_string()),
        ("bench_network.json", world.network.to_json_string()),
        ("bench_gazetteer.json", world.gazetteer.to_json_string()),
    ];
    for (name, text) in &files {
        let path = dir.join(name);
        fs::write(&path, format!("{text}\n")).map_err(|e| domain(format!("cannot write {}: {e}", path.display())))?;
    }
    if g.json {
        print_json(&json!({"dir": dir, "seed": seed, "files": files.iter().map(|(n, _)| n).collect::<Vec<_>>()}));
    } else {
        out!("wrote {} files to {} (benchmark map seed {seed}, {} places)", files.len(), dir.display(), BENCHMARK_GAZETTEER_SIZE);
    }
    Ok(())
}
