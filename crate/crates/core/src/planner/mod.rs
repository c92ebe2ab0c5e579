//! Route planning: the internal graph planner, a seeded cost-perturbed
//! variant, an external directions-API client and a text-prompt planner.

mod external;
mod graph;
mod text;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use external::{DirectionsClient, FixtureJsonTransport, HttpJsonTransport, JsonTransport};
pub use graph::{dijkstra_cost, GraphPlanner, PerturbedPlanner};
pub use text::{format_directions_prompt, parse_textual_route, route_to_text, FixturePromptTransport, PromptTransport, TextPromptPlanner, TextRouteError};

use crate::geo::{self, LatLng, MEAN_EARTH_RADIUS_M};
use crate::roadnet::NetworkError;
use crate::Scalar;

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("no route from node {from:?} to node {to:?}")]
    NoRoute { from: String, to: String },
    #[error("no route for leg {leg} (node {from:?} to node {to:?})")]
    NoRouteLeg { leg: usize, from: String, to: String },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("invalid planner configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed planner response: {0}")]
    MalformedResponse(String),
}

/// A planned route. `total_length` is the great-circle polyline length of
/// `points`; `cost` is what the producing planner minimized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct Route<T = f64> {
    pub points: Vec<LatLng<T>>,
    #[serde(rename = "length_m")]
    pub total_length: T,
    pub cost: T,
    pub planner_id: String,
    /// Graph node ids along the route, empty for planners without a graph.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nodes: Vec<String>,
}

impl<T: Scalar> Route<T> {
    /// Route whose cost is its own polyline length.
    pub fn from_points(points: Vec<LatLng<T>>, planner_id: impl Into<String>) -> Self {
        let total_length = geo::polyline_length(&points, T::lit(MEAN_EARTH_RADIUS_M));
        Self { points, total_length, cost: total_length, planner_id: planner_id.into(), nodes: Vec::new() }
    }

    pub fn origin(&self) -> Option<LatLng<T>> {
        self.points.first().copied()
    }

    pub fn destination(&self) -> Option<LatLng<T>> {
        self.points.last().copied()
    }
}

/// Joins legs end to end, dropping the repeated junction point between legs.
pub fn concat_routes<T: Scalar>(legs: Vec<Route<T>>, planner_id: &str) -> Route<T> {
    let mut out = Route {
        points: Vec::new(),
        total_length: T::zero(),
        cost: T::zero(),
        planner_id: planner_id.to_string(),
        nodes: Vec::new(),
    };
    for leg in legs {
        let skip_point = usize::from(out.points.last().is_some() && out.points.last() == leg.points.first());
        let skip_node = usize::from(!out.nodes.is_empty() && out.nodes.last() == leg.nodes.first());
        out.points.extend(leg.points.into_iter().skip(skip_point));
        out.nodes.extend(leg.nodes.into_iter().skip(skip_node));
        out.total_length = out.total_length + leg.total_length;
        out.cost = out.cost + leg.cost;
    }
    out
}

/// Anything that can produce routes between coordinates. Implementations
/// must be deterministic for fixed inputs and fixed backing data.
pub trait RoutePlanner: Send + Sync {
    fn id(&self) -> &str;

    fn plan(&self, origin: LatLng<f64>, destination: LatLng<f64>) -> Result<Route, PlanError>;

    /// Route visiting `waypoints` in order. The default concatenates
    /// optimal legs.
    fn plan_via(&self, origin: LatLng<f64>, waypoints: &[LatLng<f64>], destination: LatLng<f64>) -> Result<Route, PlanError> {
        let stops: Vec<LatLng<f64>> = std::iter::once(origin)
            .chain(waypoints.iter().copied())
            .chain(std::iter::once(destination))
            .collect();
        let mut legs = Vec::with_capacity(stops.len() - 1);
        for (leg, w) in stops.windows(2).enumerate() {
            let route = self.plan(w[0], w[1]).map_err(|e| match e {
                PlanError::NoRoute { from, to } => PlanError::NoRouteLeg { leg, from, to },
                other => other,
            })?;
            legs.push(route);
        }
        Ok(concat_routes(legs, self.id()))
    }

    /// True when `plan_via` is exactly the concatenation of `plan` legs, so
    /// callers may cache leg prefixes.
    fn composes_legs(&self) -> bool {
        false
    }
}

/// One routing request: origin, ordered via points, destination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRequest {
    pub origin: LatLng<f64>,
    #[serde(default)]
    pub via: Vec<LatLng<f64>>,
    pub destination: LatLng<f64>,
}

pub fn plan_with(planner: &dyn RoutePlanner, request: &PlanRequest) -> Result<Route, PlanError> {
    if request.via.is_empty() {
        planner.plan(request.origin, request.destination)
    } else {
        planner.plan_via(request.origin, &request.via, request.destination)
    }
}

/// Planner selection in its command-line form: `internal`,
/// `perturbed:<delta>:<seed>`, `external:<base-url>` or `text:<reply-fixture-file>`.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum PlannerSpec {
    #[default]
    Internal,
    Perturbed { delta: f64, seed: u64 },
    External { url: String },
    Text { fixture: std::path::PathBuf },
}

impl std::str::FromStr for PlannerSpec {
    type Err = PlanError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |msg: &str| PlanError::InvalidConfig(format!("planner {s:?}: {msg}"));
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        match kind {
            "internal" if rest.is_empty() => Ok(PlannerSpec::Internal),
            "perturbed" => {
                let (delta, seed) = rest.split_once(':').ok_or_else(|| bad("expected perturbed:<delta>:<seed>"))?;
                let delta: f64 = delta.parse().map_err(|_| bad("delta is not a number"))?;
                let seed: u64 = seed.parse().map_err(|_| bad("seed is not an unsigned integer"))?;
                if !(0.0..1.0).contains(&delta) {
                    return Err(bad("delta must be in [0, 1)"));
                }
                Ok(PlannerSpec::Perturbed { delta, seed })
            }
            "external" if !rest.is_empty() => Ok(PlannerSpec::External { url: rest.to_string() }),
            "text" if !rest.is_empty() => Ok(PlannerSpec::Text { fixture: rest.into() }),
            _ => Err(bad("expected internal, perturbed:<delta>:<seed>, external:<url> or text:<file>")),
        }
    }
}

impl std::fmt::Display for PlannerSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PlannerSpec::Internal => f.write_str("internal"),
            PlannerSpec::Perturbed { delta, seed } => write!(f, "perturbed:{delta}:{seed}"),
            PlannerSpec::External { url } => write!(f, "external:{url}"),
            PlannerSpec::Text { fixture } => write!(f, "text:{}", fixture.display()),
        }
    }
}

impl Serialize for PlannerSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PlannerSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl PlannerSpec {
    /// Instantiates the planner over `network`. Text planners read their
    /// recorded replies from the fixture file.
    pub fn build(&self, network: std::sync::Arc<crate::roadnet::RoadNetwork>) -> Result<std::sync::Arc<dyn RoutePlanner>, PlanError> {
        Ok(match self {
            PlannerSpec::Internal => std::sync::Arc::new(GraphPlanner::new(network)),
            PlannerSpec::Perturbed { delta, seed } => std::sync::Arc::new(PerturbedPlanner::new(network, *delta, *seed)?),
            PlannerSpec::External { url } => std::sync::Arc::new(DirectionsClient::new(HttpJsonTransport::new(url.clone()))),
            PlannerSpec::Text { fixture } => {
                let json = std::fs::read_to_string(fixture)
                    .map_err(|e| PlanError::InvalidConfig(format!("cannot read {}: {e}", fixture.display())))?;
                let transport = FixturePromptTransport::from_json_str(&json).map_err(PlanError::InvalidConfig)?;
                std::sync::Arc::new(TextPromptPlanner::new(transport))
            }
        })
    }
}
