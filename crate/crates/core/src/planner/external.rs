use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{PlanError, Route, RoutePlanner};
use crate::LatLng;

pub const EXTERNAL_PLANNER_ID: &str = "external";

/// JSON request/response channel used by [`DirectionsClient`].
pub trait JsonTransport: Send + Sync {
    fn post_json(&self, path: &str, body: &Value) -> Result<Value, String>;
}

/// Blocking HTTP transport against a base URL such as `http://127.0.0.1:8080`.
pub struct HttpJsonTransport {
    base_url: String,
    agent: ureq::Agent,
}

impl HttpJsonTransport {
    pub fn new(base_url: impl Into<String>) -> Self {
        let agent = ureq::Agent::config_builder().timeout_global(Some(Duration::from_secs(30))).build().into();
        Self { base_url: base_url.into().trim_end_matches('/').to_string(), agent }
    }
}

impl JsonTransport for HttpJsonTransport {
    fn post_json(&self, path: &str, body: &Value) -> Result<Value, String> {
        let url = format!("{}{}", self.base_url, path);
        let mut response = self.agent.post(&url).send_json(body).map_err(|e| format!("POST {url}: {e}"))?;
        let text = response.body_mut().read_to_string().map_err(|e| format!("POST {url}: {e}"))?;
        // A body that is not JSON is the server's fault, not the transport's.
        Ok(serde_json::from_str(&text).unwrap_or(Value::String(text)))
    }
}

/// Replays recorded request/response pairs; requests must match exactly.
#[derive(Debug, Clone, Default)]
pub struct FixtureJsonTransport {
    entries: Vec<(Value, Value)>,
}

#[derive(Deserialize)]
struct RecordedExchange {
    request: Value,
    response: Value,
}

impl FixtureJsonTransport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, request: Value, response: Value) {
        self.entries.push((request, response));
    }

    /// Reads `[{"request": {...}, "response": {...}}]`.
    pub fn from_json_str(json: &str) -> Result<Self, String> {
        let recorded: Vec<RecordedExchange> = serde_json::from_str(json).map_err(|e| e.to_string())?;
        Ok(Self { entries: recorded.into_iter().map(|r| (r.request, r.response)).collect() })
    }
}

impl JsonTransport for FixtureJsonTransport {
    fn post_json(&self, path: &str, body: &Value) -> Result<Value, String> {
        if path != "/route" {
            return Err(format!("no fixture for path {path}"));
        }
        self.entries
            .iter()
            .find(|(req, _)| req == body)
            .map(|(_, resp)| resp.clone())
            .ok_or_else(|| format!("no recorded response for request {body}"))
    }
}

#[derive(Serialize)]
struct RouteRequestBody<'a> {
    origin: LatLng,
    destination: LatLng,
    via: &'a [LatLng],
}

#[derive(Deserialize)]
struct RouteResponseBody {
    points: Vec<LatLng>,
    length_m: f64,
}

/// Client for the `POST /route` directions protocol.
pub struct DirectionsClient<T> {
    transport: T,
}

impl<T: JsonTransport> DirectionsClient<T> {
    pub fn new(transport: T) -> Self {
        Self { transport }
    }

    pub fn request_body(origin: LatLng, waypoints: &[LatLng], destination: LatLng) -> Value {
        serde_json::to_value(RouteRequestBody { origin, destination, via: waypoints }).expect("request serializes")
    }

    fn request(&self, origin: LatLng, waypoints: &[LatLng], destination: LatLng) -> Result<Route, PlanError> {
        let body = Self::request_body(origin, waypoints, destination);
        let reply = self.transport.post_json("/route", &body).map_err(PlanError::Transport)?;
        let parsed: RouteResponseBody =
            serde_json::from_value(reply).map_err(|e| PlanError::MalformedResponse(e.to_string()))?;
        if parsed.points.is_empty() {
            return Err(PlanError::MalformedResponse("empty point list".into()));
        }
        if !(parsed.length_m.is_finite() && parsed.length_m >= 0.0) {
            return Err(PlanError::MalformedResponse(format!("invalid length_m {}", parsed.length_m)));
        }
        Ok(Route {
            points: parsed.points,
            total_length: parsed.length_m,
            cost: parsed.length_m,
            planner_id: EXTERNAL_PLANNER_ID.to_string(),
            nodes: Vec::new(),
        })
    }
}

impl<T: JsonTransport> RoutePlanner for DirectionsClient<T> {
    fn id(&self) -> &str {
        EXTERNAL_PLANNER_ID
    }

    fn plan(&self, origin: LatLng, destination: LatLng) -> Result<Route, PlanError> {
        self.request(origin, &[], destination)
    }

    fn plan_via(&self, origin: LatLng, waypoints: &[LatLng], destination: LatLng) -> Result<Route, PlanError> {
        self.request(origin, waypoints, destination)
    }
}
