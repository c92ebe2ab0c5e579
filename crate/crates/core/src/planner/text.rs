use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::OnceLock;

use regex::Regex;
use serde::Deserialize;
use thiserror::Error;

use super::{PlanError, Route, RoutePlanner};
use crate::LatLng;

pub const TEXT_PLANNER_ID: &str = "text";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TextRouteError {
    #[error("no coordinate pair found (line {line}: {text:?})")]
    NoCoordinates { line: usize, text: String },
    #[error("line {line}: invalid coordinate ({lat}, {lng})")]
    InvalidCoordinate { line: usize, lat: String, lng: String },
}

fn pair_pattern() -> &'static Regex {
    static PATTERN: OnceLock<Regex> = OnceLock::new();
    PATTERN.get_or_init(|| {
        let num = r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?";
        Regex::new(&format!(r"\(\s*({num})\s*,\s*({num})\s*\)|\[\s*({num})\s*,\s*({num})\s*\]")).unwrap()
    })
}

/// Extracts `(lat, lng)` or `[lat, lng]` pairs from free text in order of
/// appearance.
pub fn parse_textual_route(text: &str) -> Result<Route, TextRouteError> {
    let mut points = Vec::new();
    let mut first_miss: Option<(usize, &str)> = None;
    for (i, line) in text.lines().enumerate() {
        let mut found = false;
        for caps in pair_pattern().captures_iter(line) {
            let (lat, lng) = match (caps.get(1), caps.get(2)) {
                (Some(a), Some(b)) => (a.as_str(), b.as_str()),
                _ => (&caps[3], &caps[4]),
            };
            let invalid = || TextRouteError::InvalidCoordinate { line: i + 1, lat: lat.to_string(), lng: lng.to_string() };
            let (la, ln) = (lat.parse::<f64>().map_err(|_| invalid())?, lng.parse::<f64>().map_err(|_| invalid())?);
            points.push(LatLng::new(la, ln).map_err(|_| invalid())?);
            found = true;
        }
        if !found && first_miss.is_none() {
            first_miss = Some((i + 1, line));
        }
    }
    if points.is_empty() {
        let (line, text) = first_miss.unwrap_or((1, ""));
        return Err(TextRouteError::NoCoordinates { line, text: text.to_string() });
    }
    Ok(Route::from_points(points, TEXT_PLANNER_ID))
}

/// Numbered one-pair-per-line listing that [`parse_textual_route`] reads back
/// exactly.
pub fn route_to_text(route: &Route) -> String {
    let mut out = String::new();
    for (i, p) in route.points.iter().enumerate() {
        let _ = writeln!(out, "{}. ({}, {})", i + 1, p.lat(), p.lng());
    }
    out
}

pub fn format_directions_prompt(origin: LatLng, waypoints: &[LatLng], destination: LatLng) -> String {
    let mut prompt = format!("Give driving directions from ({}, {}) to ({}, {})", origin.lat(), origin.lng(), destination.lat(), destination.lng());
    if !waypoints.is_empty() {
        prompt.push_str(" passing through, in this order:");
        for w in waypoints {
            let _ = write!(prompt, " ({}, {})", w.lat(), w.lng());
        }
    }
    prompt.push_str(". Answer with a numbered list of (latitude, longitude) points along the roads, one per line.");
    prompt
}

/// Text completion backend for [`TextPromptPlanner`].
pub trait PromptTransport: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String, String>;
}

/// Replays recorded replies keyed by the exact prompt text.
#[derive(Debug, Clone, Default)]
pub struct FixturePromptTransport {
    replies: HashMap<String, String>,
}

#[derive(Deserialize)]
struct PromptFixture {
    origin: LatLng,
    destination: LatLng,
    #[serde(default)]
    via: Vec<LatLng>,
    reply: String,
}

impl FixturePromptTransport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, prompt: String, reply: String) {
        self.replies.insert(prompt, reply);
    }

    /// Reads `[{"origin", "destination", "via"?, "reply"}]`.
    pub fn from_json_str(json: &str) -> Result<Self, String> {
        let entries: Vec<PromptFixture> = serde_json::from_str(json).map_err(|e| e.to_string())?;
        let mut out = Self::new();
        for e in entries {
            out.insert(format_directions_prompt(e.origin, &e.via, e.destination), e.reply);
        }
        Ok(out)
    }
}

impl PromptTransport for FixturePromptTransport {
    fn complete(&self, prompt: &str) -> Result<String, String> {
        self.replies.get(prompt).cloned().ok_or_else(|| format!("no recorded reply for prompt {prompt:?}"))
    }
}

/// Asks a text backend for directions and parses the coordinates out of the reply.
pub struct TextPromptPlanner<P> {
    transport: P,
}

impl<P: PromptTransport> TextPromptPlanner<P> {
    pub fn new(transport: P) -> Self {
        Self { transport }
    }

    fn ask(&self, origin: LatLng, waypoints: &[LatLng], destination: LatLng) -> Result<Route, PlanError> {
        let prompt = format_directions_prompt(origin, waypoints, destination);
        let reply = self.transport.complete(&prompt).map_err(PlanError::Transport)?;
        parse_textual_route(&reply).map_err(|e| PlanError::MalformedResponse(e.to_string()))
    }
}

impl<P: PromptTransport> RoutePlanner for TextPromptPlanner<P> {
    fn id(&self) -> &str {
        TEXT_PLANNER_ID
    }

    fn plan(&self, origin: LatLng, destination: LatLng) -> Result<Route, PlanError> {
        self.ask(origin, &[], destination)
    }

    fn plan_via(&self, origin: LatLng, waypoints: &[LatLng], destination: LatLng) -> Result<Route, PlanError> {
        self.ask(origin, waypoints, destination)
    }
}
