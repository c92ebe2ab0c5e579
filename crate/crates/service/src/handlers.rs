use std::sync::{Arc, Mutex};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::IntoResponse;
use axum::Json;
use destrec_core::recognizer::{create_session, parse_problems, solve_problem, PlaceRef, ProblemTrace, Session, TraceStep};
use destrec_core::{GeoConfig, LatLng};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::{ApiError, AppState, Live, Slot};

fn parse_body<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(bytes).map_err(|e| ApiError::bad_request(format!("malformed request body: {e}")))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeoOverrides {
    radius: Option<f64>,
    tau: Option<f64>,
    spacing: Option<f64>,
}

impl GeoOverrides {
    fn apply(&self, base: GeoConfig) -> Result<GeoConfig, ApiError> {
        let cfg = GeoConfig {
            sphere_radius: self.radius.unwrap_or(base.sphere_radius),
            similarity_threshold: self.tau.unwrap_or(base.similarity_threshold),
            resample_spacing: self.spacing.unwrap_or(base.resample_spacing),
        };
        cfg.validate().map_err(|e| ApiError::bad_request(e.to_string()))?;
        Ok(cfg)
    }
}

// Other problem-file fields (problem_id, observations, ...) are accepted
// and ignored so a problem object can be posted as is.
#[derive(Debug, Deserialize)]
struct CreateSession {
    network: Option<String>,
    init: PlaceRef,
    intentions: Vec<PlaceRef>,
    priors: Option<Vec<f64>>,
    #[serde(default)]
    geo: GeoOverrides,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ObservationBody {
    Object { lat: f64, lng: f64 },
    Pair([f64; 2]),
}

fn label_map<T: Into<Value>>(session: &Session, values: impl IntoIterator<Item = T>) -> Map<String, Value> {
    session.labels().into_iter().zip(values).map(|(l, v)| (l, v.into())).collect()
}

fn ideal_lengths(session: &Session) -> Value {
    Value::Object(session.ideal_routes().map(|(l, r)| (l.to_string(), json!(r.total_length))).collect())
}

fn preview(session: &Session) -> Value {
    Value::Object(session.observation_route_lengths().map(|(l, len)| (l.to_string(), json!(len))).collect())
}

/// The step payload: trace fields plus per-candidate observation route lengths.
fn step_payload(session: &Session, step: &TraceStep) -> Value {
    let mut out = match serde_json::to_value(step).expect("trace step serializes") {
        Value::Object(m) => m,
        _ => unreachable!(),
    };
    out.insert("observation_route_preview".into(), preview(session));
    out.insert("warnings".into(), json!(session.warnings()));
    Value::Object(out)
}

pub(crate) async fn open_session(State(state): State<Arc<AppState>>, body: Bytes) -> Result<(StatusCode, Json<Value>), ApiError> {
    let request: CreateSession = parse_body(&body)?;
    let world = state.world(request.network.as_deref())?.clone();
    let geo = request.geo.apply(world.env.geo)?;
    let session = blocking(move || {
        let init = world.env.resolve(&request.init)?;
        let intentions = request
            .intentions
            .iter()
            .map(|p| Ok((p.label(), world.env.resolve(p)?)))
            .collect::<Result<Vec<_>, ApiError>>()?;
        let session = create_session(world.env.planner.clone(), geo, init, intentions, request.priors)?;
        Ok((world.name, session))
    })
    .await?;
    let (network, session) = session;

    let id = uuid::Uuid::new_v4().simple().to_string();
    let created_at = unix_now();
    let body = json!({
        "session_id": id,
        "network": network,
        "created_at": created_at,
        "planner": session.planner_id(),
        "intentions": session.labels(),
        "ideal_route_lengths_m": ideal_lengths(&session),
        "posterior": label_map(&session, session.latest().candidates.iter().map(|c| c.posterior)),
    });
    let slot = Slot {
        network,
        created_at,
        live: Mutex::new(Live { session, trace: Vec::new() }),
        last_used: Mutex::new(Instant::now()),
    };
    state.sessions.lock().unwrap().insert(id, Arc::new(slot));
    Ok((StatusCode::CREATED, Json(body)))
}

pub(crate) async fn observe(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<Value>, ApiError> {
    let slot = state.slot(&id)?;
    let observation = match parse_body::<ObservationBody>(&body)? {
        ObservationBody::Object { lat, lng } | ObservationBody::Pair([lat, lng]) => LatLng::new(lat, lng),
    }
    .map_err(|e| ApiError::bad_request(format!("invalid observation: {e}")))?;
    let payload = blocking(move || {
        let mut live = slot.live.lock().unwrap();
        let step = TraceStep::from(live.session.observe(observation));
        let payload = step_payload(&live.session, &step);
        live.trace.push(step);
        Ok(payload)
    })
    .await?;
    Ok(Json(payload))
}

pub(crate) async fn get_session(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let slot = state.slot(&id)?;
    blocking(move || Ok(Json(snapshot(&id, &slot)))).await
}

fn snapshot(id: &str, slot: &Slot) -> Value {
    let live = slot.live.lock().unwrap();
    let s = &live.session;
    let latest = TraceStep::from(s.latest());
    let geo = s.geo();
    let mut body = json!({
        "session_id": id,
        "network": slot.network,
        "created_at": slot.created_at,
        "planner": s.planner_id(),
        "init": s.init(),
        "intentions": s.intentions().into_iter().map(|(label, pos)| json!({"label": label, "position": pos})).collect::<Vec<_>>(),
        "priors": label_map(s, s.priors().iter().copied()),
        "geo": {"radius": geo.sphere_radius, "tau": geo.similarity_threshold, "spacing": geo.resample_spacing},
        "observations": s.observations(),
        "ideal_route_lengths_m": ideal_lengths(s),
        "ideal_routes": Value::Object(s.ideal_routes().map(|(l, r)| (l.to_string(), json!(r.points))).collect()),
        "trace": live.trace,
    });
    let step = step_payload(s, &latest);
    if let (Value::Object(out), Value::Object(step)) = (&mut body, step) {
        out.extend(step);
    }
    body
}

pub(crate) async fn delete_session(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    match state.sessions.lock().unwrap().remove(&id) {
        Some(_) => Ok(StatusCode::NO_CONTENT),
        None => Err(ApiError::not_found(format!("no session {id:?}"))),
    }
}

pub(crate) async fn list_networks(State(state): State<Arc<AppState>>) -> impl IntoResponse {
    let list: Vec<Value> = state
        .worlds
        .iter()
        .map(|w| {
            let network: Value = serde_json::from_str(&w.env.network.to_json_string()).expect("network json");
            let places: Map<String, Value> = w.env.gazetteer.iter().map(|(n, p)| (n.to_string(), json!(p))).collect();
            json!({
                "name": w.name,
                "planner": w.env.planner.id(),
                "node_count": w.env.network.nodes().len(),
                "edge_count": w.env.network.edges().len(),
                "network": network,
                "gazetteer": places,
            })
        })
        .collect();
    Json(list)
}

#[derive(Debug, Deserialize)]
pub(crate) struct SolveQuery {
    network: Option<String>,
}

pub(crate) async fn solve(
    State(state): State<Arc<AppState>>,
    Query(query): Query<SolveQuery>,
    body: Bytes,
) -> Result<Json<Vec<ProblemTrace>>, ApiError> {
    let text = std::str::from_utf8(&body).map_err(|_| ApiError::bad_request("request body is not UTF-8"))?;
    let problems = parse_problems(text)?;
    let world = state.world(query.network.as_deref())?.clone();
    let traces = blocking(move || {
        problems
            .iter()
            .map(|p| Ok(ProblemTrace::new(p, &solve_problem(p, &world.env)?)))
            .collect::<Result<Vec<_>, ApiError>>()
    })
    .await?;
    Ok(Json(traces))
}
