use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use destrec_core::fixtures::{example_problems, london_gazetteer, london_network, EXAMPLE_PROBLEM_JSON};
use destrec_core::recognizer::{solve_problem, trace_of, Environment};
use destrec_core::roadnet::EdgeSpec;
use destrec_core::{Gazetteer, GeoConfig, LatLng, RoadNetwork};
use destrec_service::{router, AppState, ServiceConfig, World};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn london_env() -> Environment {
    Environment::internal(Arc::new(london_network()), Arc::new(london_gazetteer()), GeoConfig::default())
}

fn state_with(config: ServiceConfig) -> Arc<AppState> {
    Arc::new(AppState::new(vec![World { name: "london".into(), env: london_env() }], config).unwrap())
}

fn app() -> Router {
    router(state_with(ServiceConfig::default()))
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<String>) -> (StatusCode, Value) {
    let request = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map(Body::from).unwrap_or_else(Body::empty))
        .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

fn example_object() -> Value {
    let v: Value = serde_json::from_str(EXAMPLE_PROBLEM_JSON).unwrap();
    v[0].clone()
}

async fn open(app: &Router, body: Value) -> String {
    let (status, v) = call(app, Method::POST, "/sessions", Some(body.to_string())).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    v["session_id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn two_intentions_start_uniform() {
    let app = app();
    let body = json!({"init": "Kensington Palace London", "intentions": ["London Bridge", "Tower Bridge London"]});
    let (status, v) = call(&app, Method::POST, "/sessions", Some(body.to_string())).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(v["posterior"], json!({"London Bridge": 0.5, "Tower Bridge London": 0.5}));
    assert!(v["ideal_route_lengths_m"]["London Bridge"].as_f64().unwrap() > 0.0);
    assert_eq!(v["network"], "london");
}

#[tokio::test]
async fn example_payload_creates_five_candidates() {
    let app = app();
    let (status, v) = call(&app, Method::POST, "/sessions", Some(example_object().to_string())).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(v["intentions"].as_array().unwrap().len(), 5);
}

#[tokio::test]
async fn unknown_place_is_rejected_with_suggestions() {
    let app = app();
    let body = json!({"init": "Kensington Palace London", "intentions": ["Tower Brige London", "London Bridge"]});
    let (status, v) = call(&app, Method::POST, "/sessions", Some(body.to_string())).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v["place"], "Tower Brige London");
    assert!(v["suggestions"].as_array().unwrap().contains(&json!("Tower Bridge London")), "{v}");
}

#[tokio::test]
async fn malformed_bodies_are_bad_requests() {
    let app = app();
    let (status, _) = call(&app, Method::POST, "/sessions", Some("{not json".into())).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, Method::POST, "/sessions", Some(json!({"init": "London Bridge"}).to_string())).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let body = json!({"init": "Kensington Palace London", "intentions": ["London Bridge", "Tower Bridge London"], "geo": {"tau": -1.0}});
    let (status, _) = call(&app, Method::POST, "/sessions", Some(body.to_string())).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let id = open(&app, example_object()).await;
    let uri = format!("/sessions/{id}/observations");
    for bad in [json!({"lat": "x"}), json!({"lat": 95.0, "lng": 0.0}), json!([1.0]), json!({"lng": 0.0})] {
        let (status, v) = call(&app, Method::POST, &uri, Some(bad.to_string())).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{bad} -> {v}");
    }
}

#[tokio::test]
async fn unknown_session_is_not_found() {
    let app = app();
    let (status, _) = call(&app, Method::POST, "/sessions/nope/observations", Some(json!([51.5, -0.1]).to_string())).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, Method::GET, "/sessions/nope", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, Method::DELETE, "/sessions/nope", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn observing_the_start_keeps_the_posterior_uniform() {
    let app = app();
    let id = open(&app, example_object()).await;
    let start = london_gazetteer().get("Kensington Palace London").unwrap();
    let (status, v) = call(&app, Method::POST, &format!("/sessions/{id}/observations"), Some(json!(start).to_string())).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["step"], 1);
    for p in v["posterior"].as_object().unwrap().values() {
        assert!((p.as_f64().unwrap() - 0.2).abs() < 1e-12);
    }
    assert_eq!(v["argmax"].as_array().unwrap().len(), 5);
}

#[tokio::test]
async fn replay_matches_library_trace() {
    let app = app();
    let problem = &example_problems()[0];
    let expected = serde_json::to_value(trace_of(&solve_problem(problem, &london_env()).unwrap())).unwrap();
    let id = open(&app, example_object()).await;
    for (i, obs) in problem.observations.iter().enumerate() {
        let body = json!({"lat": obs.lat(), "lng": obs.lng()});
        let (status, v) = call(&app, Method::POST, &format!("/sessions/{id}/observations"), Some(body.to_string())).await;
        assert_eq!(status, StatusCode::OK);
        for key in ["step", "posterior", "epsilon", "argmax"] {
            assert_eq!(v[key], expected[i][key], "step {} field {key}", i + 1);
        }
        let preview = v["observation_route_preview"].as_object().unwrap();
        assert_eq!(preview.len(), 5);
        assert!(preview.values().all(|l| l.as_f64().unwrap() > 0.0));
    }
    let (status, v) = call(&app, Method::GET, &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["step"], 3);
    assert_eq!(v["observations"].as_array().unwrap().len(), 3);
    assert_eq!(v["trace"], expected);
    assert!(v["argmax"].as_array().unwrap().contains(&json!("Tower Bridge London")));
    assert_eq!(v["ideal_routes"].as_object().unwrap().len(), 5);
}

#[tokio::test]
async fn snapshot_after_two_observations() {
    let app = app();
    let problem = &example_problems()[0];
    let id = open(&app, example_object()).await;
    for obs in &problem.observations[..2] {
        call(&app, Method::POST, &format!("/sessions/{id}/observations"), Some(json!(obs).to_string())).await;
    }
    let (_, v) = call(&app, Method::GET, &format!("/sessions/{id}"), None).await;
    assert_eq!(v["step"], 2);
    assert_eq!(v["session_id"], id.as_str());
    let (status, _) = call(&app, Method::DELETE, &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::NO_CONTENT);
    let (status, _) = call(&app, Method::GET, &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn lists_the_loaded_network() {
    let (status, v) = call(&app(), Method::GET, "/networks", None).await;
    assert_eq!(status, StatusCode::OK);
    let list = v.as_array().unwrap();
    assert_eq!(list.len(), 1);
    assert_eq!(list[0]["name"], "london");
    assert_eq!(list[0]["node_count"], london_network().nodes().len());
    assert!(list[0]["gazetteer"]["Tower Bridge London"].is_array());
    assert!(list[0]["network"]["edges"].is_array());
}

#[tokio::test]
async fn batch_solve_returns_one_trace() {
    let app = app();
    let (status, v) = call(&app, Method::POST, "/solve", Some(EXAMPLE_PROBLEM_JSON.to_string())).await;
    assert_eq!(status, StatusCode::OK);
    let list = v.as_array().unwrap();
    assert_eq!(list.len(), 1);
    assert_eq!(list[0]["problem_id"], "1.5.3");
    assert_eq!(list[0]["trace"].as_array().unwrap().len(), 3);
    assert_eq!(list[0]["intent_in_argmax"], true);

    let broken = EXAMPLE_PROBLEM_JSON.replace("\"observations\"", "\"obs\"");
    let (status, v) = call(&app, Method::POST, "/solve", Some(broken)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(v["error"].as_str().unwrap().contains("observations"));
    let (status, _) = call(&app, Method::POST, "/solve?network=paris", Some(EXAMPLE_PROBLEM_JSON.into())).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn unreachable_intention_is_named() {
    let p = |lat: f64, lng: f64| LatLng::new(lat, lng).unwrap();
    let nodes = vec![
        ("a".to_string(), p(0.0, 0.0)),
        ("b".to_string(), p(0.0, 0.001)),
        ("c".to_string(), p(0.001, 0.0)),
        ("d".to_string(), p(0.001, 0.001)),
    ];
    let edge = |f: &str, t: &str| EdgeSpec { from: f.into(), to: t.into(), length: 200.0, oneway: false };
    let network = Arc::new(RoadNetwork::new(Some("split".into()), nodes, vec![edge("a", "b"), edge("c", "d")]).unwrap());
    let gazetteer = Gazetteer::new([("home".to_string(), p(0.0, 0.0)), ("near".to_string(), p(0.0, 0.001)), ("island".to_string(), p(0.001, 0.001))]).unwrap();
    let env = Environment::internal(network, Arc::new(gazetteer), GeoConfig::default());
    let state = AppState::new(vec![World { name: "london".into(), env: london_env() }, World { name: "split".into(), env }], ServiceConfig::default()).unwrap();
    let app = router(Arc::new(state));
    let body = json!({"network": "split", "init": "home", "intentions": ["near", "island"]});
    let (status, v) = call(&app, Method::POST, "/sessions", Some(body.to_string())).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["intention"], "island");
}

#[tokio::test]
async fn idle_sessions_are_evicted() {
    let state = state_with(ServiceConfig { idle_timeout: Duration::from_secs(60) });
    let app = router(state.clone());
    let id = open(&app, example_object()).await;
    open(&app, example_object()).await;
    assert_eq!(state.session_count(), 2);
    assert_eq!(state.evict_idle(), 0);
    // Touch one session, then look from a point in time 61 s later.
    call(&app, Method::GET, &format!("/sessions/{id}"), None).await;
    assert_eq!(state.evict_idle_at(Instant::now() + Duration::from_secs(61)), 2);
    assert_eq!(state.session_count(), 0);
}

#[tokio::test]
async fn sessions_progress_independently() {
    let app = app();
    let problem = &example_problems()[0];
    let a = open(&app, example_object()).await;
    let b = open(&app, example_object()).await;
    let obs = problem.observations.clone();
    let (ua, ub) = (format!("/sessions/{a}/observations"), format!("/sessions/{b}/observations"));
    let (ra, rb) = tokio::join!(
        call(&app, Method::POST, &ua, Some(json!(obs[0]).to_string())),
        call(&app, Method::POST, &ub, Some(json!(obs[0]).to_string())),
    );
    assert_eq!(ra.0, StatusCode::OK);
    assert_eq!(ra.1["posterior"], rb.1["posterior"]);
    call(&app, Method::POST, &format!("/sessions/{a}/observations"), Some(json!(obs[1]).to_string())).await;
    let (_, va) = call(&app, Method::GET, &format!("/sessions/{a}"), None).await;
    let (_, vb) = call(&app, Method::GET, &format!("/sessions/{b}"), None).await;
    assert_eq!((va["step"].as_u64(), vb["step"].as_u64()), (Some(2), Some(1)));
}
