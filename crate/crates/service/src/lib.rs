//! HTTP API over live recognition sessions and batch solving.
//!
//! Endpoints:
//!
//! | method | path | |
//! |---|---|---|
//! | POST | `/sessions` | create a session (201) |
//! | POST | `/sessions/{id}/observations` | add one observation |
//! | GET | `/sessions/{id}` | session snapshot |
//! | DELETE | `/sessions/{id}` | drop a session (204) |
//! | GET | `/networks` | loaded networks and gazetteers |
//! | POST | `/solve` | solve a problem file, `?network=` optional |

mod error;
mod handlers;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::routing::{get, post};
use axum::Router;
use destrec_core::recognizer::{Environment, Session, TraceStep};

pub use error::ApiError;

pub const DEFAULT_IDLE_TIMEOUT: Duration = Duration::from_secs(30 * 60);

/// A network, its gazetteer and the planner and geo settings sessions on it use.
#[derive(Clone)]
pub struct World {
    pub name: String,
    pub env: Environment,
}

#[derive(Debug, Clone, Copy)]
pub struct ServiceConfig {
    /// Sessions untouched for this long are dropped.
    pub idle_timeout: Duration,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self { idle_timeout: DEFAULT_IDLE_TIMEOUT }
    }
}

struct Live {
    session: Session,
    trace: Vec<TraceStep>,
}

struct Slot {
    network: String,
    created_at: u64,
    live: Mutex<Live>,
    last_used: Mutex<Instant>,
}

impl Slot {
    fn touch(&self) {
        *self.last_used.lock().unwrap() = Instant::now();
    }
}

/// Shared server state: immutable worlds plus the session table.
pub struct AppState {
    worlds: Vec<World>,
    sessions: Mutex<HashMap<String, Arc<Slot>>>,
    config: ServiceConfig,
}

impl AppState {
    /// The first world is the default for requests that name none.
    pub fn new(worlds: Vec<World>, config: ServiceConfig) -> Result<Self, String> {
        if worlds.is_empty() {
            return Err("at least one network must be loaded".into());
        }
        for (i, w) in worlds.iter().enumerate() {
            if worlds[..i].iter().any(|o| o.name == w.name) {
                return Err(format!("network name {:?} loaded twice", w.name));
            }
        }
        Ok(Self { worlds, sessions: Mutex::new(HashMap::new()), config })
    }

    fn world(&self, name: Option<&str>) -> Result<&World, ApiError> {
        match name {
            None => Ok(&self.worlds[0]),
            Some(n) => self.worlds.iter().find(|w| w.name == n).ok_or_else(|| {
                let known: Vec<&str> = self.worlds.iter().map(|w| w.name.as_str()).collect();
                ApiError::bad_request(format!("unknown network {n:?}; loaded: {}", known.join(", ")))
            }),
        }
    }

    fn slot(&self, id: &str) -> Result<Arc<Slot>, ApiError> {
        let slot = self.sessions.lock().unwrap().get(id).cloned().ok_or_else(|| ApiError::not_found(format!("no session {id:?}")))?;
        slot.touch();
        Ok(slot)
    }

    pub fn session_count(&self) -> usize {
        self.sessions.lock().unwrap().len()
    }

    /// Drops sessions idle since before `now - idle_timeout`; returns how many.
    pub fn evict_idle_at(&self, now: Instant) -> usize {
        let timeout = self.config.idle_timeout;
        let mut sessions = self.sessions.lock().unwrap();
        let before = sessions.len();
        sessions.retain(|_, slot| now.saturating_duration_since(*slot.last_used.lock().unwrap()) < timeout);
        before - sessions.len()
    }

    pub fn evict_idle(&self) -> usize {
        self.evict_idle_at(Instant::now())
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(handlers::open_session))
        .route("/sessions/{id}", get(handlers::get_session).delete(handlers::delete_session))
        .route("/sessions/{id}/observations", post(handlers::observe))
        .route("/networks", get(handlers::list_networks))
        .route("/solve", post(handlers::solve))
        .with_state(state)
}

/// Serves until the listener fails, evicting idle sessions in the background.
pub async fn serve(listener: tokio::net::TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    let period = (state.config.idle_timeout / 4).clamp(Duration::from_millis(100), Duration::from_secs(60));
    let evictor = state.clone();
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(period);
        loop {
            tick.tick().await;
            evictor.evict_idle();
        }
    });
    axum::serve(listener, router(state)).await
}
