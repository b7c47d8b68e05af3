//! HTTP routes.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use rand::Rng;
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

use anabench_core::record::{write_csv, write_jsonl};

use crate::design::{build_trials, Experiment, Materials};
use crate::session::{instructions, HumanResponse, ResponseError, Session};
use crate::store::{Event, Journal, StoreError};

/// Shared service state.
pub struct AppState {
    materials: Materials,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    journal: Mutex<Journal>,
}

pub const DEFAULT_SNAPSHOT_EVERY: u64 = 100;

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

impl AppState {
    /// Open the store under `dir`, replaying any existing sessions.
    pub fn open(materials: Materials, dir: &Path, snapshot_every: u64) -> Result<Arc<Self>, StoreError> {
        let (journal, sessions) = Journal::open(dir, &materials, snapshot_every)?;
        let sessions = sessions.into_iter().map(|(k, s)| (k, Arc::new(Mutex::new(s)))).collect();
        Ok(Arc::new(AppState { materials, sessions: RwLock::new(sessions), journal: Mutex::new(journal) }))
    }

    pub fn materials(&self) -> &Materials {
        &self.materials
    }

    /// Copies of every session, keyed by id.
    pub fn sessions(&self) -> BTreeMap<String, Session> {
        let map = self.sessions.read().unwrap();
        map.iter().map(|(k, s)| (k.clone(), s.lock().unwrap().clone())).collect()
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions.read().unwrap().get(id).cloned().ok_or_else(|| ApiError::NotFound(format!("no session {id}")))
    }

    pub fn create_session(&self, experiment: Experiment, seed: u64) -> Result<Session, ApiError> {
        let trials = build_trials(experiment, &self.materials, seed).map_err(|e| ApiError::BadRequest(e.to_string()))?;
        let session = Session::new(uuid::Uuid::new_v4().simple().to_string(), experiment, seed, trials, now_ms());
        let mut map = self.sessions.write().unwrap();
        self.journal.lock().unwrap().append(&Event::SessionCreated { session: session.clone() }, &session)?;
        map.insert(session.id.clone(), Arc::new(Mutex::new(session.clone())));
        Ok(session)
    }

    pub fn submit(&self, id: &str, response: HumanResponse) -> Result<crate::session::Ack, ApiError> {
        let handle = self.session(id)?;
        let mut current = handle.lock().unwrap();
        let mut next = current.clone();
        let at_ms = now_ms();
        let ack = next.apply(&self.materials, response.clone(), at_ms)?;
        let event = Event::ResponseAccepted { session_id: id.to_string(), response, at_ms };
        self.journal.lock().unwrap().append(&event, &next)?;
        *current = next;
        Ok(ack)
    }

    pub fn next(&self, id: &str) -> Result<Value, ApiError> {
        let handle = self.session(id)?;
        let s = handle.lock().unwrap();
        Ok(s.next_payload(&self.materials)?)
    }

    pub fn export(&self, id: &str) -> Result<Vec<anabench_core::EvalRecord>, ApiError> {
        let handle = self.session(id)?;
        let s = handle.lock().unwrap();
        Ok(s.export(&self.materials)?)
    }

    /// Force a snapshot of the committed state.
    pub fn snapshot(&self) -> Result<(), StoreError> {
        self.journal.lock().unwrap().snapshot()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error("{0}")]
    BadRequest(String),
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    Conflict(String),
    #[error("{0}")]
    Unprocessable(String),
    #[error("{0}")]
    Internal(String),
}

impl From<ResponseError> for ApiError {
    fn from(e: ResponseError) -> Self {
        match e {
            ResponseError::Conflict(m) => ApiError::Conflict(m),
            ResponseError::Invalid(m) => ApiError::Unprocessable(m),
            e @ ResponseError::MissingMaterial(_) => ApiError::Internal(e.to_string()),
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        ApiError::Internal(e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self {
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::Conflict(_) => StatusCode::CONFLICT,
            ApiError::Unprocessable(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(json!({ "error": self.to_string() }))).into_response()
    }
}

#[derive(Deserialize)]
struct CreateRequest {
    experiment: String,
    seed: Option<u64>,
}

async fn create(State(state): State<Arc<AppState>>, body: Result<Json<CreateRequest>, axum::extract::rejection::JsonRejection>) -> Result<impl IntoResponse, ApiError> {
    let Json(req) = body.map_err(|e| ApiError::BadRequest(e.body_text()))?;
    let experiment: Experiment = req.experiment.parse().map_err(|e: crate::design::DesignError| ApiError::BadRequest(e.to_string()))?;
    let seed = req.seed.unwrap_or_else(|| rand::thread_rng().gen());
    let s = state.create_session(experiment, seed)?;
    let body = json!({
        "id": s.id,
        "experiment": s.experiment,
        "seed": s.seed,
        "trial_count": s.trials.len(),
        "created_at_ms": s.created_at_ms,
        "instructions": instructions(experiment),
    });
    Ok((StatusCode::CREATED, Json(body)))
}

async fn next(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> Result<Json<Value>, ApiError> {
    state.next(&id).map(Json)
}

async fn respond(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    body: Result<Json<HumanResponse>, axum::extract::rejection::JsonRejection>,
) -> Result<Json<Value>, ApiError> {
    state.session(&id)?;
    let Json(r) = body.map_err(|e| ApiError::Unprocessable(e.body_text()))?;
    let ack = state.submit(&id, r)?;
    Ok(Json(serde_json::to_value(ack).expect("ack serializes")))
}

#[derive(Deserialize)]
struct ExportQuery {
    format: Option<String>,
}

async fn export(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<ExportQuery>,
) -> Result<Response, ApiError> {
    let records = state.export(&id)?;
    let mut buf = Vec::new();
    let content_type = match q.format.as_deref().unwrap_or("jsonl") {
        "jsonl" => {
            write_jsonl(&mut buf, &records).map_err(|e| ApiError::Internal(e.to_string()))?;
            "application/x-ndjson"
        }
        "csv" => {
            write_csv(&mut buf, &records).map_err(|e| ApiError::Internal(e.to_string()))?;
            "text/csv"
        }
        other => return Err(ApiError::BadRequest(format!("unknown export format {other:?}"))),
    };
    Ok(([(header::CONTENT_TYPE, HeaderValue::from_static(content_type))], buf).into_response())
}

/// Routes with CORS for `origin`, or for any origin when `None`.
pub fn router(state: Arc<AppState>, origin: Option<&str>) -> Router {
    let allow = match origin.and_then(|o| HeaderValue::from_str(o).ok()) {
        Some(o) => AllowOrigin::exact(o),
        None => AllowOrigin::from(Any),
    };
    let cors = CorsLayer::new().allow_origin(allow).allow_methods(Any).allow_headers(Any);
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}/next", get(next))
        .route("/sessions/{id}/response", post(respond))
        .route("/sessions/{id}/export", get(export))
        .layer(cors)
        .with_state(state)
}

/// Serve until the process is stopped.
pub async fn serve(listener: tokio::net::TcpListener, state: Arc<AppState>, origin: Option<&str>) -> std::io::Result<()> {
    axum::serve(listener, router(state, origin)).await
}
