//! HTTP front end for interactive oracle mining.
//!
//! Each session wraps a [`MiningSession`] behind its own lock, so choices
//! for one session are applied one at a time while different sessions run
//! in parallel. Engine work runs on the blocking pool.
//!
//! | method | path | |
//! |---|---|---|
//! | POST | `/api/v1/sessions` | create a session, returns its state |
//! | GET | `/api/v1/sessions/{id}` | session state |
//! | POST | `/api/v1/sessions/{id}/choice` | answer the pending test |
//! | GET | `/api/v1/sessions/{id}/result` | mined machine and transcript |
//! | GET | `/api/v1/sessions/{id}/machine.dot` | current machine as DOT |
//! | GET | `/api/v1/sessions/{id}/transcript.jsonl` | transcript as JSON Lines |
//!
//! With a transcript directory configured, every session appends its events
//! to `<dir>/<id>.jsonl`, and [`Service::recover`] replays those files after
//! a restart.

pub mod api;

use std::collections::HashMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use oraclemine::encoding::CandidateCount;
use oraclemine::format::{parse_fsm, render_dot};
use oraclemine::mining::{
    read_transcript, replay, write_transcript, MiningConfig, MiningSession, VisitOrder,
};
use oraclemine::{Error, Fsm};
use serde::de::DeserializeOwned;
use tower_http::services::ServeDir;

use api::{ChoiceRequest, CreateSession, MachineInput, ResultView, SessionState};

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    /// Directory for per-session transcripts; `None` keeps sessions in
    /// memory only.
    pub transcript_dir: Option<PathBuf>,
    /// Directory served under `/` (the built console).
    pub static_dir: Option<PathBuf>,
    /// Remaining-candidate counts above this are reported as
    /// `{"at_least": count_cap}`.
    pub count_cap: u64,
    pub mining: MiningConfig,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            transcript_dir: None,
            static_dir: None,
            count_cap: 1_000_000_000,
            mining: MiningConfig::default(),
        }
    }
}

struct Entry {
    session: MiningSession,
    /// Events already appended to the transcript file.
    written: usize,
    created_at: u64,
    updated_at: u64,
}

pub struct Service {
    config: ServiceConfig,
    sessions: RwLock<HashMap<String, Arc<Mutex<Entry>>>>,
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }

    fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, format!("no session `{id}`"))
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Protocol(_) => StatusCode::CONFLICT,
            Error::ExecutionCapExceeded(_) | Error::BudgetExceeded | Error::Inconclusive(_) => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            Error::Transcript(_) | Error::Soundness(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        };
        Self::new(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (
            self.status,
            Json(serde_json::json!({ "error": self.message })),
        )
            .into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

fn body<T: DeserializeOwned>(bytes: &[u8]) -> ApiResult<T> {
    serde_json::from_slice(bytes)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, format!("malformed body: {e}")))
}

fn cap_count(count: CandidateCount, cap: u64) -> CandidateCount {
    if *count.lower_bound() > cap.into() {
        CandidateCount::AtLeast(cap.into())
    } else {
        count
    }
}

impl Service {
    pub fn new(config: ServiceConfig) -> Self {
        Self {
            config,
            sessions: RwLock::new(HashMap::new()),
        }
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    /// Replays every transcript in the transcript directory. Returns the
    /// number of sessions restored; unreadable transcripts are skipped with
    /// a warning.
    pub fn recover(&self) -> std::io::Result<usize> {
        let Some(dir) = &self.config.transcript_dir else {
            return Ok(0);
        };
        let mut restored = 0;
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("jsonl") {
                continue;
            }
            let Some(id) = path.file_stem().and_then(|s| s.to_str()).map(str::to_owned) else {
                continue;
            };
            let session = std::fs::read_to_string(&path)
                .map_err(|e| Error::Transcript(e.to_string()))
                .and_then(|text| read_transcript(&text))
                .and_then(|events| replay(&events));
            match session {
                Ok(session) => {
                    let t = now();
                    let written = session.events().len();
                    let entry = Entry {
                        session,
                        written,
                        created_at: t,
                        updated_at: t,
                    };
                    self.sessions
                        .write()
                        .unwrap()
                        .insert(id, Arc::new(Mutex::new(entry)));
                    restored += 1;
                }
                Err(e) => log::warn!("skipping transcript {}: {e}", path.display()),
            }
        }
        Ok(restored)
    }

    fn entry(&self, id: &str) -> ApiResult<Arc<Mutex<Entry>>> {
        self.sessions
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(id))
    }

    fn persist(&self, id: &str, entry: &mut Entry) -> ApiResult<()> {
        let Some(dir) = &self.config.transcript_dir else {
            return Ok(());
        };
        let events = &entry.session.events()[entry.written..];
        if events.is_empty() {
            return Ok(());
        }
        let write = || -> std::io::Result<()> {
            let mut file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(dir.join(format!("{id}.jsonl")))?;
            file.write_all(write_transcript(events).as_bytes())?;
            file.sync_data()
        };
        write().map_err(|e| {
            ApiError::new(
                StatusCode::INTERNAL_SERVER_ERROR,
                format!("writing transcript: {e}"),
            )
        })?;
        entry.written = entry.session.events().len();
        Ok(())
    }

    fn state(&self, id: &str, entry: &Entry) -> SessionState {
        let count = entry
            .session
            .candidate_count_remaining(self.config.mining.size_budget);
        SessionState::new(
            id,
            &entry.session,
            cap_count(count, self.config.count_cap),
            entry.created_at,
            entry.updated_at,
        )
    }

    /// Creates a session and advances it to its first choice.
    pub fn create(&self, request: CreateSession) -> ApiResult<SessionState> {
        let machine: Fsm = match request.fsm {
            MachineInput::Text(text) => parse_fsm(&text)?,
            MachineInput::Object(object) => object.into_fsm()?,
        };
        let tests = request
            .initial_tests
            .into_iter()
            .map(|w| w.symbols())
            .collect();
        let mut config = self.config.mining.clone();
        if let Some(seed) = request.seed {
            config.visit_order = VisitOrder::Seeded(seed);
        }
        let session = MiningSession::new(machine, tests, config)?;
        let id = uuid::Uuid::new_v4().simple().to_string();
        let t = now();
        let mut entry = Entry {
            session,
            written: 0,
            created_at: t,
            updated_at: t,
        };
        self.persist(&id, &mut entry)?;
        let state = self.state(&id, &entry);
        self.sessions
            .write()
            .unwrap()
            .insert(id.clone(), Arc::new(Mutex::new(entry)));
        log::info!("session {id} created ({:?})", state.status);
        Ok(state)
    }

    pub fn get(&self, id: &str) -> ApiResult<SessionState> {
        let entry = self.entry(id)?;
        let entry = entry.lock().unwrap();
        Ok(self.state(id, &entry))
    }

    pub fn choose(&self, id: &str, request: ChoiceRequest) -> ApiResult<SessionState> {
        let entry = self.entry(id)?;
        let mut entry = entry.lock().unwrap();
        let token: Option<Vec<_>> = request.test.map(|w| w.symbols());
        let response: Vec<_> = request.response.symbols();
        let outcome = entry.session.submit_choice(token.as_deref(), &response)?;
        log::debug!("session {id}: {outcome:?}");
        entry.updated_at = now();
        self.persist(id, &mut entry)?;
        Ok(self.state(id, &entry))
    }

    pub fn result(&self, id: &str) -> ApiResult<ResultView> {
        let entry = self.entry(id)?;
        let entry = entry.lock().unwrap();
        ResultView::new(id, &entry.session).ok_or_else(|| {
            ApiError::new(
                StatusCode::CONFLICT,
                format!("session is {:?}, not done", entry.session.status()),
            )
        })
    }

    pub fn dot(&self, id: &str) -> ApiResult<String> {
        let entry = self.entry(id)?;
        let entry = entry.lock().unwrap();
        Ok(render_dot(entry.session.machine()))
    }

    pub fn transcript(&self, id: &str) -> ApiResult<String> {
        let entry = self.entry(id)?;
        let entry = entry.lock().unwrap();
        Ok(write_transcript(entry.session.events()))
    }
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> ApiResult<T> + Send + 'static,
) -> ApiResult<T> {
    tokio::task::spawn_blocking(f).await.map_err(|e| {
        ApiError::new(
            StatusCode::INTERNAL_SERVER_ERROR,
            format!("engine task failed: {e}"),
        )
    })?
}

async fn create(
    State(svc): State<Arc<Service>>,
    bytes: Bytes,
) -> ApiResult<(StatusCode, Json<SessionState>)> {
    let request: CreateSession = body(&bytes)?;
    let state = blocking(move || svc.create(request)).await?;
    Ok((StatusCode::CREATED, Json(state)))
}

async fn get_state(
    State(svc): State<Arc<Service>>,
    Path(id): Path<String>,
) -> ApiResult<Json<SessionState>> {
    Ok(Json(blocking(move || svc.get(&id)).await?))
}

async fn choose(
    State(svc): State<Arc<Service>>,
    Path(id): Path<String>,
    bytes: Bytes,
) -> ApiResult<Json<SessionState>> {
    let request: ChoiceRequest = body(&bytes)?;
    Ok(Json(blocking(move || svc.choose(&id, request)).await?))
}

async fn result(
    State(svc): State<Arc<Service>>,
    Path(id): Path<String>,
) -> ApiResult<Json<ResultView>> {
    Ok(Json(blocking(move || svc.result(&id)).await?))
}

async fn dot(
    State(svc): State<Arc<Service>>,
    Path(id): Path<String>,
) -> ApiResult<impl IntoResponse> {
    let text = blocking(move || svc.dot(&id)).await?;
    Ok(([(header::CONTENT_TYPE, "text/vnd.graphviz")], text))
}

async fn transcript(
    State(svc): State<Arc<Service>>,
    Path(id): Path<String>,
) -> ApiResult<impl IntoResponse> {
    let text = blocking(move || svc.transcript(&id)).await?;
    Ok(([(header::CONTENT_TYPE, "application/jsonl")], text))
}

pub fn router(service: Arc<Service>) -> Router {
    let static_dir = service.config.static_dir.clone();
    let api = Router::new()
        .route("/api/v1/sessions", post(create))
        .route("/api/v1/sessions/{id}", get(get_state))
        .route("/api/v1/sessions/{id}/choice", post(choose))
        .route("/api/v1/sessions/{id}/result", get(result))
        .route("/api/v1/sessions/{id}/machine.dot", get(dot))
        .route("/api/v1/sessions/{id}/transcript.jsonl", get(transcript))
        .with_state(service);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Recovers persisted sessions and serves until the process is stopped.
pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    let service = Arc::new(Service::new(config));
    let restored = service.recover()?;
    if restored > 0 {
        log::info!("restored {restored} sessions");
    }
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(service)).await
}
