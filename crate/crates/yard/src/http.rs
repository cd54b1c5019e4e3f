//! JSON over HTTP in front of [`Yard`].

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, Mutex, MutexGuard};

use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use semwiki_core::bridge::RuleRecord;
use semwiki_core::infer::Verdict;
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::sync::Notify;

use crate::clock::Clock;
use crate::state::{Capability, ExportFormat, Yard, YardError};

#[derive(Clone)]
pub struct AppState {
    pub yard: Arc<Mutex<Yard>>,
    pub clock: Arc<dyn Clock>,
    /// Woken when new tasks are queued.
    pub work: Arc<Notify>,
}

impl AppState {
    pub fn new(yard: Yard, clock: Arc<dyn Clock>) -> AppState {
        AppState {
            yard: Arc::new(Mutex::new(yard)),
            clock,
            work: Arc::new(Notify::new()),
        }
    }

    pub fn lock(&self) -> MutexGuard<'_, Yard> {
        self.yard.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn now(&self) -> i64 {
        self.clock.now_ms()
    }
}

pub struct ApiError(YardError);

impl From<YardError> for ApiError {
    fn from(e: YardError) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let e = self.0;
        let status = match &e {
            YardError::NotFound { .. } => StatusCode::NOT_FOUND,
            YardError::Auth => StatusCode::UNAUTHORIZED,
            YardError::WrongState { .. } | YardError::NoLease { .. } => StatusCode::CONFLICT,
            YardError::Untranslated { .. } | YardError::BadProof(_) | YardError::RuleRejected { .. } => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            YardError::Kb(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        };
        let mut body = json!({ "code": e.code(), "message": e.to_string() });
        match &e {
            YardError::Parse(inner) => body["detail"] = json!(inner.code()),
            YardError::Untranslated { sentences } => body["sentences"] = json!(sentences),
            YardError::RuleRejected { report, .. } => body["report"] = json!(report),
            _ => {}
        }
        (status, Json(body)).into_response()
    }
}

fn bad_request(message: impl Into<String>) -> ApiError {
    ApiError(YardError::Invalid(message.into()))
}

fn bearer(headers: &HeaderMap) -> Result<&str, ApiError> {
    headers
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .map(str::trim)
        .ok_or(ApiError(YardError::Auth))
}

/// Parses a JSON body ourselves so malformed input gets the usual error
/// shape.
fn body<T: serde::de::DeserializeOwned>(raw: &str) -> Result<T, ApiError> {
    serde_json::from_str(raw).map_err(|e| bad_request(format!("body: {e}")))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/problems", post(create_problem))
        .route("/problems/{id}", get(get_problem))
        .route("/problems/{id}/disambiguate", post(disambiguate))
        .route("/engines", post(register_engine).get(list_engines))
        .route("/engines/{id}/tasks", get(poll_task))
        .route("/tasks/{id}/result", post(submit_result))
        .route("/kb/export", get(export_kb))
        .route("/rules", post(add_rule))
        .route("/symbols", get(symbols))
        .with_state(state)
}

#[derive(Deserialize)]
struct NewProblem {
    source: String,
}

async fn create_problem(State(s): State<AppState>, raw: String) -> Result<Response, ApiError> {
    let req: NewProblem = body(&raw)?;
    let mut yard = s.lock();
    let p = yard.create_problem(&req.source, s.now())?;
    let queued = !p.tasks.is_empty();
    let resp = (StatusCode::CREATED, Json(json!(p))).into_response();
    drop(yard);
    if queued {
        s.work.notify_waiters();
    }
    Ok(resp)
}

async fn get_problem(State(s): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let yard = s.lock();
    Ok(Json(json!(yard.problem_view(&id)?)).into_response())
}

#[derive(Deserialize)]
struct Choices {
    /// Sentence index to candidate index; JSON object keys are strings.
    choices: BTreeMap<String, usize>,
}

async fn disambiguate(State(s): State<AppState>, Path(id): Path<String>, raw: String) -> Result<Response, ApiError> {
    let req: Choices = body(&raw)?;
    let mut choices = BTreeMap::new();
    for (k, v) in req.choices {
        let k: usize = k.parse().map_err(|_| bad_request(format!("choice key `{k}` is not an index")))?;
        choices.insert(k, v);
    }
    let mut yard = s.lock();
    let p = yard.disambiguate(&id, choices, s.now())?;
    let resp = Json(json!(p)).into_response();
    drop(yard);
    s.work.notify_waiters();
    Ok(resp)
}

#[derive(Deserialize)]
struct NewEngine {
    name: String,
    capabilities: BTreeSet<Capability>,
}

async fn register_engine(State(s): State<AppState>, raw: String) -> Result<Response, ApiError> {
    let req: NewEngine = body(&raw)?;
    let (id, token) = s.lock().register_engine(&req.name, req.capabilities, false, s.now())?;
    Ok((StatusCode::CREATED, Json(json!({ "id": id, "token": token }))).into_response())
}

async fn list_engines(State(s): State<AppState>) -> Response {
    Json(json!(s.lock().engines())).into_response()
}

async fn poll_task(State(s): State<AppState>, Path(id): Path<String>, headers: HeaderMap) -> Result<Response, ApiError> {
    let token = bearer(&headers)?;
    match s.lock().poll_task(&id, token, s.now())? {
        Some(payload) => Ok(Json(json!(payload)).into_response()),
        None => Ok(StatusCode::NO_CONTENT.into_response()),
    }
}

async fn submit_result(State(s): State<AppState>, Path(id): Path<String>, headers: HeaderMap, raw: String) -> Result<Response, ApiError> {
    let token = bearer(&headers)?;
    let verdict: Verdict = body(&raw)?;
    let mut yard = s.lock();
    let engine = yard.engine_for_token(token).ok_or(ApiError(YardError::Auth))?.to_string();
    let status = yard.submit_result(&engine, token, &id, verdict, s.now())?;
    Ok(Json(json!({ "status": status })).into_response())
}

#[derive(Deserialize)]
struct ExportQuery {
    format: Option<String>,
}

async fn export_kb(State(s): State<AppState>, Query(q): Query<ExportQuery>) -> Result<Response, ApiError> {
    let (format, content_type) = match q.format.as_deref().unwrap_or("native") {
        "native" => (ExportFormat::Native, "application/json"),
        "tptp" => (ExportFormat::Tptp, "text/plain; charset=utf-8"),
        other => return Err(bad_request(format!("unknown format `{other}`"))),
    };
    let text = s.lock().export_kb(format);
    Ok(([(header::CONTENT_TYPE, content_type)], text).into_response())
}

async fn add_rule(State(s): State<AppState>, raw: String) -> Result<Response, ApiError> {
    let record: RuleRecord = body(&raw)?;
    let report = s.lock().add_rule(record, s.now())?;
    Ok((StatusCode::CREATED, Json(json!({ "report": report }))).into_response())
}

#[derive(Deserialize)]
struct SymbolQuery {
    q: String,
    limit: Option<usize>,
}

async fn symbols(State(s): State<AppState>, Query(q): Query<SymbolQuery>) -> Response {
    let hits = s.lock().search_symbols(&q.q, q.limit.unwrap_or(20));
    Json(Value::from(json!(hits))).into_response()
}
