//! HTTP routes. Every body is JSON; field names match the transcript
//! records written by the CLI.

use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use crate::sessions::{AnswerInput, ServiceError, SessionResource, SessionStore};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    #[serde(default)]
    pub category: Option<String>,
    /// Optional free-form opening query.
    #[serde(default)]
    pub query: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartSession {
    pub category: String,
    #[serde(default)]
    pub query: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmitAnswers {
    pub answers: Vec<AnswerInput>,
    /// Turn being answered; a stale value is refused with 409.
    #[serde(default)]
    pub turn: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub available_categories: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryInfo {
    pub name: String,
    pub items: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub items: usize,
    pub sessions: usize,
}

pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, error: &str, message: impl Into<String>) -> Self {
        ApiError { status, body: ErrorBody { error: error.into(), message: message.into(), available_categories: None } }
    }
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        let message = e.to_string();
        match e {
            ServiceError::UnknownCategory { available, .. } => {
                let mut err = ApiError::new(StatusCode::NOT_FOUND, "unknown_category", message);
                err.body.available_categories = Some(available);
                err
            }
            ServiceError::SessionNotFound(_) => ApiError::new(StatusCode::NOT_FOUND, "session_not_found", message),
            ServiceError::Validation(_) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "validation", message),
            ServiceError::Conflict(_) => ApiError::new(StatusCode::CONFLICT, "conflict", message),
            ServiceError::Internal(_) => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message),
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_request", e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type Store = State<Arc<SessionStore>>;
type Reply = Result<Json<SessionResource>, ApiError>;

async fn create(State(store): Store, body: Result<Json<CreateSession>, JsonRejection>) -> Result<Response, ApiError> {
    let Json(body) = body?;
    let resource = store.create(body.category, body.query).await?;
    Ok((StatusCode::CREATED, Json(resource)).into_response())
}

async fn fetch(State(store): Store, Path(id): Path<String>) -> Reply {
    Ok(Json(store.get(&id).await?))
}

async fn start(State(store): Store, Path(id): Path<String>, body: Result<Json<StartSession>, JsonRejection>) -> Reply {
    let Json(body) = body?;
    Ok(Json(store.start(&id, body.category, body.query).await?))
}

async fn answer(State(store): Store, Path(id): Path<String>, body: Result<Json<SubmitAnswers>, JsonRejection>) -> Reply {
    let Json(body) = body?;
    Ok(Json(store.answer(&id, body.answers, body.turn).await?))
}

async fn close(State(store): Store, Path(id): Path<String>) -> Reply {
    Ok(Json(store.close(&id).await?))
}

async fn transcript(State(store): Store, Path(id): Path<String>) -> Result<Response, ApiError> {
    let memory = store.memory(&id).await?;
    let mut out = Vec::new();
    memory.write_transcript(&mut out).map_err(|e| ApiError::from(ServiceError::Internal(e.to_string())))?;
    Ok(([(axum::http::header::CONTENT_TYPE, "application/x-ndjson")], out).into_response())
}

async fn categories(State(store): Store) -> Json<Vec<CategoryInfo>> {
    let catalog = store.agent().catalog();
    Json(
        catalog
            .categories()
            .into_iter()
            .map(|c| CategoryInfo { name: c.to_string(), items: catalog.bucket_len(c) })
            .collect(),
    )
}

async fn healthz(State(store): Store) -> Json<Health> {
    Json(Health { status: "ok".into(), items: store.agent().catalog().len(), sessions: store.len() })
}

/// All routes; files under `static_dir`, when given, are served for any
/// other path.
pub fn router(store: Arc<SessionStore>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/healthz", get(healthz))
        .route("/categories", get(categories))
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(fetch).delete(close))
        .route("/sessions/{id}/category", post(start))
        .route("/sessions/{id}/answers", post(answer))
        .route("/sessions/{id}/transcript", get(transcript))
        .with_state(store);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir).append_index_html_on_directories(true)),
        None => api,
    }
}
