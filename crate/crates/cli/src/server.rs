//! HTTP front end of the assessment session store.
//!
//! ```text
//! POST /sessions                        create a session
//! GET  /sessions                        list session ids
//! GET  /sessions/{id}                   progress
//! GET  /sessions/{id}/next?annotator=   next item for an annotator
//! POST /sessions/{id}/records           submit one record
//! GET  /sessions/{id}/export            all records, one JSON object per line
//! ```

use std::sync::Arc;

use anyhow::Result;
use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;

use zhnp::assessment::{SessionConfig, SessionStore};
use zhnp::{AssessmentRecord, Error};

pub struct ApiError(Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self.0 {
            Error::SessionNotFound(_) => StatusCode::NOT_FOUND,
            Error::Unauthorized { .. } => StatusCode::FORBIDDEN,
            Error::Conflict(_) => StatusCode::CONFLICT,
            Error::Validation(_) | Error::Json { .. } | Error::UnknownLabel { .. } | Error::Config(_) => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(json!({ "error": self.0.to_string() }))).into_response()
    }
}

type AppState = Arc<SessionStore>;

fn parse<T: serde::de::DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|source| ApiError(Error::Json { line: 1, source }))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> zhnp::Result<T> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError(Error::Io(std::io::Error::other(e))))?
        .map_err(ApiError)
}

async fn create_session(State(store): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let config: SessionConfig = parse(&body)?;
    let plan = blocking(move || store.create(config)).await?;
    let workload: serde_json::Map<String, serde_json::Value> = plan
        .assignments
        .iter()
        .map(|(a, q)| (a.clone(), json!(q.len())))
        .collect();
    let body = json!({
        "id": plan.id,
        "protocol": plan.config.protocol,
        "items": plan.items.len(),
        "workload": workload,
    });
    Ok((StatusCode::CREATED, Json(body)).into_response())
}

async fn list_sessions(State(store): State<AppState>) -> Json<Vec<String>> {
    Json(store.session_ids())
}

async fn session_status(State(store): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    Ok(Json(store.status(&id)?).into_response())
}

#[derive(Deserialize)]
struct NextQuery {
    annotator: String,
}

async fn next_item(
    State(store): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<NextQuery>,
) -> Result<Response, ApiError> {
    Ok(Json(store.next_item(&id, &q.annotator)?).into_response())
}

async fn submit(State(store): State<AppState>, Path(id): Path<String>, body: Bytes) -> Result<Response, ApiError> {
    let record: AssessmentRecord = parse(&body)?;
    let status = blocking(move || store.submit(&id, record)).await?;
    Ok((StatusCode::CREATED, Json(status)).into_response())
}

async fn export(State(store): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let text = store.export(&id)?;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], text).into_response())
}

pub fn router(store: SessionStore) -> Router {
    Router::new()
        .route("/sessions", post(create_session).get(list_sessions))
        .route("/sessions/{id}", get(session_status))
        .route("/sessions/{id}/next", get(next_item))
        .route("/sessions/{id}/records", post(submit))
        .route("/sessions/{id}/export", get(export))
        .with_state(Arc::new(store))
}

pub async fn serve(store: SessionStore, addr: &str) -> Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    println!("assessment service on http://{}", listener.local_addr()?);
    axum::serve(listener, router(store)).await?;
    Ok(())
}
