use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::ApiError;
use crate::service::Service;

/// Header carrying the instructor token; `Authorization: Bearer` works too.
pub const TOKEN_HEADER: &str = "x-instructor-token";

pub fn router(service: Arc<Service>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/models", get(list_models).post(upload_model))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(descriptor))
        .route("/sessions/{id}/next", get(next_question))
        .route("/sessions/{id}/answers", post(post_answer))
        .route("/sessions/{id}/evaluation", get(evaluation))
        .route("/sessions/{id}/trace", get(trace))
        .with_state(service)
}

/// Runs `f` off the async workers; credal picks can take a while.
async fn blocking<T: Send + 'static>(
    service: Arc<Service>,
    f: impl FnOnce(&Service) -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(move || f(&service))
        .await
        .map_err(|e| ApiError::Internal(format!("worker failed: {e}")))?
}

fn parse<T: DeserializeOwned>(body: &str) -> Result<T, ApiError> {
    serde_json::from_str(body).map_err(|e| ApiError::Validation(format!("malformed request body: {e}")))
}

fn token(headers: &HeaderMap) -> Option<String> {
    if let Some(v) = headers.get(TOKEN_HEADER).and_then(|v| v.to_str().ok()) {
        return Some(v.to_string());
    }
    headers
        .get(axum::http::header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .map(str::to_string)
}

#[derive(Serialize)]
struct Health {
    status: &'static str,
}

async fn health() -> Json<Health> {
    Json(Health { status: "ok" })
}

async fn list_models(State(s): State<Arc<Service>>) -> impl IntoResponse {
    Json(s.models())
}

#[derive(Deserialize)]
struct ModelQuery {
    id: Option<String>,
}

async fn upload_model(
    State(s): State<Arc<Service>>,
    Query(q): Query<ModelQuery>,
    body: String,
) -> Result<impl IntoResponse, ApiError> {
    let info = blocking(s, move |s| s.register_model(q.id, body)).await?;
    Ok((StatusCode::CREATED, Json(info)))
}

async fn create_session(State(s): State<Arc<Service>>, body: String) -> Result<impl IntoResponse, ApiError> {
    let req = parse(&body)?;
    let d = blocking(s, move |s| s.create_session(req)).await?;
    Ok((StatusCode::CREATED, Json(d)))
}

async fn descriptor(State(s): State<Arc<Service>>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(s.descriptor(&id)?))
}

#[derive(Deserialize)]
struct NextQuery {
    #[serde(default)]
    scores: bool,
}

async fn next_question(
    State(s): State<Arc<Service>>,
    Path(id): Path<String>,
    Query(q): Query<NextQuery>,
    headers: HeaderMap,
) -> Result<impl IntoResponse, ApiError> {
    if q.scores {
        s.authorize(token(&headers).as_deref())?;
    }
    Ok(Json(blocking(s, move |s| s.next_question(&id, q.scores)).await?))
}

async fn post_answer(
    State(s): State<Arc<Service>>,
    Path(id): Path<String>,
    body: String,
) -> Result<impl IntoResponse, ApiError> {
    let req = parse(&body)?;
    Ok(Json(blocking(s, move |s| s.post_answer(&id, req)).await?))
}

async fn evaluation(State(s): State<Arc<Service>>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(s.evaluation(&id)?))
}

async fn trace(
    State(s): State<Arc<Service>>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> Result<impl IntoResponse, ApiError> {
    s.authorize(token(&headers).as_deref())?;
    Ok(Json(s.trace(&id)?))
}
