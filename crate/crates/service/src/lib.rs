//! HTTP session service for live adaptive tests.
//!
//! Every accepted answer is appended to an event log before it takes
//! effect, and the log is replayed on startup, so a restarted service
//! serves the same questions and evaluations.
//!
//! | Method | Path | |
//! |---|---|---|
//! | GET | `/health` | liveness probe |
//! | GET, POST | `/models` | list, or upload a model document (`?id=` optional) |
//! | POST | `/sessions` | create a session |
//! | GET | `/sessions/{id}` | session descriptor |
//! | GET | `/sessions/{id}/next` | question on offer; `?scores=true` adds the score table (instructor) |
//! | POST | `/sessions/{id}/answers` | `{question_id, state, sequence}` |
//! | GET | `/sessions/{id}/evaluation` | grades |
//! | GET | `/sessions/{id}/trace` | answered questions with score tables (instructor) |
//!
//! Errors are JSON `{error, message}` with status 404 for unknown
//! resources, 409 for conflicts and 422 for invalid input.

mod error;
mod http;
mod service;
mod store;

pub use error::{ApiError, ErrorBody};
pub use http::{router, TOKEN_HEADER};
pub use service::{
    AnswerRequest, CreateSession, EvaluationPayload, ModelInfo, NextQuestion, PolicyRequest, Progress,
    QuestionPayload, Service, ServiceConfig, SessionDescriptor, SessionStatus, TracePayload,
};
pub use store::{Event, EventLog};

use std::sync::Arc;

/// Serves until the listener fails.
pub async fn serve(listener: tokio::net::TcpListener, service: Arc<Service>) -> std::io::Result<()> {
    axum::serve(listener, router(service)).await
}
