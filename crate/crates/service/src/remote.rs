//! A stand-in for a remote annotation store, serving a local remote directory
//! over the HTTP shape the importer's HTTP adapter speaks.

use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::header::AUTHORIZATION;
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use tagscope_core::import::{ImportError, LocalDirSource, RemoteCredentials, RemoteSource};

use crate::error::ApiError;

/// `GET /projects` and `GET /projects/{id}` over `dir`, authorized by a bearer
/// key listed in the directory index.
pub fn remote_fixture_router(dir: impl Into<PathBuf>) -> Router {
    Router::new()
        .route("/projects", get(list))
        .route("/projects/{id}", get(fetch))
        .with_state(Arc::new(dir.into()))
}

fn source(dir: &std::path::Path, headers: &HeaderMap) -> LocalDirSource {
    let key = headers
        .get(AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .unwrap_or_default();
    LocalDirSource::new(RemoteCredentials::new(dir.to_string_lossy(), key))
}

fn reject(e: ImportError) -> ApiError {
    match e {
        ImportError::Authentication(_) => ApiError::new(
            StatusCode::UNAUTHORIZED,
            "authentication",
            "unknown API key",
        ),
        ImportError::UnknownProject(id) => ApiError::not_found("unknown_project", id),
        other => ApiError::internal(other.to_string()),
    }
}

async fn list(State(dir): State<Arc<PathBuf>>, headers: HeaderMap) -> Result<Response, ApiError> {
    let projects = source(&dir, &headers).list_projects().map_err(reject)?;
    Ok(Json(projects).into_response())
}

/// Serves the stored payload verbatim.
async fn fetch(
    State(dir): State<Arc<PathBuf>>,
    headers: HeaderMap,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let known = source(&dir, &headers).list_projects().map_err(reject)?;
    if !known.iter().any(|d| d.id == id) {
        return Err(ApiError::not_found("unknown_project", id));
    }
    let raw = fs::read_to_string(dir.join("projects").join(format!("{id}.json")))
        .map_err(|e| ApiError::internal(e.to_string()))?;
    Ok((
        [(axum::http::header::CONTENT_TYPE, "application/json")],
        raw,
    )
        .into_response())
}
