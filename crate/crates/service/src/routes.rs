use axum::extract::{FromRequest, FromRequestParts, Path, Request, State};
use axum::http::header::CONTENT_TYPE;
use axum::http::request::Parts;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tagscope_core::analytics::{self, CountMode, Scope, TagFilter};
use tagscope_core::evaluation::report_csv;
use tagscope_core::import::RemoteCredentials;
use tagscope_core::model::{to_canonical_json, Annotation, Project, TextId};
use tagscope_core::similarity::{rank_similar, DEFAULT_RADIUS};

use crate::app::{ImportSource, Service, SessionView};
use crate::error::ApiError;

/// JSON body whose rejections use the `{code, message}` error shape.
pub struct Body<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for Body<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, ApiError> {
        Json::<T>::from_request(req, state)
            .await
            .map(|Json(v)| Body(v))
            .map_err(|e| ApiError::bad_request(e.body_text()))
    }
}

/// Query string with the same error shape.
pub struct Query<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequestParts<S> for Query<T> {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, ApiError> {
        axum::extract::Query::<T>::from_request_parts(parts, state)
            .await
            .map(|axum::extract::Query(v)| Query(v))
            .map_err(|e| ApiError::bad_request(e.body_text()))
    }
}

/// A pre-serialized JSON body.
fn raw_json(body: impl Into<String>) -> Response {
    ([(CONTENT_TYPE, "application/json")], body.into()).into_response()
}

fn to_json<T: Serialize>(value: &T) -> Response {
    raw_json(serde_json::to_string(value).expect("response values serialize"))
}

pub fn router(service: Service) -> Router {
    Router::new()
        .route("/import", post(import))
        .route("/projects", get(list_projects))
        .route("/projects/{id}", get(get_project))
        .route("/projects/{id}/texts/{tid}", get(get_text))
        .route("/charts/gantt", get(gantt))
        .route("/charts/stacked", get(stacked))
        .route("/charts/sunburst", get(sunburst))
        .route("/charts/gallery", get(gallery))
        .route("/similarity/jobs", post(submit_job))
        .route("/similarity/jobs/{id}", get(get_job))
        .route("/similarity/matrix", get(matrix))
        .route("/similarity/rank", get(rank))
        .route("/boards", get(list_boards).post(create_board))
        .route(
            "/boards/{id}",
            get(get_board).put(update_board).delete(delete_board),
        )
        .route("/boards/{id}/move", post(move_text))
        .route("/evaluation/trials", post(create_session))
        .route("/evaluation/trials/{id}", get(get_session))
        .route("/evaluation/responses", post(record_response))
        .route("/evaluation/report", get(report))
        .fallback(|| async {
            ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint")
        })
        .with_state(service)
}

// Import and projects

/// Either `{"project": <canonical document>}` or
/// `{"endpoint": "...", "api_key": "...", "remote_id": "..."}`.
#[derive(Deserialize)]
#[serde(untagged)]
enum ImportRequest {
    Document {
        project: serde_json::Value,
    },
    Remote {
        endpoint: String,
        api_key: String,
        remote_id: String,
    },
}

async fn import(
    State(svc): State<Service>,
    Body(req): Body<ImportRequest>,
) -> Result<Response, ApiError> {
    let source = match req {
        ImportRequest::Document { project } => {
            let project: Project = serde_json::from_value(project)
                .map_err(|e| ApiError::bad_request(format!("malformed project document: {e}")))?;
            ImportSource::Document(project)
        }
        ImportRequest::Remote {
            endpoint,
            api_key,
            remote_id,
        } => ImportSource::Remote {
            credentials: RemoteCredentials::new(endpoint, api_key),
            remote_id,
        },
    };
    let summary = svc.import(source).await?;
    let status = if summary.changed {
        StatusCode::CREATED
    } else {
        StatusCode::OK
    };
    Ok((status, to_json(&summary)).into_response())
}

async fn list_projects(State(svc): State<Service>) -> Response {
    to_json(&svc.projects())
}

async fn get_project(
    State(svc): State<Service>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    Ok(raw_json(to_canonical_json(&svc.project(&id)?.project)))
}

#[derive(Serialize)]
struct TextView<'a> {
    id: &'a TextId,
    title: &'a str,
    body: &'a str,
    length: usize,
    annotations: Vec<&'a Annotation>,
}

async fn get_text(
    State(svc): State<Service>,
    Path((id, tid)): Path<(String, String)>,
) -> Result<Response, ApiError> {
    let stored = svc.project(&id)?;
    let p = &stored.project;
    let text = p
        .text(&tid)
        .ok_or_else(|| ApiError::not_found("unknown_text", &tid))?;
    Ok(to_json(&TextView {
        id: &text.id,
        title: &text.title,
        body: text.body(),
        length: text.len(),
        annotations: p.annotations_for(&tid).collect(),
    }))
}

// Charts: responses are the analytics output serialized as-is.

#[derive(Deserialize)]
struct ChartQuery {
    project: String,
    text: Option<String>,
    /// Comma-separated tag ids or names.
    tags: Option<String>,
    bin: Option<usize>,
    /// `project` (default) or `text:{id}`.
    scope: Option<String>,
    /// `occurrences` (default) or `characters`.
    mode: Option<String>,
}

impl ChartQuery {
    fn text(&self) -> Result<&str, ApiError> {
        self.text
            .as_deref()
            .ok_or_else(|| ApiError::bad_request("missing query parameter: text"))
    }
}

fn tag_filter(project: &Project, tags: Option<&str>) -> Result<TagFilter, ApiError> {
    let Some(tags) = tags.filter(|t| !t.is_empty()) else {
        return Ok(TagFilter::all());
    };
    let ids = tags
        .split(',')
        .map(|key| {
            project
                .resolve_tag(key.trim())
                .map(|t| t.id.clone())
                .ok_or_else(|| ApiError::not_found("unknown_tag", key))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TagFilter::only(ids))
}

async fn gantt(
    State(svc): State<Service>,
    Query(q): Query<ChartQuery>,
) -> Result<Response, ApiError> {
    let stored = svc.project(&q.project)?;
    let filter = tag_filter(&stored.project, q.tags.as_deref())?;
    Ok(to_json(&analytics::gantt(
        &stored.project,
        q.text()?,
        &filter,
    )?))
}

async fn stacked(
    State(svc): State<Service>,
    Query(q): Query<ChartQuery>,
) -> Result<Response, ApiError> {
    let stored = svc.project(&q.project)?;
    Ok(to_json(&analytics::stacked_area(
        &stored.project,
        q.text()?,
        q.bin,
    )?))
}

async fn sunburst(
    State(svc): State<Service>,
    Query(q): Query<ChartQuery>,
) -> Result<Response, ApiError> {
    let stored = svc.project(&q.project)?;
    let scope = match q.scope.as_deref() {
        None | Some("project") => Scope::Project,
        Some(s) => match s.strip_prefix("text:") {
            Some(t) => Scope::Text(t.to_owned()),
            None => {
                return Err(ApiError::bad_request(format!(
                    "scope must be `project` or `text:<id>`, got {s}"
                )))
            }
        },
    };
    let mode = match q.mode.as_deref() {
        None | Some("occurrences") => CountMode::Occurrences,
        Some("characters") => CountMode::Characters,
        Some(m) => return Err(ApiError::bad_request(format!("unknown mode: {m}"))),
    };
    Ok(to_json(&analytics::sunburst(
        &stored.project,
        &scope,
        mode,
    )?))
}

async fn gallery(
    State(svc): State<Service>,
    Query(q): Query<ChartQuery>,
) -> Result<Response, ApiError> {
    let stored = svc.project(&q.project)?;
    let filter = tag_filter(&stored.project, q.tags.as_deref())?;
    Ok(to_json(&analytics::gallery(&stored.project, &filter)))
}

// Similarity

#[derive(Deserialize)]
struct MatrixRequest {
    project: String,
    tag: String,
    #[serde(default = "default_radius")]
    radius: usize,
}

#[derive(Deserialize)]
struct RankQuery {
    project: String,
    tag: String,
    target: String,
    #[serde(default = "default_radius")]
    radius: usize,
}

fn default_radius() -> usize {
    DEFAULT_RADIUS
}

async fn submit_job(
    State(svc): State<Service>,
    Body(req): Body<MatrixRequest>,
) -> Result<Response, ApiError> {
    let job = svc.submit_job(&req.project, &req.tag, req.radius)?;
    Ok((StatusCode::ACCEPTED, to_json(&job)).into_response())
}

async fn get_job(State(svc): State<Service>, Path(id): Path<String>) -> Result<Response, ApiError> {
    Ok(to_json(&svc.job(&id)?))
}

async fn matrix(
    State(svc): State<Service>,
    Query(q): Query<MatrixRequest>,
) -> Result<Response, ApiError> {
    let m = svc.matrix(&q.project, &q.tag, q.radius).await?;
    Ok(raw_json(m.json.to_string()))
}

#[derive(Serialize)]
struct Ranked {
    text: TextId,
    score: f64,
}

async fn rank(
    State(svc): State<Service>,
    Query(q): Query<RankQuery>,
) -> Result<Response, ApiError> {
    let m = svc.matrix(&q.project, &q.tag, q.radius).await?;
    let ranked: Vec<Ranked> = rank_similar(&m.matrix, &q.target)?
        .into_iter()
        .map(|(text, score)| Ranked { text, score })
        .collect();
    Ok(to_json(&ranked))
}

// Boards

#[derive(Deserialize)]
struct BoardQuery {
    project: Option<String>,
}

#[derive(Deserialize)]
struct NewBoard {
    project: String,
    name: String,
    #[serde(default)]
    categories: Vec<String>,
}

#[derive(Deserialize)]
struct BoardUpdate {
    name: Option<String>,
    categories: Option<Vec<String>>,
}

#[derive(Deserialize)]
struct Move {
    text: String,
    /// Absent or null moves the text to uncategorized.
    category: Option<String>,
}

async fn list_boards(State(svc): State<Service>, Query(q): Query<BoardQuery>) -> Response {
    to_json(&svc.boards(q.project.as_deref()))
}

async fn create_board(
    State(svc): State<Service>,
    Body(b): Body<NewBoard>,
) -> Result<Response, ApiError> {
    let board = svc.create_board(&b.project, &b.name, b.categories).await?;
    Ok((StatusCode::CREATED, to_json(&board)).into_response())
}

async fn get_board(
    State(svc): State<Service>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    Ok(to_json(&svc.board(&id)?))
}

async fn update_board(
    State(svc): State<Service>,
    Path(id): Path<String>,
    Body(u): Body<BoardUpdate>,
) -> Result<Response, ApiError> {
    let board = svc
        .edit_board(&id, |b| {
            if let Some(name) = u.name {
                if name.trim().is_empty() {
                    return Err(ApiError::bad_request("names must not be empty"));
                }
                b.name = name;
            }
            if let Some(c) = u.categories {
                b.set_categories(c)?;
            }
            Ok(())
        })
        .await?;
    Ok(to_json(&board))
}

async fn delete_board(
    State(svc): State<Service>,
    Path(id): Path<String>,
) -> Result<StatusCode, ApiError> {
    svc.delete_board(&id).await?;
    Ok(StatusCode::NO_CONTENT)
}

async fn move_text(
    State(svc): State<Service>,
    Path(id): Path<String>,
    Body(m): Body<Move>,
) -> Result<Response, ApiError> {
    let board = svc
        .edit_board(&id, |b| Ok(b.move_text(&m.text, m.category.as_deref())?))
        .await?;
    Ok(to_json(&board))
}

// Evaluation

#[derive(Deserialize)]
struct NewSession {
    project: String,
    tag: String,
    targets: Option<Vec<TextId>>,
    seed: u64,
    #[serde(default = "default_radius")]
    radius: usize,
}

#[derive(Deserialize)]
struct NewResponse {
    session: String,
    trial: String,
    rater: String,
    ranking: Vec<TextId>,
}

#[derive(Deserialize)]
struct ReportQuery {
    session: String,
    /// `json` (default) or `csv`.
    format: Option<String>,
}

async fn create_session(
    State(svc): State<Service>,
    Body(s): Body<NewSession>,
) -> Result<Response, ApiError> {
    let session = svc
        .create_session(&s.project, &s.tag, s.targets, s.seed, s.radius)
        .await?;
    Ok((StatusCode::CREATED, to_json(&SessionView::from(&*session))).into_response())
}

async fn get_session(
    State(svc): State<Service>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    Ok(to_json(&SessionView::from(&*svc.session(&id)?)))
}

async fn record_response(
    State(svc): State<Service>,
    Body(r): Body<NewResponse>,
) -> Result<Response, ApiError> {
    let response = svc
        .record_response(&r.session, &r.trial, &r.rater, r.ranking)
        .await?;
    Ok((StatusCode::CREATED, to_json(&response)).into_response())
}

async fn report(
    State(svc): State<Service>,
    Query(q): Query<ReportQuery>,
) -> Result<Response, ApiError> {
    let report = svc.report(&q.session)?;
    match q.format.as_deref() {
        None | Some("json") => Ok(to_json(&report)),
        Some("csv") => Ok(([(CONTENT_TYPE, "text/csv")], report_csv(&report)).into_response()),
        Some(f) => Err(ApiError::bad_request(format!("unknown format: {f}"))),
    }
}
