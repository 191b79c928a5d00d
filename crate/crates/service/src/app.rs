//! Shared service state and the operations behind the HTTP handlers.
//!
//! Reads take a short-lived read lock on the in-memory state. Every write runs
//! under its project's async mutex, persists to the store, and only then
//! updates memory, so an acknowledged write is durable and writes to one
//! project never wait on another project.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock, RwLockReadGuard, RwLockWriteGuard};

use axum::http::StatusCode;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tagscope_core::evaluation::{
    build_trials, score_responses, EvaluationReport, RaterResponse, ResponseStore, Trial,
};
use tagscope_core::import::{import_project, update_project, RemoteCredentials};
use tagscope_core::model::{project_version, validate_project, Project, ProjectId, TagId, TextId};
use tagscope_core::similarity::{similarity_matrix, MatrixOptions, PairOptions, SimilarityMatrix};
use tokio::sync::{watch, Semaphore};

use crate::boards::Board;
use crate::error::ApiError;
use crate::store::{Kind, Store, StoreError};

#[derive(Debug, Clone)]
pub struct StoredProject {
    pub project: Arc<Project>,
    pub version: String,
}

/// A computed matrix and its serialized form, served verbatim.
#[derive(Debug, Clone)]
pub struct CachedMatrix {
    pub matrix: Arc<SimilarityMatrix>,
    pub json: Arc<str>,
}

impl CachedMatrix {
    fn new(matrix: SimilarityMatrix) -> Self {
        let json = serde_json::to_string(&matrix).expect("matrices serialize");
        Self {
            matrix: Arc::new(matrix),
            json: json.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MatrixKey {
    pub project: String,
    pub version: String,
    pub tag: String,
    pub radius: usize,
}

impl MatrixKey {
    fn file_id(&self) -> String {
        format!("{}--{}--r{}", self.project, self.tag, self.radius)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct MatrixRecord {
    version: String,
    matrix: SimilarityMatrix,
}

/// A set of trials built from one matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub project: ProjectId,
    pub version: String,
    pub tag: TagId,
    pub radius: usize,
    pub seed: u64,
    pub trials: Vec<Trial>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ResponsesRecord {
    session: String,
    responses: ResponseStore,
}

/// A trial as shown to a rater: no provenance, no scores.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicTrial {
    pub id: String,
    pub target: TextId,
    pub candidates: Vec<TextId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub project: ProjectId,
    pub tag: TagId,
    pub radius: usize,
    pub seed: u64,
    pub trials: Vec<PublicTrial>,
}

impl From<&Session> for SessionView {
    fn from(s: &Session) -> Self {
        Self {
            id: s.id.clone(),
            project: s.project.clone(),
            tag: s.tag.clone(),
            radius: s.radius,
            seed: s.seed,
            trials: s
                .trials
                .iter()
                .map(|t| PublicTrial {
                    id: t.id.clone(),
                    target: t.target.clone(),
                    candidates: t.candidates.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone)]
enum JobState {
    Queued,
    Running,
    Done(CachedMatrix),
    Failed(ApiError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobView {
    pub id: String,
    pub project: String,
    pub tag: String,
    pub radius: usize,
    /// `queued`, `running`, `done`, or `failed`.
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

struct Job {
    key: MatrixKey,
    state: watch::Receiver<JobState>,
}

#[derive(Default)]
struct Jobs {
    by_id: HashMap<String, Job>,
    inflight: HashMap<MatrixKey, String>,
}

#[derive(Default)]
struct State {
    projects: BTreeMap<String, StoredProject>,
    boards: BTreeMap<String, Board>,
    sessions: BTreeMap<String, Arc<Session>>,
    responses: BTreeMap<String, ResponseStore>,
    matrices: HashMap<MatrixKey, CachedMatrix>,
}

struct Shared {
    store: Store,
    state: RwLock<State>,
    locks: Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>,
    jobs: Mutex<Jobs>,
    pool: Arc<Semaphore>,
    next_job: AtomicU64,
    next_board: AtomicU64,
}

/// Project summary for listings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectSummary {
    pub id: ProjectId,
    pub name: String,
    pub version: String,
    pub texts: usize,
    pub annotations: usize,
}

impl From<&StoredProject> for ProjectSummary {
    fn from(s: &StoredProject) -> Self {
        Self {
            id: s.project.id.clone(),
            name: s.project.name.clone(),
            version: s.version.clone(),
            texts: s.project.texts.len(),
            annotations: s.project.annotations.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImportSummary {
    #[serde(flatten)]
    pub project: ProjectSummary,
    /// False when the imported content equals the stored version.
    pub changed: bool,
}

/// Where an import comes from.
#[derive(Debug, Clone)]
pub enum ImportSource {
    Document(Project),
    Remote {
        credentials: RemoteCredentials,
        remote_id: String,
    },
}

#[derive(Clone)]
pub struct Service(Arc<Shared>);

impl Service {
    /// Loads the data directory. Fails naming the first entity that does not
    /// parse or breaks referential integrity.
    pub fn open(
        data_dir: impl Into<std::path::PathBuf>,
        workers: usize,
    ) -> Result<Self, StoreError> {
        let store = Store::open(data_dir)?;
        let corrupt = |entity: String, reason: String| StoreError::Corrupt { entity, reason };
        let mut state = State::default();

        for project in store.load_all::<Project>(Kind::Project)? {
            let entity = format!("projects/{}", project.id);
            if let Some(v) = validate_project(&project).first() {
                return Err(corrupt(entity, v.to_string()));
            }
            let version = project_version(&project);
            state.projects.insert(
                project.id.to_string(),
                StoredProject {
                    project: Arc::new(project),
                    version,
                },
            );
        }
        let mut max_board = 0;
        for board in store.load_all::<Board>(Kind::Board)? {
            let entity = format!("boards/{}", board.id);
            let project = state.projects.get(board.project.as_str()).ok_or_else(|| {
                corrupt(entity.clone(), format!("unknown project {}", board.project))
            })?;
            board
                .check(&project.project)
                .map_err(|r| corrupt(entity, r))?;
            if let Some(n) = board
                .id
                .strip_prefix("board-")
                .and_then(|n| n.parse::<u64>().ok())
            {
                max_board = max_board.max(n);
            }
            state.boards.insert(board.id.clone(), board);
        }
        for session in store.load_all::<Session>(Kind::Session)? {
            if !state.projects.contains_key(session.project.as_str()) {
                return Err(corrupt(
                    format!("sessions/{}", session.id),
                    format!("unknown project {}", session.project),
                ));
            }
            state.sessions.insert(session.id.clone(), Arc::new(session));
        }
        for record in store.load_all::<ResponsesRecord>(Kind::Responses)? {
            let session = state.sessions.get(&record.session).ok_or_else(|| {
                corrupt(
                    format!("responses/{}", record.session),
                    "unknown session".into(),
                )
            })?;
            if let Err(e) = score_responses(&record.responses.responses(), &session.trials) {
                return Err(corrupt(
                    format!("responses/{}", record.session),
                    e.to_string(),
                ));
            }
            state.responses.insert(record.session, record.responses);
        }
        for record in store.load_all::<MatrixRecord>(Kind::Matrix)? {
            let m = &record.matrix;
            let key = MatrixKey {
                project: m.project.to_string(),
                version: record.version.clone(),
                tag: m.tag.to_string(),
                radius: m.radius,
            };
            let Some(project) = state.projects.get(&key.project) else {
                return Err(corrupt(
                    format!("matrices/{}", key.file_id()),
                    format!("unknown project {}", key.project),
                ));
            };
            if project.version != key.version {
                // Left behind by an interrupted re-import.
                store.remove(Kind::Matrix, &key.file_id())?;
                continue;
            }
            state.matrices.insert(key, CachedMatrix::new(record.matrix));
        }

        tracing::info!(
            projects = state.projects.len(),
            boards = state.boards.len(),
            sessions = state.sessions.len(),
            matrices = state.matrices.len(),
            "store loaded"
        );
        Ok(Self(Arc::new(Shared {
            store,
            state: RwLock::new(state),
            locks: Mutex::default(),
            jobs: Mutex::default(),
            pool: Arc::new(Semaphore::new(workers.max(1))),
            next_job: AtomicU64::new(1),
            next_board: AtomicU64::new(max_board + 1),
        })))
    }

    fn read(&self) -> RwLockReadGuard<'_, State> {
        self.0.state.read().unwrap_or_else(|e| e.into_inner())
    }

    fn write(&self) -> RwLockWriteGuard<'_, State> {
        self.0.state.write().unwrap_or_else(|e| e.into_inner())
    }

    fn project_lock(&self, project: &str) -> Arc<tokio::sync::Mutex<()>> {
        let mut locks = self.0.locks.lock().unwrap_or_else(|e| e.into_inner());
        locks.entry(project.to_owned()).or_default().clone()
    }

    // Projects

    pub fn projects(&self) -> Vec<ProjectSummary> {
        self.read()
            .projects
            .values()
            .map(ProjectSummary::from)
            .collect()
    }

    pub fn project(&self, id: &str) -> Result<StoredProject, ApiError> {
        self.read()
            .projects
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("unknown_project", id))
    }

    /// Stores a project, replacing an earlier version with the same id.
    /// Cached matrices of the old version are dropped and boards follow the
    /// new text list.
    pub async fn import(&self, source: ImportSource) -> Result<ImportSummary, ApiError> {
        let project = match source {
            ImportSource::Document(p) => {
                let violations = validate_project(&p);
                if !violations.is_empty() {
                    return Err(tagscope_core::model::ModelError::Invalid(violations).into());
                }
                p
            }
            ImportSource::Remote {
                credentials,
                remote_id,
            } => {
                let existing = self
                    .read()
                    .projects
                    .get(&remote_id)
                    .map(|s| s.project.clone());
                tokio::task::spawn_blocking(move || match existing {
                    Some(old) => update_project(&credentials, &remote_id, &old),
                    None => import_project(&credentials, &remote_id),
                })
                .await
                .map_err(|e| ApiError::internal(e.to_string()))??
            }
        };
        let id = project.id.to_string();
        let lock = self.project_lock(&id);
        let _guard = lock.lock().await;
        let this = self.clone();
        tokio::task::spawn_blocking(move || this.put_project(project))
            .await
            .map_err(|e| ApiError::internal(e.to_string()))?
    }

    fn put_project(&self, project: Project) -> Result<ImportSummary, ApiError> {
        let id = project.id.to_string();
        let version = project_version(&project);
        let current = self.read().projects.get(&id).cloned();
        if let Some(c) = current.as_ref().filter(|c| c.version == version) {
            return Ok(ImportSummary {
                project: c.into(),
                changed: false,
            });
        }
        let store = &self.0.store;
        store.put(Kind::Project, &id, &project)?;

        let stale: Vec<MatrixKey> = self
            .read()
            .matrices
            .keys()
            .filter(|k| k.project == id)
            .cloned()
            .collect();
        for k in &stale {
            store.remove(Kind::Matrix, &k.file_id())?;
        }
        let mut boards: Vec<Board> = self
            .read()
            .boards
            .values()
            .filter(|b| b.project.as_str() == id)
            .cloned()
            .collect();
        boards.retain_mut(|b| b.reconcile(&project));
        for b in &boards {
            store.put(Kind::Board, &b.id, b)?;
        }

        let stored = StoredProject {
            project: Arc::new(project),
            version,
        };
        let summary = ProjectSummary::from(&stored);
        tracing::info!(project = %id, version = %stored.version, "project stored");
        let mut state = self.write();
        for k in &stale {
            state.matrices.remove(k);
        }
        for b in boards {
            state.boards.insert(b.id.clone(), b);
        }
        state.projects.insert(id, stored);
        Ok(ImportSummary {
            project: summary,
            changed: true,
        })
    }

    // Similarity

    /// Resolves `tag` (id or unique name) and builds the cache key.
    pub fn matrix_key(
        &self,
        project: &str,
        tag: &str,
        radius: usize,
    ) -> Result<(MatrixKey, Arc<Project>), ApiError> {
        let stored = self.project(project)?;
        let tag = stored
            .project
            .resolve_tag(tag)
            .ok_or_else(|| ApiError::not_found("unknown_tag", tag))?;
        let key = MatrixKey {
            project: project.to_owned(),
            version: stored.version.clone(),
            tag: tag.id.to_string(),
            radius,
        };
        Ok((key, stored.project))
    }

    /// Returns the cached matrix or computes it, joining any job already
    /// running for the same key.
    pub async fn matrix(
        &self,
        project: &str,
        tag: &str,
        radius: usize,
    ) -> Result<CachedMatrix, ApiError> {
        let (key, project) = self.matrix_key(project, tag, radius)?;
        if let Some(m) = self.read().matrices.get(&key) {
            return Ok(m.clone());
        }
        let (_, mut rx) = self.start_job(key, project);
        loop {
            match &*rx.borrow_and_update() {
                JobState::Done(m) => return Ok(m.clone()),
                JobState::Failed(e) => return Err(e.clone()),
                JobState::Queued | JobState::Running => {}
            }
            rx.changed()
                .await
                .map_err(|_| ApiError::internal("matrix job vanished"))?;
        }
    }

    /// Starts a matrix job, or returns the one already in flight for the key.
    pub fn submit_job(&self, project: &str, tag: &str, radius: usize) -> Result<JobView, ApiError> {
        let (key, project) = self.matrix_key(project, tag, radius)?;
        let (id, _) = self.start_job(key, project);
        self.job(&id)
    }

    pub fn job(&self, id: &str) -> Result<JobView, ApiError> {
        let jobs = self.0.jobs.lock().unwrap_or_else(|e| e.into_inner());
        let job = jobs
            .by_id
            .get(id)
            .ok_or_else(|| ApiError::not_found("unknown_job", id))?;
        let (status, error) = match &*job.state.borrow() {
            JobState::Queued => ("queued", None),
            JobState::Running => ("running", None),
            JobState::Done(_) => ("done", None),
            JobState::Failed(e) => ("failed", Some(e.message.clone())),
        };
        Ok(JobView {
            id: id.to_owned(),
            project: job.key.project.clone(),
            tag: job.key.tag.clone(),
            radius: job.key.radius,
            status: status.into(),
            error,
        })
    }

    fn start_job(
        &self,
        key: MatrixKey,
        project: Arc<Project>,
    ) -> (String, watch::Receiver<JobState>) {
        let mut jobs = self.0.jobs.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(id) = jobs.inflight.get(&key) {
            return (id.clone(), jobs.by_id[id].state.clone());
        }
        let id = format!("job-{}", self.0.next_job.fetch_add(1, Ordering::Relaxed));
        // A job that finished after the caller's cache miss has already
        // populated the cache; completion inserts before leaving `inflight`.
        let cached = self.read().matrices.get(&key).cloned();
        if let Some(m) = cached {
            let (_, rx) = watch::channel(JobState::Done(m));
            jobs.by_id.insert(
                id.clone(),
                Job {
                    key,
                    state: rx.clone(),
                },
            );
            return (id, rx);
        }
        let (tx, rx) = watch::channel(JobState::Queued);
        jobs.by_id.insert(
            id.clone(),
            Job {
                key: key.clone(),
                state: rx.clone(),
            },
        );
        jobs.inflight.insert(key.clone(), id.clone());
        drop(jobs);

        let this = self.clone();
        tokio::spawn(async move {
            let permit = this.0.pool.clone().acquire_owned().await;
            tx.send_replace(JobState::Running);
            let worker = this.clone();
            let k = key.clone();
            let result = tokio::task::spawn_blocking(move || worker.compute(&k, &project)).await;
            drop(permit);
            let state = match result {
                Ok(Ok(m)) => {
                    tracing::info!(project = %key.project, tag = %key.tag, radius = key.radius, "matrix computed");
                    JobState::Done(m)
                }
                Ok(Err(e)) => {
                    tracing::warn!(project = %key.project, tag = %key.tag, error = %e.message, "matrix job failed");
                    JobState::Failed(e)
                }
                Err(e) => JobState::Failed(ApiError::internal(e.to_string())),
            };
            let mut jobs = this.0.jobs.lock().unwrap_or_else(|e| e.into_inner());
            jobs.inflight.remove(&key);
            tx.send_replace(state);
        });
        (id, rx)
    }

    /// Runs on a blocking thread.
    fn compute(&self, key: &MatrixKey, project: &Project) -> Result<CachedMatrix, ApiError> {
        let opts = MatrixOptions {
            pair: PairOptions {
                radius: key.radius,
                ..PairOptions::default()
            },
            ..MatrixOptions::default()
        };
        let cached = CachedMatrix::new(similarity_matrix(project, &key.tag, opts)?);
        let lock = self.project_lock(&key.project);
        let _guard = lock.blocking_lock();
        let current = self
            .read()
            .projects
            .get(&key.project)
            .map(|p| p.version.clone());
        if current.as_deref() == Some(key.version.as_str()) {
            let record = MatrixRecord {
                version: key.version.clone(),
                matrix: (*cached.matrix).clone(),
            };
            self.0.store.put(Kind::Matrix, &key.file_id(), &record)?;
            self.write().matrices.insert(key.clone(), cached.clone());
        }
        Ok(cached)
    }

    pub fn cached_matrix_count(&self) -> usize {
        self.read().matrices.len()
    }

    // Boards

    pub fn boards(&self, project: Option<&str>) -> Vec<Board> {
        self.read()
            .boards
            .values()
            .filter(|b| project.is_none_or(|p| b.project.as_str() == p))
            .cloned()
            .collect()
    }

    pub fn board(&self, id: &str) -> Result<Board, ApiError> {
        self.read()
            .boards
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("unknown_board", id))
    }

    pub async fn create_board(
        &self,
        project: &str,
        name: &str,
        categories: Vec<String>,
    ) -> Result<Board, ApiError> {
        let lock = self.project_lock(project);
        let _guard = lock.lock().await;
        let stored = self.project(project)?;
        let id = format!(
            "board-{}",
            self.0.next_board.fetch_add(1, Ordering::Relaxed)
        );
        let board = Board::new(id, &stored.project, name, categories)?;
        self.save_board(board)
    }

    /// Applies `edit` to a copy of the board and persists it; the stored board
    /// is untouched if `edit` fails.
    pub async fn edit_board(
        &self,
        id: &str,
        edit: impl FnOnce(&mut Board) -> Result<(), ApiError>,
    ) -> Result<Board, ApiError> {
        let project = self.board(id)?.project;
        let lock = self.project_lock(project.as_str());
        let _guard = lock.lock().await;
        let mut board = self.board(id)?;
        edit(&mut board)?;
        self.save_board(board)
    }

    pub async fn delete_board(&self, id: &str) -> Result<(), ApiError> {
        let project = self.board(id)?.project;
        let lock = self.project_lock(project.as_str());
        let _guard = lock.lock().await;
        self.board(id)?;
        self.0.store.remove(Kind::Board, id)?;
        self.write().boards.remove(id);
        Ok(())
    }

    fn save_board(&self, board: Board) -> Result<Board, ApiError> {
        self.0.store.put(Kind::Board, &board.id, &board)?;
        self.write().boards.insert(board.id.clone(), board.clone());
        Ok(board)
    }

    // Evaluation

    /// Builds trials from the cached matrix. The session id is a hash of the
    /// inputs, so repeating a request returns the existing session.
    pub async fn create_session(
        &self,
        project: &str,
        tag: &str,
        targets: Option<Vec<TextId>>,
        seed: u64,
        radius: usize,
    ) -> Result<Arc<Session>, ApiError> {
        let cached = self.matrix(project, tag, radius).await?;
        let stored = self.project(project)?;
        let targets = targets.unwrap_or_else(|| cached.matrix.texts.clone());
        let mut h = Sha256::new();
        for part in [
            stored.version.as_str(),
            cached.matrix.tag.as_str(),
            &radius.to_string(),
            &seed.to_string(),
        ] {
            h.update(part.as_bytes());
            h.update([0]);
        }
        for t in &targets {
            h.update(t.as_str().as_bytes());
            h.update([0]);
        }
        let id = format!("s-{}", &hex::encode(h.finalize())[..16]);

        let lock = self.project_lock(project);
        let _guard = lock.lock().await;
        if let Some(s) = self.read().sessions.get(&id) {
            return Ok(s.clone());
        }
        let trials = build_trials(&cached.matrix, &targets, seed)?;
        let session = Session {
            id: id.clone(),
            project: stored.project.id.clone(),
            version: stored.version,
            tag: cached.matrix.tag.clone(),
            radius,
            seed,
            trials,
        };
        self.0.store.put(Kind::Session, &id, &session)?;
        let session = Arc::new(session);
        self.write().sessions.insert(id, session.clone());
        Ok(session)
    }

    pub fn session(&self, id: &str) -> Result<Arc<Session>, ApiError> {
        self.read()
            .sessions
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("unknown_session", id))
    }

    pub async fn record_response(
        &self,
        session: &str,
        trial: &str,
        rater: &str,
        ranking: Vec<TextId>,
    ) -> Result<RaterResponse, ApiError> {
        if rater.trim().is_empty() {
            return Err(ApiError::bad_request("rater must not be empty"));
        }
        let s = self.session(session)?;
        let t = s
            .trials
            .iter()
            .find(|t| t.id == trial)
            .ok_or_else(|| ApiError::not_found("unknown_trial", trial))?;
        let lock = self.project_lock(s.project.as_str());
        let _guard = lock.lock().await;
        let mut store = self
            .read()
            .responses
            .get(session)
            .cloned()
            .unwrap_or_default();
        let response = store.record(t, ranking, rater)?;
        let record = ResponsesRecord {
            session: session.to_owned(),
            responses: store,
        };
        self.0.store.put(Kind::Responses, session, &record)?;
        self.write()
            .responses
            .insert(record.session, record.responses);
        Ok(response)
    }

    pub fn report(&self, session: &str) -> Result<EvaluationReport, ApiError> {
        let s = self.session(session)?;
        let responses = self
            .read()
            .responses
            .get(session)
            .map(ResponseStore::responses)
            .unwrap_or_default();
        score_responses(&responses, &s.trials)
            .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "storage", e.to_string()))
    }
}
