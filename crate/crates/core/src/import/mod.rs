//! Importing projects from a remote annotation store.
//!
//! A [`RemoteSource`] lists the projects an API key can read and fetches one
//! project payload at a time. Payloads are translated into the canonical
//! [`Project`] model and validated before they are returned. Two sources ship:
//! [`LocalDirSource`] reads a directory laid out like the remote, and
//! [`HttpSource`] speaks the small REST shape
//! `GET {endpoint}/projects` / `GET {endpoint}/projects/{id}`.

mod http;
mod local;
mod payload;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Project, Violation};

pub use http::HttpSource;
pub use local::{LocalDirSource, LOCAL_INDEX};
pub use payload::{
    translate, RemoteAnnotation, RemotePayload, RemoteTag, RemoteTagset, RemoteText,
};

/// An API key. Never printed, logged, or serialized.
#[derive(Clone, PartialEq, Eq)]
pub struct ApiKey(String);

impl ApiKey {
    pub fn new(key: impl Into<String>) -> Self {
        Self(key.into())
    }

    pub fn expose(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for ApiKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ApiKey(<redacted>)")
    }
}

#[derive(Debug, Clone)]
pub struct RemoteCredentials {
    pub api_key: ApiKey,
    /// `http(s)://` base URL or a local directory path.
    pub endpoint: String,
}

impl RemoteCredentials {
    pub fn new(endpoint: impl Into<String>, api_key: impl Into<String>) -> Self {
        Self {
            api_key: ApiKey::new(api_key),
            endpoint: endpoint.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemoteProjectDescriptor {
    pub id: String,
    pub name: String,
    pub last_modified: String,
}

#[derive(Debug, Error)]
pub enum ImportError {
    #[error("credentials rejected by {0}")]
    Authentication(String),
    #[error("cannot reach {endpoint}: {reason}")]
    Network { endpoint: String, reason: String },
    #[error("unknown remote project: {0}")]
    UnknownProject(String),
    #[error("cannot translate remote payload: {0}")]
    Translation(String),
    #[error("remote payload produced an invalid project ({} violation(s))", .0.len())]
    Invalid(Vec<Violation>),
    #[error("project {existing} was not imported from remote project {remote}")]
    NotFromRemote { existing: String, remote: String },
}

/// Read access to a remote annotation store.
pub trait RemoteSource: Send + Sync {
    fn list_projects(&self) -> Result<Vec<RemoteProjectDescriptor>, ImportError>;
    fn fetch_project(&self, remote_id: &str) -> Result<RemotePayload, ImportError>;
}

/// Picks the adapter for an endpoint: HTTP for `http://`/`https://`, else a directory.
pub fn source_for(creds: &RemoteCredentials) -> Box<dyn RemoteSource> {
    if creds.endpoint.starts_with("http://") || creds.endpoint.starts_with("https://") {
        Box::new(HttpSource::new(creds.clone()))
    } else {
        Box::new(LocalDirSource::new(creds.clone()))
    }
}

pub fn list_remote_projects(
    creds: &RemoteCredentials,
) -> Result<Vec<RemoteProjectDescriptor>, ImportError> {
    source_for(creds).list_projects()
}

/// Fetches and translates one remote project. The project id is `remote_id`.
pub fn import_from(source: &dyn RemoteSource, remote_id: &str) -> Result<Project, ImportError> {
    let descriptor = source
        .list_projects()?
        .into_iter()
        .find(|d| d.id == remote_id)
        .ok_or_else(|| ImportError::UnknownProject(remote_id.to_owned()))?;
    let payload = source.fetch_project(remote_id)?;
    translate(payload, &descriptor)
}

pub fn import_project(creds: &RemoteCredentials, remote_id: &str) -> Result<Project, ImportError> {
    import_from(source_for(creds).as_ref(), remote_id)
}

/// Re-imports `existing` and keeps the order of entities that survived.
/// New entities follow in remote order; deleted ones disappear.
pub fn update_from(
    source: &dyn RemoteSource,
    remote_id: &str,
    existing: &Project,
) -> Result<Project, ImportError> {
    if existing.id.as_str() != remote_id {
        return Err(ImportError::NotFromRemote {
            existing: existing.id.to_string(),
            remote: remote_id.to_owned(),
        });
    }
    let mut fresh = import_from(source, remote_id)?;
    keep_order(&mut fresh.texts, &existing.texts, |t| t.id.as_str());
    keep_order(&mut fresh.tagsets, &existing.tagsets, |t| t.id.as_str());
    for ts in &mut fresh.tagsets {
        if let Some(old) = existing.tagsets.iter().find(|o| o.id == ts.id) {
            keep_order(&mut ts.tags, &old.tags, |t| t.id.as_str());
        }
    }
    keep_order(&mut fresh.annotations, &existing.annotations, |a| {
        a.id.as_str()
    });
    Ok(fresh)
}

pub fn update_project(
    creds: &RemoteCredentials,
    remote_id: &str,
    existing: &Project,
) -> Result<Project, ImportError> {
    update_from(source_for(creds).as_ref(), remote_id, existing)
}

fn keep_order<T>(items: &mut [T], previous: &[T], key: impl Fn(&T) -> &str) {
    let rank = |item: &T| {
        previous
            .iter()
            .position(|p| key(p) == key(item))
            .unwrap_or(usize::MAX)
    };
    // Stable: new items keep their remote order after the surviving ones.
    let mut keyed: Vec<(usize, usize)> = items
        .iter()
        .enumerate()
        .map(|(i, it)| (rank(it), i))
        .collect();
    keyed.sort();
    let order: Vec<usize> = keyed.into_iter().map(|(_, i)| i).collect();
    apply_permutation(items, order);
}

fn apply_permutation<T>(items: &mut [T], order: Vec<usize>) {
    let mut slots: Vec<Option<usize>> = order.into_iter().map(Some).collect();
    // items[i] must receive the element currently at order[i].
    for start in 0..slots.len() {
        let mut cur = start;
        while let Some(src) = slots[cur].take() {
            if src == start {
                break;
            }
            items.swap(cur, src);
            cur = src;
        }
    }
}
