use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{ImportError, RemoteCredentials, RemotePayload, RemoteProjectDescriptor, RemoteSource};

/// Name of the index file at the root of a local remote directory.
pub const LOCAL_INDEX: &str = "index.json";

/// `index.json` of a local remote directory.
///
/// ```json
/// {"keys": ["..."], "projects": [{"id": "...", "name": "...", "last_modified": "..."}]}
/// ```
///
/// Project payloads live at `projects/{id}.json`.
#[derive(Debug, Deserialize)]
pub(crate) struct LocalIndex {
    #[serde(default)]
    pub keys: Vec<String>,
    pub projects: Vec<RemoteProjectDescriptor>,
}

/// Remote source backed by a directory.
#[derive(Debug, Clone)]
pub struct LocalDirSource {
    creds: RemoteCredentials,
    root: PathBuf,
}

impl LocalDirSource {
    pub fn new(creds: RemoteCredentials) -> Self {
        let root = PathBuf::from(&creds.endpoint);
        Self { creds, root }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn read(&self, path: &Path) -> Result<String, ImportError> {
        fs::read_to_string(path).map_err(|e| ImportError::Network {
            endpoint: self.creds.endpoint.clone(),
            reason: format!("{}: {e}", path.display()),
        })
    }

    pub(crate) fn index(&self) -> Result<LocalIndex, ImportError> {
        let raw = self.read(&self.root.join(LOCAL_INDEX))?;
        let index: LocalIndex = serde_json::from_str(&raw)
            .map_err(|e| ImportError::Translation(format!("{LOCAL_INDEX}: {e}")))?;
        if !index.keys.iter().any(|k| k == self.creds.api_key.expose()) {
            return Err(ImportError::Authentication(self.creds.endpoint.clone()));
        }
        Ok(index)
    }
}

impl RemoteSource for LocalDirSource {
    fn list_projects(&self) -> Result<Vec<RemoteProjectDescriptor>, ImportError> {
        Ok(self.index()?.projects)
    }

    fn fetch_project(&self, remote_id: &str) -> Result<RemotePayload, ImportError> {
        let index = self.index()?;
        if !index.projects.iter().any(|d| d.id == remote_id) {
            return Err(ImportError::UnknownProject(remote_id.to_owned()));
        }
        let raw = self.read(&self.root.join("projects").join(format!("{remote_id}.json")))?;
        serde_json::from_str(&raw).map_err(|e| ImportError::Translation(e.to_string()))
    }
}
