use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{validate_project, Project, Violation};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed project document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("project is invalid ({} violation(s)): {}", .0.len(), first_violation(.0))]
    Invalid(Vec<Violation>),
}

fn first_violation(v: &[Violation]) -> String {
    v.first().map(ToString::to_string).unwrap_or_default()
}

/// Parses and validates a canonical project document.
pub fn parse_project(json: &str) -> Result<Project, ModelError> {
    let project: Project = serde_json::from_str(json)?;
    let violations = validate_project(&project);
    if violations.is_empty() {
        Ok(project)
    } else {
        Err(ModelError::Invalid(violations))
    }
}

pub fn load_project(path: impl AsRef<Path>) -> Result<Project, ModelError> {
    let path = path.as_ref();
    let json = fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_project(&json)
}

/// Canonical serialization: pretty-printed JSON, fields in declaration order.
pub fn to_canonical_json(project: &Project) -> String {
    serde_json::to_string_pretty(project).expect("project serialization is infallible")
}

/// Hex SHA-256 of the canonical serialization. Equal projects share a version.
pub fn project_version(project: &Project) -> String {
    hex::encode(Sha256::digest(to_canonical_json(project).as_bytes()))
}

pub fn save_project(project: &Project, path: impl AsRef<Path>) -> Result<(), ModelError> {
    let path = path.as_ref();
    let mut json = to_canonical_json(project);
    json.push('\n');
    fs::write(path, json).map_err(|source| ModelError::Io {
        path: path.to_owned(),
        source,
    })
}
