//! File-backed persistence: one JSON document per entity under the data directory.
//!
//! Writes go to a hidden temporary file that is synced and renamed over the
//! target, and the directory is synced afterwards, so a document on disk is
//! always either the old or the new version. Hidden files left by an
//! interrupted write are removed on open.

use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("corrupt store entity {entity}: {reason}")]
    Corrupt { entity: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Project,
    Board,
    Session,
    Responses,
    Matrix,
}

impl Kind {
    pub const ALL: [Kind; 5] = [
        Kind::Project,
        Kind::Board,
        Kind::Session,
        Kind::Responses,
        Kind::Matrix,
    ];

    pub fn dir(self) -> &'static str {
        match self {
            Kind::Project => "projects",
            Kind::Board => "boards",
            Kind::Session => "sessions",
            Kind::Responses => "responses",
            Kind::Matrix => "matrices",
        }
    }
}

/// Maps an id onto a file stem: `[A-Za-z0-9_-]` pass through, other bytes become `~XX`.
pub fn file_stem(id: &str) -> String {
    let mut out = String::with_capacity(id.len());
    for b in id.bytes() {
        if b.is_ascii_alphanumeric() || b == b'_' || b == b'-' {
            out.push(b as char);
        } else {
            out.push_str(&format!("~{b:02x}"));
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

impl Store {
    /// Creates the directory layout if needed and clears interrupted writes.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        for kind in Kind::ALL {
            let dir = root.join(kind.dir());
            fs::create_dir_all(&dir).map_err(|source| StoreError::Io {
                path: dir.clone(),
                source,
            })?;
            for entry in read_dir(&dir)? {
                if is_hidden(&entry) {
                    let _ = fs::remove_file(&entry);
                }
            }
        }
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, kind: Kind, id: &str) -> PathBuf {
        self.root
            .join(kind.dir())
            .join(format!("{}.json", file_stem(id)))
    }

    /// Every document of one kind, sorted by file name.
    pub fn load_all<T: DeserializeOwned>(&self, kind: Kind) -> Result<Vec<T>, StoreError> {
        let dir = self.root.join(kind.dir());
        let mut paths: Vec<PathBuf> = read_dir(&dir)?
            .into_iter()
            .filter(|p| !is_hidden(p) && p.extension().is_some_and(|e| e == "json"))
            .collect();
        paths.sort();
        paths
            .iter()
            .map(|p| {
                let raw = fs::read_to_string(p).map_err(|source| StoreError::Io {
                    path: p.clone(),
                    source,
                })?;
                serde_json::from_str(&raw).map_err(|e| StoreError::Corrupt {
                    entity: entity_name(kind, p),
                    reason: e.to_string(),
                })
            })
            .collect()
    }

    pub fn put<T: Serialize>(&self, kind: Kind, id: &str, value: &T) -> Result<(), StoreError> {
        let mut json = serde_json::to_string_pretty(value).expect("stored values serialize");
        json.push('\n');
        self.put_raw(kind, id, &json)
    }

    pub fn put_raw(&self, kind: Kind, id: &str, contents: &str) -> Result<(), StoreError> {
        let target = self.path(kind, id);
        let dir = target.parent().expect("entity paths have a parent");
        let tmp = dir.join(format!(".{}.tmp", file_stem(id)));
        let io_err = |path: &Path| {
            let path = path.to_owned();
            move |source| StoreError::Io { path, source }
        };
        let mut f = File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(contents.as_bytes()).map_err(io_err(&tmp))?;
        f.sync_all().map_err(io_err(&tmp))?;
        drop(f);
        fs::rename(&tmp, &target).map_err(io_err(&target))?;
        sync_dir(dir).map_err(io_err(dir))
    }

    pub fn remove(&self, kind: Kind, id: &str) -> Result<(), StoreError> {
        let target = self.path(kind, id);
        match fs::remove_file(&target) {
            Ok(()) => {}
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(()),
            Err(source) => {
                return Err(StoreError::Io {
                    path: target,
                    source,
                })
            }
        }
        let dir = target.parent().expect("entity paths have a parent");
        sync_dir(dir).map_err(|source| StoreError::Io {
            path: dir.to_owned(),
            source,
        })
    }
}

fn entity_name(kind: Kind, path: &Path) -> String {
    let file = path
        .file_name()
        .map(|f| f.to_string_lossy())
        .unwrap_or_default();
    format!("{}/{file}", kind.dir())
}

fn read_dir(dir: &Path) -> Result<Vec<PathBuf>, StoreError> {
    let io_err = |source| StoreError::Io {
        path: dir.to_owned(),
        source,
    };
    fs::read_dir(dir)
        .map_err(io_err)?
        .map(|e| e.map(|e| e.path()).map_err(io_err))
        .collect()
}

fn is_hidden(path: &Path) -> bool {
    path.file_name()
        .is_some_and(|f| f.to_string_lossy().starts_with('.'))
}

#[cfg(unix)]
fn sync_dir(dir: &Path) -> io::Result<()> {
    File::open(dir)?.sync_all()
}

#[cfg(not(unix))]
fn sync_dir(_dir: &Path) -> io::Result<()> {
    Ok(())
}
