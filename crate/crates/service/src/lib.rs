//! HTTP backend for tagscope.
//!
//! Serves projects, chart data, similarity matrices, boards, and evaluation
//! sessions as JSON, persisting everything under one data directory. See
//! [`routes::router`] for the endpoint list.

mod app;
pub mod boards;
mod error;
pub mod remote;
pub mod routes;
pub mod store;

use std::future::Future;
use std::io;
use std::net::SocketAddr;
use std::path::PathBuf;

use thiserror::Error;
use tokio::net::TcpListener;

pub use app::{
    CachedMatrix, ImportSource, ImportSummary, JobView, ProjectSummary, PublicTrial, Service,
    Session, SessionView,
};
pub use boards::{Board, BoardError, Category};
pub use error::ApiError;
pub use remote::remote_fixture_router;
pub use routes::router;
pub use store::StoreError;

#[derive(Debug, Clone)]
pub struct Config {
    pub addr: SocketAddr,
    pub data_dir: PathBuf,
    /// Concurrent matrix jobs.
    pub workers: usize,
}

#[derive(Debug, Error)]
pub enum ServeError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("cannot listen on {addr}: {source}")]
    Bind {
        addr: SocketAddr,
        #[source]
        source: io::Error,
    },
    #[error("server failed: {0}")]
    Io(#[from] io::Error),
}

/// Opens the store and binds the listener. Nothing is served yet.
pub async fn bind(config: &Config) -> Result<(TcpListener, Service), ServeError> {
    let service = Service::open(&config.data_dir, config.workers)?;
    let listener = TcpListener::bind(config.addr)
        .await
        .map_err(|source| ServeError::Bind {
            addr: config.addr,
            source,
        })?;
    Ok((listener, service))
}

/// Serves until `shutdown` resolves.
pub async fn run(
    listener: TcpListener,
    service: Service,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<(), ServeError> {
    serve_router(listener, router(service), shutdown).await
}

/// Serves any router until `shutdown` resolves.
pub async fn serve_router(
    listener: TcpListener,
    app: axum::Router,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<(), ServeError> {
    axum::serve(listener, app)
        .with_graceful_shutdown(shutdown)
        .await?;
    Ok(())
}
