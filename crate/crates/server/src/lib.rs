//! HTTP service for the practice client.
//!
//! Lessons are preprocessed by background jobs and stored on disk under
//! `<storage_root>/lessons/<id>/`; per-user practice sessions live under
//! `<storage_root>/sessions/<id>/<user>.json`. Every route is JSON except
//! the media download and the raw WAV recording upload.

pub mod api;
pub mod config;
pub mod error;
pub mod jobs;

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use lessonkit_core::{LessonManifest, SessionStore};
use tokio::net::TcpListener;

pub use api::router;
pub use config::ServerConfig;
pub use error::ApiError;
pub use jobs::{JobRegistry, JobStatus, PreprocessJob};

/// Shared handler state. Cheap to clone.
#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

struct Inner {
    config: ServerConfig,
    jobs: JobRegistry,
    sessions: SessionStore,
    /// Manifests never change once written, so they are cached on first read.
    manifests: RwLock<HashMap<String, Arc<LessonManifest>>>,
}

impl AppState {
    /// Creates the storage directories if needed.
    pub fn new(config: ServerConfig) -> std::io::Result<Self> {
        std::fs::create_dir_all(config.lessons_dir())?;
        std::fs::create_dir_all(config.sessions_dir())?;
        let sessions = SessionStore::new(config.sessions_dir());
        Ok(Self {
            inner: Arc::new(Inner {
                config,
                jobs: JobRegistry::default(),
                sessions,
                manifests: RwLock::new(HashMap::new()),
            }),
        })
    }

    pub fn config(&self) -> &ServerConfig {
        &self.inner.config
    }

    pub fn jobs(&self) -> &JobRegistry {
        &self.inner.jobs
    }

    pub fn sessions(&self) -> &SessionStore {
        &self.inner.sessions
    }
}

/// Binds `config.listen` and serves until Ctrl-C.
pub async fn serve(config: ServerConfig) -> std::io::Result<()> {
    let listener = TcpListener::bind(&config.listen).await?;
    log::info!(
        "listening on {} (storage {})",
        listener.local_addr()?,
        config.storage_root.display()
    );
    let app = router(AppState::new(config)?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
