//! HTTP/JSON front end for estranet.
//!
//! | method | path | body | response |
//! |---|---|---|---|
//! | GET | `/health` | | `{"status":"ok"}` |
//! | POST | `/v1/detect` | `DetectRequest` | `ResultDocument` |
//! | POST | `/v1/sweep` | `SweepRequest` | `SweepResponse` |
//! | POST | `/v1/chart` | `ChartRequest` | `ChartResponse` |
//! | POST | `/v1/generate` | `GenerateRequest` | `GenerateResponse` |
//! | POST | `/v1/sessions` | `CreateSessionRequest` | `SessionInfo` |
//! | GET | `/v1/sessions/{id}` | | `SessionView` |
//! | POST | `/v1/sessions/{id}/snapshots` | `AppendRequest` | `AppendResponse` |
//! | DELETE | `/v1/sessions/{id}` | | 204 |
//!
//! Errors are `{"error": {"kind", "message", "line"?}}`.

use std::future::Future;
use std::net::SocketAddr;

use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use estranet_core::api::*;
use estranet_core::chart::DEFAULT_CELL_SIZE;
use estranet_core::io::format_snapshots;
use estranet_core::{generate, run_pipeline, sweep, EvolutionChart, ResultDocument};
use tokio::net::TcpListener;

mod error;
pub mod sessions;

pub use error::{ApiError, ApiJson};
use sessions::{Session, SessionStore};

const BODY_LIMIT: usize = 256 * 1024 * 1024;

#[derive(Debug, Clone, Default)]
pub struct AppState {
    pub sessions: SessionStore,
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/v1/detect", post(detect))
        .route("/v1/sweep", post(run_sweep))
        .route("/v1/chart", post(chart))
        .route("/v1/generate", post(run_generate))
        .route("/v1/sessions", post(create_session))
        .route("/v1/sessions/{id}", get(get_session).delete(delete_session))
        .route("/v1/sessions/{id}/snapshots", post(append_snapshots))
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .with_state(state)
}

/// Serves the API on `listener` until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(AppState::default()))
        .with_graceful_shutdown(shutdown)
        .await
}

/// Binds `addr` and serves in a background task. Returns the bound address.
pub async fn spawn(addr: SocketAddr) -> std::io::Result<SocketAddr> {
    let listener = TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    tokio::spawn(async move {
        if let Err(e) = serve(listener, std::future::pending()).await {
            tracing::error!(error = %e, "server stopped");
        }
    });
    Ok(local)
}

/// Runs CPU-bound work off the async workers.
async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(ErrorKind::Internal, format!("worker failed: {e}")))?
}

#[derive(serde::Serialize)]
struct Health {
    status: &'static str,
}

async fn health() -> Json<Health> {
    Json(Health { status: "ok" })
}

async fn detect(ApiJson(req): ApiJson<DetectRequest>) -> Result<Json<ResultDocument>, ApiError> {
    blocking(move || {
        let series = req.input.parse()?;
        tracing::info!(snapshots = series.len(), delta = req.delta, "detect");
        let result = run_pipeline(&series.graphs, req.delta, &req.config)?;
        Ok(Json(result.to_document(&series.interner)))
    })
    .await
}

async fn run_sweep(ApiJson(req): ApiJson<SweepRequest>) -> Result<Json<SweepResponse>, ApiError> {
    blocking(move || {
        if req.deltas.is_empty() {
            return Err(ApiError::new(ErrorKind::Usage, "no delta values given"));
        }
        let series = req.input.parse()?;
        tracing::info!(snapshots = series.len(), deltas = req.deltas.len(), "sweep");
        let rows = sweep(&series.graphs, &req.deltas, &req.config)?;
        Ok(Json(SweepResponse { rows }))
    })
    .await
}

async fn chart(ApiJson(req): ApiJson<ChartRequest>) -> Result<Json<ChartResponse>, ApiError> {
    let cell = req.cell_size.unwrap_or(DEFAULT_CELL_SIZE);
    if cell == 0 {
        return Err(ApiError::new(ErrorKind::Usage, "cell size must be positive"));
    }
    blocking(move || {
        let chart = EvolutionChart::from_document(&req.result);
        Ok(Json(ChartResponse {
            tsv: chart.to_tsv(),
            svg: chart.to_svg(cell),
        }))
    })
    .await
}

async fn run_generate(
    ApiJson(req): ApiJson<GenerateRequest>,
) -> Result<Json<GenerateResponse>, ApiError> {
    blocking(move || {
        let series = generate(&req.spec)?;
        Ok(Json(GenerateResponse {
            text: format_snapshots(&series),
        }))
    })
    .await
}

async fn create_session(
    State(state): State<AppState>,
    ApiJson(req): ApiJson<CreateSessionRequest>,
) -> Result<(StatusCode, Json<SessionInfo>), ApiError> {
    let id = uuid::Uuid::new_v4().to_string();
    let session = Session::new(id, req.delta, req.config)?;
    let info = session.info();
    state.sessions.insert(session);
    tracing::info!(id = %info.id, delta = info.delta, "session created");
    Ok((StatusCode::CREATED, Json(info)))
}

async fn get_session(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<SessionView>, ApiError> {
    let handle = state.sessions.get(&id).ok_or_else(|| ApiError::not_found("session"))?;
    blocking(move || {
        let session = handle.lock().unwrap();
        Ok(Json(SessionView {
            session: session.info(),
            result: session.document(),
        }))
    })
    .await
}

async fn append_snapshots(
    State(state): State<AppState>,
    Path(id): Path<String>,
    ApiJson(req): ApiJson<AppendRequest>,
) -> Result<Json<AppendResponse>, ApiError> {
    let handle = state.sessions.get(&id).ok_or_else(|| ApiError::not_found("session"))?;
    blocking(move || {
        let mut session = handle.lock().unwrap();
        let snapshots = session.append(&req.text)?;
        Ok(Json(AppendResponse {
            session: session.info(),
            snapshots,
        }))
    })
    .await
}

async fn delete_session(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<StatusCode, ApiError> {
    if state.sessions.remove(&id) {
        Ok(StatusCode::NO_CONTENT)
    } else {
        Err(ApiError::not_found("session"))
    }
}
