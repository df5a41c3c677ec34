use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use tower_http::cors::{Any, CorsLayer};

use crate::api::{
    AnalyzeArticleRequest, AnalyzeArticleResponse, AnalyzeClaimRequest, AnalyzeResponse, ErrorBody, ErrorDetail,
    FeedbackAck, FeedbackRecord, Health,
};
use crate::config::ServiceConfig;
use crate::error::ServiceError;
use crate::pipeline::{Service, StartupError};

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        let body = ErrorBody {
            error: ErrorDetail {
                code: self.code().to_string(),
                message: self.to_string(),
            },
        };
        (status, Json(body)).into_response()
    }
}

/// JSON bodies are parsed by hand so that every malformed body maps to 400.
fn parse<T: DeserializeOwned>(body: &[u8]) -> Result<T, ServiceError> {
    serde_json::from_slice(body).map_err(|e| ServiceError::BadRequest(format!("invalid request body: {e}")))
}

/// Runs blocking pipeline work (HTTP fetches, model inference) off the
/// async executor.
async fn blocking<T, F>(svc: Arc<Service>, f: F) -> Result<T, ServiceError>
where
    T: Send + 'static,
    F: FnOnce(&Service) -> Result<T, ServiceError> + Send + 'static,
{
    tokio::task::spawn_blocking(move || f(&svc))
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))?
}

async fn analyze_claim(State(svc): State<Arc<Service>>, body: Bytes) -> Result<Json<AnalyzeResponse>, ServiceError> {
    let req: AnalyzeClaimRequest = parse(&body)?;
    let resp = blocking(svc, move |s| s.analyze_claim(&req)).await?;
    tracing::info!(request_id = %resp.request_id, verdict = ?resp.verdict, "analyzed claim");
    Ok(Json(resp))
}

async fn analyze_article(
    State(svc): State<Arc<Service>>,
    body: Bytes,
) -> Result<Json<AnalyzeArticleResponse>, ServiceError> {
    let req: AnalyzeArticleRequest = parse(&body)?;
    let resp = blocking(svc, move |s| s.analyze_article(&req)).await?;
    tracing::info!(request_id = %resp.request_id, claims = resp.claims.len(), "analyzed article");
    Ok(Json(resp))
}

async fn feedback(State(svc): State<Arc<Service>>, body: Bytes) -> Result<Json<FeedbackAck>, ServiceError> {
    let rec: FeedbackRecord = parse(&body)?;
    Ok(Json(blocking(svc, move |s| s.submit_feedback(&rec)).await?))
}

async fn health(State(svc): State<Arc<Service>>) -> Json<Health> {
    Json(svc.health())
}

/// The four API routes with permissive CORS so a browser extension can
/// call them from its own origin.
pub fn router(service: Arc<Service>) -> Router {
    let cors = CorsLayer::new()
        .allow_origin(Any)
        .allow_methods([Method::GET, Method::POST, Method::OPTIONS])
        .allow_headers([header::CONTENT_TYPE]);
    Router::new()
        .route("/api/v1/analyze/claim", post(analyze_claim))
        .route("/api/v1/analyze/article", post(analyze_article))
        .route("/api/v1/feedback", post(feedback))
        .route("/api/v1/health", get(health))
        .layer(cors)
        .with_state(service)
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error(transparent)]
    Startup(#[from] StartupError),
    #[error("cannot listen on {addr}: {source}")]
    Bind {
        addr: String,
        #[source]
        source: std::io::Error,
    },
    #[error("server stopped: {0}")]
    Io(#[from] std::io::Error),
}

/// Loads the configured assets and serves until the process is stopped.
pub async fn serve(config: ServiceConfig) -> Result<(), ServeError> {
    let service = Arc::new(Service::from_config(&config)?);
    let listener = tokio::net::TcpListener::bind(&config.bind_addr)
        .await
        .map_err(|source| ServeError::Bind {
            addr: config.bind_addr.clone(),
            source,
        })?;
    let addr: SocketAddr = listener.local_addr()?;
    let health = service.health();
    tracing::info!(%addr, status = ?health.status, backend = health.backend.as_str(), "listening");
    axum::serve(listener, router(service)).await?;
    Ok(())
}
