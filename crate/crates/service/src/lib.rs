//! HTTP face of the collect → train → recognize loop.
//!
//! `POST /recognize` classifies a 30×30 canvas glyph, `POST /samples` appends a
//! labeled glyph to the live corpus, `GET /model` describes the loaded network.
//! Anything else is served from the drawpad's static assets.

mod store;

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use hcr_core::dataset::{Label, Source};
use hcr_core::pipeline::{self, Input, PipelineConfig};
use hcr_core::skeleton::GLYPH_SIDE;
use hcr_core::train::{self, TrainReport};
use hcr_core::{Error, Glyph, Mlp, Sample, Threshold};

pub use store::SampleStore;

pub const DEFAULT_PORT: u16 = 8077;

/// A network plus what its training report says about it.
#[derive(Clone, Debug)]
pub struct LoadedModel {
    pub net: Mlp,
    pub trained_epochs: Option<usize>,
}

impl LoadedModel {
    /// Load a model file; the epoch count comes from the CSV report next to it, if any.
    pub fn load(path: impl AsRef<Path>) -> hcr_core::Result<Self> {
        let path = path.as_ref();
        let net = Mlp::load(path)?;
        PipelineConfig::for_model(&net)?;
        let trained_epochs = std::fs::read_to_string(train::report_path(path))
            .ok()
            .and_then(|csv| TrainReport::epochs_from_csv(&csv));
        Ok(LoadedModel { net, trained_epochs })
    }
}

#[derive(Debug)]
pub struct AppState {
    pub model: Option<LoadedModel>,
    pub store: SampleStore,
}

#[derive(Debug, Deserialize)]
struct RecognizeRequest {
    glyph: Vec<String>,
}

#[derive(Debug, Serialize)]
struct RecognizeResponse {
    label_index: usize,
    letter: &'static str,
    name: &'static str,
    outputs: Vec<f64>,
    /// The glyph the network saw, so the pad can show it.
    glyph: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct SampleRequest {
    glyph: Vec<String>,
    label_index: i64,
    #[serde(default)]
    writer: Option<String>,
}

#[derive(Debug, Serialize)]
struct SampleResponse {
    stored: usize,
}

#[derive(Debug, Serialize, PartialEq, Eq)]
struct ModelInfo {
    n_in: usize,
    n_hidden: usize,
    n_out: usize,
    trained_epochs: Option<usize>,
}

#[derive(Debug)]
struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    fn no_model() -> Self {
        Self::new(StatusCode::SERVICE_UNAVAILABLE, "no model loaded")
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::EmptyGlyph => StatusCode::UNPROCESSABLE_ENTITY,
            Error::InvalidInput(_) | Error::Parse { .. } | Error::LabelRange { .. } => StatusCode::BAD_REQUEST,
            Error::Diverged(_) | Error::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(serde_json::json!({ "error": self.message }))).into_response()
    }
}

fn parse_body<T: serde::de::DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("malformed body: {e}")))
}

/// The request's row strings as a canvas image. Shape is checked here so the
/// error names the offending row.
fn canvas(rows: &[String]) -> Result<Input, ApiError> {
    if rows.len() != GLYPH_SIDE {
        return Err(ApiError::bad_request(format!(
            "glyph must have {GLYPH_SIDE} rows, got {}",
            rows.len()
        )));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != GLYPH_SIDE || !row.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(ApiError::bad_request(format!(
                "glyph row {i} must be {GLYPH_SIDE} characters of '0' or '1'"
            )));
        }
    }
    let glyph = Glyph::from_rows(rows)?;
    Ok(Input::Binary(glyph.to_image()))
}

async fn recognize(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Json<RecognizeResponse>, ApiError> {
    let model = state.model.as_ref().ok_or_else(ApiError::no_model)?;
    let req: RecognizeRequest = parse_body(&body)?;
    let input = canvas(&req.glyph)?;
    let rec = pipeline::recognize(&input, &PipelineConfig::for_model(&model.net)?)?;
    Ok(Json(RecognizeResponse {
        label_index: rec.label.index(),
        letter: rec.label.letter(),
        name: rec.label.name(),
        outputs: rec.outputs,
        glyph: rec.glyph.rows(),
    }))
}

async fn add_sample(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Json<SampleResponse>, ApiError> {
    let req: SampleRequest = parse_body(&body)?;
    let label = usize::try_from(req.label_index)
        .ok()
        .and_then(|i| Label::new(i).ok())
        .ok_or_else(|| ApiError::bad_request(format!("label_index {} is outside 0..=31", req.label_index)))?;
    // Stored in the same preprocessed form the trainer consumes.
    let glyph = pipeline::preprocess(&canvas(&req.glyph)?, Threshold::default())?;
    let sample = Sample::new(label, glyph, req.writer, Source::Canvas)?;

    let stored = tokio::task::spawn_blocking(move || state.store.append(&sample))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
        .map_err(|e| {
            log::error!("sample append failed: {e}");
            ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, format!("could not store sample: {e}"))
        })?;
    Ok(Json(SampleResponse { stored }))
}

async fn model_info(State(state): State<Arc<AppState>>) -> Result<Json<ModelInfo>, ApiError> {
    let model = state.model.as_ref().ok_or_else(ApiError::no_model)?;
    Ok(Json(ModelInfo {
        n_in: model.net.n_in(),
        n_hidden: model.net.n_hidden(),
        n_out: model.net.n_out(),
        trained_epochs: model.trained_epochs,
    }))
}

const PLACEHOLDER: &str = "<!doctype html>\n<title>hcr</title>\n<p>The drawpad assets are not installed. \
    Start the service with <code>--assets</code> pointing at the built drawpad, or use the JSON endpoints \
    <code>POST /recognize</code>, <code>POST /samples</code> and <code>GET /model</code>.</p>\n";

/// Routes for the service. Static assets come from `assets` when given, otherwise `/` shows a placeholder.
pub fn router(state: Arc<AppState>, assets: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/recognize", post(recognize))
        .route("/samples", post(add_sample))
        .route("/model", get(model_info))
        .with_state(state);
    match assets {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(|| async { Html(PLACEHOLDER) })),
    }
}

#[derive(Clone, Debug)]
pub struct ServeConfig {
    pub model: Option<PathBuf>,
    pub data: PathBuf,
    pub addr: SocketAddr,
    pub assets: Option<PathBuf>,
}

/// Load the model and sample store, then serve until interrupted.
pub async fn serve(cfg: ServeConfig) -> hcr_core::Result<()> {
    let model = cfg.model.as_ref().map(LoadedModel::load).transpose()?;
    let store = SampleStore::open(&cfg.data)?;
    log::info!(
        "{} samples in {}; model {}",
        store.count(),
        store.path().display(),
        cfg.model.as_ref().map_or("none".into(), |p| p.display().to_string())
    );
    let app = router(Arc::new(AppState { model, store }), cfg.assets.as_deref());
    let listener = tokio::net::TcpListener::bind(cfg.addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
