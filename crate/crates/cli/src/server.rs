//! Local HTTP+JSON server for the path editor UI.
//!
//! Models are loaded once at startup and shared read-only; every request owns
//! its own seeded rng, so equal requests with equal seeds get equal responses.

use std::sync::Arc;

use anyhow::Result;
use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use pathrunner_core::model::sample_path;
use pathrunner_core::tile::parse_actions;
use pathrunner_core::{
    evaluate_level, generate_from_path, generate_level, Checkpoint, GenConfig, GeneratedLevel,
    LevelMetrics, LevelModel, PathSequence, TileGrid,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Longest path a request may ask for; the grid grows with the path.
pub const MAX_PATH_LENGTH: usize = 10_000;

pub struct Models {
    pub paths: Checkpoint,
    pub levels: LevelModel,
}

#[derive(Clone)]
struct AppState {
    models: Option<Arc<Models>>,
}

#[derive(Debug)]
pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

fn bad_request(msg: impl Into<String>) -> ApiError {
    ApiError(StatusCode::BAD_REQUEST, msg.into())
}

impl AppState {
    fn models(&self) -> Result<&Models, ApiError> {
        self.models.as_deref().ok_or_else(|| {
            ApiError(StatusCode::SERVICE_UNAVAILABLE, "models are not loaded".into())
        })
    }
}

/// Seeds stay below 2^53 so JavaScript clients can echo them back exactly.
fn draw_seed() -> u64 {
    rand::rng().random_range(0..1u64 << 53)
}

fn check_length(n: usize) -> Result<usize, ApiError> {
    if n > MAX_PATH_LENGTH {
        return Err(bad_request(format!("path length {n} exceeds {MAX_PATH_LENGTH}")));
    }
    Ok(n)
}

#[derive(Debug, Default, Deserialize)]
pub struct GenerateRequest {
    pub actions: Option<String>,
    pub path_length: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
struct SampleQuery {
    length: Option<usize>,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
struct EvaluateRequest {
    tiles: Vec<String>,
}

#[derive(Debug, Serialize)]
struct LevelResponse {
    seed: u64,
    width: usize,
    height: usize,
    tiles: Vec<String>,
    actions: Vec<String>,
    path: String,
    start: [i64; 2],
    gold: usize,
    enemies: usize,
    fallback_events: usize,
    metrics: LevelMetrics,
}

impl LevelResponse {
    fn new(level: &GeneratedLevel) -> Result<Self, ApiError> {
        let grid = level.grid();
        let metrics = evaluate_level(grid)
            .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
        let (x, y) = level.path.start();
        Ok(LevelResponse {
            seed: level.seed,
            width: grid.width(),
            height: grid.height(),
            tiles: grid.rows(),
            actions: level.level.actions.rows(),
            path: level.path.to_string(),
            start: [x, y],
            gold: level.entities.gold,
            enemies: level.entities.enemies,
            fallback_events: level.fallbacks.total(),
            metrics,
        })
    }
}

async fn health(State(state): State<AppState>) -> Json<Value> {
    Json(json!({ "status": "ok", "models_loaded": state.models.is_some() }))
}

async fn sample(
    State(state): State<AppState>,
    Query(q): Query<SampleQuery>,
) -> Result<Json<Value>, ApiError> {
    let models = state.models()?;
    let length = check_length(q.length.unwrap_or(GenConfig::default().path_length))?;
    let seed = q.seed.unwrap_or_else(draw_seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let actions = sample_path(&models.paths.model, length, models.paths.chunk_len, &mut rng);
    let text: String = actions.iter().map(|a| a.symbol()).collect();
    Ok(Json(json!({ "actions": text, "length": actions.len(), "seed": seed })))
}

async fn generate(
    State(state): State<AppState>,
    Json(req): Json<GenerateRequest>,
) -> Result<Json<LevelResponse>, ApiError> {
    // Validate before touching the models so bad input is a 400 either way.
    let explicit = match &req.actions {
        Some(s) => {
            let acts = parse_actions(s.trim()).map_err(|e| bad_request(e.to_string()))?;
            check_length(acts.len())?;
            Some(acts)
        }
        None => None,
    };
    let path_length = check_length(req.path_length.unwrap_or(GenConfig::default().path_length))?;
    let models = state.models()?;
    let seed = req.seed.unwrap_or_else(draw_seed);
    let internal = |e: pathrunner_core::Error| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string());
    let level = match explicit {
        Some(acts) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            generate_from_path(PathSequence::new(acts), &models.levels, seed, &mut rng)
                .map_err(internal)?
        }
        None => generate_level(&GenConfig { path_length, seed }, &models.paths, &models.levels)
            .map_err(internal)?,
    };
    Ok(Json(LevelResponse::new(&level)?))
}

async fn evaluate(Json(req): Json<EvaluateRequest>) -> Result<Json<LevelMetrics>, ApiError> {
    let grid = TileGrid::parse(&req.tiles.join("\n")).map_err(|e| bad_request(e.to_string()))?;
    let metrics = evaluate_level(&grid).map_err(|e| bad_request(e.to_string()))?;
    Ok(Json(metrics))
}

pub fn router(models: Option<Models>) -> Router {
    let state = AppState {
        models: models.map(Arc::new),
    };
    Router::new()
        .route("/api/health", get(health))
        .route("/api/path/sample", get(sample))
        .route("/api/generate", post(generate))
        .route("/api/evaluate", post(evaluate))
        .with_state(state)
}

pub async fn serve(host: &str, port: u16, models: Option<Models>) -> Result<()> {
    let listener = tokio::net::TcpListener::bind((host, port)).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(models)).await?;
    Ok(())
}
