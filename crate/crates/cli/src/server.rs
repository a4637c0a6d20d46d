//! HTTP JSON game-session API.
//!
//! | route                     | body          | reply             |
//! |---------------------------|---------------|-------------------|
//! | `GET /models`             |               | model names/kinds |
//! | `POST /session`           | `NewSession`  | 201, session view |
//! | `GET /session/{id}`       |               | session view      |
//! | `POST /session/{id}/move` | a `Move`      | session view      |
//!
//! Errors are `{"error": "..."}` with 400 (bad request), 404 (unknown
//! session or model), 409 (game over) or 422 (illegal move).

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use pbisim_core::game::{Move, Role, SessionError, SessionStore, SessionView};
use serde::{Deserialize, Serialize};

use crate::model::Model;
use crate::play::Arena;
use crate::CliError;

/// Longest horizon a client may request.
pub const MAX_HORIZON: usize = 64;

/// Most states unfolded for a pPDA-backed session.
pub const SESSION_BUDGET: usize = 20_000;

pub struct AppState {
    models: BTreeMap<String, Model>,
    store: SessionStore,
}

impl AppState {
    pub fn new(models: BTreeMap<String, Model>) -> Arc<AppState> {
        Arc::new(AppState {
            models,
            store: SessionStore::new(),
        })
    }

    /// Loads each file under its stem.
    pub fn load(paths: &[PathBuf]) -> Result<Arc<AppState>, CliError> {
        let mut models = BTreeMap::new();
        for p in paths {
            let name = p
                .file_stem()
                .and_then(|s| s.to_str())
                .ok_or_else(|| CliError::usage(format!("bad model path {}", p.display())))?
                .to_string();
            if models.insert(name.clone(), Model::load(p)?).is_some() {
                return Err(CliError::usage(format!("two models are named `{name}`")));
            }
        }
        Ok(AppState::new(models))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NewSession {
    pub model: String,
    pub left: String,
    pub right: String,
    pub human: Role,
    pub horizon: usize,
}

#[derive(Serialize)]
struct ModelInfo<'a> {
    name: &'a str,
    kind: &'static str,
}

pub struct ApiError(SessionError);

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self.0 {
            SessionError::NotFound(_) => StatusCode::NOT_FOUND,
            SessionError::BadRequest(_) => StatusCode::BAD_REQUEST,
            SessionError::IllegalMove(_) => StatusCode::UNPROCESSABLE_ENTITY,
            SessionError::GameOver => StatusCode::CONFLICT,
        };
        (status, Json(serde_json::json!({ "error": self.0.to_string() }))).into_response()
    }
}

fn bad(msg: impl ToString) -> ApiError {
    ApiError(SessionError::BadRequest(msg.to_string()))
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(bad)
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| bad(format!("request failed: {e}")))?
}

async fn list_models(State(state): State<Arc<AppState>>) -> Json<serde_json::Value> {
    let list: Vec<ModelInfo> = state
        .models
        .iter()
        .map(|(name, m)| ModelInfo { name, kind: m.kind() })
        .collect();
    Json(serde_json::json!(list))
}

async fn create_session(State(state): State<Arc<AppState>>, body: Bytes) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let req: NewSession = parse_body(&body)?;
    if req.horizon > MAX_HORIZON {
        return Err(bad(format!("horizon {} exceeds the limit of {MAX_HORIZON}", req.horizon)));
    }
    let view = blocking(move || {
        let model = state
            .models
            .get(&req.model)
            .ok_or_else(|| bad(format!("no model named `{}`", req.model)))?;
        let arena = Arena::new(model, &req.left, &req.right, req.horizon, SESSION_BUDGET).map_err(bad)?;
        Ok(state
            .store
            .new_session(arena.plts, arena.left, arena.right, req.human, req.horizon)?)
    })
    .await?;
    Ok((StatusCode::CREATED, Json(view)))
}

async fn get_session(State(state): State<Arc<AppState>>, Path(id): Path<u64>) -> Result<Json<SessionView>, ApiError> {
    Ok(Json(state.store.session_state(id)?))
}

async fn play_move(State(state): State<Arc<AppState>>, Path(id): Path<u64>, body: Bytes) -> Result<Json<SessionView>, ApiError> {
    let mv: Move = parse_body(&body)?;
    let view = blocking(move || Ok(state.store.play_move(id, mv)?)).await?;
    Ok(Json(view))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/models", get(list_models))
        .route("/session", post(create_session))
        .route("/session/{id}", get(get_session))
        .route("/session/{id}/move", post(play_move))
        .with_state(state)
}

pub async fn serve(addr: &str, state: Arc<AppState>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}
