//! HTTP serving for a loaded index: POST /recommend and GET /health.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use i2i_core::index::{Aggregation, InvertedIndex, LookupRequest};

#[derive(Debug, Clone)]
pub struct ServeState {
    pub index: InvertedIndex,
    pub aggregation: Aggregation,
    pub m: usize,
}

#[derive(Debug, Deserialize)]
pub struct RecommendRequest {
    pub recent_item_ids: Vec<String>,
    pub n: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RecommendResponse {
    pub items: Vec<(String, f64)>,
    pub stats: StatsJson,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StatsJson {
    pub keys_hit: usize,
    pub keys_missed: usize,
    pub candidates_before_dedup: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct HealthResponse {
    pub item_count: usize,
    pub k: u32,
    pub version: u8,
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: String,
}

fn bad_request(message: String) -> Response {
    (StatusCode::BAD_REQUEST, Json(ErrorBody { error: message })).into_response()
}

async fn recommend(State(state): State<Arc<ServeState>>, body: String) -> Response {
    let req: RecommendRequest = match serde_json::from_str(&body) {
        Ok(req) => req,
        Err(e) => return bad_request(format!("invalid request body: {e}")),
    };
    if req.n == 0 {
        return bad_request("n must be >= 1".to_string());
    }
    let resp = state.index.lookup(
        &LookupRequest {
            recent_item_ids: req.recent_item_ids,
            n: req.n,
        },
        state.aggregation,
        state.m,
    );
    Json(RecommendResponse {
        items: resp.items,
        stats: StatsJson {
            keys_hit: resp.stats.keys_hit,
            keys_missed: resp.stats.keys_missed,
            candidates_before_dedup: resp.stats.candidates_before_dedup,
        },
    })
    .into_response()
}

async fn health(State(state): State<Arc<ServeState>>) -> Json<HealthResponse> {
    Json(HealthResponse {
        item_count: state.index.item_count(),
        k: state.index.k,
        version: state.index.version,
    })
}

pub fn router(state: Arc<ServeState>) -> Router {
    Router::new()
        .route("/recommend", post(recommend))
        .route("/health", get(health))
        .with_state(state)
}

/// Binds and serves until the process exits. Prints the bound address so
/// callers using port 0 can discover it.
pub fn run_server(state: ServeState, bind: &str) -> anyhow::Result<()> {
    let addr: SocketAddr = bind.parse()?;
    let state = Arc::new(state);
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        println!("listening on {}", listener.local_addr()?);
        axum::serve(listener, router(state)).await?;
        Ok(())
    })
}
