//! JSON HTTP API over a [`Store`].

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::services::ServeDir;

use super::{CommitError, Snapshot, Store};
use crate::analytics::analyze;
use crate::edits::Correction;
use crate::model::{DocumentGraph, Edit, EditIntent};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrectionRequest {
    pub expected_revision: u64,
    pub ops: Vec<Correction>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabelOp {
    pub edit_id: String,
    pub intent: Option<EditIntent>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabelRequest {
    pub expected_revision: u64,
    pub labels: Vec<LabelOp>,
}

#[derive(Serialize)]
struct PairSummary<'a> {
    pair_id: &'a str,
    revision: u64,
    edits: usize,
    old_sentences: usize,
    new_sentences: usize,
}

#[derive(Serialize)]
struct PairPayload<'a> {
    pair_id: &'a str,
    revision: u64,
    old: &'a DocumentGraph,
    new: &'a DocumentGraph,
    reviews: &'a [DocumentGraph],
    response: Option<&'a DocumentGraph>,
    edits: &'a [Edit],
}

fn error(status: StatusCode, body: serde_json::Value) -> Response {
    (status, Json(body)).into_response()
}

fn not_found(id: &str) -> Response {
    error(StatusCode::NOT_FOUND, json!({ "error": format!("unknown pair {id}") }))
}

impl IntoResponse for CommitError {
    fn into_response(self) -> Response {
        let msg = self.to_string();
        match self {
            CommitError::UnknownPair(_) => error(StatusCode::NOT_FOUND, json!({ "error": msg })),
            CommitError::Stale { current, .. } => {
                error(StatusCode::CONFLICT, json!({ "error": msg, "current": &*current }))
            }
            CommitError::Invalid { position, .. } => {
                error(StatusCode::UNPROCESSABLE_ENTITY, json!({ "error": msg, "position": position }))
            }
            CommitError::Io(_) => error(StatusCode::INTERNAL_SERVER_ERROR, json!({ "error": msg })),
        }
    }
}

async fn list_pairs(State(store): State<Arc<Store>>) -> Json<serde_json::Value> {
    let rows: Vec<serde_json::Value> = store
        .pair_ids()
        .map(|id| {
            let slot = store.pair(id).expect("listed pair");
            let snap = slot.snapshot();
            json!(PairSummary {
                pair_id: id,
                revision: snap.revision,
                edits: snap.edits.len(),
                old_sentences: slot.data.old.sentence_count(),
                new_sentences: slot.data.new.sentence_count(),
            })
        })
        .collect();
    Json(json!(rows))
}

async fn get_pair(State(store): State<Arc<Store>>, Path(id): Path<String>) -> Response {
    let Some(slot) = store.pair(&id) else { return not_found(&id) };
    let snap = slot.snapshot();
    let d = &slot.data;
    Json(PairPayload {
        pair_id: &id,
        revision: snap.revision,
        old: &d.old,
        new: &d.new,
        reviews: &d.reviews,
        response: d.response.as_ref(),
        edits: &snap.edits,
    })
    .into_response()
}

async fn write(
    store: Arc<Store>,
    f: impl FnOnce(&Store) -> Result<Arc<Snapshot>, CommitError> + Send + 'static,
) -> Response {
    // commits fsync, keep them off the async workers
    match tokio::task::spawn_blocking(move || f(&store)).await {
        Ok(Ok(snap)) => Json(&*snap).into_response(),
        Ok(Err(e)) => e.into_response(),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, json!({ "error": e.to_string() })),
    }
}

async fn post_corrections(
    State(store): State<Arc<Store>>,
    Path(id): Path<String>,
    Json(req): Json<CorrectionRequest>,
) -> Response {
    write(store, move |s| s.commit(&id, req.expected_revision, req.ops)).await
}

async fn post_labels(
    State(store): State<Arc<Store>>,
    Path(id): Path<String>,
    Json(req): Json<LabelRequest>,
) -> Response {
    write(store, move |s| {
        s.commit_with(&id, req.expected_revision, |snap| {
            req.labels
                .iter()
                .enumerate()
                .map(|(k, l)| {
                    let edit = snap.edits.iter().find(|e| e.id == l.edit_id).ok_or_else(|| CommitError::Invalid {
                        position: Some(k),
                        reason: format!("unknown edit {}", l.edit_id),
                    })?;
                    let node = edit.nodes().next().expect("edits are non-empty").clone();
                    Ok(Correction::SetIntent { node, intent: l.intent })
                })
                .collect()
        })
    })
    .await
}

async fn get_analytics(State(store): State<Arc<Store>>, Path(id): Path<String>) -> Response {
    let Some(slot) = store.pair(&id) else { return not_found(&id) };
    let snap = slot.snapshot();
    let d = &slot.data;
    match analyze(&d.old, &d.new, &snap.edits, &d.requests, &d.links, store.bins) {
        Ok(r) => Json(json!({ "revision": snap.revision, "report": r })).into_response(),
        Err(e) => error(StatusCode::UNPROCESSABLE_ENTITY, json!({ "error": e.to_string() })),
    }
}

/// The API routes, plus static files from `static_dir` for every other path.
pub fn router(store: Arc<Store>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/pairs", get(list_pairs))
        .route("/pairs/{id}", get(get_pair))
        .route("/pairs/{id}/corrections", post(post_corrections))
        .route("/pairs/{id}/labels", post(post_labels))
        .route("/pairs/{id}/analytics", get(get_analytics))
        .with_state(store);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Serve until ctrl-c.
pub async fn serve(store: Arc<Store>, addr: SocketAddr, static_dir: Option<PathBuf>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "serving");
    axum::serve(listener, router(store, static_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
