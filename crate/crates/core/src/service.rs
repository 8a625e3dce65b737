//! HTTP API over stored mining runs.

use std::collections::{BTreeMap, BTreeSet};
use std::net::SocketAddr;
use std::sync::{Arc, RwLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::cors::CorsLayer;

use crate::alignment::InstanceMultiset;
use crate::quality::{rank_order, Evaluation, QualityVector, RankingWeights};
use crate::run::{RunRecord, RunStore};

pub const DEFAULT_PORT: u16 = 8173;

pub type SharedStore = Arc<RwLock<RunStore>>;

#[derive(Debug)]
pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

type ApiResult<T> = std::result::Result<Json<T>, ApiError>;

fn not_found(what: impl Into<String>) -> ApiError {
    ApiError(StatusCode::NOT_FOUND, what.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub id: String,
    pub log_digest: String,
    pub traces: usize,
    pub events: usize,
    pub patterns: usize,
    pub projected: bool,
}

/// A pattern as served, with its position in the stored ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedLpm {
    pub index: usize,
    pub tree: String,
    pub activities: BTreeSet<String>,
    pub quality: QualityVector,
    pub instances: InstanceMultiset,
}

impl RankedLpm {
    fn new(index: usize, e: &Evaluation) -> Self {
        RankedLpm {
            index,
            tree: e.tree.to_string(),
            activities: e.tree.activities(),
            quality: e.quality.clone(),
            instances: e.instances.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunView {
    pub id: String,
    pub ranking: Vec<RankedLpm>,
}

#[derive(Debug, Default, Deserialize)]
pub struct RunFilter {
    pub min_activities: Option<usize>,
    pub contains: Option<String>,
    pub min_support: Option<usize>,
}

/// The five measure weights; all are required.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureWeights {
    pub support: f64,
    pub confidence: f64,
    pub language_fit: f64,
    pub determinism: f64,
    pub coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RerankRequest {
    pub weights: MeasureWeights,
    #[serde(default)]
    pub c: Option<f64>,
}

#[derive(Debug, Deserialize)]
pub struct OverlayQuery {
    pub attribute: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Overlay {
    pub attribute: String,
    /// Value counts per pattern activity, over events of the pattern's instances.
    pub activities: BTreeMap<String, BTreeMap<String, usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupStrategy {
    #[default]
    Alphabet,
    Ranking,
}

#[derive(Debug, Deserialize)]
pub struct GroupQuery {
    #[serde(default)]
    pub strategy: GroupStrategy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Group {
    pub head: usize,
    pub alphabet: BTreeSet<String>,
    /// Stored ranking indices, head first.
    pub members: Vec<usize>,
}

fn with_run<T>(store: &SharedStore, id: &str, f: impl FnOnce(&RunRecord) -> std::result::Result<T, ApiError>) -> ApiResult<T> {
    let guard = store.read().expect("store lock");
    let run = guard.get(id).ok_or_else(|| not_found(format!("unknown run {id}")))?;
    f(run).map(Json)
}

async fn list_runs(State(store): State<SharedStore>) -> Json<Vec<RunSummary>> {
    let guard = store.read().expect("store lock");
    Json(
        guard
            .runs()
            .map(|r| RunSummary {
                id: r.id.clone(),
                log_digest: r.log_digest.clone(),
                traces: r.traces,
                events: r.events,
                patterns: r.ranking.len(),
                projected: r.projection.is_some(),
            })
            .collect(),
    )
}

async fn get_run(State(store): State<SharedStore>, Path(id): Path<String>, Query(f): Query<RunFilter>) -> ApiResult<RunView> {
    with_run(&store, &id, |run| {
        let ranking = run
            .ranking
            .iter()
            .enumerate()
            .filter(|(_, e)| {
                let acts = e.tree.activities();
                f.min_activities.is_none_or(|m| acts.len() >= m)
                    && f.contains.as_ref().is_none_or(|a| acts.contains(a))
                    && f.min_support.is_none_or(|s| e.quality.support >= s)
            })
            .map(|(i, e)| RankedLpm::new(i, e))
            .collect();
        Ok(RunView { id: run.id.clone(), ranking })
    })
}

/// Recomputes aggregates from the stored raw measures under new weights.
pub fn rerank(run: &RunRecord, req: &RerankRequest) -> crate::Result<Vec<RankedLpm>> {
    let stored = &run.config.miner.weights;
    let w = RankingWeights {
        support: req.weights.support,
        confidence: req.weights.confidence,
        language_fit: req.weights.language_fit,
        determinism: req.weights.determinism,
        coverage: req.weights.coverage,
        c: req.c.or(stored.c),
        ..stored.clone()
    };
    w.validate()?;
    let mut evals: Vec<(usize, Evaluation)> = run
        .ranking
        .iter()
        .enumerate()
        .map(|(i, e)| (i, Evaluation { quality: e.quality.reweight(&w), ..e.clone() }))
        .collect();
    evals.sort_by(|a, b| rank_order(&a.1, &b.1).then(a.0.cmp(&b.0)));
    Ok(evals.iter().map(|(i, e)| RankedLpm::new(*i, e)).collect())
}

async fn post_rerank(
    State(store): State<SharedStore>,
    Path(id): Path<String>,
    body: std::result::Result<Json<RerankRequest>, JsonRejection>,
) -> ApiResult<RunView> {
    with_run(&store, &id, |run| {
        let Json(req) = body.map_err(|e| ApiError(e.status(), e.body_text()))?;
        let ranking = rerank(run, &req).map_err(|e| ApiError(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))?;
        Ok(RunView { id: run.id.clone(), ranking })
    })
}

/// Attribute value counts per activity over the events of pattern `k`'s instances.
pub fn overlay(run: &RunRecord, k: usize, attribute: &str) -> Option<Overlay> {
    let e = run.ranking.get(k)?;
    let known = run.attributes.iter().flatten().any(|ev| ev.attributes.contains_key(attribute));
    if !known {
        return None;
    }
    let mut activities: BTreeMap<String, BTreeMap<String, usize>> =
        e.tree.activities().into_iter().map(|a| (a, BTreeMap::new())).collect();
    for inst in &e.instances.instances {
        for &p in &inst.landmark {
            let ev = &run.attributes[inst.trace][p - 1];
            if let (Some(v), Some(h)) = (ev.attributes.get(attribute), activities.get_mut(&ev.activity)) {
                *h.entry(v.clone()).or_insert(0) += 1;
            }
        }
    }
    Some(Overlay { attribute: attribute.to_string(), activities })
}

async fn get_overlay(
    State(store): State<SharedStore>,
    Path((id, k)): Path<(String, usize)>,
    Query(q): Query<OverlayQuery>,
) -> ApiResult<Overlay> {
    with_run(&store, &id, |run| {
        if k >= run.ranking.len() {
            return Err(not_found(format!("run {id} has no pattern {k}")));
        }
        overlay(run, k, &q.attribute).ok_or_else(|| not_found(format!("unknown attribute {}", q.attribute)))
    })
}

/// Groups the stored ranking. Alphabet grouping joins equal alphabets; ranking
/// grouping puts a pattern in the group of the first higher-ranked head whose
/// alphabet contains its own.
pub fn groups(run: &RunRecord, strategy: GroupStrategy) -> Vec<Group> {
    let mut out: Vec<Group> = Vec::new();
    for (i, e) in run.ranking.iter().enumerate() {
        let a = e.tree.activities();
        let slot = out.iter_mut().find(|g| match strategy {
            GroupStrategy::Alphabet => g.alphabet == a,
            GroupStrategy::Ranking => a.is_subset(&g.alphabet),
        });
        match slot {
            Some(g) => g.members.push(i),
            None => out.push(Group { head: i, alphabet: a, members: vec![i] }),
        }
    }
    out
}

async fn get_groups(State(store): State<SharedStore>, Path(id): Path<String>, Query(q): Query<GroupQuery>) -> ApiResult<Vec<Group>> {
    with_run(&store, &id, |run| Ok(groups(run, q.strategy)))
}

async fn get_spec() -> Json<Value> {
    Json(openapi())
}

/// OpenAPI description of the service.
pub fn openapi() -> Value {
    let id = json!({ "name": "id", "in": "path", "required": true, "schema": { "type": "string" } });
    json!({
        "openapi": "3.0.3",
        "info": { "title": "lpmforge", "version": env!("CARGO_PKG_VERSION") },
        "paths": {
            "/runs": { "get": { "summary": "List runs", "responses": { "200": { "description": "Run summaries" } } } },
            "/runs/{id}": { "get": {
                "summary": "Ranking of a run",
                "parameters": [id,
                    { "name": "min_activities", "in": "query", "schema": { "type": "integer" } },
                    { "name": "contains", "in": "query", "schema": { "type": "string" } },
                    { "name": "min_support", "in": "query", "schema": { "type": "integer" } }],
                "responses": { "200": { "description": "Filtered ranking" }, "404": { "description": "Unknown run" } } } },
            "/runs/{id}/rerank": { "post": {
                "summary": "Reorder a ranking under new weights",
                "parameters": [id],
                "requestBody": { "required": true, "content": { "application/json": { "schema": {
                    "type": "object", "required": ["weights"],
                    "properties": {
                        "weights": { "type": "object",
                            "required": ["support", "confidence", "language_fit", "determinism", "coverage"],
                            "additionalProperties": { "type": "number", "minimum": 0 } },
                        "c": { "type": "number", "exclusiveMinimum": 0 } } } } } },
                "responses": { "200": { "description": "Reordered ranking" }, "404": { "description": "Unknown run" },
                    "422": { "description": "Invalid weights" } } } },
            "/runs/{id}/lpms/{k}/overlay": { "get": {
                "summary": "Attribute histogram per pattern activity",
                "parameters": [id,
                    { "name": "k", "in": "path", "required": true, "schema": { "type": "integer" } },
                    { "name": "attribute", "in": "query", "required": true, "schema": { "type": "string" } }],
                "responses": { "200": { "description": "Histograms" }, "404": { "description": "Unknown run, pattern or attribute" } } } },
            "/runs/{id}/groups": { "get": {
                "summary": "Grouped ranking",
                "parameters": [id, { "name": "strategy", "in": "query", "schema": { "type": "string", "enum": ["alphabet", "ranking"] } }],
                "responses": { "200": { "description": "Groups" }, "404": { "description": "Unknown run" } } } },
            "/spec": { "get": { "summary": "This document", "responses": { "200": { "description": "OpenAPI document" } } } }
        }
    })
}

pub fn router(store: SharedStore) -> Router {
    Router::new()
        .route("/runs", get(list_runs))
        .route("/runs/{id}", get(get_run))
        .route("/runs/{id}/rerank", post(post_rerank))
        .route("/runs/{id}/lpms/{k}/overlay", get(get_overlay))
        .route("/runs/{id}/groups", get(get_groups))
        .route("/spec", get(get_spec))
        .layer(CorsLayer::permissive())
        .with_state(store)
}

pub async fn serve(store: RunStore, port: u16) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(SocketAddr::from(([0, 0, 0, 0], port))).await?;
    axum::serve(listener, router(Arc::new(RwLock::new(store)))).await
}
