//! HTTP routes. Every error body is `{"error": "..."}`.

use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Request, State};
use axum::http::{header, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};

use redes_core::consensus::{PeerAddr, RegistryError};
use redes_core::ledger::new_transaction;

use crate::service::{ForgeFailure, Node};
use crate::wire::*;

pub struct ApiError(StatusCode, String);

impl ApiError {
    fn bad_request(msg: impl Into<String>) -> Self {
        ApiError(StatusCode::BAD_REQUEST, msg.into())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(ErrorResponse { error: self.1 })).into_response()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(rejection: JsonRejection) -> Self {
        ApiError::bad_request(rejection.body_text())
    }
}

type ApiResult<T> = Result<T, ApiError>;

pub fn router(node: Arc<Node>) -> Router {
    let guarded = Router::new()
        .route("/nodes/register", post(register))
        .route("/nodes/remove", post(remove))
        .route("/nodes/resolve", get(resolve))
        .route("/blocks/new", post(new_block))
        .route_layer(middleware::from_fn_with_state(node.clone(), require_token));
    Router::new()
        .route("/transactions/new", post(new_tx))
        .route("/chain", get(chain))
        .route("/acl", get(acl))
        .merge(guarded)
        .with_state(node)
}

async fn require_token(State(node): State<Arc<Node>>, request: Request, next: Next) -> Response {
    if let Some(token) = node.auth_token() {
        let presented = request
            .headers()
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "));
        if presented != Some(token) {
            return ApiError(StatusCode::UNAUTHORIZED, "missing or wrong bearer token".into()).into_response();
        }
    }
    next.run(request).await
}

fn parse_addresses(body: Result<Json<NodesRequest>, JsonRejection>) -> ApiResult<Vec<PeerAddr>> {
    let Json(body) = body?;
    if body.nodes.is_empty() {
        return Err(ApiError::bad_request("nodes must be a non-empty list"));
    }
    body.nodes
        .iter()
        .map(|raw| PeerAddr::parse(raw).map_err(|e| ApiError::bad_request(e.to_string())))
        .collect()
}

async fn register(
    State(node): State<Arc<Node>>,
    body: Result<Json<NodesRequest>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<RegisterResponse>)> {
    let addrs = parse_addresses(body)?;
    let mut state = node.lock().await;
    // Check everything before touching the registry so a bad list changes nothing.
    if let Some(own) = state.registry.own_address() {
        if addrs.contains(own) {
            return Err(ApiError::bad_request(RegistryError::SelfRegistration(own.clone()).to_string()));
        }
    }
    let mut registered = Vec::with_capacity(addrs.len());
    for addr in addrs {
        registered.push(addr.to_string());
        state.registry.register(addr).map_err(|e| ApiError::bad_request(e.to_string()))?;
    }
    registered.sort();
    registered.dedup();
    Ok((StatusCode::CREATED, Json(RegisterResponse { registered, total: state.registry.len() })))
}

async fn remove(
    State(node): State<Arc<Node>>,
    body: Result<Json<NodesRequest>, JsonRejection>,
) -> ApiResult<Json<RemoveResponse>> {
    let addrs = parse_addresses(body)?;
    let mut state = node.lock().await;
    let (mut removed, mut not_found) = (Vec::new(), Vec::new());
    for addr in addrs {
        match state.registry.remove(&addr) {
            Ok(()) => removed.push(addr.to_string()),
            Err(_) => not_found.push(addr.to_string()),
        }
    }
    Ok(Json(RemoveResponse { removed, not_found, total: state.registry.len() }))
}

async fn new_tx(
    State(node): State<Arc<Node>>,
    body: Result<Json<NewTransactionRequest>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<NewTransactionResponse>)> {
    let Json(body) = body?;
    let field = |value: Option<String>, name: &str| value.ok_or_else(|| ApiError::bad_request(format!("missing field: {name}")));
    let sender = field(body.sender, "sender")?;
    let recipient = field(body.recipient, "recipient")?;
    let mac = field(body.mac, "mac")?;
    let action = field(body.action, "action")?;
    let tx = new_transaction(&sender, &recipient, &mac, &action).map_err(|e| ApiError::bad_request(e.to_string()))?;
    let hint = node.submit(tx).await;
    Ok((
        StatusCode::CREATED,
        Json(NewTransactionResponse { message: format!("transaction will be added to block {hint}"), block_index_hint: hint }),
    ))
}

async fn new_block(State(node): State<Arc<Node>>) -> ApiResult<(StatusCode, Json<NewBlockResponse>)> {
    match node.forge().await {
        Ok((block, attempts)) => Ok((StatusCode::CREATED, Json(NewBlockResponse { block, attempts }))),
        Err(e @ ForgeFailure::Empty(_)) => Err(ApiError(StatusCode::CONFLICT, format!("EmptyPending: {e}"))),
        Err(e @ ForgeFailure::TipMoved) => Err(ApiError(StatusCode::CONFLICT, e.to_string())),
        Err(e @ ForgeFailure::Persist(_)) => {
            tracing::error!(%e, "block accepted in memory but not persisted");
            Err(ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))
        }
    }
}

async fn chain(State(node): State<Arc<Node>>) -> Json<ChainResponse> {
    let state = node.lock().await;
    Json(ChainResponse { chain: state.chain.blocks().to_vec(), length: state.chain.len() })
}

async fn resolve(State(node): State<Arc<Node>>) -> ApiResult<Json<ResolveResponse>> {
    let (report, length) = node.resolve().await.map_err(|e| {
        tracing::error!(%e, "adopted chain not persisted");
        ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
    })?;
    Ok(Json(ResolveResponse { replaced: report.replaced, length, report }))
}

async fn acl(State(node): State<Arc<Node>>) -> Json<AclResponse> {
    let state = node.lock().await;
    Json(AclResponse {
        acl: serde_json::to_value(state.son.acl()).expect("acl serializes"),
        applied: state.son.applied().iter().map(|(mac, action)| (mac.to_string(), *action)).collect(),
    })
}
