//! JSON-over-HTTP front end for a [`SessionState`].

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{RawQuery, State};
use axum::http::{header, Method, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::Serialize;
use tower_http::cors::{Any, CorsLayer};

use crate::session::{
    emotions, parse_json, EmbeddingBody, MixBody, MixRequest, ProjectionDto, RequestError, SampleBody,
    SessionState, SimilarityDto, VarianceDto,
};

type Shared = Arc<SessionState>;

fn json<T: Serialize>(status: StatusCode, value: &T) -> Response {
    match serde_json::to_vec(value) {
        Ok(body) => (status, [(header::CONTENT_TYPE, "application/json")], body).into_response(),
        Err(e) => error(StatusCode::UNPROCESSABLE_ENTITY, &e.to_string()),
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
    status: u16,
}

fn error(status: StatusCode, message: &str) -> Response {
    let body = serde_json::to_vec(&ErrorBody { error: message, status: status.as_u16() })
        .unwrap_or_else(|_| b"{}".to_vec());
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn reply<T: Serialize>(result: Result<T, RequestError>) -> Response {
    match result {
        Ok(v) => json(StatusCode::OK, &v),
        Err(e @ RequestError::Malformed(_)) => error(StatusCode::BAD_REQUEST, &e.to_string()),
        Err(e @ RequestError::Unprocessable(_)) => error(StatusCode::UNPROCESSABLE_ENTITY, &e.to_string()),
    }
}

/// Reads an optional `seed` query parameter for the GET endpoints.
fn query_seed(query: Option<String>) -> Result<Option<u64>, RequestError> {
    let Some(q) = query else { return Ok(None) };
    for pair in q.split('&').filter(|p| !p.is_empty()) {
        let (k, v) = pair.split_once('=').unwrap_or((pair, ""));
        if k == "seed" {
            return v.parse().map(Some).map_err(|_| RequestError::Malformed(format!("seed {v:?} is not an integer")));
        }
    }
    Ok(None)
}

async fn get_emotions(RawQuery(q): RawQuery) -> Response {
    reply(query_seed(q).map(emotions))
}

async fn get_projection(State(s): State<Shared>, RawQuery(q): RawQuery) -> Response {
    reply(query_seed(q).map(|seed| ProjectionDto::new(&s.projection, seed)))
}

async fn get_similarity(State(s): State<Shared>, RawQuery(q): RawQuery) -> Response {
    reply(query_seed(q).map(|seed| SimilarityDto::new(&s.similarity, seed)))
}

async fn get_variance(State(s): State<Shared>, RawQuery(q): RawQuery) -> Response {
    reply(query_seed(q).map(|seed| VarianceDto::new(&s.variance, s.space.basis.components(), seed)))
}

async fn post_sample(State(s): State<Shared>, body: Bytes) -> Response {
    reply(parse_json::<SampleBody>(&body).and_then(MixRequest::try_from).and_then(|r| s.mix(&r)))
}

async fn post_mix(State(s): State<Shared>, body: Bytes) -> Response {
    reply(parse_json::<MixBody>(&body).and_then(MixRequest::try_from).and_then(|r| s.mix(&r)))
}

async fn post_classify(State(s): State<Shared>, body: Bytes) -> Response {
    reply(parse_json::<EmbeddingBody>(&body).and_then(|b| s.classify(b)))
}

async fn post_stats(State(s): State<Shared>, body: Bytes) -> Response {
    reply(parse_json::<EmbeddingBody>(&body).and_then(|b| s.stats(b)))
}

async fn not_found(method: Method, uri: Uri) -> Response {
    error(StatusCode::NOT_FOUND, &format!("no route for {method} {}", uri.path()))
}

async fn wrong_method(method: Method, uri: Uri) -> Response {
    error(StatusCode::METHOD_NOT_ALLOWED, &format!("{method} not allowed on {}", uri.path()))
}

/// All routes with CORS open to any origin (the console runs on localhost).
pub fn router(state: Arc<SessionState>) -> Router {
    let cors = CorsLayer::new()
        .allow_origin(Any)
        .allow_methods([Method::GET, Method::POST, Method::OPTIONS])
        .allow_headers([header::CONTENT_TYPE]);
    Router::new()
        .route("/emotions", get(get_emotions))
        .route("/projection", get(get_projection))
        .route("/similarity", get(get_similarity))
        .route("/variance", get(get_variance))
        .route("/sample", post(post_sample))
        .route("/mix", post(post_mix))
        .route("/classify", post(post_classify))
        .route("/stats", post(post_stats))
        .fallback(not_found)
        .method_not_allowed_fallback(wrong_method)
        .layer(cors)
        .with_state(state)
}

/// Serves until interrupted.
pub async fn serve(state: SessionState, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(state)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
