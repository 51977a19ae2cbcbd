mod common;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use daisy::service::router;

async fn call(method: Method, uri: &str, body: Option<&str>) -> (StatusCode, Vec<u8>) {
    let mut req = Request::builder().method(method).uri(uri);
    if body.is_some() {
        req = req.header(header::CONTENT_TYPE, "application/json");
    }
    let req = req.body(body.map_or_else(Body::empty, |b| Body::from(b.to_owned()))).unwrap();
    let resp = router(common::fixture().state.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

async fn get(uri: &str) -> (StatusCode, Value) {
    let (s, b) = call(Method::GET, uri, None).await;
    (s, serde_json::from_slice(&b).unwrap())
}

async fn post(uri: &str, body: &str) -> (StatusCode, Value) {
    let (s, b) = call(Method::POST, uri, Some(body)).await;
    (s, serde_json::from_slice(&b).unwrap())
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[tokio::test]
async fn emotions_lists_primaries_and_pairs() {
    let (s, v) = get("/emotions?seed=5").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["seed"], 5);
    assert_eq!(v["primaries"], json!(["joy", "sadness", "anger", "surprise"]));
    let secondaries = v["secondaries"].as_array().unwrap();
    assert_eq!(secondaries.len(), 6);
    assert!(secondaries.contains(&json!({"name": "envy", "pair": ["anger", "sadness"]})));
    assert_eq!(get("/emotions").await.1["seed"], Value::Null);
    assert_eq!(get("/emotions?seed=x").await.0, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn static_views_have_expected_shapes() {
    let f = common::fixture();
    let (s, p) = get("/projection?seed=1").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(p["points"].as_array().unwrap().len(), f.corpus.len());
    assert_eq!(p["class_means"].as_array().unwrap().len(), 4);
    assert_eq!(p["seed"], 1);

    let (_, sim) = get("/similarity").await;
    let m: Vec<Vec<f64>> = sim["matrix"].as_array().unwrap().iter().map(floats).collect();
    for i in 0..4 {
        assert!((m[i][i] - 1.0).abs() < 1e-9);
        for j in 0..4 {
            assert_eq!(m[i][j], m[j][i]);
        }
    }

    let (_, var) = get("/variance").await;
    let ratios = floats(&var["ratios"]);
    assert_eq!(ratios.len(), f.encoder.embed_dim());
    assert!((ratios.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    assert_eq!(var["retained"], f.space.basis.components());
}

#[tokio::test]
async fn sample_is_deterministic_in_the_seed() {
    let body = r#"{"emotion": "anger", "alpha": 1.75, "negate": false, "seed": 42}"#;
    let (s1, a) = call(Method::POST, "/sample", Some(body)).await;
    let (s2, b) = call(Method::POST, "/sample", Some(body)).await;
    assert_eq!((s1, s2), (StatusCode::OK, StatusCode::OK));
    assert_eq!(a, b);
    let v: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["seed"], 42);
    assert_eq!(v["alpha"], 1.75);
    assert_eq!(floats(&v["w"]).len(), common::fixture().space.basis.components());
    assert_eq!(floats(&v["embedding"]).len(), common::fixture().encoder.embed_dim());
    let (_, c) = call(Method::POST, "/sample", Some(r#"{"emotion": "anger", "alpha": 1.75, "seed": 43}"#)).await;
    assert_ne!(a, c);
}

#[tokio::test]
async fn negated_sample_is_labelled_polar() {
    let (_, v) = post("/sample", r#"{"emotion": "joy", "negate": true, "seed": 1}"#).await;
    assert_eq!(v["label"], "polar joy");
    let (_, plain) = post("/sample", r#"{"emotion": "joy", "seed": 1}"#).await;
    let (a, b) = (floats(&v["w"]), floats(&plain["w"]));
    assert!(a.iter().zip(&b).all(|(x, y)| *x == -y));
}

#[tokio::test]
async fn mix_names_and_flags() {
    let (s, v) = post("/mix", r#"{"mode": "secondary", "pair": ["joy", "sadness"], "beta": 0.5, "seed": 3}"#).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["name"], "bittersweetness");
    assert_eq!(v["extension"], false);
    assert_eq!(v["seed"], 3);

    let (_, w) = post("/mix", r#"{"pair": ["joy", "sadness"], "beta": 0.3, "seed": 3}"#).await;
    assert_eq!(w["extension"], true);

    let (_, own) = post("/mix", r#"{"pair": ["anger", "anger"], "seed": 3}"#).await;
    assert_eq!(own["self_mixture"], true);
    assert_eq!(own["name"], Value::Null);

    let (_, p) = post("/mix", r#"{"emotion": "surprise", "alpha": 0.25, "seed": 9}"#).await;
    assert_eq!(p["mode"], "primary");
}

#[tokio::test]
async fn transfer_uses_the_given_embedding() {
    let f = common::fixture();
    let u = f.encoder.encode(&f.corpus[2]).unwrap().into_vec();
    let body = json!({"mode": "transfer", "embedding": u, "tau": 0.0, "seed": 1}).to_string();
    let (s, v) = post("/mix", &body).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(floats(&v["w"]), f.space.basis.project_slice(&u).unwrap().into_vec());
    assert_eq!(v["tau"], 0.0);
}

#[tokio::test]
async fn classify_and_stats_accept_mixed_embeddings() {
    let (_, m) = post("/mix", r#"{"pair": ["anger", "surprise"], "seed": 11}"#).await;
    let body = json!({"embedding": m["embedding"], "seed": 11}).to_string();
    let (s, c) = post("/classify", &body).await;
    assert_eq!(s, StatusCode::OK);
    assert!(["joy", "sadness", "anger", "surprise"].contains(&c["emotion"].as_str().unwrap()));
    assert!((floats(&c["probabilities"]).iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert_eq!(c["seed"], 11);

    let (s, st) = post("/stats", &body).await;
    assert_eq!(s, StatusCode::OK);
    let vf = st["stats"]["voiced_fraction"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&vf));
    for k in ["pitch_mean", "pitch_std", "pitch_slope", "energy_mean", "energy_std"] {
        assert!(st["stats"][k].is_number(), "{k}");
    }
}

#[tokio::test]
async fn error_codes() {
    let cases = [
        ("/sample", "{not json", StatusCode::BAD_REQUEST),
        ("/sample", r#"{"emotion": "joy"}"#, StatusCode::BAD_REQUEST),
        ("/sample", r#"{"emotion": "joy", "seed": "one"}"#, StatusCode::BAD_REQUEST),
        ("/sample", r#"{"emotion": "melancholy", "seed": 1}"#, StatusCode::UNPROCESSABLE_ENTITY),
        ("/sample", r#"{"emotion": "joy", "alpha": -1, "seed": 1}"#, StatusCode::UNPROCESSABLE_ENTITY),
        ("/mix", r#"{"pair": ["joy", "grief"], "seed": 1}"#, StatusCode::UNPROCESSABLE_ENTITY),
        ("/mix", r#"{"pair": ["joy"], "seed": 1}"#, StatusCode::BAD_REQUEST),
        ("/mix", r#"{"emotion": "joy", "pair": ["joy", "anger"], "seed": 1}"#, StatusCode::BAD_REQUEST),
        ("/mix", r#"{"mode": "sideways", "seed": 1}"#, StatusCode::UNPROCESSABLE_ENTITY),
        ("/mix", r#"{"pair": ["joy", "anger"], "beta": 2, "seed": 1}"#, StatusCode::UNPROCESSABLE_ENTITY),
        ("/classify", r#"{"embedding": [1, 2, 3]}"#, StatusCode::UNPROCESSABLE_ENTITY),
        ("/stats", r#"{"embedding": "x"}"#, StatusCode::BAD_REQUEST),
    ];
    for (uri, body, want) in cases {
        let (s, v) = post(uri, body).await;
        assert_eq!(s, want, "{uri} {body}: {v}");
        assert!(v["error"].is_string());
    }
    let (s, v) = get("/nowhere").await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert!(v["error"].is_string());
    let (s, _) = call(Method::GET, "/mix", None).await;
    assert_eq!(s, StatusCode::METHOD_NOT_ALLOWED);
}

#[tokio::test]
async fn cors_preflight_is_answered() {
    let req = Request::builder()
        .method(Method::OPTIONS)
        .uri("/mix")
        .header(header::ORIGIN, "http://localhost:5173")
        .header(header::ACCESS_CONTROL_REQUEST_METHOD, "POST")
        .header(header::ACCESS_CONTROL_REQUEST_HEADERS, "content-type")
        .body(Body::empty())
        .unwrap();
    let resp = router(common::fixture().state.clone()).oneshot(req).await.unwrap();
    assert!(resp.status().is_success());
    assert_eq!(resp.headers()[header::ACCESS_CONTROL_ALLOW_ORIGIN], "*");
}
