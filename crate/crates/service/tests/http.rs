use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use epidss_core::bayes::NetworkDocument;
use epidss_core::preparedness::template_document;
use epidss_service::{http::router, Service};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tempfile::TempDir;
use tower::ServiceExt;

fn app() -> (TempDir, Router) {
    let dir = TempDir::new().unwrap();
    let svc = Service::open(dir.path()).unwrap();
    (dir, router(Arc::new(svc)))
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    (status, value)
}

async fn create(app: &Router) -> String {
    let (_, template) = call(app, Method::GET, "/v1/template", None).await;
    let (status, body) = call(
        app,
        Method::POST,
        "/v1/scenarios",
        Some(json!({ "name": "api", "network": template, "seed": 5 })),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    assert_eq!(body["revision"], 1);
    body["id"].as_str().unwrap().to_owned()
}

#[tokio::test]
async fn scenario_lifecycle() {
    let (_dir, app) = app();
    let id = create(&app).await;

    let (status, network) = call(&app, Method::GET, &format!("/v1/scenarios/{id}/network"), None).await;
    assert_eq!(status, StatusCode::OK);
    let doc: NetworkDocument = serde_json::from_value(network).unwrap();
    assert_eq!(doc.to_json(), template_document().to_json());

    let ev = json!({
        "evidence": { "hard": { "ImportedCases": "many" } },
        "grade": "B2",
        "source": "border screening",
        "timestamp": "2026-03-01T00:00:00Z"
    });
    let (status, receipt) = call(&app, Method::POST, &format!("/v1/scenarios/{id}/evidence"), Some(ev)).await;
    assert_eq!(status, StatusCode::OK, "{receipt}");
    assert_eq!(receipt["revision"], 2);
    assert_eq!(receipt["summary"]["engine"]["kind"], "exact");
    assert_eq!(receipt["summary"]["engine"]["seed"], 5);

    let cost = json!({ "variable": "OutbreakRisk", "costs": { "low": 0.0, "med": 10.0, "high": 100.0 } });
    let (status, r) = call(
        &app,
        Method::PUT,
        &format!("/v1/scenarios/{id}/cost-models/loss"),
        Some(cost),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{r}");
    assert_eq!(r["revision"], 3);

    let (status, q) = call(
        &app,
        Method::GET,
        &format!("/v1/scenarios/{id}/posterior?variable=OutbreakRisk&cost_model=loss"),
        None,
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{q}");
    assert_eq!(q["states"], json!(["low", "med", "high"]));
    assert!(q["risk"]["risk"].as_f64().unwrap() > 0.0);

    let (status, old) = call(
        &app,
        Method::GET,
        &format!("/v1/scenarios/{id}/posterior?variable=OutbreakRisk&revision=1"),
        None,
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_ne!(old["posterior"], q["posterior"]);

    let whatif = json!({ "delta": { "hard": { "CommunityTransmission": "yes" } }, "query": "OutbreakRisk", "cost_model": "loss" });
    let (status, w) = call(&app, Method::POST, &format!("/v1/scenarios/{id}/what-if"), Some(whatif)).await;
    assert_eq!(status, StatusCode::OK, "{w}");
    assert!(w["hypothetical"]["posterior"][2].as_f64() >= w["baseline"]["posterior"][2].as_f64());
    assert_eq!(w["revision"], 3);

    let (_, scenario) = call(&app, Method::GET, &format!("/v1/scenarios/{id}"), None).await;
    assert_eq!(scenario["revision"], 3);
    assert_eq!(scenario["evidence"][0]["grade"], "B2");

    let (_, list) = call(&app, Method::GET, "/v1/scenarios", None).await;
    assert_eq!(list[0]["id"], id.as_str());
}

#[tokio::test]
async fn error_statuses() {
    let (_dir, app) = app();
    let (status, body) = call(&app, Method::GET, "/v1/scenarios/sc-missing", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert!(body["error"].as_str().unwrap().contains("not found"));

    let cyclic = json!({
        "name": "bad",
        "network": {
            "variables": [{"id": "a", "states": ["t", "f"]}, {"id": "b", "states": ["t", "f"]}],
            "edges": [["a", "b"], ["b", "a"]],
            "cuts": []
        }
    });
    let (status, body) = call(&app, Method::POST, "/v1/scenarios", Some(cyclic)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(body["error"].as_str().unwrap().contains("cycle detected"));
    assert!(!body["report"]["violations"].as_array().unwrap().is_empty());

    let id = create(&app).await;
    let contradiction = json!({
        "evidence": { "hard": { "CommunityTransmission": "yes", "LocalTransmission": "no" } },
        "grade": "A1", "source": "x", "timestamp": "2026-03-01T00:00:00Z"
    });
    let (status, body) = call(
        &app,
        Method::POST,
        &format!("/v1/scenarios/{id}/evidence"),
        Some(contradiction),
    )
    .await;
    assert_eq!(status, StatusCode::CONFLICT, "{body}");
    let (_, scenario) = call(&app, Method::GET, &format!("/v1/scenarios/{id}"), None).await;
    assert_eq!(scenario["revision"], 1);

    let (status, _) = call(
        &app,
        Method::GET,
        &format!("/v1/scenarios/{id}/posterior?variable=Nope"),
        None,
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (status, body) = call(&app, Method::POST, "/v1/consensus", Some(json!({ "experts": "nope" }))).await;
    assert!(status.is_client_error());
    assert!(body["error"].is_string());
}

#[tokio::test]
async fn consensus_endpoint() {
    let (_dir, app) = app();
    let req = json!({ "experts": [
        { "expert": "a", "posterior": [0.8, 0.2], "weight": { "grade": "A1" } },
        { "expert": "b", "posterior": [0.2, 0.8], "weight": { "grade": "A1" } }
    ]});
    let (status, body) = call(&app, Method::POST, "/v1/consensus", Some(req)).await;
    assert_eq!(status, StatusCode::OK);
    let pooled = body["pooled"].as_array().unwrap();
    assert!((pooled[0].as_f64().unwrap() - 0.5).abs() < 1e-15);
    assert!((body["conflict"].as_f64().unwrap() - 0.6).abs() < 1e-12);
    assert_eq!(body["method"], "linear");
}
