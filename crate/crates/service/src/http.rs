//! HTTP API under `/v1`.
//!
//! | method | path | body | response |
//! |---|---|---|---|
//! | GET | `/v1/template` | | outbreak template network document |
//! | GET | `/v1/scenarios` | | scenario listings |
//! | POST | `/v1/scenarios` | `CreateScenario` | `Scenario` (201) |
//! | GET | `/v1/scenarios/{id}` | | `Scenario` |
//! | GET | `/v1/scenarios/{id}/network` | | network document |
//! | POST | `/v1/scenarios/{id}/evidence` | `GradedEvidence` | `EvidenceReceipt` |
//! | GET | `/v1/scenarios/{id}/posterior?variable=..&revision=..&cost_model=..` | | `PosteriorResponse` |
//! | PUT | `/v1/scenarios/{id}/cost-models/{name}` | `CostModel` | `CostModelReceipt` |
//! | POST | `/v1/scenarios/{id}/what-if` | `WhatIfRequest` | `WhatIfResponse` |
//! | POST | `/v1/consensus` | `ConsensusRequest` | `ConsensusResponse` |
//!
//! Errors are `{"error": message}` plus `"report"` for invalid networks.

use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{FromRequest, Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::Router;
use epidss_core::admiralty::GradedEvidence;
use epidss_core::preparedness::template_document;
use epidss_core::risk::CostModel;
use serde::Serialize;
use serde_json::json;

use crate::error::ServiceError;
use crate::service::{consensus, ConsensusRequest, CreateScenario, PosteriorQuery, Service, WhatIfRequest};

/// JSON extractor whose rejections use the API error shape.
#[derive(FromRequest)]
#[from_request(via(axum::Json), rejection(ApiError))]
struct Json<T>(T);

impl<T: Serialize> IntoResponse for Json<T> {
    fn into_response(self) -> Response {
        axum::Json(self.0).into_response()
    }
}

pub struct ApiError(StatusCode, serde_json::Value);

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        Self(r.status(), json!({ "error": r.body_text() }))
    }
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        let status = match &e {
            ServiceError::NotFound(_) | ServiceError::UnknownRevision { .. } => StatusCode::NOT_FOUND,
            ServiceError::InvalidNetwork(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::Contradictory(_) => StatusCode::CONFLICT,
            ServiceError::Corrupt { .. } | ServiceError::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        };
        let mut body = json!({ "error": e.to_string() });
        if let ServiceError::InvalidNetwork(report) = &e {
            body["report"] = json!(report);
        }
        Self(status, body)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, axum::Json(self.1)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;
type Shared = Arc<Service>;

/// Runs blocking store and inference work off the async executor.
async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ServiceError> + Send + 'static,
) -> Result<Json<T>, ApiError> {
    match tokio::task::spawn_blocking(f).await {
        Ok(r) => r.map(Json).map_err(ApiError::from),
        Err(e) => Err(ApiError(
            StatusCode::INTERNAL_SERVER_ERROR,
            json!({ "error": e.to_string() }),
        )),
    }
}

pub fn router(service: Shared) -> Router {
    Router::new()
        .route("/v1/template", get(template))
        .route("/v1/scenarios", get(list).post(create))
        .route("/v1/scenarios/{id}", get(show))
        .route("/v1/scenarios/{id}/network", get(network))
        .route("/v1/scenarios/{id}/evidence", post(add_evidence))
        .route("/v1/scenarios/{id}/posterior", get(posterior))
        .route("/v1/scenarios/{id}/cost-models/{name}", put(cost_model))
        .route("/v1/scenarios/{id}/what-if", post(what_if))
        .route("/v1/consensus", post(pool))
        .with_state(service)
}

async fn template() -> Json<epidss_core::bayes::NetworkDocument> {
    Json(template_document())
}

async fn list(State(svc): State<Shared>) -> ApiResult<Vec<crate::service::ScenarioListing>> {
    blocking(move || svc.list()).await
}

async fn create(State(svc): State<Shared>, Json(req): Json<CreateScenario>) -> Result<impl IntoResponse, ApiError> {
    let scenario = blocking(move || svc.create_scenario(req)).await?;
    Ok((StatusCode::CREATED, scenario))
}

async fn show(State(svc): State<Shared>, Path(id): Path<String>) -> ApiResult<crate::scenario::Scenario> {
    blocking(move || svc.scenario(&id)).await
}

async fn network(State(svc): State<Shared>, Path(id): Path<String>) -> ApiResult<epidss_core::bayes::NetworkDocument> {
    blocking(move || Ok(svc.scenario(&id)?.network)).await
}

async fn add_evidence(
    State(svc): State<Shared>,
    Path(id): Path<String>,
    Json(graded): Json<GradedEvidence>,
) -> ApiResult<crate::service::EvidenceReceipt> {
    blocking(move || svc.submit_evidence(&id, graded)).await
}

async fn posterior(
    State(svc): State<Shared>,
    Path(id): Path<String>,
    Query(q): Query<PosteriorQuery>,
) -> ApiResult<crate::service::PosteriorResponse> {
    blocking(move || svc.posterior(&id, &q)).await
}

async fn cost_model(
    State(svc): State<Shared>,
    Path((id, name)): Path<(String, String)>,
    Json(model): Json<CostModel>,
) -> ApiResult<crate::service::CostModelReceipt> {
    blocking(move || svc.set_cost_model(&id, &name, model)).await
}

async fn what_if(
    State(svc): State<Shared>,
    Path(id): Path<String>,
    Json(req): Json<WhatIfRequest>,
) -> ApiResult<crate::service::WhatIfResponse> {
    blocking(move || svc.what_if(&id, &req)).await
}

async fn pool(Json(req): Json<ConsensusRequest>) -> ApiResult<crate::service::ConsensusResponse> {
    blocking(move || consensus(&req)).await
}
