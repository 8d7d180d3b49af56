use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::{json, Value};

use dutyroster_core::check::CheckError;
use dutyroster_core::document::DocumentError;
use dutyroster_core::model::Finding;
use dutyroster_core::pipeline::PipelineError;
use dutyroster_store::StoreError;

#[derive(Debug)]
pub enum ApiError {
    Unauthorized,
    Forbidden(String),
    /// Schema, validation or cap violations; `detail` is merged into the body.
    BadRequest { message: String, detail: Value },
    NotFound(String),
    Conflict(String),
    /// Build-time clashes and refused publications.
    Unprocessable { message: String, detail: Value },
    Internal(String),
}

impl ApiError {
    pub fn bad(message: impl Into<String>) -> Self {
        ApiError::BadRequest { message: message.into(), detail: Value::Null }
    }

    pub fn invalid(findings: Vec<Finding>) -> Self {
        let errors: Vec<_> = findings.into_iter().filter(Finding::is_error).collect();
        let message = errors.iter().map(|f| f.message.as_str()).collect::<Vec<_>>().join("; ");
        ApiError::BadRequest { message, detail: json!({ "findings": errors }) }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::Unauthorized => StatusCode::UNAUTHORIZED,
            ApiError::Forbidden(_) => StatusCode::FORBIDDEN,
            ApiError::BadRequest { .. } => StatusCode::BAD_REQUEST,
            ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::Conflict(_) => StatusCode::CONFLICT,
            ApiError::Unprocessable { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = self.status();
        let (message, detail) = match self {
            ApiError::Unauthorized => ("missing or unknown bearer token".to_owned(), Value::Null),
            ApiError::Forbidden(m) | ApiError::NotFound(m) | ApiError::Conflict(m) | ApiError::Internal(m) => {
                (m, Value::Null)
            }
            ApiError::BadRequest { message, detail } | ApiError::Unprocessable { message, detail } => (message, detail),
        };
        let mut body = json!({ "status": status.as_u16(), "error": message });
        if let (Value::Object(b), Value::Object(d)) = (&mut body, detail) {
            b.extend(d);
        }
        (status, Json(body)).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Conflict { .. } | StoreError::JobState { .. } => ApiError::Conflict(e.to_string()),
            StoreError::NotFound(_) => ApiError::NotFound(e.to_string()),
            StoreError::Cap(b) => ApiError::BadRequest { message: b.message(), detail: json!({ "cap": b }) },
            StoreError::PublishRejected { ref findings, .. } => {
                let detail = json!({ "findings": findings });
                ApiError::Unprocessable { message: e.to_string(), detail }
            }
            StoreError::Document(d) => d.into(),
            StoreError::Status(_) => ApiError::bad(e.to_string()),
            StoreError::Schema { .. } | StoreError::Json(_) | StoreError::Sqlite(_) => ApiError::Internal(e.to_string()),
        }
    }
}

impl From<DocumentError> for ApiError {
    fn from(e: DocumentError) -> Self {
        ApiError::bad(e.to_string())
    }
}

impl From<CheckError> for ApiError {
    fn from(e: CheckError) -> Self {
        ApiError::bad(e.to_string())
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Invalid(findings) => ApiError::invalid(findings),
            PipelineError::Build(b) => {
                ApiError::Unprocessable { message: b.to_string(), detail: json!({ "stage": "build", "clash": b.to_string() }) }
            }
            PipelineError::Derive(d) => ApiError::bad(d.to_string()),
            other => ApiError::Internal(other.to_string()),
        }
    }
}
