use axum::extract::multipart::MultipartError;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use lessonkit_core::Error as CoreError;
use serde_json::json;

/// An error rendered as `{"error": <code>, "message": <text>}`.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
        }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl From<CoreError> for ApiError {
    fn from(e: CoreError) -> Self {
        let (status, code) = match &e {
            CoreError::Format(_) => (StatusCode::BAD_REQUEST, "format"),
            CoreError::UnsupportedFormat(_) => (StatusCode::BAD_REQUEST, "unsupported_format"),
            CoreError::EmptyInput => (StatusCode::BAD_REQUEST, "empty_input"),
            CoreError::InvalidArgument(_) => (StatusCode::BAD_REQUEST, "invalid_argument"),
            CoreError::StemMismatch { .. } => (StatusCode::BAD_REQUEST, "stem_mismatch"),
            CoreError::DegenerateProfile => (StatusCode::BAD_REQUEST, "degenerate_profile"),
            CoreError::WrongTrack(_) => (StatusCode::BAD_REQUEST, "wrong_track"),
            CoreError::EmptyQuery => (StatusCode::BAD_REQUEST, "empty_query"),
            CoreError::EmptyTarget => (StatusCode::CONFLICT, "empty_target"),
            CoreError::RevisionConflict { .. } => (StatusCode::CONFLICT, "revision_conflict"),
            CoreError::NotFound(_) => (StatusCode::NOT_FOUND, "not_found"),
            CoreError::SeparatorConfig(_)
            | CoreError::SeparatorFailed { .. }
            | CoreError::SeparatorOutputMissing(_) => (StatusCode::BAD_GATEWAY, "separator"),
            CoreError::CorruptSession(_) | CoreError::Io(_) | CoreError::Json(_) => {
                (StatusCode::INTERNAL_SERVER_ERROR, "internal")
            }
        };
        if status.is_server_error() {
            log::error!("{e}");
        }
        Self::new(status, code, e.to_string())
    }
}

impl From<MultipartError> for ApiError {
    fn from(e: MultipartError) -> Self {
        let status = e.status();
        let code = if status == StatusCode::PAYLOAD_TOO_LARGE { "too_large" } else { "bad_request" };
        Self::new(status, code, e.body_text())
    }
}

impl From<tokio::task::JoinError> for ApiError {
    fn from(e: tokio::task::JoinError) -> Self {
        log::error!("worker task failed: {e}");
        Self::internal("worker task failed")
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.code, "message": self.message }))).into_response()
    }
}
