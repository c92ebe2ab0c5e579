use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use destrec_core::planner::PlanError;
use destrec_core::recognizer::RecognitionError;
use destrec_core::roadnet::PlaceError;
use serde_json::{json, Value};

/// Error response: a status and a JSON body with at least an `error` field.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: Value,
}

impl ApiError {
    pub fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self { status, body: json!({ "error": message.into() }) }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<PlaceError> for ApiError {
    fn from(e: PlaceError) -> Self {
        let message = e.to_string();
        match e {
            PlaceError::UnknownName { name, suggestions } => Self {
                status: StatusCode::BAD_REQUEST,
                body: json!({ "error": message, "place": name, "suggestions": suggestions }),
            },
            _ => Self::bad_request(message),
        }
    }
}

impl From<RecognitionError> for ApiError {
    fn from(e: RecognitionError) -> Self {
        let message = e.to_string();
        match e {
            RecognitionError::Place(p) => p.into(),
            RecognitionError::Unreachable { candidate, .. } => Self {
                status: StatusCode::UNPROCESSABLE_ENTITY,
                body: json!({ "error": message, "intention": candidate }),
            },
            RecognitionError::Plan(PlanError::NoRoute { .. } | PlanError::NoRouteLeg { .. }) => {
                Self::new(StatusCode::UNPROCESSABLE_ENTITY, message)
            }
            RecognitionError::Plan(PlanError::Transport(_) | PlanError::MalformedResponse(_)) => {
                Self::new(StatusCode::BAD_GATEWAY, message)
            }
            _ => Self::bad_request(message),
        }
    }
}
