use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use tagscope_core::analytics::AnalyticsError;
use tagscope_core::evaluation::EvaluationError;
use tagscope_core::import::ImportError;
use tagscope_core::model::ModelError;
use tagscope_core::similarity::SimilarityError;

use crate::boards::BoardError;
use crate::store::StoreError;

/// Error body: `{"code": "...", "message": "..."}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
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

    pub fn not_found(code: &'static str, what: impl std::fmt::Display) -> Self {
        Self::new(
            StatusCode::NOT_FOUND,
            code,
            format!("{}: {what}", code.replace('_', " ")),
        )
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "invalid_argument", message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "storage", e.to_string())
    }
}

impl From<AnalyticsError> for ApiError {
    fn from(e: AnalyticsError) -> Self {
        match e {
            AnalyticsError::UnknownText(t) => Self::not_found("unknown_text", t),
            AnalyticsError::ZeroBinWidth => Self::bad_request(e.to_string()),
        }
    }
}

impl From<SimilarityError> for ApiError {
    fn from(e: SimilarityError) -> Self {
        match e {
            SimilarityError::UnknownText(t) => Self::not_found("unknown_text", t),
            SimilarityError::UnknownTag(t) => Self::not_found("unknown_tag", t),
            other => Self::internal(other.to_string()),
        }
    }
}

impl From<EvaluationError> for ApiError {
    fn from(e: EvaluationError) -> Self {
        let status = match e {
            EvaluationError::UnknownTarget(_) => StatusCode::NOT_FOUND,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        let code = match e {
            EvaluationError::CorpusTooSmall { .. } => "corpus_too_small",
            EvaluationError::UnknownTarget(_) => "unknown_text",
            EvaluationError::InvalidRanking => "invalid_ranking",
            EvaluationError::OrphanResponse(_) => "unknown_trial",
        };
        Self::new(status, code, e.to_string())
    }
}

impl From<ImportError> for ApiError {
    fn from(e: ImportError) -> Self {
        let (status, code) = match &e {
            ImportError::Authentication(_) => (StatusCode::UNAUTHORIZED, "authentication"),
            ImportError::Network { .. } => (StatusCode::BAD_GATEWAY, "network"),
            ImportError::UnknownProject(_) => (StatusCode::NOT_FOUND, "unknown_remote_project"),
            ImportError::Translation(_) => (StatusCode::UNPROCESSABLE_ENTITY, "translation"),
            ImportError::Invalid(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_project"),
            ImportError::NotFromRemote { .. } => (StatusCode::CONFLICT, "not_from_remote"),
        };
        let message = match &e {
            ImportError::Invalid(v) => violations_message(&e.to_string(), v),
            _ => e.to_string(),
        };
        Self::new(status, code, message)
    }
}

impl From<ModelError> for ApiError {
    fn from(e: ModelError) -> Self {
        match &e {
            ModelError::Invalid(v) => Self::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "invalid_project",
                violations_message(&format!("project is invalid ({} violation(s))", v.len()), v),
            ),
            ModelError::Parse(_) => Self::bad_request(e.to_string()),
            ModelError::Io { .. } => Self::internal(e.to_string()),
        }
    }
}

impl From<BoardError> for ApiError {
    fn from(e: BoardError) -> Self {
        match &e {
            BoardError::UnknownText(t) => Self::not_found("unknown_text", t),
            BoardError::UnknownCategory(c) => Self::not_found("unknown_category", c),
            BoardError::DuplicateCategory(_) | BoardError::EmptyName => {
                Self::bad_request(e.to_string())
            }
        }
    }
}

fn violations_message(head: &str, v: &[tagscope_core::model::Violation]) -> String {
    let mut out = head.to_owned();
    for violation in v {
        out.push_str("; ");
        out.push_str(&violation.to_string());
    }
    out
}
