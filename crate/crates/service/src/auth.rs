use axum::extract::FromRequestParts;
use axum::http::header::AUTHORIZATION;
use axum::http::request::Parts;
use serde::Serialize;

use dutyroster_core::model::PhysicianId;

use crate::{ApiError, AppState};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Planner,
    Physician(PhysicianId),
}

impl Role {
    pub fn require_planner(&self) -> Result<(), ApiError> {
        match self {
            Role::Planner => Ok(()),
            Role::Physician(_) => Err(ApiError::Forbidden("planner role required".into())),
        }
    }

    /// Planners act for anyone; physicians only for themselves.
    pub fn may_act_for(&self, p: &PhysicianId) -> Result<(), ApiError> {
        match self {
            Role::Planner => Ok(()),
            Role::Physician(me) if me == p => Ok(()),
            Role::Physician(me) => Err(ApiError::Forbidden(format!("{me} cannot act for {p}"))),
        }
    }
}

impl FromRequestParts<AppState> for Role {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &AppState) -> Result<Self, Self::Rejection> {
        let token = parts
            .headers
            .get(AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .ok_or(ApiError::Unauthorized)?;
        state.tokens.get(token.trim()).cloned().ok_or(ApiError::Unauthorized)
    }
}
