//! HTTP service for the two roles of a department: planners configure the
//! roster structure, start solves, adjust and publish; physicians submit
//! preferences and read published rosters.
//!
//! Endpoints are listed in `docs/api.md`.

mod auth;
mod error;
mod ical;
mod jobs;
mod routes;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use dutyroster_core::model::PhysicianId;
use dutyroster_core::solver::cbc::SOLVER_ENV;
use dutyroster_core::solver::SolverConfig;
use dutyroster_store::Store;

pub use auth::Role;
pub use error::ApiError;
pub use ical::calendar_for;
pub use jobs::run_job;
pub use routes::router;

pub const STORE_ENV: &str = "DUTYROSTER_STORE";
pub const LISTEN_ENV: &str = "DUTYROSTER_LISTEN";
/// Comma-separated `token=planner` or `token=physician:<id>` entries.
pub const TOKENS_ENV: &str = "DUTYROSTER_TOKENS";

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    pub store_path: PathBuf,
    pub listen: SocketAddr,
    pub solver: SolverConfig,
    pub tokens: HashMap<String, Role>,
}

impl ServiceConfig {
    pub fn from_env() -> Result<Self, String> {
        let store_path = std::env::var_os(STORE_ENV).map(PathBuf::from).unwrap_or_else(|| "dutyroster.db".into());
        let listen = match std::env::var(LISTEN_ENV) {
            Ok(s) => s.parse().map_err(|e| format!("{LISTEN_ENV}={s}: {e}"))?,
            Err(_) => SocketAddr::from(([127, 0, 0, 1], 8080)),
        };
        let solver = SolverConfig { path: std::env::var_os(SOLVER_ENV).map(PathBuf::from), ..Default::default() };
        let tokens = match std::env::var(TOKENS_ENV) {
            Ok(s) => parse_tokens(&s)?,
            Err(_) => HashMap::new(),
        };
        Ok(Self { store_path, listen, solver, tokens })
    }
}

pub fn parse_tokens(spec: &str) -> Result<HashMap<String, Role>, String> {
    let mut out = HashMap::new();
    for entry in spec.split(',').map(str::trim).filter(|e| !e.is_empty()) {
        let (token, role) = entry.split_once('=').ok_or_else(|| format!("token entry {entry:?} lacks '='"))?;
        let role = match role.split_once(':') {
            None if role == "planner" => Role::Planner,
            Some(("physician", id)) if !id.is_empty() => Role::Physician(PhysicianId::new(id)),
            _ => return Err(format!("unknown role {role:?}")),
        };
        out.insert(token.to_owned(), role);
    }
    Ok(out)
}

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<Store>,
    pub solver: SolverConfig,
    pub tokens: Arc<HashMap<String, Role>>,
}

impl AppState {
    pub fn new(store: Store, solver: SolverConfig, tokens: HashMap<String, Role>) -> Self {
        Self { store: Arc::new(store), solver, tokens: Arc::new(tokens) }
    }
}

/// Opens the store and serves until interrupted.
pub async fn serve(config: ServiceConfig) -> Result<(), Box<dyn std::error::Error>> {
    if config.tokens.is_empty() {
        return Err(format!("no access tokens configured; set {TOKENS_ENV}").into());
    }
    let store = Store::open(&config.store_path)?;
    let state = AppState::new(store, config.solver, config.tokens);
    let listener = tokio::net::TcpListener::bind(config.listen).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
