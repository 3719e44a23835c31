//! HTTP session API and command-line front end over `prodclarify-core`.

pub mod api;
pub mod config;
pub mod llm_http;
pub mod sessions;

use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use anyhow::Context;
use prodclarify_core::agent::Agent;
use prodclarify_core::catalog::Catalog;
use prodclarify_core::llm_bridge::{BackendSettings, LlmBridge};
use prodclarify_core::retrieval::SearchEngine;

use crate::config::ServiceConfig;
use crate::llm_http::HttpChatBackend;
use crate::sessions::SessionStore;

/// Model bridge over the endpoint named in the environment, if any.
pub fn bridge_from_env() -> Option<Arc<LlmBridge>> {
    BackendSettings::from_env().map(|s| Arc::new(LlmBridge::new(Arc::new(HttpChatBackend::new(s)))))
}

pub fn build_agent(catalog: Catalog, config: &ServiceConfig, bridge: Option<Arc<LlmBridge>>) -> anyhow::Result<Agent> {
    let engine = SearchEngine::from_catalog(&catalog).context("building search indexes")?;
    let agent = Agent::new(Arc::new(catalog), Arc::new(engine), config.agent.clone());
    Ok(match bridge {
        Some(b) => agent.with_bridge(b),
        None => agent,
    })
}

/// Serves until the process is stopped, sweeping idle sessions once a minute.
pub async fn serve(agent: Agent, config: &ServiceConfig) -> anyhow::Result<()> {
    let store = Arc::new(SessionStore::new(Arc::new(agent), config.session_ttl()));
    let sweeper = Arc::clone(&store);
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(60));
        loop {
            tick.tick().await;
            sweeper.sweep();
        }
    });
    let app = api::router(store, config.server.static_dir.clone());
    let addr = SocketAddr::from(([0, 0, 0, 0], config.server.port));
    let listener = tokio::net::TcpListener::bind(addr).await.with_context(|| format!("binding {addr}"))?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app).await?;
    Ok(())
}
