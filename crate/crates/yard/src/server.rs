//! Process wiring: the HTTP listener, a once-a-second housekeeping tick
//! and an in-process native engine.

use std::collections::BTreeSet;
use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use semwiki_core::infer::prove;
use semwiki_core::kb::KnowledgeBase;
use tokio::task::JoinHandle;

use crate::clock::{Clock, SystemClock};
use crate::config::Config;
use crate::http::{router, AppState};
use crate::state::{Capability, Yard};

/// Loads the knowledge base from the configured data directory, creating
/// an empty one if the directory holds none.
pub fn open_yard(config: Config) -> Result<Yard, semwiki_core::kb::KbError> {
    let dir = config.data_dir.clone();
    let kb = if dir.join("revlog").exists() {
        KnowledgeBase::load(&dir)?
    } else {
        KnowledgeBase::new()
    };
    Ok(Yard::new(config, kb).with_store(dir))
}

/// Runs housekeeping every second until the process ends.
pub fn spawn_scheduler(state: AppState) -> JoinHandle<()> {
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(1));
        loop {
            tick.tick().await;
            let actions = state.lock().resolve_stalled(state.clock.now_ms());
            for a in actions {
                tracing::info!(?a, "housekeeping");
            }
        }
    })
}

/// Registers a native engine that proves tasks on the blocking pool.
pub fn spawn_local_engine(state: AppState) -> JoinHandle<()> {
    let (id, token) = state
        .lock()
        .register_engine("local", BTreeSet::from([Capability::Native]), true, state.clock.now_ms())
        .expect("a capability is given");
    tokio::spawn(async move {
        loop {
            // register interest before polling so a notify in between is kept
            let notified = state.work.notified();
            let polled = {
                let mut yard = state.lock();
                yard.poll_task(&id, &token, state.clock.now_ms())
                    .map(|p| p.map(|p| (p, yard.kb().clone())))
            };
            let (payload, kb) = match polled {
                Ok(Some(x)) => x,
                Ok(None) => {
                    // the poll doubles as a heartbeat, so wake at least once a second
                    let _ = tokio::time::timeout(Duration::from_secs(1), notified).await;
                    continue;
                }
                Err(e) => {
                    tracing::error!(%e, "local engine poll failed");
                    return;
                }
            };
            let (Some(goal), Some(limits)) = (payload.goal, payload.limits) else {
                continue;
            };
            let verdict = match tokio::task::spawn_blocking(move || prove(&goal, &kb, &limits)).await {
                Ok(v) => v,
                Err(e) => {
                    tracing::error!(%e, "prover task failed");
                    continue;
                }
            };
            let now = state.clock.now_ms();
            if let Err(e) = state.lock().submit_result(&id, &token, &payload.task_id, verdict, now) {
                tracing::warn!(%e, task = %payload.task_id, "local result rejected");
            }
        }
    })
}

/// Serves until ctrl-c.
pub async fn serve(config: Config) -> Result<(), Box<dyn std::error::Error>> {
    let addr = SocketAddr::from(([0, 0, 0, 0], config.port));
    let yard = open_yard(config)?;
    let state = AppState::new(yard, Arc::new(SystemClock) as Arc<dyn Clock>);
    spawn_scheduler(state.clone());
    spawn_local_engine(state.clone());
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(%addr, "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
