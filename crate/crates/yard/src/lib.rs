//! Problem service: queues proof problems, hands tasks to engines under
//! leases and merges their verdicts.

pub mod clock;
pub mod config;
pub mod http;
pub mod server;
pub mod state;

pub use clock::{Clock, SimClock, SystemClock};
pub use config::{Config, ConfigError, CONFIG_ENV};
pub use state::{
    Action, Capability, ExportFormat, ProblemRecord, ProblemState, SubmitStatus, TaskPayload, Yard, YardError,
};
pub use http::{router, AppState};
pub use server::{open_yard, serve, spawn_local_engine, spawn_scheduler};
