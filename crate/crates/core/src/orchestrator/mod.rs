//! Turning configurations into synthesis runs and results.

mod backend;
mod campaign;
mod mock;
mod report;
mod script;

use thiserror::Error;

use crate::space::SpaceError;
use crate::store::StoreError;

pub use backend::{Backend, ExternalBackend, Job, MockBackend, DEFAULT_TIMEOUT};
pub use campaign::{read_campaign_log, run_campaign, Campaign, CampaignReport, CancelToken, EventKind, LogEvent};
pub use mock::{mock_synthesize, DEFAULT_CLOCK_NS};
pub use report::{parse_report, JsonReport, ReportFormat};
pub use script::{generate_directive_script, generate_run_script, DesignMeta};

#[derive(Debug, Error)]
pub enum OrchestratorError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("script generation: {0}")]
    Script(String),
    #[error("no renderer for directive `{0}`; register one with a template")]
    NoRenderer(String),
    #[error("backend: {0}")]
    Backend(String),
    #[error("campaign log: {0}")]
    Log(#[from] std::io::Error),
    #[error("configuration {id} has key {stored} but its index decodes to {derived}")]
    KeyMismatch { id: i64, stored: String, derived: String },
    #[error("at least one worker is required")]
    NoWorkers,
}
