pub mod analytics;
pub mod cli;
pub mod csd;
pub mod orchestrator;
pub mod outcome;
pub mod space;
pub mod store;
