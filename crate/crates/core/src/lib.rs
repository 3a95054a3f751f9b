//! Surface-EMG toolkit: filtering, amplitude-ratio analysis, windowed
//! features, intent classifiers and a synthetic session generator.

pub mod activity;
pub mod config;
pub mod features;
pub mod models;
pub mod pipeline;
pub mod report;
pub mod session;
pub mod signal;
pub mod synth;

pub use config::PipelineConfig;
pub use session::{Label, Session};
