//! End-to-end paths from a loaded session to ratio reports and feature
//! matrices, driven by a [`PipelineConfig`].

use crate::activity::{aggregate_report, phase_amplitude, ActivityError, RatioReport};
use crate::config::PipelineConfig;
use crate::features::{extract, ExtractOptions, FeatureError, FeatureMatrix};
use crate::models::ModelError;
use crate::session::{validate_session, IngestError, Label, Session, ValidationReport};
use crate::signal::{envelope, Envelope, FilterError, Recording};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid session:\n{0}")]
    Validation(ValidationReport),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Activity(#[from] ActivityError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn checked(session: &Session) -> Result<(), PipelineError> {
    let report = validate_session(session);
    if report.is_valid() {
        Ok(())
    } else {
        Err(PipelineError::Validation(report))
    }
}

pub fn preprocess(recording: &Recording, config: &PipelineConfig) -> Result<Recording, PipelineError> {
    Ok(config.filter.preprocessor(recording.profile())?.run(recording)?)
}

/// Preprocessing chain followed by rectification and the envelope low-pass.
pub fn session_envelope(recording: &Recording, config: &PipelineConfig) -> Result<Envelope, PipelineError> {
    let filtered = preprocess(recording, config)?;
    let lp = config.filter.envelope_lowpass(recording.profile())?;
    Ok(envelope(&filtered, &lp)?)
}

/// Amplitude ratio of every protocol gesture against pooled relax.
pub fn analyze(session: &Session, config: &PipelineConfig) -> Result<RatioReport, PipelineError> {
    checked(session)?;
    let env = session_envelope(&session.recording, config)?;
    let act = &config.activity;
    let groups = session
        .protocol
        .gestures
        .iter()
        .filter(|&&g| g != Label::Relax)
        .map(|&g| phase_amplitude(&env, &session.annotations, g, act.guard_trim_s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(aggregate_report(&session.subject_id, session.protocol.task, &groups, act.aggregate, act.rest_floor)?)
}

/// Stable identity of a session's content: subject, samples and labels.
/// Used to refuse evaluating a model on the session it was trained on.
pub fn session_source(session: &Session) -> String {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0100_0000_01b3;
    let mut h = OFFSET;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h = (h ^ u64::from(b)).wrapping_mul(PRIME);
        }
    };
    eat(session.subject_id.as_bytes());
    eat(&session.recording.profile().sample_rate.to_le_bytes());
    for ch in session.recording.channels() {
        for v in ch {
            eat(&v.to_bits().to_le_bytes());
        }
    }
    for iv in session.annotations.intervals() {
        eat(&iv.start.to_bits().to_le_bytes());
        eat(&iv.end.to_bits().to_le_bytes());
        eat(iv.label.as_str().as_bytes());
    }
    format!("{}:{h:016x}", session.subject_id)
}

/// Windowed feature matrix for a session, tagged with its source identity.
pub fn session_features(session: &Session, config: &PipelineConfig) -> Result<FeatureMatrix, PipelineError> {
    checked(session)?;
    let fc = &config.features;
    let recording = if fc.preprocess { preprocess(&session.recording, config)? } else { session.recording.clone() };
    let opts = ExtractOptions { spectral_window: fc.spectral_window, zcr_threshold: fc.zcr_threshold };
    let m = extract(&recording, &session.annotations, fc.window_spec(), &opts)?;
    Ok(m.with_source(session_source(session)))
}
