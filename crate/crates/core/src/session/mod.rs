//! Recordings, ground-truth annotations and protocol definitions, plus the
//! CSV formats they travel in.

mod annotations;
mod io;
mod protocol;

pub use annotations::{AnnotationError, AnnotationTrack, Interval, Label};
pub use io::{
    parse_annotations, parse_annotations_str, parse_recording, parse_recording_str, write_annotations, write_recording,
    IngestError,
};
pub use protocol::{expand_protocol, ProtocolSpec, Task};

use crate::signal::Recording;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Slack allowed when comparing annotation times against the recording span.
const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub recording: Recording,
    pub annotations: AnnotationTrack,
    pub protocol: ProtocolSpec,
    pub subject_id: String,
    pub metadata: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, code: &str, message: String) {
        self.violations.push(Violation { code: code.into(), message });
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_valid() {
            return write!(f, "session valid");
        }
        for v in &self.violations {
            writeln!(f, "[{}] {}", v.code, v.message)?;
        }
        Ok(())
    }
}

/// Lists every invariant violation; an empty report means the session is valid.
pub fn validate_session(session: &Session) -> ValidationReport {
    let mut report = ValidationReport::default();
    let rec = &session.recording;

    if rec.is_empty() {
        report.push("empty_recording", "recording contains no samples".into());
    }
    if rec.channel_count() != rec.profile().channel_count {
        report.push(
            "channel_count",
            format!("recording has {} channels, profile declares {}", rec.channel_count(), rec.profile().channel_count),
        );
    }
    if let Err(e) = session.annotations.check() {
        report.push("annotation_invariant", e.to_string());
    }
    if let Some(last) = session.annotations.intervals().last() {
        if last.end > rec.end_time() + TIME_EPS {
            report.push(
                "annotation_exceeds_recording",
                format!(
                    "annotation exceeds recording: interval ends at {} s, recording ends at {} s",
                    last.end,
                    rec.end_time()
                ),
            );
        }
    }
    if let Some(first) = session.annotations.intervals().first() {
        if first.start < rec.start_time() - TIME_EPS {
            report.push(
                "annotation_before_recording",
                format!("annotation starts at {} s before recording start {} s", first.start, rec.start_time()),
            );
        }
    }
    if let Err(e) = session.protocol.check() {
        report.push("protocol_invalid", e);
    } else {
        let needed = session.protocol.duration();
        if rec.duration() + TIME_EPS < needed {
            report.push(
                "recording_shorter_than_protocol",
                format!("protocol implies at least {needed} s but recording lasts {} s", rec.duration()),
            );
        }
    }
    report
}
