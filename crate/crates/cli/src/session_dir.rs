//! Session directories: `session.toml`, `recording.csv`, `annotations.csv`.

use anyhow::{bail, Context, Result};
use emg_core::session::{parse_annotations_str, parse_recording_str, write_annotations, write_recording, ProtocolSpec};
use emg_core::signal::DeviceProfile;
use emg_core::Session;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

use crate::manifest::Digests;

pub const SESSION_FILE: &str = "session.toml";
pub const RECORDING_FILE: &str = "recording.csv";
pub const ANNOTATIONS_FILE: &str = "annotations.csv";

/// A device given either by name (`"sleeve"`) or as a full table.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProfileRef {
    Name(String),
    Full(DeviceProfile),
}

impl ProfileRef {
    pub fn resolve(&self) -> Result<DeviceProfile> {
        match self {
            ProfileRef::Name(n) => DeviceProfile::by_name(n).with_context(|| format!("unknown device profile {n:?}")),
            ProfileRef::Full(p) => {
                DeviceProfile::new(&p.name, p.sample_rate, p.units, p.channel_count).map_err(anyhow::Error::msg)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionDoc {
    pub subject_id: String,
    #[serde(default)]
    pub profile: Option<ProfileRef>,
    pub protocol: ProtocolSpec,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

fn read_text(dir: &Path, name: &str, digests: &mut Digests, role: &str) -> Result<String> {
    let path = dir.join(name);
    let bytes = std::fs::read(&path).with_context(|| format!("cannot read {}", path.display()))?;
    digests.add(&format!("{role}/{name}"), &bytes);
    match String::from_utf8(bytes) {
        Ok(s) => Ok(s),
        Err(e) => {
            let valid = &e.as_bytes()[..e.utf8_error().valid_up_to()];
            let line = 1 + valid.iter().filter(|&&b| b == b'\n').count();
            bail!("{}: line {line}: invalid UTF-8", path.display())
        }
    }
}

/// Loads and parses a session directory, recording the digest of every
/// file read under `role`. `profile` overrides the declared device.
pub fn load(dir: &Path, profile: Option<&DeviceProfile>, digests: &mut Digests, role: &str) -> Result<Session> {
    let doc_text = read_text(dir, SESSION_FILE, digests, role)?;
    let doc: SessionDoc = toml::from_str(&doc_text)
        .with_context(|| format!("{}: invalid session document", dir.join(SESSION_FILE).display()))?;
    let profile = match (profile, &doc.profile) {
        (Some(p), _) => p.clone(),
        (None, Some(r)) => r.resolve()?,
        (None, None) => DeviceProfile::sleeve(),
    };
    let rec_text = read_text(dir, RECORDING_FILE, digests, role)?;
    let recording =
        parse_recording_str(&rec_text, &profile).with_context(|| format!("{}", dir.join(RECORDING_FILE).display()))?;
    let ann_text = read_text(dir, ANNOTATIONS_FILE, digests, role)?;
    let annotations =
        parse_annotations_str(&ann_text).with_context(|| format!("{}", dir.join(ANNOTATIONS_FILE).display()))?;
    Ok(Session { recording, annotations, protocol: doc.protocol, subject_id: doc.subject_id, metadata: doc.metadata })
}

/// The three session files as `(name, contents)`.
pub fn render(session: &Session) -> Vec<(String, String)> {
    let doc = SessionDoc {
        subject_id: session.subject_id.clone(),
        profile: Some(ProfileRef::Full(session.recording.profile().clone())),
        protocol: session.protocol.clone(),
        metadata: session.metadata.clone(),
    };
    vec![
        (SESSION_FILE.into(), toml::to_string_pretty(&doc).expect("session document serializes")),
        (RECORDING_FILE.into(), write_recording(&session.recording)),
        (ANNOTATIONS_FILE.into(), write_annotations(&session.annotations)),
    ]
}
