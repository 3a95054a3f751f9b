//! Synthetic sEMG sessions with known ground truth.
//!
//! Each channel is band-limited Gaussian noise whose amplitude follows the
//! annotated activity (a per-label gain on a rest floor), plus optional
//! additive sensor noise, powerline tones, low-frequency baseline drift
//! and biphasic motion-artifact pulses. This is an amplitude surrogate for
//! exercising the ratio and feature pipelines, not a motor-unit model.

use crate::session::{expand_protocol, AnnotationTrack, Label, ProtocolSpec, Session};
use crate::signal::{design_bandpass, design_lowpass, BiquadCascade, DeviceProfile, Recording};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Width of the raised-cosine activation transitions, seconds.
pub const TRANSITION_S: f64 = 0.1;
/// Duration of one biphasic artifact pulse, seconds.
pub const ARTIFACT_S: f64 = 0.05;
/// Settling time excluded after each transition when measuring plateaus.
pub const PLATEAU_GUARD_S: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("unknown preset {name:?}; available presets: {available}")]
    UnknownPreset { name: String, available: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Powerline {
    pub frequency: f64,
    /// Peak amplitude in signal units.
    pub amplitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    /// RMS amplitude in signal units.
    pub amplitude: f64,
    pub cutoff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthScenario {
    pub name: String,
    pub subject_id: String,
    pub profile: DeviceProfile,
    pub protocol: ProtocolSpec,
    /// Activation gain per label, one entry per channel. `relax` is required.
    pub gains: BTreeMap<Label, Vec<f64>>,
    /// RMS of the activity component at gain 1.
    pub rest_floor: f64,
    /// RMS of additive, activity-independent band-limited noise.
    #[serde(default)]
    pub sensor_noise: f64,
    #[serde(default)]
    pub powerline: Vec<Powerline>,
    #[serde(default)]
    pub drift: Option<Drift>,
    /// Poisson rate of artifact pulses anywhere in the session, events/s.
    #[serde(default)]
    pub artifact_rate: f64,
    #[serde(default)]
    pub artifact_amplitude: f64,
    /// Adds one artifact pulse near every movement onset and offset.
    #[serde(default)]
    pub transition_artifacts: bool,
    /// Unannotated rest before the first cue, seconds.
    #[serde(default)]
    pub lead_in: f64,
    /// Unannotated rest after the last interval, seconds.
    #[serde(default)]
    pub tail: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub scenario: String,
    pub seed: u64,
    pub annotations: AnnotationTrack,
    /// Programmed plateau RMS of the activity component, per label and channel.
    pub programmed_rms: BTreeMap<Label, Vec<f64>>,
    pub gains: BTreeMap<Label, Vec<f64>>,
}

impl GroundTruth {
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("ground truth is serializable")
    }
}

impl SynthScenario {
    pub fn check(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Invalid(m));
        self.protocol.check().map_err(SynthError::Invalid)?;
        let ch = self.profile.channel_count;
        if self.profile.sample_rate == 0 || ch == 0 {
            return bad("profile needs a positive rate and channel count".into());
        }
        if !self.gains.contains_key(&Label::Relax) {
            return bad("relax gain missing".into());
        }
        for (label, g) in &self.gains {
            if g.len() != ch {
                return bad(format!("{label} gains list {} channels, profile has {ch}", g.len()));
            }
            if g.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return bad(format!("{label} gains must be finite and non-negative"));
            }
        }
        for g in &self.protocol.gestures {
            if !self.gains.contains_key(g) {
                return bad(format!("no gain for protocol gesture {g}"));
            }
        }
        let nonneg = [
            ("rest_floor", self.rest_floor),
            ("sensor_noise", self.sensor_noise),
            ("artifact_rate", self.artifact_rate),
            ("artifact_amplitude", self.artifact_amplitude),
            ("lead_in", self.lead_in),
            ("tail", self.tail),
        ];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be finite and non-negative"));
            }
        }
        if let Some(d) = self.drift {
            if !(d.amplitude >= 0.0 && d.cutoff > 0.0 && d.cutoff < self.profile.nyquist()) {
                return bad("drift needs amplitude >= 0 and 0 < cutoff < Nyquist".into());
            }
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        self.lead_in + self.protocol.duration() + self.tail
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Re-targets the scenario to another device, cycling per-channel gains
    /// to the new channel count.
    pub fn with_profile(mut self, profile: DeviceProfile) -> Self {
        let n = profile.channel_count;
        for g in self.gains.values_mut() {
            let old = g.clone();
            *g = (0..n).map(|i| old[i % old.len()]).collect();
        }
        self.powerline.retain(|p| p.frequency < profile.nyquist());
        self.profile = profile;
        self
    }

    /// Scales every gain other than relax toward 1 by `factor` (0 = no
    /// activity contrast, 1 = unchanged) and adds sensor noise.
    pub fn degraded(mut self, factor: f64, sensor_noise: f64) -> Self {
        for (label, g) in self.gains.iter_mut() {
            if *label != Label::Relax {
                g.iter_mut().for_each(|v| *v = 1.0 + (*v - 1.0) * factor);
            }
        }
        self.sensor_noise = sensor_noise;
        self.name = format!("{}_degraded", self.name);
        self
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario is serializable")
    }

    pub fn from_toml(text: &str) -> Result<Self, SynthError> {
        let s: SynthScenario = toml::from_str(text).map_err(|e| SynthError::Invalid(e.to_string()))?;
        s.check()?;
        Ok(s)
    }
}

fn stream(seed: u64, channel: usize, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(channel as u64 * 16 + purpose);
    rng
}

/// Unit-RMS noise of length `n` shaped by `shaping` (zero-phase, padded).
fn shaped_noise(rng: &mut ChaCha8Rng, n: usize, pad: usize, shaping: &BiquadCascade) -> Vec<f64> {
    let raw: Vec<f64> = (0..n + 2 * pad).map(|_| StandardNormal.sample(rng)).collect();
    let filtered = shaping.filter_zero_phase_slice(&raw).expect("padded noise is long enough");
    let mut out = filtered[pad..pad + n].to_vec();
    let rms = (out.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    if rms > 0.0 {
        out.iter_mut().for_each(|v| *v /= rms);
    }
    out
}

fn activation(
    track: &AnnotationTrack,
    gains: &BTreeMap<Label, Vec<f64>>,
    channel: usize,
    n: usize,
    rate: f64,
) -> Vec<f64> {
    let level = |l: Label| gains.get(&l).map_or(gains[&Label::Relax][channel], |g| g[channel]);
    let mut a: Vec<f64> = (0..n).map(|i| level(track.label_at(i as f64 / rate))).collect();

    let mut boundaries: Vec<f64> = track.intervals().iter().flat_map(|iv| [iv.start, iv.end]).collect();
    boundaries.dedup();
    let half = TRANSITION_S / 2.0;
    for b in boundaries {
        let before = level(track.label_at(b - 1e-9));
        let after = level(track.label_at(b));
        if before == after {
            continue;
        }
        let lo = ((b - half) * rate).ceil().max(0.0) as usize;
        let hi = (((b + half) * rate).ceil() as usize).min(n);
        for (i, v) in a.iter_mut().enumerate().take(hi).skip(lo) {
            let u = (i as f64 / rate - (b - half)) / TRANSITION_S;
            *v = before + (after - before) * 0.5 * (1.0 - (PI * u).cos());
        }
    }
    a
}

fn add_pulse(x: &mut [f64], t0: f64, amplitude: f64, rate: f64) {
    let start = (t0 * rate).ceil().max(0.0) as usize;
    let len = (ARTIFACT_S * rate).round() as usize;
    for i in start..(start + len).min(x.len()) {
        let u = (i as f64 / rate - t0) / ARTIFACT_S;
        x[i] += amplitude * (2.0 * PI * u).sin();
    }
}

/// Generates the session and its ground truth. Pure in the scenario: the
/// same scenario (including seed) always yields bit-identical output.
pub fn generate(scenario: &SynthScenario) -> Result<(Session, GroundTruth), SynthError> {
    scenario.check()?;
    let profile = &scenario.profile;
    let rate = profile.rate();
    let n = (scenario.duration() * rate).round() as usize;
    let track = expand_protocol(&scenario.protocol, scenario.lead_in);

    let shaping = design_bandpass(20.0, 0.45 * rate, 4, rate).map_err(|e| SynthError::Invalid(e.to_string()))?;
    let drift_filter = match scenario.drift {
        Some(d) => Some(design_lowpass(d.cutoff, 2, rate).map_err(|e| SynthError::Invalid(e.to_string()))?),
        None => None,
    };
    let pad = profile.sample_rate as usize;
    let drift_pad = scenario.drift.map_or(0, |d| (rate * (2.0 + 4.0 / d.cutoff)) as usize);

    let gesture_edges: Vec<f64> =
        track.intervals().iter().filter(|iv| iv.label != Label::Relax).flat_map(|iv| [iv.start, iv.end]).collect();

    let channels: Vec<Vec<f64>> = (0..profile.channel_count)
        .map(|c| {
            let act = activation(&track, &scenario.gains, c, n, rate);
            let noise = shaped_noise(&mut stream(scenario.seed, c, 0), n, pad, &shaping);
            let mut x: Vec<f64> = act.iter().zip(&noise).map(|(a, v)| a * scenario.rest_floor * v).collect();

            if scenario.sensor_noise > 0.0 {
                let floor = shaped_noise(&mut stream(scenario.seed, c, 1), n, pad, &shaping);
                x.iter_mut().zip(&floor).for_each(|(v, f)| *v += scenario.sensor_noise * f);
            }
            if let (Some(d), Some(lp)) = (scenario.drift, &drift_filter) {
                let drift = shaped_noise(&mut stream(scenario.seed, c, 2), n, drift_pad, lp);
                x.iter_mut().zip(&drift).for_each(|(v, w)| *v += d.amplitude * w);
            }
            let mut phase_rng = stream(scenario.seed, c, 4);
            for p in &scenario.powerline {
                let phi = phase_rng.gen_range(0.0..2.0 * PI);
                for (i, v) in x.iter_mut().enumerate() {
                    *v += p.amplitude * (2.0 * PI * p.frequency * i as f64 / rate + phi).sin();
                }
            }
            let mut art_rng = stream(scenario.seed, c, 3);
            if scenario.artifact_amplitude > 0.0 {
                if scenario.artifact_rate > 0.0 {
                    let gap = Exp::new(scenario.artifact_rate).expect("positive rate");
                    let mut t = gap.sample(&mut art_rng);
                    while t < n as f64 / rate {
                        let sign = if art_rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                        add_pulse(&mut x, t, sign * scenario.artifact_amplitude, rate);
                        t += gap.sample(&mut art_rng);
                    }
                }
                if scenario.transition_artifacts {
                    for &edge in &gesture_edges {
                        let t0 = edge + art_rng.gen_range(-0.1..0.1);
                        let sign = if art_rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                        add_pulse(&mut x, t0, sign * scenario.artifact_amplitude, rate);
                    }
                }
            }
            x
        })
        .collect();

    let recording = Recording::new(profile.clone(), channels, 0.0).map_err(|e| SynthError::Invalid(e.to_string()))?;
    let mut metadata = scenario.metadata.clone();
    metadata.insert("scenario".into(), scenario.name.clone());
    metadata.insert("seed".into(), scenario.seed.to_string());
    let session = Session {
        recording,
        annotations: track.clone(),
        protocol: scenario.protocol.clone(),
        subject_id: scenario.subject_id.clone(),
        metadata,
    };
    let programmed_rms =
        scenario.gains.iter().map(|(l, g)| (*l, g.iter().map(|v| v * scenario.rest_floor).collect())).collect();
    let truth = GroundTruth {
        scenario: scenario.name.clone(),
        seed: scenario.seed,
        annotations: track,
        programmed_rms,
        gains: scenario.gains.clone(),
    };
    Ok((session, truth))
}

/// Sample ranges of each plateau of `label`, excluding the settling guard
/// at both edges.
pub fn plateau_ranges(track: &AnnotationTrack, label: Label, rate: f64, len: usize) -> Vec<(usize, usize)> {
    track
        .of_label(label)
        .filter_map(|iv| {
            let lo = ((iv.start + PLATEAU_GUARD_S) * rate).ceil() as usize;
            let hi = (((iv.end - PLATEAU_GUARD_S) * rate).ceil() as usize).min(len);
            (hi > lo).then_some((lo, hi))
        })
        .collect()
}

/// RMS of `x` pooled over the given sample ranges.
pub fn pooled_rms(x: &[f64], ranges: &[(usize, usize)]) -> f64 {
    let (sum, count) = ranges
        .iter()
        .fold((0.0, 0usize), |(s, c), &(lo, hi)| (s + x[lo..hi].iter().map(|v| v * v).sum::<f64>(), c + hi - lo));
    (sum / count as f64).sqrt()
}

fn gains(entries: &[(Label, [f64; 3])]) -> BTreeMap<Label, Vec<f64>> {
    entries.iter().map(|(l, g)| (*l, g.to_vec())).collect()
}

fn sleeve_scenario(
    name: &str,
    subject: &str,
    protocol: ProtocolSpec,
    g: BTreeMap<Label, Vec<f64>>,
    rest_floor: f64,
) -> SynthScenario {
    let mut metadata = BTreeMap::new();
    metadata.insert("wiring_resistance_ohm".into(), "46.3".into());
    SynthScenario {
        name: name.into(),
        subject_id: subject.into(),
        profile: DeviceProfile::sleeve(),
        protocol,
        gains: g,
        rest_floor,
        sensor_noise: 0.0,
        powerline: vec![Powerline { frequency: 50.0, amplitude: 20.0 }, Powerline { frequency: 60.0, amplitude: 10.0 }],
        drift: Some(Drift { amplitude: 15.0, cutoff: 0.3 }),
        artifact_rate: 0.0,
        artifact_amplitude: 40.0,
        transition_artifacts: true,
        lead_in: 2.0,
        tail: 2.0,
        seed: 0,
        metadata,
    }
}

pub const PRESET_NAMES: [&str; 6] =
    ["healthy_strong", "healthy_weak", "high_baseline_outlier", "stroke_like", "gesture_session", "null"];

/// Built-in scenarios, named after the response patterns they mimic.
pub fn preset_scenarios() -> Vec<SynthScenario> {
    use Label::*;
    let iso = ProtocolSpec::isolated_movement(3);
    let mut null = sleeve_scenario(
        "null",
        "N0",
        iso.clone(),
        gains(&[(Relax, [1.0; 3]), (ThumbAbduction, [1.0; 3]), (FingerExtension, [1.0; 3]), (FingerFlexion, [1.0; 3])]),
        5.0,
    );
    null.powerline.clear();
    null.drift = None;
    null.artifact_amplitude = 0.0;
    null.transition_artifacts = false;

    let stroke_protocol = ProtocolSpec { gestures: vec![ThumbAbduction], ..ProtocolSpec::isolated_movement(3) };

    vec![
        sleeve_scenario(
            "healthy_strong",
            "HS",
            iso.clone(),
            gains(&[
                (Relax, [1.0; 3]),
                (ThumbAbduction, [15.4, 18.4, 21.4]),
                (FingerExtension, [1.4, 1.6, 1.8]),
                (FingerFlexion, [1.3, 1.5, 1.7]),
            ]),
            5.0,
        ),
        sleeve_scenario(
            "healthy_weak",
            "HW",
            iso.clone(),
            gains(&[
                (Relax, [1.0; 3]),
                (ThumbAbduction, [2.0, 2.2, 2.4]),
                (FingerExtension, [0.9, 1.0, 1.1]),
                (FingerFlexion, [1.0, 1.1, 1.2]),
            ]),
            5.0,
        ),
        sleeve_scenario(
            "high_baseline_outlier",
            "HB",
            iso.clone(),
            gains(&[
                (Relax, [1.0; 3]),
                (ThumbAbduction, [2.2, 2.4, 2.6]),
                (FingerExtension, [0.9, 1.0, 1.1]),
                (FingerFlexion, [1.4, 1.5, 1.6]),
            ]),
            25.0,
        ),
        sleeve_scenario(
            "stroke_like",
            "S1",
            stroke_protocol,
            gains(&[(Relax, [1.0; 3]), (ThumbAbduction, [0.75, 0.8, 0.85])]),
            5.0,
        ),
        sleeve_scenario(
            "gesture_session",
            "G1",
            ProtocolSpec::gesture_classification(8),
            gains(&[(Relax, [1.0; 3]), (HandOpen, [6.0, 2.5, 1.5]), (HandClose, [2.0, 5.0, 3.5])]),
            5.0,
        ),
        null,
    ]
}

pub fn preset(name: &str) -> Result<SynthScenario, SynthError> {
    preset_scenarios()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| SynthError::UnknownPreset { name: name.into(), available: PRESET_NAMES.join(", ") })
}
