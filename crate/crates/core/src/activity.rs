//! Rest-to-active amplitude change per channel, and its aggregation across
//! channels.

use crate::session::{AnnotationTrack, Interval, Label, Task};
use crate::signal::Envelope;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ActivityError {
    #[error("no {0} interval in the annotations")]
    MissingPhase(Label),
    #[error("{label} interval starting at {start} s is empty after trimming {trim} s from each edge")]
    EmptyAfterTrim { label: Label, start: f64, trim: f64 },
    #[error("channel {channel}: rest amplitude {rest_mean} is at or below the floor {floor}")]
    RestBelowFloor { channel: usize, rest_mean: f64, floor: f64 },
    #[error("condition {0} has no channels")]
    NoChannels(Label),
    #[error("conditions disagree on channel count ({0} vs {1})")]
    ChannelMismatch(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseAmplitudes {
    pub channel: usize,
    pub rest_mean: f64,
    pub active_mean: f64,
    pub condition: Label,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregateMode {
    /// Mean over channels of each channel's active/rest ratio.
    #[default]
    MeanOfChannelRatios,
    /// Channel-averaged active amplitude over channel-averaged rest amplitude.
    RatioOfChannelMeans,
}

/// Half-open sample range covering `[start + trim, end - trim)`.
fn trimmed_range(iv: &Interval, trim: f64, t0: f64, rate: f64, len: usize) -> (usize, usize) {
    let index = |t: f64| {
        let x = ((t - t0) * rate - 1e-9).ceil();
        if x <= 0.0 {
            0
        } else {
            (x as usize).min(len)
        }
    };
    let lo = index(iv.start + trim);
    let hi = index(iv.end - trim);
    (lo, hi.max(lo))
}

fn pooled_means(env: &Envelope, ivs: &[&Interval], trim: f64) -> Result<Vec<f64>, ActivityError> {
    let rec = env.as_recording();
    let rate = rec.profile().rate();
    let mut ranges = Vec::with_capacity(ivs.len());
    for iv in ivs {
        let (lo, hi) = trimmed_range(iv, trim, rec.start_time(), rate, rec.len());
        if hi == lo {
            return Err(ActivityError::EmptyAfterTrim { label: iv.label, start: iv.start, trim });
        }
        ranges.push((lo, hi));
    }
    let count: usize = ranges.iter().map(|(lo, hi)| hi - lo).sum();
    Ok(env
        .channels()
        .iter()
        .map(|ch| ranges.iter().map(|&(lo, hi)| ch[lo..hi].iter().sum::<f64>()).sum::<f64>() / count as f64)
        .collect())
}

/// Mean envelope over all (trimmed) relax intervals and over all (trimmed)
/// `condition` intervals, per channel.
pub fn phase_amplitude(
    envelope: &Envelope,
    annotations: &AnnotationTrack,
    condition: Label,
    guard_trim: f64,
) -> Result<Vec<PhaseAmplitudes>, ActivityError> {
    let rest: Vec<&Interval> = annotations.of_label(Label::Relax).collect();
    let active: Vec<&Interval> = annotations.of_label(condition).collect();
    if rest.is_empty() {
        return Err(ActivityError::MissingPhase(Label::Relax));
    }
    if active.is_empty() {
        return Err(ActivityError::MissingPhase(condition));
    }
    let rest_means = pooled_means(envelope, &rest, guard_trim)?;
    let active_means = pooled_means(envelope, &active, guard_trim)?;
    Ok(rest_means
        .into_iter()
        .zip(active_means)
        .enumerate()
        .map(|(channel, (rest_mean, active_mean))| PhaseAmplitudes { channel, rest_mean, active_mean, condition })
        .collect())
}

pub fn amplitude_ratio(pa: &PhaseAmplitudes, rest_floor: f64) -> Result<f64, ActivityError> {
    if pa.rest_mean <= rest_floor {
        return Err(ActivityError::RestBelowFloor { channel: pa.channel, rest_mean: pa.rest_mean, floor: rest_floor });
    }
    Ok(pa.active_mean / pa.rest_mean)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub subject_id: String,
    pub task: Task,
    /// Aggregated ratio per condition.
    pub conditions: BTreeMap<Label, f64>,
    /// Per-channel ratios per condition, indexed by channel.
    pub per_channel: BTreeMap<Label, Vec<f64>>,
    /// Per-channel phase means backing the ratios.
    pub amplitudes: BTreeMap<Label, Vec<PhaseAmplitudes>>,
}

pub fn aggregate_report(
    subject_id: &str,
    task: Task,
    groups: &[Vec<PhaseAmplitudes>],
    mode: AggregateMode,
    rest_floor: f64,
) -> Result<RatioReport, ActivityError> {
    let mut report = RatioReport {
        subject_id: subject_id.to_string(),
        task,
        conditions: BTreeMap::new(),
        per_channel: BTreeMap::new(),
        amplitudes: BTreeMap::new(),
    };
    let mut channel_count = None;
    for group in groups {
        let Some(first) = group.first() else { continue };
        let condition = first.condition;
        if let Some(n) = channel_count {
            if n != group.len() {
                return Err(ActivityError::ChannelMismatch(n, group.len()));
            }
        }
        channel_count = Some(group.len());
        let ratios = group.iter().map(|pa| amplitude_ratio(pa, rest_floor)).collect::<Result<Vec<_>, _>>()?;
        let n = ratios.len() as f64;
        let aggregate = match mode {
            AggregateMode::MeanOfChannelRatios => ratios.iter().sum::<f64>() / n,
            AggregateMode::RatioOfChannelMeans => {
                let active = group.iter().map(|p| p.active_mean).sum::<f64>() / n;
                let rest = group.iter().map(|p| p.rest_mean).sum::<f64>() / n;
                active / rest
            }
        };
        report.conditions.insert(condition, aggregate);
        report.per_channel.insert(condition, ratios);
        report.amplitudes.insert(condition, group.clone());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{DeviceProfile, Units};

    fn pa(rest: f64, active: f64) -> PhaseAmplitudes {
        PhaseAmplitudes { channel: 0, rest_mean: rest, active_mean: active, condition: Label::ThumbAbduction }
    }

    fn step_envelope() -> (Envelope, AnnotationTrack) {
        let profile = DeviceProfile::new("t", 100, Units::Microvolts, 1).unwrap();
        let values: Vec<f64> = (0..1000).map(|i| if (500..1000).contains(&i) { 184.0 } else { 10.0 }).collect();
        let track = AnnotationTrack::new(vec![
            Interval::new(0.0, 5.0, Label::Relax),
            Interval::new(5.0, 10.0, Label::ThumbAbduction),
        ])
        .unwrap();
        (Envelope::from_values(profile, vec![values], 0.0).unwrap(), track)
    }

    #[test]
    fn constants_give_exact_means() {
        let (env, track) = step_envelope();
        let out = phase_amplitude(&env, &track, Label::ThumbAbduction, 0.5).unwrap();
        assert_eq!(out, vec![pa(10.0, 184.0)]);
        // Without trimming the phases still do not bleed into each other.
        let raw = phase_amplitude(&env, &track, Label::ThumbAbduction, 0.0).unwrap();
        assert_eq!(raw, vec![pa(10.0, 184.0)]);
    }

    #[test]
    fn missing_phases() {
        let (env, _) = step_envelope();
        let no_rest = AnnotationTrack::new(vec![Interval::new(5.0, 10.0, Label::ThumbAbduction)]).unwrap();
        assert_eq!(
            phase_amplitude(&env, &no_rest, Label::ThumbAbduction, 0.5),
            Err(ActivityError::MissingPhase(Label::Relax))
        );
        let (_, track) = step_envelope();
        assert_eq!(
            phase_amplitude(&env, &track, Label::FingerFlexion, 0.5),
            Err(ActivityError::MissingPhase(Label::FingerFlexion))
        );
    }

    #[test]
    fn trimming_can_empty_an_interval() {
        let (env, _) = step_envelope();
        let short = AnnotationTrack::new(vec![
            Interval::new(0.0, 5.0, Label::Relax),
            Interval::new(5.0, 5.8, Label::ThumbAbduction),
        ])
        .unwrap();
        assert!(matches!(
            phase_amplitude(&env, &short, Label::ThumbAbduction, 0.5),
            Err(ActivityError::EmptyAfterTrim { .. })
        ));
    }

    #[test]
    fn ratio_examples() {
        assert!((amplitude_ratio(&pa(10.0, 184.0), 1e-9).unwrap() - 18.4).abs() < 1e-12);
        assert!((amplitude_ratio(&pa(10.0, 8.0), 1e-9).unwrap() - 0.8).abs() < 1e-12);
        assert!(matches!(amplitude_ratio(&pa(0.0, 5.0), 1e-9), Err(ActivityError::RestBelowFloor { .. })));
    }

    #[test]
    fn aggregate_examples() {
        let group: Vec<PhaseAmplitudes> =
            [2.0, 2.2, 2.4].iter().enumerate().map(|(c, &r)| PhaseAmplitudes { channel: c, ..pa(1.0, r) }).collect();
        let rep = aggregate_report(
            "H1",
            Task::IsolatedMovement,
            std::slice::from_ref(&group),
            AggregateMode::MeanOfChannelRatios,
            1e-9,
        )
        .unwrap();
        assert!((rep.conditions[&Label::ThumbAbduction] - 2.2).abs() < 1e-12);

        let one = aggregate_report(
            "H1",
            Task::IsolatedMovement,
            &[vec![pa(2.0, 5.0)]],
            AggregateMode::MeanOfChannelRatios,
            1e-9,
        )
        .unwrap();
        assert_eq!(one.conditions[&Label::ThumbAbduction], 2.5);

        let alt = aggregate_report(
            "H1",
            Task::IsolatedMovement,
            &[vec![pa(1.0, 2.0), PhaseAmplitudes { channel: 1, ..pa(3.0, 4.0) }]],
            AggregateMode::RatioOfChannelMeans,
            1e-9,
        )
        .unwrap();
        assert_eq!(alt.conditions[&Label::ThumbAbduction], 1.5);
    }
}
