use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Ground-truth classes. Declaration order is the class index used for
/// deterministic tie-breaking everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Relax,
    ThumbAbduction,
    FingerExtension,
    FingerFlexion,
    HandOpen,
    HandClose,
}

impl Label {
    pub const ALL: [Label; 6] = [
        Label::Relax,
        Label::ThumbAbduction,
        Label::FingerExtension,
        Label::FingerFlexion,
        Label::HandOpen,
        Label::HandClose,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Relax => "relax",
            Label::ThumbAbduction => "thumb_abduction",
            Label::FingerExtension => "finger_extension",
            Label::FingerFlexion => "finger_flexion",
            Label::HandOpen => "hand_open",
            Label::HandClose => "hand_close",
        }
    }

    /// Column heading used in amplitude-ratio tables.
    pub fn short_name(self) -> &'static str {
        match self {
            Label::Relax => "Rest",
            Label::ThumbAbduction => "Thumb",
            Label::FingerExtension => "FE",
            Label::FingerFlexion => "FF",
            Label::HandOpen => "Open",
            Label::HandClose => "Close",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = AnnotationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Label::ALL.into_iter().find(|l| l.as_str() == s).ok_or_else(|| AnnotationError::UnknownLabel(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnnotationError {
    #[error("intervals {0} and {1} overlap")]
    OverlappingIntervals(usize, usize),
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("intervals are not sorted by start time")]
    UnsortedIntervals,
    #[error("interval {0} has start >= end or a non-finite bound")]
    EmptyInterval(usize),
}

/// Half-open interval `[start, end)` in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
    pub label: Label,
}

impl Interval {
    pub fn new(start: f64, end: f64, label: Label) -> Self {
        Interval { start, end, label }
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t < self.end
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// Sorted, non-overlapping labelled intervals. Uncovered time is `relax`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AnnotationTrack {
    intervals: Vec<Interval>,
}

impl AnnotationTrack {
    pub fn new(intervals: Vec<Interval>) -> Result<Self, AnnotationError> {
        let track = AnnotationTrack { intervals };
        track.check()?;
        Ok(track)
    }

    pub fn check(&self) -> Result<(), AnnotationError> {
        for (i, iv) in self.intervals.iter().enumerate() {
            if !(iv.start.is_finite() && iv.end.is_finite() && iv.start < iv.end) {
                return Err(AnnotationError::EmptyInterval(i));
            }
        }
        for (i, pair) in self.intervals.windows(2).enumerate() {
            if pair[1].start < pair[0].start {
                return Err(AnnotationError::UnsortedIntervals);
            }
            if pair[1].start < pair[0].end {
                return Err(AnnotationError::OverlappingIntervals(i, i + 1));
            }
        }
        Ok(())
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn end(&self) -> f64 {
        self.intervals.last().map_or(0.0, |iv| iv.end)
    }

    pub fn label_at(&self, t: f64) -> Label {
        // Last interval whose start is <= t.
        let idx = self.intervals.partition_point(|iv| iv.start <= t);
        match idx.checked_sub(1).map(|i| &self.intervals[i]) {
            Some(iv) if iv.contains(t) => iv.label,
            _ => Label::Relax,
        }
    }

    pub fn of_label(&self, label: Label) -> impl Iterator<Item = &Interval> {
        self.intervals.iter().filter(move |iv| iv.label == label)
    }

    /// Distinct labels in class-index order.
    pub fn labels(&self) -> Vec<Label> {
        let mut v: Vec<Label> = self.intervals.iter().map(|iv| iv.label).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Relabels every interval through `f` (e.g. swapping rest and active).
    pub fn relabelled(&self, f: impl Fn(Label) -> Label) -> AnnotationTrack {
        AnnotationTrack { intervals: self.intervals.iter().map(|iv| Interval { label: f(iv.label), ..*iv }).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_lookup() {
        let t = AnnotationTrack::new(vec![
            Interval::new(0.0, 5.0, Label::Relax),
            Interval::new(5.0, 10.0, Label::HandOpen),
        ])
        .unwrap();
        assert_eq!(t.label_at(7.2), Label::HandOpen);
        assert_eq!(t.label_at(5.0), Label::HandOpen);
        assert_eq!(t.label_at(4.999), Label::Relax);
        assert_eq!(t.label_at(10.0), Label::Relax);
        assert_eq!(t.label_at(-1.0), Label::Relax);
    }

    #[test]
    fn rejects_overlap_and_unsorted() {
        let overlap = AnnotationTrack::new(vec![
            Interval::new(0.0, 5.0, Label::Relax),
            Interval::new(4.0, 10.0, Label::HandOpen),
        ]);
        assert_eq!(overlap, Err(AnnotationError::OverlappingIntervals(0, 1)));
        let unsorted =
            AnnotationTrack::new(vec![Interval::new(5.0, 6.0, Label::Relax), Interval::new(0.0, 1.0, Label::HandOpen)]);
        assert_eq!(unsorted, Err(AnnotationError::UnsortedIntervals));
        assert_eq!("fist".parse::<Label>(), Err(AnnotationError::UnknownLabel("fist".into())));
    }
}
