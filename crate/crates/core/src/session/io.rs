//! CSV codecs.
//!
//! Recording: header `time,<ch1>,...,<chN>`, then one row per sample with
//! the timestamp in decimal seconds followed by one value per channel.
//! Annotations: header `start,end,label`. Lines starting with `#` are
//! comments. Values are written in shortest round-trip form.

use super::{AnnotationError, AnnotationTrack, Interval, Label};
use crate::signal::{DeviceProfile, Recording};
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IngestError {
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("file is empty (no header line)")]
    Empty,
    #[error("line {line}: malformed header: {reason}")]
    MalformedHeader { line: u64, reason: String },
    #[error("line {line}: malformed row: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("line {line}: expected {expected} channel values, found {got}")]
    ChannelCountMismatch { line: u64, expected: usize, got: usize },
    #[error("line {line}: non-finite value")]
    NonFiniteValue { line: u64 },
    #[error("line {line}: timestamp {got} does not follow the {rate} Hz sample grid (expected {expected})")]
    TimestampMismatch { line: u64, got: f64, expected: f64, rate: u32 },
    #[error("recording has a header but no samples")]
    NoSamples,
    #[error("line {line}: {source}")]
    Annotation { line: u64, source: AnnotationError },
    #[error("annotation track invalid: {0}")]
    Track(AnnotationError),
}

impl IngestError {
    /// Line number the diagnostic points at, when there is one.
    pub fn line(&self) -> Option<u64> {
        match self {
            IngestError::MalformedHeader { line, .. }
            | IngestError::MalformedRow { line, .. }
            | IngestError::ChannelCountMismatch { line, .. }
            | IngestError::NonFiniteValue { line }
            | IngestError::TimestampMismatch { line, .. }
            | IngestError::Annotation { line, .. } => Some(*line),
            _ => None,
        }
    }
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().has_headers(false).flexible(true).comment(Some(b'#')).from_reader(text.as_bytes())
}

fn read_file(path: &Path) -> Result<String, IngestError> {
    let bytes =
        std::fs::read(path).map_err(|e| IngestError::Io { path: path.display().to_string(), reason: e.to_string() })?;
    String::from_utf8(bytes).map_err(|e| IngestError::MalformedRow {
        line: 1 + e.as_bytes()[..e.utf8_error().valid_up_to()].iter().filter(|&&b| b == b'\n').count() as u64,
        reason: "invalid UTF-8".into(),
    })
}

fn csv_error(e: csv::Error) -> IngestError {
    let line = e.position().map_or(0, |p| p.line());
    IngestError::MalformedRow { line, reason: e.to_string() }
}

fn parse_number(field: &str, line: u64) -> Result<f64, IngestError> {
    let v: f64 =
        field.parse().map_err(|_| IngestError::MalformedRow { line, reason: format!("{field:?} is not a number") })?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(IngestError::NonFiniteValue { line })
    }
}

pub fn parse_recording(path: impl AsRef<Path>, profile: &DeviceProfile) -> Result<Recording, IngestError> {
    parse_recording_str(&read_file(path.as_ref())?, profile)
}

pub fn parse_recording_str(text: &str, profile: &DeviceProfile) -> Result<Recording, IngestError> {
    let mut rdr = reader(text);
    let mut records = rdr.records();
    let header = records.next().ok_or(IngestError::Empty)?.map_err(csv_error)?;
    let header_line = header.position().map_or(1, |p| p.line());
    if header.get(0) != Some("time") {
        return Err(IngestError::MalformedHeader { line: header_line, reason: "first column must be `time`".into() });
    }
    let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    if names.len() != profile.channel_count {
        return Err(IngestError::ChannelCountMismatch {
            line: header_line,
            expected: profile.channel_count,
            got: names.len(),
        });
    }
    if let Some(bad) = names.iter().find(|n| n.trim().is_empty()) {
        return Err(IngestError::MalformedHeader { line: header_line, reason: format!("empty channel name {bad:?}") });
    }

    let rate = profile.rate();
    let mut channels: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    let mut start = 0.0;
    for (i, rec) in records.enumerate() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != names.len() + 1 {
            return Err(IngestError::ChannelCountMismatch {
                line,
                expected: names.len(),
                got: rec.len().saturating_sub(1),
            });
        }
        let t = parse_number(&rec[0], line)?;
        if i == 0 {
            start = t;
        } else {
            let expected = start + i as f64 / rate;
            if (t - expected).abs() > 0.5 / rate {
                return Err(IngestError::TimestampMismatch { line, got: t, expected, rate: profile.sample_rate });
            }
        }
        for (c, field) in rec.iter().skip(1).enumerate() {
            channels[c].push(parse_number(field, line)?);
        }
    }
    if channels[0].is_empty() {
        return Err(IngestError::NoSamples);
    }
    Recording::with_names(profile.clone(), names, channels, start)
        .map_err(|e| IngestError::MalformedRow { line: 0, reason: e.to_string() })
}

pub fn write_recording(recording: &Recording) -> String {
    let mut out = String::with_capacity(recording.len() * 16 * (recording.channel_count() + 1));
    out.push_str("time");
    for n in recording.channel_names() {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    for i in 0..recording.len() {
        let _ = write!(out, "{}", recording.time_of(i));
        for ch in recording.channels() {
            let _ = write!(out, ",{}", ch[i]);
        }
        out.push('\n');
    }
    out
}

pub fn parse_annotations(path: impl AsRef<Path>) -> Result<AnnotationTrack, IngestError> {
    parse_annotations_str(&read_file(path.as_ref())?)
}

pub fn parse_annotations_str(text: &str) -> Result<AnnotationTrack, IngestError> {
    let mut rdr = reader(text);
    let mut records = rdr.records();
    let header = records.next().ok_or(IngestError::Empty)?.map_err(csv_error)?;
    let header_line = header.position().map_or(1, |p| p.line());
    if header.iter().collect::<Vec<_>>() != ["start", "end", "label"] {
        return Err(IngestError::MalformedHeader { line: header_line, reason: "expected `start,end,label`".into() });
    }
    let mut intervals = Vec::new();
    for rec in records {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 3 {
            return Err(IngestError::MalformedRow { line, reason: format!("expected 3 fields, found {}", rec.len()) });
        }
        let start = parse_number(&rec[0], line)?;
        let end = parse_number(&rec[1], line)?;
        let label: Label = rec[2].parse().map_err(|source| IngestError::Annotation { line, source })?;
        intervals.push(Interval::new(start, end, label));
    }
    AnnotationTrack::new(intervals).map_err(IngestError::Track)
}

pub fn write_annotations(track: &AnnotationTrack) -> String {
    let mut out = String::from("start,end,label\n");
    for iv in track.intervals() {
        let _ = writeln!(out, "{},{},{}", iv.start, iv.end, iv.label);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn three_channel_csv(rows: usize) -> String {
        let mut s = String::from("# sleeve export\ntime,ch1,ch2,ch3\n");
        for i in 0..rows {
            s.push_str(&format!("{},{},{},{}\n", i as f64 / 250.0, i, -(i as f64), 0.5));
        }
        s
    }

    #[test]
    fn parses_three_seconds() {
        let r = parse_recording_str(&three_channel_csv(750), &DeviceProfile::sleeve()).unwrap();
        assert_eq!(r.duration(), 3.0);
        assert_eq!(r.channel_names(), ["ch1", "ch2", "ch3"]);
    }

    #[test]
    fn nan_row_is_reported_with_line() {
        let mut s = three_channel_csv(5);
        s.push_str("0.02,1,NaN,3\n");
        assert_eq!(parse_recording_str(&s, &DeviceProfile::sleeve()), Err(IngestError::NonFiniteValue { line: 8 }));
    }

    #[test]
    fn extra_field_is_channel_mismatch() {
        let mut s = three_channel_csv(2);
        s.push_str("0.008,1,2,3,4\n");
        assert!(matches!(
            parse_recording_str(&s, &DeviceProfile::sleeve()),
            Err(IngestError::ChannelCountMismatch { line: 5, expected: 3, got: 4 })
        ));
    }

    #[test]
    fn header_only_and_empty() {
        assert_eq!(parse_recording_str("", &DeviceProfile::sleeve()), Err(IngestError::Empty));
        assert_eq!(parse_recording_str("time,a,b,c\n", &DeviceProfile::sleeve()), Err(IngestError::NoSamples));
    }

    #[test]
    fn annotation_examples() {
        let ok = parse_annotations_str("start,end,label\n0,5,relax\n5,10,hand_open\n").unwrap();
        assert_eq!(ok.len(), 2);
        assert_eq!(
            parse_annotations_str("start,end,label\n0,5,relax\n4,10,hand_open\n"),
            Err(IngestError::Track(AnnotationError::OverlappingIntervals(0, 1)))
        );
        assert!(matches!(
            parse_annotations_str("start,end,label\n0,5,fist\n"),
            Err(IngestError::Annotation { line: 2, source: AnnotationError::UnknownLabel(_) })
        ));
        assert_eq!(
            parse_annotations_str("start,end,label\n5,6,relax\n0,1,relax\n"),
            Err(IngestError::Track(AnnotationError::UnsortedIntervals))
        );
    }

    proptest! {
        #[test]
        fn recording_round_trip(
            start in -10.0f64..1000.0,
            data in proptest::collection::vec(proptest::num::f64::NORMAL | proptest::num::f64::ZERO | proptest::num::f64::SUBNORMAL, 3..300),
        ) {
            let n = data.len() / 3;
            let chans: Vec<Vec<f64>> = data.chunks(n).take(3).map(|c| c[..n].to_vec()).collect();
            let rec = Recording::new(DeviceProfile::sleeve(), chans, start).unwrap();
            let back = parse_recording_str(&write_recording(&rec), &DeviceProfile::sleeve()).unwrap();
            prop_assert_eq!(back, rec);
        }

        #[test]
        fn annotation_round_trip(bounds in proptest::collection::vec(0.0f64..1e4, 2..40), labels in proptest::collection::vec(0usize..6, 40)) {
            let mut b = bounds.clone();
            b.sort_by(f64::total_cmp);
            b.dedup();
            let intervals: Vec<Interval> = b.windows(2).zip(&labels).map(|(w, &l)| Interval::new(w[0], w[1], Label::ALL[l])).collect();
            let track = AnnotationTrack::new(intervals).unwrap();
            prop_assert_eq!(parse_annotations_str(&write_annotations(&track)).unwrap(), track);
        }

        #[test]
        fn arbitrary_text_never_panics(s in ".{0,400}") {
            let _ = parse_recording_str(&s, &DeviceProfile::sleeve());
            let _ = parse_annotations_str(&s);
        }
    }
}
