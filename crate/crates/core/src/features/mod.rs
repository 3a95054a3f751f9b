//! Sliding-window segmentation, per-channel time- and frequency-domain
//! features, and train-set standardization.

mod spectral;
mod standardize;

pub use spectral::{freq_features, SpectralEstimator, SpectralFeatures, SpectralWindow};
pub use standardize::Standardizer;

use crate::session::{AnnotationTrack, Label};
use crate::signal::Recording;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Feature names in per-channel schema order.
pub const FEATURE_NAMES: [&str; 8] = ["MAV", "RMS", "VAR", "WL", "ZCR", "MNF", "MDF", "TTP"];
pub const FEATURES_PER_CHANNEL: usize = FEATURE_NAMES.len();

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FeatureError {
    #[error("recording has {len} samples, shorter than the {window}-sample window")]
    TooShort { len: usize, window: usize },
    #[error("invalid window spec: {0}")]
    InvalidWindow(String),
    #[error("need at least 2 rows to fit a standardizer, got {0}")]
    TooFewRows(usize),
    #[error("feature matrix has {got} columns, standardizer expects {expected}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("malformed feature table: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub length: usize,
    pub offset: usize,
}

impl WindowSpec {
    pub fn check(&self) -> Result<(), FeatureError> {
        if self.length < 2 {
            return Err(FeatureError::InvalidWindow(format!("length {} must be at least 2", self.length)));
        }
        if self.offset == 0 || self.offset > self.length {
            return Err(FeatureError::InvalidWindow(format!("offset {} must lie in 1..={}", self.offset, self.length)));
        }
        Ok(())
    }

    /// `floor((n - length) / offset) + 1`, or 0 when `n < length`.
    pub fn window_count(&self, n: usize) -> usize {
        if n < self.length {
            0
        } else {
            (n - self.length) / self.offset + 1
        }
    }
}

/// Window placement and labels, before any feature is computed.
#[derive(Debug, Clone, PartialEq)]
pub struct Windows {
    pub spec: WindowSpec,
    pub starts: Vec<usize>,
    pub labels: Vec<Label>,
    pub end_times: Vec<f64>,
}

/// Window `i` covers samples `[i*offset, i*offset + length)` and takes the
/// ground-truth label at its final sample.
pub fn slide_windows(
    recording: &Recording,
    annotations: &AnnotationTrack,
    spec: WindowSpec,
) -> Result<Windows, FeatureError> {
    spec.check()?;
    let n = recording.len();
    if n < spec.length {
        return Err(FeatureError::TooShort { len: n, window: spec.length });
    }
    let count = spec.window_count(n);
    let starts: Vec<usize> = (0..count).map(|i| i * spec.offset).collect();
    let end_times: Vec<f64> = starts.iter().map(|&s| recording.time_of(s + spec.length - 1)).collect();
    let labels = end_times.iter().map(|&t| annotations.label_at(t)).collect();
    Ok(Windows { spec, starts, labels, end_times })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeFeatures {
    pub mav: f64,
    pub rms: f64,
    pub variance: f64,
    pub waveform_length: f64,
    pub zero_crossings: f64,
}

/// MAV, RMS, population variance, waveform length, and the raw count of
/// sign changes. Samples with `|x| <= zcr_threshold` carry the previous
/// sign forward.
pub fn time_features(window: &[f64], zcr_threshold: f64) -> TimeFeatures {
    let n = window.len() as f64;
    let (mut abs_sum, mut sq_sum, mut sum) = (0.0, 0.0, 0.0);
    for &x in window {
        abs_sum += x.abs();
        sq_sum += x * x;
        sum += x;
    }
    let mean = sum / n;
    let variance = window.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let waveform_length = window.windows(2).map(|w| (w[1] - w[0]).abs()).sum();

    let mut crossings = 0u32;
    let mut prev_sign = 0i8;
    for &x in window {
        let sign = if x > zcr_threshold {
            1
        } else if x < -zcr_threshold {
            -1
        } else {
            continue;
        };
        if prev_sign != 0 && sign != prev_sign {
            crossings += 1;
        }
        prev_sign = sign;
    }

    TimeFeatures {
        mav: abs_sum / n,
        rms: (sq_sum / n).sqrt(),
        variance,
        waveform_length,
        zero_crossings: f64::from(crossings),
    }
}

/// Row-major matrix of window features with per-row labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub schema: Vec<String>,
    data: Vec<f64>,
    pub labels: Vec<Label>,
    pub window_end_times: Vec<f64>,
    /// Number of (window, channel) cells whose spectrum had no AC power.
    pub zero_power_cells: usize,
    /// Identifier of the session the rows came from.
    pub source: String,
}

impl FeatureMatrix {
    pub fn new(
        schema: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Vec<Label>,
        window_end_times: Vec<f64>,
    ) -> Result<Self, FeatureError> {
        let width = schema.len();
        if rows.len() != labels.len() || rows.len() != window_end_times.len() {
            return Err(FeatureError::Malformed(format!(
                "{} rows, {} labels, {} times",
                rows.len(),
                labels.len(),
                window_end_times.len()
            )));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != width) {
            return Err(FeatureError::WidthMismatch { expected: width, got: r.len() });
        }
        Ok(FeatureMatrix {
            schema,
            data: rows.into_iter().flatten().collect(),
            labels,
            window_end_times,
            zero_power_cells: 0,
            source: String::new(),
        })
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = source.into();
        self
    }

    pub fn width(&self) -> usize {
        self.schema.len()
    }

    pub fn rows(&self) -> usize {
        self.labels.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.data[i * w..(i + 1) * w]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.width().max(1)).take(self.rows())
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        self.iter_rows().map(|r| r[c]).collect()
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Applies `f` to every value of column `c`.
    pub fn map_column(&self, c: usize, f: impl Fn(f64) -> f64) -> FeatureMatrix {
        let mut out = self.clone();
        let w = out.width();
        for r in 0..out.rows() {
            out.data[r * w + c] = f(out.data[r * w + c]);
        }
        out
    }

    /// Applies `f` to every row.
    pub fn map_rows(&self, f: impl Fn(&mut [f64])) -> FeatureMatrix {
        let mut out = self.clone();
        let w = out.width();
        for r in out.data.chunks_exact_mut(w) {
            f(r);
        }
        out
    }

    /// Keeps rows for which `keep(label)` holds.
    pub fn filter_labels(&self, keep: impl Fn(Label) -> bool) -> FeatureMatrix {
        let mut out = FeatureMatrix {
            schema: self.schema.clone(),
            data: Vec::new(),
            labels: Vec::new(),
            window_end_times: Vec::new(),
            zero_power_cells: self.zero_power_cells,
            source: self.source.clone(),
        };
        for (i, &l) in self.labels.iter().enumerate() {
            if keep(l) {
                out.data.extend_from_slice(self.row(i));
                out.labels.push(l);
                out.window_end_times.push(self.window_end_times[i]);
            }
        }
        out
    }

    /// CSV with `window_end_time,label,<schema...>` header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("window_end_time,label");
        for name in &self.schema {
            s.push(',');
            s.push_str(name);
        }
        s.push('\n');
        for (i, row) in self.iter_rows().enumerate() {
            let _ = write!(s, "{},{}", self.window_end_times[i], self.labels[i]);
            for v in row {
                let _ = write!(s, ",{v}");
            }
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self, FeatureError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).comment(Some(b'#')).from_reader(text.as_bytes());
        let header = rdr.headers().map_err(|e| FeatureError::Malformed(e.to_string()))?.clone();
        if header.len() < 2 || &header[0] != "window_end_time" || &header[1] != "label" {
            return Err(FeatureError::Malformed("header must start with window_end_time,label".into()));
        }
        let schema: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
        let (mut rows, mut labels, mut times) = (Vec::new(), Vec::new(), Vec::new());
        for rec in rdr.records() {
            let rec = rec.map_err(|e| FeatureError::Malformed(e.to_string()))?;
            let num = |s: &str| s.parse::<f64>().map_err(|_| FeatureError::Malformed(format!("{s:?} is not a number")));
            times.push(num(&rec[0])?);
            labels.push(rec[1].parse::<Label>().map_err(|e| FeatureError::Malformed(e.to_string()))?);
            rows.push(rec.iter().skip(2).map(num).collect::<Result<Vec<_>, _>>()?);
        }
        FeatureMatrix::new(schema, rows, labels, times)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractOptions {
    pub spectral_window: SpectralWindow,
    pub zcr_threshold: f64,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions { spectral_window: SpectralWindow::Hann, zcr_threshold: 0.0 }
    }
}

pub fn schema_for(channel_names: &[String]) -> Vec<String> {
    channel_names.iter().flat_map(|ch| FEATURE_NAMES.iter().map(move |f| format!("{ch}.{f}"))).collect()
}

fn window_row(
    recording: &Recording,
    start: usize,
    len: usize,
    est: &SpectralEstimator,
    opts: &ExtractOptions,
) -> (Vec<f64>, usize) {
    let mut row = Vec::with_capacity(recording.channel_count() * FEATURES_PER_CHANNEL);
    let mut zero_power = 0;
    for ch in recording.channels() {
        let w = &ch[start..start + len];
        let t = time_features(w, opts.zcr_threshold);
        let f = est.features(w);
        zero_power += usize::from(f.zero_power);
        row.extend_from_slice(&[
            t.mav,
            t.rms,
            t.variance,
            t.waveform_length,
            t.zero_crossings,
            f.mean_frequency,
            f.median_frequency,
            f.total_power,
        ]);
    }
    (row, zero_power)
}

/// All eight features for every window and channel, channel-major.
pub fn extract(
    recording: &Recording,
    annotations: &AnnotationTrack,
    spec: WindowSpec,
    opts: &ExtractOptions,
) -> Result<FeatureMatrix, FeatureError> {
    let windows = slide_windows(recording, annotations, spec)?;
    let est = SpectralEstimator::new(spec.length, recording.profile().rate(), opts.spectral_window);

    #[cfg(feature = "parallel")]
    let computed: Vec<(Vec<f64>, usize)> =
        windows.starts.par_iter().map(|&s| window_row(recording, s, spec.length, &est, opts)).collect();
    #[cfg(not(feature = "parallel"))]
    let computed: Vec<(Vec<f64>, usize)> =
        windows.starts.iter().map(|&s| window_row(recording, s, spec.length, &est, opts)).collect();

    let zero_power_cells = computed.iter().map(|(_, z)| z).sum();
    let rows = computed.into_iter().map(|(r, _)| r).collect();
    let mut m = FeatureMatrix::new(schema_for(recording.channel_names()), rows, windows.labels, windows.end_times)?;
    m.zero_power_cells = zero_power_cells;
    Ok(m)
}
