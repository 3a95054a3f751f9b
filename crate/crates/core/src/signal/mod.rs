//! Filter design, filter application and envelope extraction for
//! multi-channel surface-EMG recordings.
//!
//! Filters are realized as cascades of normalized second-order sections
//! ([`Biquad`]) and evaluated in direct form II transposed. Designs follow
//! the classic analog-prototype route: Butterworth poles, frequency
//! transformation, then bilinear transform with pre-warped corners, so the
//! digital -3 dB points land exactly on the requested corner frequencies.

mod design;
mod recording;

pub use design::{design_bandpass, design_lowpass, design_notch};
pub use recording::{DeviceProfile, Envelope, Recording, Units};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum FilterError {
    #[error("design infeasible: {0}")]
    DesignInfeasible(String),
    #[error("invalid filter order {0} (expected one of 2, 4, 6, 8)")]
    InvalidOrder(usize),
    #[error("signal of {len} samples is too short for zero-phase filtering (needs more than {needed})")]
    TooShort { len: usize, needed: usize },
    #[error("malformed filter document: {0}")]
    Malformed(String),
}

/// One normalized second-order section, `a0 == 1`.
///
/// `y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2] - a1 y[n-1] - a2 y[n-2]`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Biquad {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Biquad {
    pub const IDENTITY: Biquad = Biquad { b0: 1.0, b1: 0.0, b2: 0.0, a1: 0.0, a2: 0.0 };

    /// Complex transfer function at normalized angular frequency `omega` (rad/sample).
    pub fn response(&self, omega: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -omega);
        let z2 = z1 * z1;
        let num = self.b0 + z1 * self.b1 + z2 * self.b2;
        let den = 1.0 + z1 * self.a1 + z2 * self.a2;
        num / den
    }

    /// Roots of `z^2 + a1 z + a2`. First-order sections (`a2 == 0`) report
    /// a single meaningful pole and a pole at the origin.
    pub fn poles(&self) -> [Complex64; 2] {
        let disc = Complex64::new(self.a1 * self.a1 - 4.0 * self.a2, 0.0).sqrt();
        [(-self.a1 + disc) / 2.0, (-self.a1 - disc) / 2.0]
    }

    fn scaled(self, g: f64) -> Biquad {
        Biquad { b0: self.b0 * g, b1: self.b1 * g, b2: self.b2 * g, ..self }
    }
}

/// Pole-radius margin every designed section must respect.
pub const STABILITY_MARGIN: f64 = 1e-9;

/// An IIR filter realized as an ordered cascade of second-order sections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiquadCascade {
    pub sections: Vec<Biquad>,
    pub design_descriptor: String,
}

impl BiquadCascade {
    pub fn identity() -> Self {
        BiquadCascade { sections: Vec::new(), design_descriptor: "identity".into() }
    }

    /// Total filter order: two poles per section.
    pub fn order(&self) -> usize {
        2 * self.sections.len()
    }

    pub fn is_stable(&self) -> bool {
        self.sections.iter().flat_map(|s| s.poles()).all(|p| p.norm() < 1.0 - STABILITY_MARGIN)
    }

    /// Largest pole radius across all sections (0 for the identity).
    pub fn max_pole_radius(&self) -> f64 {
        self.sections.iter().flat_map(|s| s.poles()).map(|p| p.norm()).fold(0.0, f64::max)
    }

    pub fn response_at(&self, freq: f64, rate: f64) -> Complex64 {
        let omega = 2.0 * PI * freq / rate;
        self.sections.iter().fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(omega))
    }

    pub fn magnitude_db_at(&self, freq: f64, rate: f64) -> f64 {
        20.0 * self.response_at(freq, rate).norm().log10()
    }

    /// Magnitude response in dB at `n_points` uniformly spaced frequencies
    /// covering `[0, rate/2]` inclusive.
    pub fn frequency_response(&self, rate: f64, n_points: usize) -> Vec<(f64, f64)> {
        let n = n_points.max(2);
        let step = rate / 2.0 / (n - 1) as f64;
        (0..n)
            .map(|i| {
                let f = i as f64 * step;
                (f, self.magnitude_db_at(f, rate))
            })
            .collect()
    }

    /// Filters one channel causally with zero initial state.
    pub fn filter_slice(&self, input: &[f64]) -> Vec<f64> {
        let mut out = input.to_vec();
        self.filter_in_place(&mut out);
        out
    }

    pub fn filter_in_place(&self, data: &mut [f64]) {
        for s in &self.sections {
            let (mut z1, mut z2) = (0.0, 0.0);
            for x in data.iter_mut() {
                let xin = *x;
                let y = s.b0 * xin + z1;
                z1 = s.b1 * xin - s.a1 * y + z2;
                z2 = s.b2 * xin - s.a2 * y;
                *x = y;
            }
        }
    }

    /// Forward pass, reverse, forward pass, reverse.
    pub fn filter_zero_phase_slice(&self, input: &[f64]) -> Result<Vec<f64>, FilterError> {
        let needed = 3 * self.order();
        if input.len() <= needed {
            return Err(FilterError::TooShort { len: input.len(), needed });
        }
        let mut out = input.to_vec();
        self.filter_in_place(&mut out);
        out.reverse();
        self.filter_in_place(&mut out);
        out.reverse();
        Ok(out)
    }

    /// Serialized as a TOML document with coefficients to 17 significant digits.
    pub fn to_document(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "design_descriptor = {:?}", self.design_descriptor);
        for sec in &self.sections {
            let _ = writeln!(s, "\n[[sections]]");
            for (k, v) in [("b0", sec.b0), ("b1", sec.b1), ("b2", sec.b2), ("a1", sec.a1), ("a2", sec.a2)] {
                let _ = writeln!(s, "{k} = {v:.16e}");
            }
        }
        s
    }

    pub fn from_document(doc: &str) -> Result<Self, FilterError> {
        #[derive(Deserialize)]
        struct Doc {
            design_descriptor: String,
            #[serde(default)]
            sections: Vec<Biquad>,
        }
        let d: Doc = toml::from_str(doc).map_err(|e| FilterError::Malformed(e.to_string()))?;
        Ok(BiquadCascade { sections: d.sections, design_descriptor: d.design_descriptor })
    }
}

/// Causal application to every channel of a recording.
pub fn apply_causal(cascade: &BiquadCascade, recording: &Recording) -> Recording {
    recording.map_channels(|ch| Ok::<_, FilterError>(cascade.filter_slice(ch))).expect("causal filtering is infallible")
}

/// Zero-phase (forward-backward) application to every channel.
pub fn apply_zero_phase(cascade: &BiquadCascade, recording: &Recording) -> Result<Recording, FilterError> {
    recording.map_channels(|ch| cascade.filter_zero_phase_slice(ch))
}

pub fn rectify(recording: &Recording) -> Recording {
    recording
        .map_channels(|ch| Ok::<_, FilterError>(ch.iter().map(|x| x.abs()).collect()))
        .expect("rectification is infallible")
}

/// Rectify, zero-phase low-pass, clamp ringing below zero.
pub fn envelope(recording: &Recording, lowpass: &BiquadCascade) -> Result<Envelope, FilterError> {
    let rectified = rectify(recording);
    let smoothed = apply_zero_phase(lowpass, &rectified)?;
    Ok(Envelope::from_recording_clamped(smoothed))
}

/// The analysis chain applied to raw recordings before envelope or feature
/// extraction: optional bandpass, then one notch per powerline frequency.
#[derive(Debug, Clone)]
pub struct Preprocessor {
    pub stages: Vec<BiquadCascade>,
    /// Forward-backward filtering; causal single pass otherwise.
    pub zero_phase: bool,
}

impl Preprocessor {
    pub fn run(&self, recording: &Recording) -> Result<Recording, FilterError> {
        let mut current = recording.clone();
        for stage in &self.stages {
            current = if self.zero_phase { apply_zero_phase(stage, &current)? } else { apply_causal(stage, &current) };
        }
        Ok(current)
    }

    /// Everything merged into a single cascade (useful for response plots).
    pub fn combined(&self) -> BiquadCascade {
        BiquadCascade {
            sections: self.stages.iter().flat_map(|s| s.sections.iter().copied()).collect(),
            design_descriptor: self.stages.iter().map(|s| s.design_descriptor.as_str()).collect::<Vec<_>>().join("+"),
        }
    }
}
