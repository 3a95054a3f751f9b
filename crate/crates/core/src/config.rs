//! Pipeline configuration. Every tunable default lives here so a run's
//! provenance is one document.

use crate::activity::AggregateMode;
use crate::features::{SpectralWindow, WindowSpec};
use crate::models::{ClassMode, LdaParams, MlpParams, RfParams};
use crate::signal::{
    design_bandpass, design_lowpass, design_notch, BiquadCascade, DeviceProfile, FilterError, Preprocessor,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error(transparent)]
    Parse(#[from] toml::de::Error),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub bandpass_low_hz: f64,
    pub bandpass_high_hz: f64,
    pub bandpass_order: usize,
    /// Skip the bandpass when the high corner is at or above Nyquist
    /// instead of failing (the 200 Hz armband case).
    pub skip_infeasible_bandpass: bool,
    pub notch_hz: Vec<f64>,
    pub notch_q: f64,
    pub envelope_lowpass_hz: f64,
    pub envelope_lowpass_order: usize,
    pub zero_phase: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            bandpass_low_hz: 50.0,
            bandpass_high_hz: 115.0,
            bandpass_order: 4,
            skip_infeasible_bandpass: true,
            notch_hz: vec![50.0, 60.0],
            notch_q: 30.0,
            envelope_lowpass_hz: 40.0,
            envelope_lowpass_order: 4,
            zero_phase: true,
        }
    }
}

impl FilterConfig {
    /// Bandpass (when the profile can host it) followed by the notches that
    /// fall below Nyquist.
    pub fn preprocessor(&self, profile: &DeviceProfile) -> Result<Preprocessor, FilterError> {
        let rate = profile.rate();
        let mut stages = Vec::new();
        match design_bandpass(self.bandpass_low_hz, self.bandpass_high_hz, self.bandpass_order, rate) {
            Ok(bp) => stages.push(bp),
            Err(FilterError::DesignInfeasible(_)) if self.skip_infeasible_bandpass => {}
            Err(e) => return Err(e),
        }
        for &f in &self.notch_hz {
            if f < profile.nyquist() {
                stages.push(design_notch(f, self.notch_q, rate)?);
            }
        }
        Ok(Preprocessor { stages, zero_phase: self.zero_phase })
    }

    pub fn envelope_lowpass(&self, profile: &DeviceProfile) -> Result<BiquadCascade, FilterError> {
        design_lowpass(self.envelope_lowpass_hz, self.envelope_lowpass_order, profile.rate())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActivityConfig {
    pub guard_trim_s: f64,
    pub rest_floor: f64,
    pub aggregate: AggregateMode,
}

impl Default for ActivityConfig {
    fn default() -> Self {
        ActivityConfig { guard_trim_s: 0.5, rest_floor: 1e-9, aggregate: AggregateMode::MeanOfChannelRatios }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub window_length: usize,
    pub window_offset: usize,
    pub spectral_window: SpectralWindow,
    pub zcr_threshold: f64,
    /// Filter the raw recording with the preprocessing chain before
    /// windowing.
    pub preprocess: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            window_length: 250,
            window_offset: 10,
            spectral_window: SpectralWindow::Hann,
            zcr_threshold: 0.0,
            preprocess: true,
        }
    }
}

impl FeatureConfig {
    pub fn window_spec(&self) -> WindowSpec {
        WindowSpec { length: self.window_length, offset: self.window_offset }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub class_mode: ClassMode,
    pub lda: LdaParams,
    pub rf: RfParams,
    pub mlp: MlpParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[derive(Default)]
pub struct PipelineConfig {
    pub seed: u64,
    pub filter: FilterConfig,
    pub activity: ActivityConfig,
    pub features: FeatureConfig,
    pub models: ModelConfig,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let c: Self = toml::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    /// Rejects values no stage could run with.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let f = &self.filter;
        let a = &self.activity;
        let w = &self.features;
        let m = &self.models;
        let positive = [
            ("filter.bandpass_low_hz", f.bandpass_low_hz),
            ("filter.notch_q", f.notch_q),
            ("filter.envelope_lowpass_hz", f.envelope_lowpass_hz),
            ("activity.rest_floor", a.rest_floor),
            ("models.mlp.learning_rate", m.mlp.learning_rate),
            ("models.mlp.epsilon", m.mlp.epsilon),
        ];
        let non_negative = [
            ("activity.guard_trim_s", a.guard_trim_s),
            ("features.zcr_threshold", w.zcr_threshold),
            ("models.lda.ridge_scale", m.lda.ridge_scale),
        ];
        let counts = [
            ("filter.bandpass_order", f.bandpass_order),
            ("filter.envelope_lowpass_order", f.envelope_lowpass_order),
            ("features.window_offset", w.window_offset),
            ("models.rf.trees", m.rf.trees),
            ("models.rf.min_leaf", m.rf.min_leaf),
            ("models.mlp.hidden", m.mlp.hidden),
            ("models.mlp.epochs", m.mlp.epochs),
            ("models.mlp.batch_size", m.mlp.batch_size),
        ];
        let bad = |k: &str, why: &str| Err(ConfigError::Invalid(format!("{k} {why}")));
        for (k, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(k, "must be a positive number");
            }
        }
        for (k, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return bad(k, "must be zero or positive");
            }
        }
        for (k, v) in counts {
            if v == 0 {
                return bad(k, "must be at least 1");
            }
        }
        if !(f.bandpass_high_hz.is_finite() && f.bandpass_high_hz > f.bandpass_low_hz) {
            return bad("filter.bandpass_high_hz", "must exceed filter.bandpass_low_hz");
        }
        if f.notch_hz.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return bad("filter.notch_hz", "entries must be positive");
        }
        if w.window_length < 2 {
            return bad("features.window_length", "must be at least 2");
        }
        for (k, v) in [("models.mlp.beta1", m.mlp.beta1), ("models.mlp.beta2", m.mlp.beta2)] {
            if !(0.0..1.0).contains(&v) {
                return bad(k, "must be in [0, 1)");
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config is always serializable")
    }
}
