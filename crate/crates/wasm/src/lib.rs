//! Bindings behind `www/index.html`: filter response explorer, synthetic
//! session with envelope ratios, and per-window feature traces.

use emg_core::config::FilterConfig;
use emg_core::pipeline::{analyze, session_envelope, session_features};
use emg_core::session::Label;
use emg_core::signal::{BiquadCascade, DeviceProfile};
use emg_core::synth::{generate, preset, PRESET_NAMES};
use emg_core::{PipelineConfig, Session};
use wasm_bindgen::prelude::*;

const MAX_POINTS: usize = 1500;
const DB_FLOOR: f64 = -300.0;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn profile(name: &str) -> Result<DeviceProfile, JsError> {
    DeviceProfile::by_name(name).ok_or_else(|| js_err(format!("unknown device profile {name:?}")))
}

/// Preprocessing chain as the pipeline would build it, and whether the
/// bandpass made it in.
fn chain(
    device: &str,
    low_hz: f64,
    high_hz: f64,
    order: usize,
    notch_q: f64,
) -> Result<(DeviceProfile, BiquadCascade, bool), JsError> {
    let p = profile(device)?;
    if !(low_hz > 0.0 && high_hz > low_hz) {
        return Err(js_err("need 0 < low < high"));
    }
    let cfg = FilterConfig {
        bandpass_low_hz: low_hz,
        bandpass_high_hz: high_hz,
        bandpass_order: order,
        notch_q,
        ..FilterConfig::default()
    };
    let pre = cfg.preprocessor(&p).map_err(js_err)?;
    let bandpass = high_hz < p.nyquist();
    Ok((p, pre.combined(), bandpass))
}

#[wasm_bindgen]
pub fn presets() -> Vec<String> {
    PRESET_NAMES.iter().map(|s| s.to_string()).collect()
}

/// Magnitude response of the preprocessing chain (bandpass then notches) as
/// interleaved `[freq, dB, freq, dB, ...]`. Stages that cannot be designed
/// at the device rate are dropped, as in the pipeline.
#[wasm_bindgen]
pub fn filter_response(
    device: &str,
    low_hz: f64,
    high_hz: f64,
    order: usize,
    notch_q: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    let (p, chain, _) = chain(device, low_hz, high_hz, order, notch_q)?;
    Ok(chain.frequency_response(p.rate(), points.clamp(16, 4096)).into_iter().flat_map(|(f, db)| [f, db]).collect())
}

/// Response at each corner (when the bandpass applies) and each notch, as
/// JSON `{bandpass, points: [{what, hz, db}]}`.
#[wasm_bindgen]
pub fn filter_markers(device: &str, low_hz: f64, high_hz: f64, order: usize, notch_q: f64) -> Result<String, JsError> {
    let (p, chain, bandpass) = chain(device, low_hz, high_hz, order, notch_q)?;
    let mut marks = Vec::new();
    if bandpass {
        marks.extend([("low corner", low_hz), ("high corner", high_hz)]);
    }
    marks.extend(FilterConfig::default().notch_hz.into_iter().map(|f| ("notch", f)));
    let rows: Vec<serde_json::Value> = marks
        .into_iter()
        .filter(|(_, f)| *f < p.nyquist())
        .map(|(what, f)| serde_json::json!({ "what": what, "hz": f, "db": chain.magnitude_db_at(f, p.rate()).max(DB_FLOOR) }))
        .collect();
    Ok(serde_json::json!({ "bandpass": bandpass, "points": rows }).to_string())
}

/// A generated session kept in memory between calls.
#[wasm_bindgen]
pub struct Demo {
    session: Session,
    config: PipelineConfig,
}

#[wasm_bindgen]
impl Demo {
    /// `gain_scale` multiplies every programmed movement gain so the page
    /// can show ratios following the generator.
    #[wasm_bindgen(constructor)]
    pub fn new(preset_name: &str, device: &str, seed: u64, gain_scale: f64) -> Result<Demo, JsError> {
        let mut s = preset(preset_name).map_err(js_err)?.with_profile(profile(device)?).with_seed(seed);
        for g in s.gains.values_mut() {
            for v in g.iter_mut() {
                *v *= gain_scale;
            }
        }
        let (session, _) = generate(&s).map_err(js_err)?;
        Ok(Demo { session, config: PipelineConfig::default() })
    }

    pub fn channel_names(&self) -> Vec<String> {
        self.session.recording.channel_names().to_vec()
    }

    pub fn duration(&self) -> f64 {
        self.session.recording.len() as f64 / self.session.recording.profile().rate()
    }

    /// Annotation intervals as JSON `[{start, end, label}]`.
    pub fn intervals(&self) -> String {
        let rows: Vec<serde_json::Value> = self
            .session
            .annotations
            .intervals()
            .iter()
            .map(|iv| serde_json::json!({ "start": iv.start, "end": iv.end, "label": iv.label.to_string() }))
            .collect();
        serde_json::Value::Array(rows).to_string()
    }

    /// Decimated envelope of one channel as interleaved `[t, v, ...]`.
    pub fn envelope(&self, channel: usize) -> Result<Vec<f64>, JsError> {
        let env = session_envelope(&self.session.recording, &self.config).map_err(js_err)?;
        let x = env.channels().get(channel).ok_or_else(|| js_err("no such channel"))?;
        let rate = env.profile().rate();
        let t0 = env.as_recording().start_time();
        let step = x.len().div_ceil(MAX_POINTS).max(1);
        Ok(x.chunks(step)
            .enumerate()
            .flat_map(|(i, c)| [t0 + (i * step) as f64 / rate, c.iter().copied().fold(0.0, f64::max)])
            .collect())
    }

    /// Active/rest ratio report as JSON.
    pub fn ratios(&self) -> Result<String, JsError> {
        let r = analyze(&self.session, &self.config).map_err(js_err)?;
        serde_json::to_string(&r).map_err(js_err)
    }

    /// One feature column over sliding windows as interleaved
    /// `[window_end_time, value, ...]`, plus its name in `feature_name`.
    pub fn feature_trace(
        &self,
        channel: usize,
        feature: usize,
        window_length: usize,
        window_offset: usize,
    ) -> Result<Vec<f64>, JsError> {
        let m = self.features(window_length, window_offset)?;
        let col = channel * 8 + feature;
        if feature >= 8 || col >= m.width() {
            return Err(js_err("no such feature"));
        }
        Ok(m.window_end_times.iter().zip(m.column(col)).flat_map(|(t, v)| [*t, v]).collect())
    }

    pub fn feature_name(&self, channel: usize, feature: usize) -> String {
        emg_core::features::schema_for(self.session.recording.channel_names())
            .get(channel * 8 + feature)
            .cloned()
            .unwrap_or_default()
    }

    /// Fraction of windows whose label is not relax, a quick sanity figure
    /// for the window settings.
    pub fn active_window_fraction(&self, window_length: usize, window_offset: usize) -> Result<f64, JsError> {
        let m = self.features(window_length, window_offset)?;
        Ok(m.labels.iter().filter(|l| **l != Label::Relax).count() as f64 / m.rows().max(1) as f64)
    }
}

impl Demo {
    fn features(&self, length: usize, offset: usize) -> Result<emg_core::features::FeatureMatrix, JsError> {
        let mut cfg = self.config.clone();
        cfg.features.window_length = length;
        cfg.features.window_offset = offset;
        session_features(&self.session, &cfg).map_err(js_err)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn response_and_markers() {
        let r = filter_response("sleeve", 50.0, 115.0, 4, 30.0, 256).unwrap();
        assert_eq!(r.len(), 512);
        let marks: serde_json::Value =
            serde_json::from_str(&filter_markers("sleeve", 50.0, 115.0, 4, 30.0).unwrap()).unwrap();
        assert_eq!(marks["bandpass"], true);
        let marks = marks["points"].as_array().unwrap();
        assert_eq!(marks.len(), 4);
        assert!((marks[1]["db"].as_f64().unwrap() + 3.0).abs() < 0.3);
        assert!(marks[3]["db"].as_f64().unwrap() < -30.0);

        let arm: serde_json::Value =
            serde_json::from_str(&filter_markers("armband", 50.0, 115.0, 4, 30.0).unwrap()).unwrap();
        assert_eq!(arm["bandpass"], false);
        assert!(arm["points"].as_array().unwrap().iter().all(|m| m["db"].is_f64()));
    }

    #[test]
    fn demo_session_round_trip() {
        let d = Demo::new("healthy_strong", "sleeve", 3, 1.0).unwrap();
        assert_eq!(d.channel_names().len(), 3);
        let env = d.envelope(0).unwrap();
        assert!(env.len() / 2 <= MAX_POINTS + 1);
        let r: serde_json::Value = serde_json::from_str(&d.ratios().unwrap()).unwrap();
        let thumb = r["conditions"]["thumb_abduction"].as_f64().unwrap();
        assert!((thumb / 18.4 - 1.0).abs() < 0.1, "{thumb}");
        let trace = d.feature_trace(1, 1, 250, 10).unwrap();
        assert_eq!(d.feature_name(1, 1), "ch2.RMS");
        assert!(trace.len() > 100);
    }
}
