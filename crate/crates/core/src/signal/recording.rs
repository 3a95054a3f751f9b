use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    Microvolts,
    /// Opaque device units (e.g. an armband's onboard-processed output).
    Arbitrary,
}

impl Units {
    pub fn symbol(self) -> &'static str {
        match self {
            Units::Microvolts => "uV",
            Units::Arbitrary => "a.u.",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviceProfile {
    pub name: String,
    pub sample_rate: u32,
    pub units: Units,
    pub channel_count: usize,
}

impl DeviceProfile {
    pub fn new(name: &str, sample_rate: u32, units: Units, channel_count: usize) -> Result<Self, String> {
        if sample_rate == 0 {
            return Err("sample_rate must be positive".into());
        }
        if channel_count == 0 {
            return Err("channel_count must be at least 1".into());
        }
        Ok(DeviceProfile { name: name.to_string(), sample_rate, units, channel_count })
    }

    /// 3-channel textile sleeve sampled at 250 Hz.
    pub fn sleeve() -> Self {
        DeviceProfile { name: "sleeve".into(), sample_rate: 250, units: Units::Microvolts, channel_count: 3 }
    }

    /// 8-channel forearm armband sampled at 200 Hz.
    pub fn armband() -> Self {
        DeviceProfile { name: "armband".into(), sample_rate: 200, units: Units::Arbitrary, channel_count: 8 }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "sleeve" => Some(Self::sleeve()),
            "armband" => Some(Self::armband()),
            _ => None,
        }
    }

    pub fn rate(&self) -> f64 {
        f64::from(self.sample_rate)
    }

    pub fn nyquist(&self) -> f64 {
        self.rate() / 2.0
    }

    pub fn default_channel_names(&self) -> Vec<String> {
        (1..=self.channel_count).map(|i| format!("ch{i}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RecordingError {
    #[error("recording has {got} channels but the profile declares {expected}")]
    ChannelCount { expected: usize, got: usize },
    #[error("channel {channel} has {got} samples, expected {expected}")]
    RaggedChannels { channel: usize, expected: usize, got: usize },
    #[error("non-finite sample in channel {channel} at index {index}")]
    NonFinite { channel: usize, index: usize },
}

/// Uniformly sampled multi-channel signal, stored channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    profile: DeviceProfile,
    channel_names: Vec<String>,
    samples: Vec<Vec<f64>>,
    start_time: f64,
}

impl Recording {
    pub fn new(profile: DeviceProfile, samples: Vec<Vec<f64>>, start_time: f64) -> Result<Self, RecordingError> {
        let names = profile.default_channel_names();
        Self::with_names(profile, names, samples, start_time)
    }

    pub fn with_names(
        profile: DeviceProfile,
        channel_names: Vec<String>,
        samples: Vec<Vec<f64>>,
        start_time: f64,
    ) -> Result<Self, RecordingError> {
        if samples.len() != profile.channel_count || channel_names.len() != profile.channel_count {
            return Err(RecordingError::ChannelCount { expected: profile.channel_count, got: samples.len() });
        }
        let len = samples[0].len();
        for (c, ch) in samples.iter().enumerate() {
            if ch.len() != len {
                return Err(RecordingError::RaggedChannels { channel: c, expected: len, got: ch.len() });
            }
            if let Some(i) = ch.iter().position(|v| !v.is_finite()) {
                return Err(RecordingError::NonFinite { channel: c, index: i });
            }
        }
        Ok(Recording { profile, channel_names, samples, start_time })
    }

    pub fn profile(&self) -> &DeviceProfile {
        &self.profile
    }

    pub fn channel_names(&self) -> &[String] {
        &self.channel_names
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn channel_count(&self) -> usize {
        self.samples.len()
    }

    pub fn len(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn start_time(&self) -> f64 {
        self.start_time
    }

    pub fn duration(&self) -> f64 {
        self.len() as f64 / self.profile.rate()
    }

    /// Absolute timestamp of sample `i`.
    pub fn time_of(&self, i: usize) -> f64 {
        self.start_time + i as f64 / self.profile.rate()
    }

    pub fn end_time(&self) -> f64 {
        self.start_time + self.duration()
    }

    /// Applies `f` to each channel independently. Channels carry no shared
    /// state, so the parallel and sequential paths give identical output.
    pub fn map_channels<E, F>(&self, f: F) -> Result<Recording, E>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>, E> + Sync + Send,
        E: Send,
    {
        #[cfg(feature = "parallel")]
        let out: Result<Vec<Vec<f64>>, E> = self.samples.par_iter().map(|c| f(c)).collect();
        #[cfg(not(feature = "parallel"))]
        let out: Result<Vec<Vec<f64>>, E> = self.samples.iter().map(|c| f(c)).collect();
        Ok(Recording {
            profile: self.profile.clone(),
            channel_names: self.channel_names.clone(),
            samples: out?,
            start_time: self.start_time,
        })
    }

    /// Keeps channels in the given order (used for permutation checks).
    pub fn select_channels(&self, order: &[usize]) -> Recording {
        let mut profile = self.profile.clone();
        profile.channel_count = order.len();
        Recording {
            profile,
            channel_names: order.iter().map(|&i| self.channel_names[i].clone()).collect(),
            samples: order.iter().map(|&i| self.samples[i].clone()).collect(),
            start_time: self.start_time,
        }
    }

    pub fn into_channels(self) -> Vec<Vec<f64>> {
        self.samples
    }
}

/// Non-negative amplitude envelope with the same shape as its source.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope(Recording);

impl Envelope {
    pub(crate) fn from_recording_clamped(r: Recording) -> Self {
        let clamped =
            r.map_channels(|c| Ok::<_, ()>(c.iter().map(|&v| v.max(0.0)).collect())).expect("clamping is infallible");
        Envelope(clamped)
    }

    /// Wraps already non-negative values; negatives are clamped to zero.
    pub fn from_values(profile: DeviceProfile, values: Vec<Vec<f64>>, start_time: f64) -> Result<Self, RecordingError> {
        Ok(Self::from_recording_clamped(Recording::new(profile, values, start_time)?))
    }

    pub fn as_recording(&self) -> &Recording {
        &self.0
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        self.0.channels()
    }

    pub fn profile(&self) -> &DeviceProfile {
        self.0.profile()
    }

    /// Multiplies every value by `c` (clamped at zero for negative `c`).
    pub fn scaled(&self, c: f64) -> Envelope {
        Self::from_recording_clamped(
            self.0.map_channels(|ch| Ok::<_, ()>(ch.iter().map(|v| v * c).collect())).expect("scaling is infallible"),
        )
    }

    pub fn select_channels(&self, order: &[usize]) -> Envelope {
        Envelope(self.0.select_channels(order))
    }
}
