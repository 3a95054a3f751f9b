use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralWindow {
    /// Periodic Hann taper.
    #[default]
    Hann,
    Rectangular,
}

impl SpectralWindow {
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            SpectralWindow::Hann => (0..n).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos()).collect(),
            SpectralWindow::Rectangular => vec![1.0; n],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralFeatures {
    pub mean_frequency: f64,
    pub median_frequency: f64,
    pub total_power: f64,
    /// The window had no AC power; all three values are reported as 0.
    pub zero_power: bool,
}

impl SpectralFeatures {
    const ZERO: SpectralFeatures =
        SpectralFeatures { mean_frequency: 0.0, median_frequency: 0.0, total_power: 0.0, zero_power: true };
}

/// One-sided power spectrum of a mean-removed, tapered window, restricted
/// to the bins in `(0, rate/2]`. Bins are scaled so their sum equals the
/// time-domain energy of the tapered window's AC part.
pub struct SpectralEstimator {
    len: usize,
    rate: f64,
    taper: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl SpectralEstimator {
    pub fn new(len: usize, rate: f64, window: SpectralWindow) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(len);
        SpectralEstimator { len, rate, taper: window.coefficients(len), fft }
    }

    pub fn bin_frequency(&self, k: usize) -> f64 {
        k as f64 * self.rate / self.len as f64
    }

    /// `(frequency, power)` for bins 1..=len/2.
    pub fn power_spectrum(&self, x: &[f64]) -> Vec<(f64, f64)> {
        assert_eq!(x.len(), self.len, "window length does not match the estimator");
        let n = self.len;
        let mean = x.iter().sum::<f64>() / n as f64;
        let mut buf: Vec<Complex64> =
            x.iter().zip(&self.taper).map(|(v, w)| Complex64::new((v - mean) * w, 0.0)).collect();
        self.fft.process(&mut buf);
        (1..=n / 2)
            .map(|k| {
                let scale = if 2 * k == n { 1.0 } else { 2.0 };
                (self.bin_frequency(k), scale * buf[k].norm_sqr() / n as f64)
            })
            .collect()
    }

    pub fn features(&self, x: &[f64]) -> SpectralFeatures {
        if x.iter().all(|&v| v == x[0]) {
            return SpectralFeatures::ZERO;
        }
        let spectrum = self.power_spectrum(x);
        let total: f64 = spectrum.iter().map(|(_, p)| p).sum();
        if total <= 0.0 {
            return SpectralFeatures::ZERO;
        }
        let mean_frequency = spectrum.iter().map(|(f, p)| f * p).sum::<f64>() / total;
        let half = total / 2.0;
        let mut cumulative = 0.0;
        let mut median_frequency = spectrum.last().map_or(0.0, |(f, _)| *f);
        for &(f, p) in &spectrum {
            cumulative += p;
            if cumulative >= half {
                median_frequency = f;
                break;
            }
        }
        SpectralFeatures { mean_frequency, median_frequency, total_power: total, zero_power: false }
    }
}

/// Mean frequency, median frequency and total power of one window.
pub fn freq_features(window: &[f64], rate: f64, taper: SpectralWindow) -> SpectralFeatures {
    SpectralEstimator::new(window.len(), rate, taper).features(window)
}
