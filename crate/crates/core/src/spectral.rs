//! Amplitude spectra of simulated fields and envelope growth-rate fits.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Channel, TimeSeries};

pub const MIN_FFT_SAMPLES: usize = 1024;
/// Coefficient of determination demanded of a growth fit.
pub const MIN_R_SQUARED: f64 = 0.99;
/// Fraction of the demodulated record used by the growth regression.
pub const FIT_FRACTION: f64 = 0.6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("envelope is not growing exponentially (slope {slope:.4e} 1/s, R² {r_squared:.4})")]
    NotGrowing { slope: f64, r_squared: f64 },
    #[error("carrier frequency {0} Hz is not resolvable at this sampling")]
    BadCarrier(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    Rect,
    Hann,
}

impl Window {
    fn weights(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rect => vec![1.0; n],
            Window::Hann => (0..n).map(|k| 0.5 * (1.0 - (TAU * k as f64 / n as f64).cos())).collect(),
        }
    }
}

/// Single-sided amplitude spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub freq_hz: Vec<f64>,
    pub magnitude: Vec<f64>,
    pub window: Window,
}

impl Spectrum {
    pub fn bin_width(&self) -> f64 {
        if self.freq_hz.len() > 1 {
            self.freq_hz[1] - self.freq_hz[0]
        } else {
            0.0
        }
    }

    pub fn len(&self) -> usize {
        self.freq_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freq_hz.is_empty()
    }

    /// `freq_hz,magnitude`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("freq_hz,magnitude\n");
        for (f, m) in self.freq_hz.iter().zip(&self.magnitude) {
            out.push_str(&format!("{f:.16e},{m:.16e}\n"));
        }
        out
    }
}

/// FFT magnitude of one channel, scaled so that a unit-amplitude sinusoid
/// centred on a bin reads 1.0 (the window's coherent gain is divided out).
pub fn fft_spectrum(ts: &TimeSeries, channel: Channel, window: Window) -> Result<Spectrum, SpectralError> {
    amplitude_spectrum(ts.channel(channel), ts.dt, window)
}

pub fn amplitude_spectrum(samples: &[f64], dt: f64, window: Window) -> Result<Spectrum, SpectralError> {
    let n = samples.len();
    if n < MIN_FFT_SAMPLES {
        return Err(SpectralError::TooShort { needed: MIN_FFT_SAMPLES, got: n });
    }
    let w = window.weights(n);
    let gain: f64 = w.iter().sum();
    let mut buf: Vec<Complex64> = samples.iter().zip(&w).map(|(&x, &w)| Complex64::new(x * w, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    let df = 1.0 / (n as f64 * dt);
    let mut freq_hz = Vec::with_capacity(half + 1);
    let mut magnitude = Vec::with_capacity(half + 1);
    for (k, x) in buf.iter().take(half + 1).enumerate() {
        let one_sided = if k == 0 || (n % 2 == 0 && k == half) { 1.0 } else { 2.0 };
        freq_hz.push(k as f64 * df);
        magnitude.push(one_sided * x.norm() / gain);
    }
    Ok(Spectrum { freq_hz, magnitude, window })
}

/// Interpolated spectral maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub freq_hz: f64,
    pub magnitude: f64,
    pub bin: usize,
    /// Full width at half maximum, linear interpolation between bins.
    /// Reported for inspection only.
    pub fwhm_hz: Option<f64>,
}

/// Largest bin (lowest index on ties). The frequency is refined by a
/// parabola through the log-magnitudes of the bin and its neighbours; the
/// magnitude is corrected for scalloping from the ratio of the larger
/// neighbour to the peak using the window's kernel.
///
/// # Panics
/// On an empty spectrum.
pub fn dominant_peak(s: &Spectrum) -> Peak {
    assert!(!s.is_empty(), "dominant_peak on empty spectrum");
    let mut bin = 0;
    for (k, &m) in s.magnitude.iter().enumerate() {
        if m > s.magnitude[bin] {
            bin = k;
        }
    }
    let m0 = s.magnitude[bin];
    let mut offset = 0.0;
    let mut magnitude = m0;
    if bin > 0 && bin + 1 < s.len() {
        let (ml, mr) = (s.magnitude[bin - 1], s.magnitude[bin + 1]);
        if ml > 0.0 && mr > 0.0 && m0 > 0.0 {
            let (yl, y0, yr) = (ml.ln(), m0.ln(), mr.ln());
            let denom = yl - 2.0 * y0 + yr;
            if denom < 0.0 {
                offset = 0.5 * (yl - yr) / denom;
            }
        }
        magnitude = m0 / kernel_gain(s.window, ml.max(mr) / m0);
    }
    let df = s.bin_width();
    Peak { freq_hz: s.freq_hz[bin] + offset * df, magnitude, bin, fwhm_hz: half_max_width(s, bin) }
}

/// Normalized window response at the tone offset implied by the
/// neighbour-to-peak ratio `r` (exact for an isolated tone).
fn kernel_gain(window: Window, r: f64) -> f64 {
    let delta = match window {
        Window::Rect => r / (1.0 + r),
        Window::Hann => (2.0 * r - 1.0) / (1.0 + r),
    }
    .clamp(0.0, 0.5);
    if delta == 0.0 {
        return 1.0;
    }
    let sinc = (PI * delta).sin() / (PI * delta);
    match window {
        Window::Rect => sinc,
        Window::Hann => sinc / (1.0 - delta * delta),
    }
}

fn half_max_width(s: &Spectrum, bin: usize) -> Option<f64> {
    let half = 0.5 * s.magnitude[bin];
    let crossing = |from: usize, to: usize| {
        // linear interpolation of the half-maximum crossing between adjacent bins
        let (m_in, m_out) = (s.magnitude[from], s.magnitude[to]);
        let frac = (m_in - half) / (m_in - m_out);
        s.freq_hz[from] + frac * (s.freq_hz[to] - s.freq_hz[from])
    };
    let mut lo = bin;
    while lo > 0 && s.magnitude[lo - 1] >= half {
        lo -= 1;
    }
    let mut hi = bin;
    while hi + 1 < s.len() && s.magnitude[hi + 1] >= half {
        hi += 1;
    }
    if lo == 0 || hi + 1 == s.len() {
        return None;
    }
    Some(crossing(hi, hi + 1) - crossing(lo, lo - 1))
}

/// Result of a log-linear envelope regression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    /// Envelope growth rate, 1/s (`a/2` for `cosh(at/2)` growth).
    pub rate: f64,
    pub r_squared: f64,
}

/// Envelope growth rate of one channel around `carrier_hz`.
pub fn fit_growth_rate(ts: &TimeSeries, channel: Channel, carrier_hz: f64) -> Result<f64, SpectralError> {
    fit_growth(ts.channel(channel), ts.dt, carrier_hz).map(|f| f.rate)
}

/// Complex demodulation at `carrier_hz`, a one-period moving average, then a
/// least-squares line through `ln|envelope|` over the last 60% of the record.
pub fn fit_growth(samples: &[f64], dt: f64, carrier_hz: f64) -> Result<GrowthFit, SpectralError> {
    let per_period = 1.0 / (carrier_hz * dt);
    if !(per_period.is_finite() && per_period >= 2.0) {
        return Err(SpectralError::BadCarrier(carrier_hz));
    }
    let window = per_period.round() as usize;
    let n = samples.len();
    if n < window + 16 {
        return Err(SpectralError::TooShort { needed: window + 16, got: n });
    }
    let w = TAU * carrier_hz * dt;
    let mixed: Vec<Complex64> = samples
        .iter()
        .enumerate()
        .map(|(k, &x)| 2.0 * x * Complex64::from_polar(1.0, -w * k as f64))
        .collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for z in &mixed[..window] {
        acc += z;
    }
    let mut envelope = Vec::with_capacity(n - window + 1);
    envelope.push(acc.norm() / window as f64);
    for j in window..n {
        acc += mixed[j] - mixed[j - window];
        envelope.push(acc.norm() / window as f64);
    }
    let centre = 0.5 * (window as f64 - 1.0);
    let start = ((1.0 - FIT_FRACTION) * envelope.len() as f64).floor() as usize;
    let pts: Vec<(f64, f64)> = envelope[start..]
        .iter()
        .enumerate()
        .filter(|(_, &m)| m > 0.0)
        .map(|(j, &m)| ((start + j) as f64 * dt + centre * dt, m.ln()))
        .collect();
    if pts.len() < 8 {
        return Err(SpectralError::TooShort { needed: 8, got: pts.len() });
    }
    let (slope, r_squared) = linear_fit(&pts);
    if !(slope > 0.0) || !(r_squared >= MIN_R_SQUARED) {
        return Err(SpectralError::NotGrowing { slope, r_squared });
    }
    Ok(GrowthFit { rate: slope, r_squared })
}

/// Least-squares slope and R².
fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in pts {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 0.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tone(n: usize, fs: f64, parts: &[(f64, f64)]) -> Vec<f64> {
        (0..n)
            .map(|k| {
                let t = k as f64 / fs;
                parts.iter().map(|&(a, f)| a * (TAU * f * t).cos()).sum()
            })
            .collect()
    }

    #[test]
    fn unit_tone_peaks_at_one() {
        let x = tone(100_000, 1e5, &[(1.0, 1460.0)]);
        for window in [Window::Rect, Window::Hann] {
            let s = amplitude_spectrum(&x, 1e-5, window).unwrap();
            let p = dominant_peak(&s);
            assert_eq!(p.bin, 1460);
            assert_relative_eq!(p.freq_hz, 1460.0, epsilon = 1e-4);
            assert_relative_eq!(p.magnitude, 1.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn parseval_rect() {
        let x: Vec<f64> = (0..4096).map(|k| ((k * 7919) % 113) as f64 / 113.0 - 0.4).collect();
        for n in [4096usize, 4095] {
            let s = amplitude_spectrum(&x[..n], 1.0, Window::Rect).unwrap();
            let time: f64 = x[..n].iter().map(|v| v * v).sum();
            let mut freq = s.magnitude[0].powi(2);
            for (k, m) in s.magnitude.iter().enumerate().skip(1) {
                freq += if n % 2 == 0 && k == n / 2 { m * m } else { 0.5 * m * m };
            }
            assert_relative_eq!(time, n as f64 * freq, max_relative = 1e-10);
        }
    }

    #[test]
    fn too_short() {
        assert!(matches!(
            amplitude_spectrum(&[0.0; 1023], 1.0, Window::Rect),
            Err(SpectralError::TooShort { needed: 1024, got: 1023 })
        ));
    }

    #[test]
    fn peak_edge_cases() {
        let flat = Spectrum { freq_hz: vec![0.0, 1.0, 2.0], magnitude: vec![1.0; 3], window: Window::Rect };
        let p = dominant_peak(&flat);
        assert_eq!((p.bin, p.freq_hz, p.magnitude), (0, 0.0, 1.0));
        let single = Spectrum { freq_hz: vec![5.0], magnitude: vec![2.0], window: Window::Rect };
        let p = dominant_peak(&single);
        assert_eq!((p.bin, p.freq_hz, p.magnitude), (0, 5.0, 2.0));
    }

    #[test]
    fn constant_sinusoid_is_not_growing() {
        let x = tone(20_000, 1e5, &[(1.0, 1460.0)]);
        assert!(matches!(fit_growth(&x, 1e-5, 1460.0), Err(SpectralError::NotGrowing { .. })));
    }

    #[test]
    fn synthetic_growth_rate() {
        let a = 62.84;
        let fs = 50_000.0;
        let x: Vec<f64> = (0..15_000)
            .map(|k| {
                let t = k as f64 / fs;
                (0.5 * a * t).exp() * (TAU * 1460.0 * t).cos()
            })
            .collect();
        let fit = fit_growth(&x, 1.0 / fs, 1460.0).unwrap();
        assert_relative_eq!(fit.rate, 31.42, max_relative = 1e-2);
        let scaled: Vec<f64> = x.iter().map(|v| 1e-6 * v).collect();
        let fit2 = fit_growth(&scaled, 1.0 / fs, 1460.0).unwrap();
        assert_relative_eq!(fit.rate, fit2.rate, max_relative = 1e-9);
    }
}
