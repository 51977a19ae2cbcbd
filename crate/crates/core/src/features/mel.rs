use alloc::vec;
use alloc::vec::Vec;

use super::fft::Fft;
use super::{to_matrix_rows, AudioClip, FeatureConfig, Framer};
use crate::error::Result;
use crate::linalg::Matrix;
use crate::math;

/// Amplitude floor added before the log.
pub const MEL_FLOOR: f64 = 1e-5;

const F_SP: f64 = 200.0 / 3.0;
const MIN_LOG_HZ: f64 = 1000.0;
const MIN_LOG_MEL: f64 = MIN_LOG_HZ / F_SP;

fn log_step() -> f64 {
    math::ln(6.4) / 27.0
}

/// Slaney mel scale: linear below 1 kHz, logarithmic above.
pub fn hz_to_mel(hz: f64) -> f64 {
    if hz < MIN_LOG_HZ {
        hz / F_SP
    } else {
        MIN_LOG_MEL + math::ln(hz / MIN_LOG_HZ) / log_step()
    }
}

pub fn mel_to_hz(mel: f64) -> f64 {
    if mel < MIN_LOG_MEL {
        mel * F_SP
    } else {
        MIN_LOG_HZ * math::exp(log_step() * (mel - MIN_LOG_MEL))
    }
}

/// Triangular filters on `[0, sample_rate/2]` with area normalization.
/// Returns `n_mels x (fft_size/2 + 1)`.
pub fn mel_filterbank(n_mels: usize, fft_size: usize, sample_rate: u32) -> Matrix {
    let n_bins = fft_size / 2 + 1;
    let (lo, hi) = (hz_to_mel(0.0), hz_to_mel(sample_rate as f64 / 2.0));
    let edges: Vec<f64> = (0..n_mels + 2)
        .map(|i| mel_to_hz(lo + (hi - lo) * i as f64 / (n_mels + 1) as f64))
        .collect();
    let bin_hz: Vec<f64> = (0..n_bins).map(|k| k as f64 * sample_rate as f64 / fft_size as f64).collect();
    let mut fb = Matrix::zeros(n_mels, n_bins);
    for m in 0..n_mels {
        let (left, center, right) = (edges[m], edges[m + 1], edges[m + 2]);
        let norm = 2.0 / (right - left);
        for (k, &f) in bin_hz.iter().enumerate() {
            let up = (f - left) / (center - left);
            let down = (right - f) / (right - center);
            let w = up.min(down).max(0.0);
            if w > 0.0 {
                fb.set(m, k, w * norm);
            }
        }
    }
    fb
}

/// Periodic Hann window.
pub(crate) fn hann(len: usize) -> Vec<f64> {
    (0..len)
        .map(|i| 0.5 - 0.5 * math::cos(2.0 * core::f64::consts::PI * i as f64 / len as f64))
        .collect()
}

/// Log-amplitude mel spectrogram, `frames x n_mels`.
pub fn compute_mel(clip: &AudioClip, cfg: &FeatureConfig) -> Result<Matrix> {
    let framer = Framer::new(clip, cfg)?;
    let fft = Fft::new(cfg.fft_size);
    let fb = mel_filterbank(cfg.n_mels, cfg.fft_size, clip.sample_rate());
    let support: Vec<(usize, usize)> = (0..cfg.n_mels)
        .map(|m| {
            let row = fb.row(m);
            let lo = row.iter().position(|&w| w > 0.0).unwrap_or(0);
            let hi = row.iter().rposition(|&w| w > 0.0).map_or(lo, |i| i + 1);
            (lo, hi)
        })
        .collect();
    let window = hann(cfg.window_size);
    let offset = (cfg.fft_size - cfg.window_size) / 2;

    let mut frame = vec![0.0; cfg.fft_size];
    let mut spec = Vec::with_capacity(cfg.fft_size / 2 + 1);
    let mut out = Vec::with_capacity(framer.frames() * cfg.n_mels);
    for t in 0..framer.frames() {
        frame.iter_mut().for_each(|v| *v = 0.0);
        let win = &mut frame[offset..offset + cfg.window_size];
        framer.fill(t, offset, win);
        win.iter_mut().zip(&window).for_each(|(v, w)| *v *= w);
        fft.magnitude(&frame, &mut spec);
        for (m, &(lo, hi)) in support.iter().enumerate() {
            let amp: f64 = fb.row(m)[lo..hi].iter().zip(&spec[lo..hi]).map(|(w, s)| w * s).sum();
            out.push(math::ln(amp + MEL_FLOOR));
        }
    }
    Ok(to_matrix_rows(framer.frames(), cfg.n_mels, out))
}
