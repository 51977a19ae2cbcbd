//! Frame-wise YIN: cumulative-mean-normalized difference function with an
//! absolute threshold, parabolic refinement, and no fallback to the global
//! minimum. Frames that never dip below the threshold are unvoiced (0 Hz).
//!
//! The difference function is expanded as
//! `d(tau) = E(0) + E(tau) - 2 r(tau)`, with the energies `E` taken from a
//! prefix sum and the cross term `r` from one FFT correlation per frame.

use alloc::vec;
use alloc::vec::Vec;

use super::fft::Fft;
use super::{AudioClip, FeatureConfig, Framer};
use crate::error::Result;
use crate::math;

/// Below this RMS a frame is treated as silent.
const SILENCE_RMS: f64 = 1e-5;

struct Yin {
    window: usize,
    integration: usize,
    tau_min: usize,
    tau_max: usize,
    threshold: f64,
    sample_rate: f64,
    fmin: f64,
    fmax: f64,
    fft: Fft,
    re_x: Vec<f64>,
    im_x: Vec<f64>,
    re_a: Vec<f64>,
    im_a: Vec<f64>,
    diff: Vec<f64>,
}

impl Yin {
    fn new(cfg: &FeatureConfig, sample_rate: u32) -> Self {
        let sr = sample_rate as f64;
        let window = cfg.window_size;
        let tau_max = (math::ceil(sr / cfg.pitch_fmin) as usize + 1).min(window / 2);
        let tau_min = (math::floor(sr / cfg.pitch_fmax) as usize).max(2).min(tau_max);
        let integration = window - tau_max;
        let size = (window + integration).next_power_of_two();
        Self {
            window,
            integration,
            tau_min,
            tau_max,
            threshold: cfg.yin_threshold,
            sample_rate: sr,
            fmin: cfg.pitch_fmin,
            fmax: cfg.pitch_fmax,
            fft: Fft::new(size),
            re_x: vec![0.0; size],
            im_x: vec![0.0; size],
            re_a: vec![0.0; size],
            im_a: vec![0.0; size],
            diff: vec![0.0; tau_max + 2],
        }
    }

    fn estimate(&mut self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.window);
        let w = self.integration;
        let e0: f64 = x[..w].iter().map(|v| v * v).sum();
        if math::sqrt(e0 / w as f64) < SILENCE_RMS {
            return 0.0;
        }

        // r(tau) = sum_j x[j] x[j + tau] for j < w. Both real inputs share one
        // complex transform z = x + i a.
        self.re_x.iter_mut().for_each(|v| *v = 0.0);
        self.im_x.iter_mut().for_each(|v| *v = 0.0);
        self.re_x[..self.window].copy_from_slice(x);
        self.im_x[..w].copy_from_slice(&x[..w]);
        self.fft.forward(&mut self.re_x, &mut self.im_x);
        let size = self.re_x.len();
        for k in 0..size {
            let j = (size - k) % size;
            let (zr, zi) = (self.re_x[k], self.im_x[k]);
            let (cr, ci) = (self.re_x[j], -self.im_x[j]);
            // X = (Z + conj Z_j) / 2, A = (Z - conj Z_j) / 2i
            let (xr, xi) = (0.5 * (zr + cr), 0.5 * (zi + ci));
            let (ar, ai) = (0.5 * (zi - ci), -0.5 * (zr - cr));
            // X * conj(A)
            self.re_a[k] = xr * ar + xi * ai;
            self.im_a[k] = xi * ar - xr * ai;
        }
        self.fft.inverse(&mut self.re_a, &mut self.im_a);
        let corr = &self.re_a;

        let mut prefix = Vec::with_capacity(self.window + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for v in x {
            acc += v * v;
            prefix.push(acc);
        }

        // Cumulative mean normalization.
        self.diff[0] = 1.0;
        let mut running = 0.0;
        for tau in 1..=self.tau_max {
            let e_tau = prefix[tau + w] - prefix[tau];
            let d = (e0 + e_tau - 2.0 * corr[tau]).max(0.0);
            running += d;
            self.diff[tau] = if running > 0.0 { d * tau as f64 / running } else { 1.0 };
        }

        let mut tau = self.tau_min;
        while tau <= self.tau_max && self.diff[tau] >= self.threshold {
            tau += 1;
        }
        if tau > self.tau_max {
            return 0.0;
        }
        while tau < self.tau_max && self.diff[tau + 1] < self.diff[tau] {
            tau += 1;
        }
        let refined = if tau > 1 && tau < self.tau_max {
            let (a, b, c) = (self.diff[tau - 1], self.diff[tau], self.diff[tau + 1]);
            let denom = a - 2.0 * b + c;
            if denom.abs() > 1e-12 {
                tau as f64 + 0.5 * (a - c) / denom
            } else {
                tau as f64
            }
        } else {
            tau as f64
        };
        let f0 = self.sample_rate / refined;
        if f0 < self.fmin || f0 > self.fmax {
            0.0
        } else {
            f0
        }
    }
}

/// Fundamental frequency per frame in Hz, 0 for unvoiced frames.
pub fn compute_pitch(clip: &AudioClip, cfg: &FeatureConfig) -> Result<Vec<f64>> {
    let framer = Framer::new(clip, cfg)?;
    let mut yin = Yin::new(cfg, clip.sample_rate());
    let offset = (cfg.fft_size - cfg.window_size) / 2;
    let mut buf = vec![0.0; cfg.window_size];
    Ok((0..framer.frames())
        .map(|t| {
            framer.fill(t, offset, &mut buf);
            yin.estimate(&buf)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_difference_agrees_with_fft_route() {
        let cfg = FeatureConfig::default();
        let mut yin = Yin::new(&cfg, 22050);
        let x: Vec<f64> = (0..1024)
            .map(|i| 0.3 * math::sin(i as f64 * 0.07) + 0.1 * math::sin(i as f64 * 0.31))
            .collect();
        yin.estimate(&x);
        let w = yin.integration;
        let mut running = 0.0;
        for tau in 1..=yin.tau_max {
            let d: f64 = (0..w).map(|j| (x[j] - x[j + tau]).powi(2)).sum();
            running += d;
            let expected = d * tau as f64 / running;
            assert!((yin.diff[tau] - expected).abs() < 1e-8, "tau {tau}");
        }
    }

    #[test]
    fn silence_is_unvoiced() {
        let clip = AudioClip::new(vec![0.0; 22050], 22050).unwrap();
        assert!(compute_pitch(&clip, &FeatureConfig::default()).unwrap().iter().all(|&p| p == 0.0));
    }
}
