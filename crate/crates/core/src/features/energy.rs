use alloc::vec;
use alloc::vec::Vec;

use super::{AudioClip, FeatureConfig, Framer};
use crate::error::Result;
use crate::math;

/// Per-frame RMS over the (unweighted) analysis window.
pub fn compute_energy(clip: &AudioClip, cfg: &FeatureConfig) -> Result<Vec<f64>> {
    let framer = Framer::new(clip, cfg)?;
    let offset = (cfg.fft_size - cfg.window_size) / 2;
    let mut buf = vec![0.0; cfg.window_size];
    Ok((0..framer.frames())
        .map(|t| {
            framer.fill(t, offset, &mut buf);
            math::sqrt(buf.iter().map(|x| x * x).sum::<f64>() / buf.len() as f64)
        })
        .collect())
}
