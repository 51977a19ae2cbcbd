use super::SpeechFeatures;
use crate::math;

pub const PROSODY_STAT_NAMES: [&str; 6] =
    ["pitch_mean", "pitch_std", "pitch_slope", "energy_mean", "energy_std", "voiced_fraction"];

/// Utterance-level prosody summary. Pitch statistics are over voiced frames
/// only; the slope is the least-squares pitch trend in Hz across the whole
/// clip (time normalized to `[0, 1]`).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ProsodyStats {
    pub pitch_mean: f64,
    pub pitch_std: f64,
    pub pitch_slope: f64,
    pub energy_mean: f64,
    pub energy_std: f64,
    pub voiced_fraction: f64,
}

impl ProsodyStats {
    pub fn of(features: &SpeechFeatures) -> Self {
        let frames = features.frames();
        let denom = (frames.max(2) - 1) as f64;
        let mut n = 0.0;
        let (mut st, mut sp, mut stt, mut stp, mut spp) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (i, &p) in features.pitch().iter().enumerate() {
            if p > 0.0 {
                let t = i as f64 / denom;
                let p = p as f64;
                n += 1.0;
                st += t;
                sp += p;
                stt += t * t;
                stp += t * p;
                spp += p * p;
            }
        }
        let (pitch_mean, pitch_std, pitch_slope) = if n > 0.0 {
            let mean = sp / n;
            let var = (spp / n - mean * mean).max(0.0);
            let tvar = stt / n - (st / n) * (st / n);
            let slope = if n >= 2.0 && tvar > 1e-12 { (stp / n - (st / n) * mean) / tvar } else { 0.0 };
            (mean, math::sqrt(var), slope)
        } else {
            (0.0, 0.0, 0.0)
        };
        let energy: alloc::vec::Vec<f64> = features.energy().iter().map(|&e| e as f64).collect();
        Self {
            pitch_mean,
            pitch_std,
            pitch_slope,
            energy_mean: math::mean(&energy),
            energy_std: math::std_dev(&energy),
            voiced_fraction: n / frames.max(1) as f64,
        }
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.pitch_mean, self.pitch_std, self.pitch_slope, self.energy_mean, self.energy_std, self.voiced_fraction]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self {
            pitch_mean: a[0],
            pitch_std: a[1],
            pitch_slope: a[2],
            energy_mean: a[3],
            energy_std: a[4],
            voiced_fraction: a[5],
        }
    }
}
