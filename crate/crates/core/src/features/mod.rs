//! Non-lexical speech features: log-mel spectrogram, pitch contour and energy
//! contour on a shared frame grid, plus a synthetic emotional-prosody corpus.

use alloc::string::String;
use alloc::vec::Vec;

use crate::emotion::EmotionLabel;
use crate::error::{bad_config, invalid, Error, Result};
use crate::linalg::Matrix;

mod energy;
pub mod fft;
mod mel;
mod pitch;
mod stats;
pub mod synth;

pub use energy::compute_energy;
pub use mel::{compute_mel, hz_to_mel, mel_filterbank, mel_to_hz, MEL_FLOOR};
pub use pitch::compute_pitch;
pub use stats::{ProsodyStats, PROSODY_STAT_NAMES};
pub use synth::{generate_synthetic_corpus, ProsodyProfile, SyntheticCorpusSpec};

pub const DEFAULT_SAMPLE_RATE: u32 = 22_050;

/// Mono audio with samples in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioClip {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if samples.is_empty() {
            return Err(invalid("empty audio"));
        }
        if sample_rate == 0 {
            return Err(invalid("sample rate must be positive"));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFinite("audio samples"));
        }
        if samples.iter().any(|s| s.abs() > 1.0) {
            return Err(invalid("samples must lie in [-1, 1]"));
        }
        Ok(Self { samples, sample_rate })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Linear-interpolation resampling. Output length is
    /// `round(len * target / rate)`.
    pub fn resample(&self, target_rate: u32) -> Result<AudioClip> {
        if target_rate == 0 {
            return Err(invalid("target rate must be positive"));
        }
        if target_rate == self.sample_rate {
            return Ok(self.clone());
        }
        let ratio = self.sample_rate as f64 / target_rate as f64;
        let out_len = ((self.samples.len() as u64 * target_rate as u64 + self.sample_rate as u64 / 2)
            / self.sample_rate as u64)
            .max(1) as usize;
        let last = self.samples.len() - 1;
        let samples = (0..out_len)
            .map(|i| {
                let pos = i as f64 * ratio;
                let j = pos as usize;
                if j >= last {
                    return self.samples[last];
                }
                let frac = pos - j as f64;
                self.samples[j] * (1.0 - frac) + self.samples[j + 1] * frac
            })
            .collect();
        AudioClip::new(samples, target_rate)
    }
}

/// Analysis settings shared by the three feature streams.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureConfig {
    pub n_mels: usize,
    /// Must be a power of two.
    pub fft_size: usize,
    pub window_size: usize,
    pub hop_length: usize,
    pub pitch_fmin: f64,
    pub pitch_fmax: f64,
    /// Cumulative-mean-normalized difference threshold for voicing.
    pub yin_threshold: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            n_mels: 80,
            fft_size: 1024,
            window_size: 1024,
            hop_length: 256,
            pitch_fmin: 60.0,
            pitch_fmax: 600.0,
            yin_threshold: 0.15,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self, sample_rate: u32) -> Result<()> {
        if self.n_mels == 0 {
            return Err(bad_config("n_mels must be positive"));
        }
        if !self.fft_size.is_power_of_two() {
            return Err(bad_config("fft_size must be a power of two"));
        }
        if self.window_size == 0 || self.window_size > self.fft_size {
            return Err(bad_config("window_size must be in 1..=fft_size"));
        }
        if self.hop_length == 0 || self.hop_length > self.window_size {
            return Err(bad_config("hop_length must be in 1..=window_size"));
        }
        let nyquist = sample_rate as f64 / 2.0;
        if !(self.pitch_fmin > 0.0 && self.pitch_fmin < self.pitch_fmax && self.pitch_fmax < nyquist) {
            return Err(bad_config("need 0 < pitch_fmin < pitch_fmax < sample_rate/2"));
        }
        if !(self.yin_threshold > 0.0 && self.yin_threshold < 1.0) {
            return Err(bad_config("yin_threshold must be in (0, 1)"));
        }
        Ok(())
    }

    /// `floor(len / hop) + 1` frames with center padding.
    pub fn frame_count(&self, len: usize) -> usize {
        len / self.hop_length + 1
    }
}

/// Centered frames over the reflect-padded signal. Frame `t` spans
/// `fft_size` samples centered on input sample `t * hop`.
pub(crate) struct Framer<'a> {
    samples: &'a [f64],
    pad: usize,
    hop: usize,
    frames: usize,
}

impl<'a> Framer<'a> {
    pub fn new(clip: &'a AudioClip, cfg: &FeatureConfig) -> Result<Self> {
        cfg.validate(clip.sample_rate())?;
        if clip.len() < cfg.hop_length {
            return Err(Error::ClipTooShort { len: clip.len(), min: cfg.hop_length });
        }
        Ok(Self {
            samples: clip.samples(),
            pad: cfg.fft_size / 2,
            hop: cfg.hop_length,
            frames: cfg.frame_count(clip.len()),
        })
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    /// Sample at padded position `p`, mirroring about the first and last
    /// samples (numpy "reflect").
    #[inline]
    fn padded(&self, p: usize) -> f64 {
        let n = self.samples.len() as isize;
        let mut i = p as isize - self.pad as isize;
        if n == 1 {
            return self.samples[0];
        }
        let period = 2 * (n - 1);
        i = i.rem_euclid(period);
        if i >= n {
            i = period - i;
        }
        self.samples[i as usize]
    }

    /// Copies `len` samples of frame `t`, starting `offset` into the frame.
    pub fn fill(&self, t: usize, offset: usize, out: &mut [f64]) {
        let start = t * self.hop + offset;
        for (k, o) in out.iter_mut().enumerate() {
            *o = self.padded(start + k);
        }
    }
}

/// Aligned feature streams for one clip. Values are stored as `f32`, the
/// precision of the on-disk feature cache.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeechFeatures {
    n_mels: usize,
    mel: Vec<f32>,
    pitch: Vec<f32>,
    energy: Vec<f32>,
    pub emotion: EmotionLabel,
    pub speaker: String,
}

impl SpeechFeatures {
    /// `mel` is row-major `frames x n_mels`.
    pub fn new(
        n_mels: usize,
        mel: Vec<f32>,
        pitch: Vec<f32>,
        energy: Vec<f32>,
        emotion: EmotionLabel,
        speaker: impl Into<String>,
    ) -> Result<Self> {
        if n_mels == 0 || !mel.len().is_multiple_of(n_mels) {
            return Err(invalid("mel length is not a multiple of n_mels"));
        }
        let frames = mel.len() / n_mels;
        if frames == 0 || pitch.len() != frames || energy.len() != frames {
            return Err(Error::Misaligned { mel: frames, pitch: pitch.len(), energy: energy.len() });
        }
        if energy.iter().any(|&e| e < 0.0) {
            return Err(invalid("energy must be non-negative"));
        }
        Ok(Self { n_mels, mel, pitch, energy, emotion, speaker: speaker.into() })
    }

    pub fn frames(&self) -> usize {
        self.pitch.len()
    }

    pub fn n_mels(&self) -> usize {
        self.n_mels
    }

    pub fn mel(&self) -> &[f32] {
        &self.mel
    }

    pub fn mel_frame(&self, t: usize) -> &[f32] {
        &self.mel[t * self.n_mels..(t + 1) * self.n_mels]
    }

    pub fn pitch(&self) -> &[f32] {
        &self.pitch
    }

    pub fn energy(&self) -> &[f32] {
        &self.energy
    }

    pub fn is_finite(&self) -> bool {
        self.mel.iter().chain(&self.pitch).chain(&self.energy).all(|v| v.is_finite())
    }

    /// Overwrites one pitch value. Used to build corrupted inputs in tests
    /// and tooling; alignment is unaffected.
    pub fn set_pitch(&mut self, t: usize, hz: f32) {
        self.pitch[t] = hz;
    }
}

/// Computes and bundles the three streams for one labeled clip.
pub fn extract_features(
    clip: &AudioClip,
    emotion: EmotionLabel,
    speaker: &str,
    cfg: &FeatureConfig,
) -> Result<SpeechFeatures> {
    let mel = compute_mel(clip, cfg)?;
    let pitch = compute_pitch(clip, cfg)?;
    let energy = compute_energy(clip, cfg)?;
    if mel.rows() != pitch.len() || mel.rows() != energy.len() {
        return Err(Error::Misaligned { mel: mel.rows(), pitch: pitch.len(), energy: energy.len() });
    }
    let (fmin, fmax) = (cfg.pitch_fmin as f32, cfg.pitch_fmax as f32);
    SpeechFeatures::new(
        cfg.n_mels,
        mel.as_slice().iter().map(|&v| v as f32).collect(),
        pitch
            .iter()
            .map(|&p| if p > 0.0 { (p as f32).clamp(fmin, fmax) } else { 0.0 })
            .collect(),
        energy.iter().map(|&e| e as f32).collect(),
        emotion,
        speaker,
    )
}

pub(crate) fn to_matrix_rows(frames: usize, cols: usize, data: Vec<f64>) -> Matrix {
    Matrix::from_vec(frames, cols, data).expect("frame buffer sized by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emotion::Emotion;
    use alloc::vec;

    fn sine(freq: f64, amp: f64, secs: f64, sr: u32) -> AudioClip {
        let n = (secs * sr as f64) as usize;
        let s = (0..n)
            .map(|i| amp * crate::math::sin(2.0 * core::f64::consts::PI * freq * i as f64 / sr as f64))
            .collect();
        AudioClip::new(s, sr).unwrap()
    }

    #[test]
    fn clip_validation() {
        assert!(AudioClip::new(vec![], 22050).is_err());
        assert!(AudioClip::new(vec![0.0], 0).is_err());
        assert!(AudioClip::new(vec![f64::NAN], 22050).is_err());
        assert!(AudioClip::new(vec![1.5], 22050).is_err());
    }

    #[test]
    fn resample_halves_length() {
        let clip = sine(100.0, 0.5, 1.0, 44100);
        let r = clip.resample(22050).unwrap();
        assert_eq!(r.len(), 22050);
        assert_eq!(r.sample_rate(), 22050);
        assert_eq!(clip.resample(44100).unwrap(), clip);
    }

    #[test]
    fn config_validation() {
        let cfg = FeatureConfig::default();
        assert!(cfg.validate(22050).is_ok());
        assert!(FeatureConfig { window_size: 2048, ..cfg }.validate(22050).is_err());
        assert!(FeatureConfig { hop_length: 2000, ..cfg }.validate(22050).is_err());
        assert!(FeatureConfig { pitch_fmax: 20000.0, ..cfg }.validate(22050).is_err());
        assert!(FeatureConfig { pitch_fmin: 0.0, ..cfg }.validate(22050).is_err());
        assert!(FeatureConfig { fft_size: 1000, window_size: 1000, ..cfg }.validate(22050).is_err());
    }

    #[test]
    fn streams_align_and_labels_pass_through() {
        let cfg = FeatureConfig::default();
        for secs in [0.3, 1.0, 1.37] {
            let f = extract_features(&sine(200.0, 0.3, secs, 22050), Emotion::Joy.into(), "spk", &cfg).unwrap();
            assert_eq!(f.frames(), f.pitch().len());
            assert_eq!(f.frames(), f.energy().len());
            assert_eq!(f.mel().len(), f.frames() * 80);
            assert_eq!(f.emotion, EmotionLabel::Primary(Emotion::Joy));
            assert_eq!(f.speaker, "spk");
        }
    }

    #[test]
    fn corrupted_config_is_rejected() {
        let cfg = FeatureConfig { hop_length: 0, ..FeatureConfig::default() };
        assert!(extract_features(&sine(200.0, 0.3, 1.0, 22050), Emotion::Joy.into(), "s", &cfg).is_err());
        let err = SpeechFeatures::new(2, vec![0.0; 8], vec![0.0; 3], vec![0.0; 4], EmotionLabel::Neutral, "s");
        assert!(matches!(err, Err(Error::Misaligned { mel: 4, pitch: 3, energy: 4 })));
    }

    #[test]
    fn too_short_clip() {
        let clip = AudioClip::new(vec![0.1; 100], 22050).unwrap();
        assert!(matches!(
            compute_mel(&clip, &FeatureConfig::default()),
            Err(Error::ClipTooShort { len: 100, min: 256 })
        ));
    }

    #[test]
    fn reflect_padding_mirrors() {
        let clip = AudioClip::new(vec![0.0, 0.1, 0.2, 0.3, 0.4], 22050).unwrap();
        let cfg = FeatureConfig { fft_size: 4, window_size: 4, hop_length: 1, pitch_fmin: 1.0, pitch_fmax: 2.0, ..Default::default() };
        let fr = Framer::new(&clip, &cfg).unwrap();
        let mut out = [0.0; 4];
        fr.fill(0, 0, &mut out);
        assert_eq!(out, [0.2, 0.1, 0.0, 0.1]);
        fr.fill(4, 0, &mut out);
        assert_eq!(out, [0.2, 0.3, 0.4, 0.3]);
    }
}
