//! Prosody encoder: collapses aligned mel/pitch/energy streams into a
//! fixed-length embedding, with an emotion discriminator and a prosody
//! statistics decoder attached to the embedding.

use alloc::vec;
use alloc::vec::Vec;

use crate::algebra::EmbeddingSet;
use crate::emotion::Emotion;
use crate::error::{bad_config, Error, Result};
use crate::features::{ProsodyStats, SpeechFeatures};
use crate::linalg::Matrix;

pub mod network;
mod train;

pub use network::{softmax, Network, Tensor, CLASSES, STAT_DIM};
pub use train::{batch_loss, split_indices, train, train_with_progress, EpochRecord, LossParts, TrainReport};

/// Shortest clip the encoder accepts.
pub const MIN_FRAMES: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderConfig {
    pub embed_dim: usize,
    /// Output channels of each stride-2 conv block.
    pub channels: Vec<usize>,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub rng_seed: u64,
    /// When false the cross-entropy weight is forced to zero.
    pub discriminator_enabled: bool,
    pub lambda_ce: f64,
    pub lambda_aux: f64,
    /// Per-class fraction of clips held out for the accuracy report.
    pub holdout_fraction: f64,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self {
            embed_dim: 64,
            channels: vec![32, 32, 32],
            learning_rate: 1e-3,
            batch_size: 16,
            epochs: 60,
            rng_seed: 7,
            discriminator_enabled: true,
            lambda_ce: 1.0,
            lambda_aux: 1.0,
            holdout_fraction: 0.2,
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.embed_dim == 0 {
            return Err(bad_config("embed_dim must be positive"));
        }
        if self.channels.is_empty() || self.channels.contains(&0) {
            return Err(bad_config("need at least one conv block with positive width"));
        }
        if !(self.lambda_ce >= 0.0 && self.lambda_aux >= 0.0) {
            return Err(bad_config("loss weights must be non-negative"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(bad_config("learning_rate must be positive"));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(bad_config("batch_size and epochs must be positive"));
        }
        if !(0.0..1.0).contains(&self.holdout_fraction) {
            return Err(bad_config("holdout_fraction must be in [0, 1)"));
        }
        Ok(())
    }

    /// Cross-entropy weight actually applied.
    pub fn effective_lambda_ce(&self) -> f64 {
        if self.discriminator_enabled {
            self.lambda_ce
        } else {
            0.0
        }
    }
}

/// Fixed-length prosody embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct ProsodyEmbedding(Vec<f64>);

impl ProsodyEmbedding {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("embedding"));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Per-dimension affine normalization `(x - mean) / std`.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Normalizer {
    /// Population statistics of the rows, with degenerate spreads set to 1.
    pub fn fit<'a>(dim: usize, rows: impl Iterator<Item = &'a [f64]>) -> Self {
        let mut n = 0.0;
        let mut sum = vec![0.0; dim];
        let mut sq = vec![0.0; dim];
        for r in rows {
            n += 1.0;
            for i in 0..dim {
                sum[i] += r[i];
                sq[i] += r[i] * r[i];
            }
        }
        let n = if n > 0.0 { n } else { 1.0 };
        let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
        let std = sq
            .iter()
            .zip(&mean)
            .map(|(s, m)| {
                let sd = crate::math::sqrt((s / n - m * m).max(0.0));
                if sd > 1e-6 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, std }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn is_valid(&self) -> bool {
        self.mean.len() == self.std.len()
            && self.mean.iter().all(|m| m.is_finite())
            && self.std.iter().all(|s| s.is_finite() && *s > 0.0)
    }
}

/// A trained encoder, immutable after training.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedEncoder {
    pub config: EncoderConfig,
    pub n_mels: usize,
    pub network: Network,
    /// Per input channel (mel bands, then pitch, then energy).
    pub input_norm: Normalizer,
    /// Per prosody statistic.
    pub stat_norm: Normalizer,
}

/// Channel-major `(n_mels + 2) x frames` input, unnormalized.
pub(crate) fn raw_channels(s: &SpeechFeatures) -> Vec<f64> {
    let (t, m) = (s.frames(), s.n_mels());
    let mut x = vec![0.0; (m + 2) * t];
    for frame in 0..t {
        for (band, &v) in s.mel_frame(frame).iter().enumerate() {
            x[band * t + frame] = v as f64;
        }
        x[m * t + frame] = s.pitch()[frame] as f64;
        x[(m + 1) * t + frame] = s.energy()[frame] as f64;
    }
    x
}

pub(crate) fn normalize_channels(x: &mut [f64], frames: usize, norm: &Normalizer) {
    for (c, row) in x.chunks_exact_mut(frames).enumerate() {
        let (m, s) = (norm.mean[c], norm.std[c]);
        row.iter_mut().for_each(|v| *v = (*v - m) / s);
    }
}

pub(crate) fn check_features(s: &SpeechFeatures, n_mels: usize) -> Result<()> {
    if s.frames() < MIN_FRAMES {
        return Err(Error::TooFewFrames { frames: s.frames(), min: MIN_FRAMES });
    }
    if s.n_mels() != n_mels {
        return Err(Error::DimensionMismatch { expected: n_mels, got: s.n_mels() });
    }
    if !s.is_finite() {
        return Err(Error::NonFinite("speech features"));
    }
    Ok(())
}

impl TrainedEncoder {
    pub fn embed_dim(&self) -> usize {
        self.network.embed_dim()
    }

    pub(crate) fn prepare(&self, s: &SpeechFeatures) -> Result<Vec<f64>> {
        check_features(s, self.n_mels)?;
        let mut x = raw_channels(s);
        normalize_channels(&mut x, s.frames(), &self.input_norm);
        Ok(x)
    }

    pub fn encode(&self, s: &SpeechFeatures) -> Result<ProsodyEmbedding> {
        let x = self.prepare(s)?;
        ProsodyEmbedding::new(self.network.embed(&x, s.frames()))
    }

    fn check_dim(&self, u: &ProsodyEmbedding) -> Result<()> {
        if u.len() != self.embed_dim() {
            return Err(Error::DimensionMismatch { expected: self.embed_dim(), got: u.len() });
        }
        Ok(())
    }

    /// Emotion probabilities in [`Emotion::ALL`] order.
    pub fn discriminate(&self, u: &ProsodyEmbedding) -> Result<[f64; CLASSES]> {
        self.check_dim(u)?;
        Ok(softmax(&self.network.logits(u.values())))
    }

    pub fn classify(&self, u: &ProsodyEmbedding) -> Result<Emotion> {
        let p = self.discriminate(u)?;
        let best = (0..CLASSES).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap_or(0);
        Ok(Emotion::ALL[best])
    }

    /// Prosody statistics predicted from an embedding, in physical units.
    pub fn decode_prosody_stats(&self, u: &ProsodyEmbedding) -> Result<ProsodyStats> {
        self.check_dim(u)?;
        let z = self.network.aux(u.values());
        let mut out = [0.0; STAT_DIM];
        for i in 0..STAT_DIM {
            out[i] = z[i] * self.stat_norm.std[i] + self.stat_norm.mean[i];
        }
        let mut s = ProsodyStats::from_array(out);
        s.voiced_fraction = s.voiced_fraction.clamp(0.0, 1.0);
        s.pitch_mean = s.pitch_mean.max(0.0);
        s.pitch_std = s.pitch_std.max(0.0);
        s.energy_mean = s.energy_mean.max(0.0);
        s.energy_std = s.energy_std.max(0.0);
        Ok(s)
    }

    /// Embeds every clip, preserving order and labels.
    pub fn embed_corpus(&self, corpus: &[SpeechFeatures]) -> Result<EmbeddingSet> {
        let d = self.embed_dim();
        let mut data = Vec::with_capacity(corpus.len() * d);
        for s in corpus {
            data.extend_from_slice(self.encode(s)?.values());
        }
        EmbeddingSet::new(
            Matrix::from_vec(corpus.len(), d, data)?,
            corpus.iter().map(|s| s.emotion).collect(),
            corpus.iter().map(|s| s.speaker.clone()).collect(),
        )
    }

    /// Rounds every stored value to `f32`, the precision of the model file.
    pub fn quantize(&mut self) {
        let q = |v: &mut f64| *v = *v as f32 as f64;
        for t in self.network.tensors_mut() {
            t.data.iter_mut().for_each(q);
        }
        for n in [&mut self.input_norm, &mut self.stat_norm] {
            n.mean.iter_mut().for_each(q);
            n.std.iter_mut().for_each(q);
        }
        self.config.learning_rate = self.config.learning_rate as f32 as f64;
        self.config.lambda_ce = self.config.lambda_ce as f32 as f64;
        self.config.lambda_aux = self.config.lambda_aux as f32 as f64;
        self.config.holdout_fraction = self.config.holdout_fraction as f32 as f64;
    }
}
