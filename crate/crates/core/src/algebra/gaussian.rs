//! Class-conditional Gaussians in weight space, their fusion into secondary
//! emotions, and the sampling entry points.

use alloc::vec::Vec;

use super::{fit_basis, EmbeddingSet, ProsodyBasis, WeightVector};
use crate::emotion::{secondary_name, Emotion};
use crate::encoder::TrainedEncoder;
use crate::error::{Error, Result};
use crate::features::SpeechFeatures;
use crate::math;
use crate::rng::{self, SeededRng};

/// Variances at or below this are treated as zero and their components dropped.
pub const MIN_VARIANCE: f64 = 1e-12;
/// Spread multiplier for variations around a transferred sample.
pub const DEFAULT_TRANSFER_TAU: f64 = 0.1;

/// Per-emotion means in weight space with one shared diagonal covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct EmotionStats {
    /// Indexed by [`Emotion::index`].
    pub means: [Vec<f64>; 4],
    /// Diagonal of the shared covariance.
    pub variances: Vec<f64>,
}

impl EmotionStats {
    pub fn new(means: [Vec<f64>; 4], variances: Vec<f64>) -> Result<Self> {
        let n = variances.len();
        if n == 0 {
            return Err(Error::ZeroVariance);
        }
        for m in &means {
            if m.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: m.len() });
            }
            if !math::all_finite(m) {
                return Err(Error::NonFinite("class mean"));
            }
        }
        if variances.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidInput("variances must be positive".into()));
        }
        Ok(Self { means, variances })
    }

    pub fn dim(&self) -> usize {
        self.variances.len()
    }

    pub fn mean(&self, e: Emotion) -> &[f64] {
        &self.means[e.index()]
    }
}

/// Class means of the projected embeddings; the covariance is the basis
/// eigenvalues, truncated at the first component with (numerically) zero
/// variance. The stats therefore cover `min(n, #positive)` components.
pub fn fit_emotion_stats(set: &EmbeddingSet, basis: &ProsodyBasis) -> Result<EmotionStats> {
    let keep = basis.eigenvalues.iter().take_while(|&&v| v > MIN_VARIANCE).count();
    if keep == 0 {
        return Err(Error::ZeroVariance);
    }
    let mut means: [Vec<f64>; 4] = Default::default();
    for e in Emotion::ALL {
        let count = set.count_of(e);
        if count < 2 {
            return Err(Error::MissingClass(e.name()));
        }
        let mut acc = alloc::vec![0.0; keep];
        for row in set.rows_of(e) {
            let w = basis.project_slice(row)?;
            acc.iter_mut().zip(w.values()).for_each(|(a, x)| *a += x);
        }
        acc.iter_mut().for_each(|a| *a /= count as f64);
        means[e.index()] = acc;
    }
    EmotionStats::new(means, basis.eigenvalues[..keep].to_vec())
}

fn draw(mean: &[f64], variances: &[f64], scale: f64, rng: &mut SeededRng) -> Result<WeightVector> {
    WeightVector::new(
        mean.iter()
            .zip(variances)
            .map(|(m, v)| m + math::sqrt(v * scale) * rng::normal(rng))
            .collect(),
    )
}

/// `w ~ N(mu_e, Sigma)` from a generator seeded with `seed`.
pub fn sample_primary(stats: &EmotionStats, emotion: Emotion, seed: u64) -> Result<WeightVector> {
    sample_primary_with(stats, emotion, &mut rng::seeded(seed))
}

pub fn sample_primary_with(stats: &EmotionStats, emotion: Emotion, rng: &mut SeededRng) -> Result<WeightVector> {
    draw(stats.mean(emotion), &stats.variances, 1.0, rng)
}

/// Product of two diagonal Gaussians: `Sigma_s = (Sigma_1^-1 + Sigma_2^-1)^-1`
/// and `mu_s = Sigma_s Sigma_1^-1 mu_1 + Sigma_s Sigma_2^-1 mu_2`. The mean
/// weights `Sigma_s Sigma_k^-1` are formed as precision ratios so that equal
/// precisions give weights of exactly one half.
pub fn fuse_gaussians(mean1: &[f64], var1: &[f64], mean2: &[f64], var2: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = var1.len();
    for len in [mean1.len(), mean2.len(), var2.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, got: len });
        }
    }
    let mut mean = Vec::with_capacity(n);
    let mut var = Vec::with_capacity(n);
    for i in 0..n {
        let (p1, p2) = (1.0 / var1[i], 1.0 / var2[i]);
        let precision = p1 + p2;
        var.push(1.0 / precision);
        mean.push((p1 / precision) * mean1[i] + (p2 / precision) * mean2[i]);
    }
    Ok((mean, var))
}

/// Gaussian of a secondary emotion mixed from two primaries.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureGaussian {
    pub mean: Vec<f64>,
    pub variances: Vec<f64>,
    pub parents: (Emotion, Emotion),
    /// Named secondary emotion when the pair is in the table.
    pub name: Option<&'static str>,
    /// Mixing weight toward the second parent; 0.5 is the precision fusion.
    pub beta: f64,
}

impl MixtureGaussian {
    pub fn is_self_mixture(&self) -> bool {
        self.parents.0 == self.parents.1
    }

    /// True for weighted mixtures, which go beyond the equal fusion.
    pub fn is_extension(&self) -> bool {
        self.beta != 0.5
    }

    pub fn sample(&self, seed: u64) -> Result<WeightVector> {
        draw(&self.mean, &self.variances, 1.0, &mut rng::seeded(seed))
    }
}

/// Fuses the Gaussians of `a` and `b` (both with the shared covariance) and
/// draws one sample. `a == b` is accepted and reported as a self-mixture.
pub fn mix_secondary(stats: &EmotionStats, a: Emotion, b: Emotion, seed: u64) -> Result<(MixtureGaussian, WeightVector)> {
    let (mean, variances) = fuse_gaussians(stats.mean(a), &stats.variances, stats.mean(b), &stats.variances)?;
    let mix = MixtureGaussian { mean, variances, parents: (a, b), name: secondary_name(a, b), beta: 0.5 };
    let w = mix.sample(seed)?;
    Ok((mix, w))
}

/// Weighted mixture `mu = (1 - beta) mu_a + beta mu_b` with the fused
/// covariance. Only `beta = 0.5` corresponds to the precision fusion; other
/// weights are an interpolation convenience.
pub fn mix_weighted(
    stats: &EmotionStats,
    a: Emotion,
    b: Emotion,
    beta: f64,
    seed: u64,
) -> Result<(MixtureGaussian, WeightVector)> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidInput(alloc::format!("beta {beta} outside [0, 1]")));
    }
    if beta == 0.5 {
        return mix_secondary(stats, a, b, seed);
    }
    let (_, variances) = fuse_gaussians(stats.mean(a), &stats.variances, stats.mean(b), &stats.variances)?;
    let mean = stats.mean(a).iter().zip(stats.mean(b)).map(|(x, y)| (1.0 - beta) * x + beta * y).collect();
    let mix = MixtureGaussian { mean, variances, parents: (a, b), name: secondary_name(a, b), beta };
    let w = mix.sample(seed)?;
    Ok((mix, w))
}

/// Polarity: `-w`.
pub fn negate(w: &WeightVector) -> WeightVector {
    WeightVector(w.values().iter().map(|x| -x).collect())
}

/// Weight vector of an arbitrary clip, e.g. one carrying an emotion the
/// corpus never labeled.
pub fn transfer_unseen(enc: &TrainedEncoder, clip: &SpeechFeatures, basis: &ProsodyBasis) -> Result<WeightVector> {
    basis.project(&enc.encode(clip)?)
}

/// `N(w, tau * Sigma)`; `tau = 0` returns `w` unchanged.
pub fn sample_around(w: &WeightVector, stats: &EmotionStats, tau: f64, seed: u64) -> Result<WeightVector> {
    if w.len() != stats.dim() {
        return Err(Error::DimensionMismatch { expected: stats.dim(), got: w.len() });
    }
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::InvalidInput("tau must be non-negative".into()));
    }
    if tau == 0.0 {
        return Ok(w.clone());
    }
    draw(w.values(), &stats.variances, tau, &mut rng::seeded(seed))
}

/// A basis and class statistics fitted together so their dimensions agree.
#[derive(Debug, Clone, PartialEq)]
pub struct EmotionSpace {
    pub basis: ProsodyBasis,
    pub stats: EmotionStats,
}

impl EmotionSpace {
    /// Fits on the primary-labeled rows of `set`. `components = None` uses
    /// the default rule (95% explained variance, at most 16).
    pub fn fit(set: &EmbeddingSet, components: Option<usize>) -> Result<Self> {
        let primary = set.primary_only();
        let basis = match components {
            Some(n) => fit_basis(&primary, n)?,
            None => ProsodyBasis::fit_auto(&primary)?,
        };
        let stats = fit_emotion_stats(&primary, &basis)?;
        let basis = basis.truncate(stats.dim());
        Ok(Self { basis, stats })
    }

    pub fn new(basis: ProsodyBasis, stats: EmotionStats) -> Result<Self> {
        if basis.components() != stats.dim() {
            return Err(Error::DimensionMismatch { expected: basis.components(), got: stats.dim() });
        }
        Ok(Self { basis, stats })
    }
}
