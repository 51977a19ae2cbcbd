//! Emotion algebra over prosody embeddings.
//!
//! Embeddings are decomposed as `u(w) = mean + sum_i w_i v_i` with the `v_i`
//! the leading principal axes. Weight vectors are Gaussian with the PCA
//! eigenvalues as a shared diagonal covariance; each primary emotion shifts
//! the mean, secondary emotions fuse two primaries, `alpha` scales the
//! offset from the mean, and negation reflects it.

use alloc::string::String;
use alloc::vec::Vec;

use crate::emotion::{Emotion, EmotionLabel};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

mod basis;
mod gaussian;

pub use basis::{choose_components, fit_basis, ProsodyBasis, DEFAULT_MAX_COMPONENTS, DEFAULT_VARIANCE_TARGET};
pub use gaussian::{
    fit_emotion_stats, fuse_gaussians, mix_secondary, mix_weighted, negate, sample_around, sample_primary,
    sample_primary_with, transfer_unseen, EmotionSpace, EmotionStats, MixtureGaussian, DEFAULT_TRANSFER_TAU,
    MIN_VARIANCE,
};

/// Embeddings, one row per clip, with per-row labels.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    embeddings: Matrix,
    labels: Vec<EmotionLabel>,
    speakers: Vec<String>,
}

impl EmbeddingSet {
    pub fn new(embeddings: Matrix, labels: Vec<EmotionLabel>, speakers: Vec<String>) -> Result<Self> {
        if labels.len() != embeddings.rows() {
            return Err(Error::DimensionMismatch { expected: embeddings.rows(), got: labels.len() });
        }
        if speakers.len() != embeddings.rows() {
            return Err(Error::DimensionMismatch { expected: embeddings.rows(), got: speakers.len() });
        }
        if !crate::math::all_finite(embeddings.as_slice()) {
            return Err(Error::NonFinite("embedding set"));
        }
        Ok(Self { embeddings, labels, speakers })
    }

    /// Rows all labeled with one emotion and an anonymous speaker.
    pub fn unlabeled(embeddings: Matrix, label: EmotionLabel) -> Result<Self> {
        let m = embeddings.rows();
        Self::new(embeddings, alloc::vec![label; m], alloc::vec![String::new(); m])
    }

    pub fn len(&self) -> usize {
        self.embeddings.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.embeddings.cols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.embeddings
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.embeddings.row(i)
    }

    pub fn labels(&self) -> &[EmotionLabel] {
        &self.labels
    }

    pub fn speakers(&self) -> &[String] {
        &self.speakers
    }

    /// Only rows labeled with a primary emotion.
    pub fn primary_only(&self) -> EmbeddingSet {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| self.labels[i].primary().is_some()).collect();
        self.select(&keep)
    }

    pub fn select(&self, rows: &[usize]) -> EmbeddingSet {
        let mut data = Vec::with_capacity(rows.len() * self.dim());
        for &i in rows {
            data.extend_from_slice(self.row(i));
        }
        EmbeddingSet {
            embeddings: Matrix::from_vec(rows.len(), self.dim(), data).expect("sized above"),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            speakers: rows.iter().map(|&i| self.speakers[i].clone()).collect(),
        }
    }

    pub fn rows_of(&self, emotion: Emotion) -> impl Iterator<Item = &[f64]> {
        let label = EmotionLabel::Primary(emotion);
        (0..self.len()).filter(move |&i| self.labels[i] == label).map(move |i| self.row(i))
    }

    pub fn count_of(&self, emotion: Emotion) -> usize {
        self.rows_of(emotion).count()
    }

    /// Mean embedding of one class.
    pub fn class_mean(&self, emotion: Emotion) -> Result<Vec<f64>> {
        let mut mean = alloc::vec![0.0; self.dim()];
        let mut n = 0usize;
        for r in self.rows_of(emotion) {
            mean.iter_mut().zip(r).for_each(|(m, x)| *m += x);
            n += 1;
        }
        if n == 0 {
            return Err(Error::MissingClass(emotion.name()));
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        Ok(mean)
    }
}

/// Coefficients over a basis.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if !crate::math::all_finite(&values) {
            return Err(Error::NonFinite("weight vector"));
        }
        Ok(Self(values))
    }

    pub fn zeros(n: usize) -> Self {
        Self(alloc::vec![0.0; n])
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
