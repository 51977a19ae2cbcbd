use alloc::vec::Vec;

use super::{EmbeddingSet, WeightVector};
use crate::encoder::ProsodyEmbedding;
use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
use crate::math;

pub const DEFAULT_VARIANCE_TARGET: f64 = 0.95;
pub const DEFAULT_MAX_COMPONENTS: usize = 16;

/// Mean and leading principal axes of an embedding set.
#[derive(Debug, Clone, PartialEq)]
pub struct ProsodyBasis {
    pub mean: Vec<f64>,
    /// Orthonormal, one per retained component.
    pub vectors: Vec<Vec<f64>>,
    /// Retained eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// Every eigenvalue of the covariance (length d), descending.
    pub spectrum: Vec<f64>,
}

/// Smallest `n` reaching `target` of the total variance, capped at `max` and
/// at the number of strictly positive eigenvalues.
pub fn choose_components(spectrum: &[f64], target: f64, max: usize) -> usize {
    let total: f64 = spectrum.iter().filter(|v| **v > 0.0).sum();
    let positive = spectrum.iter().take_while(|v| **v > 0.0).count();
    if total <= 0.0 {
        return 0;
    }
    let mut acc = 0.0;
    for (i, v) in spectrum.iter().enumerate() {
        acc += v.max(0.0);
        if acc / total >= target {
            return (i + 1).min(max).min(positive).max(1);
        }
    }
    positive.min(max).max(1)
}

/// PCA with the population covariance. Each eigenvector is signed so that
/// its largest-magnitude entry is positive.
pub fn fit_basis(set: &EmbeddingSet, n: usize) -> Result<ProsodyBasis> {
    let (m, d) = (set.len(), set.dim());
    if m < 2 {
        return Err(Error::InvalidInput(alloc::format!("need at least 2 embeddings, got {m}")));
    }
    let max = m.min(d);
    if n == 0 || n > max {
        return Err(Error::ComponentsOutOfRange { n, max });
    }
    let mean = set.matrix().column_means();
    let cov = set.matrix().covariance(&mean);
    let eig = symmetric_eigen(&cov)?;
    let spectrum: Vec<f64> = eig.values.iter().map(|v| v.max(0.0)).collect();
    if spectrum.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroVariance);
    }
    let vectors = eig
        .vectors
        .into_iter()
        .take(n)
        .map(|mut v| {
            let lead = v.iter().copied().enumerate().fold((0, 0.0f64), |best, (i, x)| {
                if x.abs() > best.1.abs() {
                    (i, x)
                } else {
                    best
                }
            });
            if lead.1 < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            v
        })
        .collect();
    Ok(ProsodyBasis { mean, vectors, eigenvalues: spectrum[..n].to_vec(), spectrum })
}

impl ProsodyBasis {
    /// Fits with the default component rule.
    pub fn fit_auto(set: &EmbeddingSet) -> Result<Self> {
        let full = fit_basis(set, 1)?;
        let n = choose_components(&full.spectrum, DEFAULT_VARIANCE_TARGET, DEFAULT_MAX_COMPONENTS);
        fit_basis(set, n.min(set.len().min(set.dim())))
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn components(&self) -> usize {
        self.vectors.len()
    }

    pub fn total_variance(&self) -> f64 {
        self.spectrum.iter().sum()
    }

    /// Keeps the first `n` components.
    pub fn truncate(&self, n: usize) -> ProsodyBasis {
        let n = n.min(self.components());
        ProsodyBasis {
            mean: self.mean.clone(),
            vectors: self.vectors[..n].to_vec(),
            eigenvalues: self.eigenvalues[..n].to_vec(),
            spectrum: self.spectrum.clone(),
        }
    }

    fn check_embedding(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: u.len() });
        }
        Ok(())
    }

    /// `w_i = v_i . (u - mean)`.
    pub fn project(&self, u: &ProsodyEmbedding) -> Result<WeightVector> {
        self.project_slice(u.values())
    }

    pub fn project_slice(&self, u: &[f64]) -> Result<WeightVector> {
        self.check_embedding(u)?;
        let centered: Vec<f64> = u.iter().zip(&self.mean).map(|(a, b)| a - b).collect();
        WeightVector::new(self.vectors.iter().map(|v| math::dot(v, &centered)).collect())
    }

    /// `alpha * sum_i w_i v_i`, the displacement from the mean.
    pub fn offset(&self, w: &WeightVector, alpha: f64) -> Result<Vec<f64>> {
        if w.len() != self.components() {
            return Err(Error::DimensionMismatch { expected: self.components(), got: w.len() });
        }
        if !alpha.is_finite() {
            return Err(Error::NonFinite("alpha"));
        }
        let mut s = alloc::vec![0.0; self.dim()];
        for (wi, v) in w.values().iter().zip(&self.vectors) {
            s.iter_mut().zip(v).for_each(|(acc, x)| *acc += wi * x);
        }
        s.iter_mut().for_each(|x| *x *= alpha);
        Ok(s)
    }

    /// `mean + alpha * sum_i w_i v_i`. `alpha = 1` is the plain decomposition;
    /// smaller values weaken the expressed emotion and larger ones intensify it.
    pub fn reconstruct(&self, w: &WeightVector, alpha: f64) -> Result<ProsodyEmbedding> {
        let mut u = self.offset(w, alpha)?;
        u.iter_mut().zip(&self.mean).for_each(|(x, m)| *x += m);
        ProsodyEmbedding::new(u)
    }
}
