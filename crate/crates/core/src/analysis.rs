//! Diagnostics over embedding sets: class-mean cosine similarity, confusion
//! matrices with the discriminator as the rater, explained-variance profiles,
//! 2-D maps and the discriminator ablation.

use alloc::vec;
use alloc::vec::Vec;

use crate::algebra::{fit_basis, EmbeddingSet, ProsodyBasis};
use crate::emotion::{Emotion, EmotionLabel};
use crate::encoder::{self, EncoderConfig, ProsodyEmbedding, TrainReport, TrainedEncoder};
use crate::error::{Error, Result};
use crate::features::SpeechFeatures;
use crate::math;

/// Cosine similarity between centered class means; rows and columns follow
/// [`Emotion::ALL`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    pub values: [[f64; 4]; 4],
}

impl SimilarityMatrix {
    pub fn get(&self, a: Emotion, b: Emotion) -> f64 {
        self.values[a.index()][b.index()]
    }

    /// The other class with the lowest similarity to `e`.
    pub fn most_opposite(&self, e: Emotion) -> Emotion {
        Emotion::ALL
            .into_iter()
            .filter(|&o| o != e)
            .min_by(|&a, &b| self.get(e, a).total_cmp(&self.get(e, b)))
            .expect("three other classes")
    }
}

/// Class means are centered on the mean of all primary-labeled rows, the
/// origin of the decomposition.
pub fn cosine_matrix(set: &EmbeddingSet) -> Result<SimilarityMatrix> {
    let primary = set.primary_only();
    let origin = primary.matrix().column_means();
    let mut centered: Vec<Vec<f64>> = Vec::with_capacity(4);
    for e in Emotion::ALL {
        let mut m = primary.class_mean(e)?;
        m.iter_mut().zip(&origin).for_each(|(x, o)| *x -= o);
        if math::norm(&m) == 0.0 {
            return Err(Error::ZeroNorm(e.name()));
        }
        centered.push(m);
    }
    Ok(cosine_of_vectors(&centered))
}

pub(crate) fn cosine_of_vectors(vs: &[Vec<f64>]) -> SimilarityMatrix {
    let mut values = [[0.0; 4]; 4];
    for i in 0..4 {
        values[i][i] = 1.0;
        for j in i + 1..4 {
            let c = (math::dot(&vs[i], &vs[j]) / (math::norm(&vs[i]) * math::norm(&vs[j]))).clamp(-1.0, 1.0);
            values[i][j] = c;
            values[j][i] = c;
        }
    }
    SimilarityMatrix { values }
}

/// Row-stochastic `true x predicted` frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    pub values: [[f64; 4]; 4],
    pub counts: [[usize; 4]; 4],
}

impl ConfusionMatrix {
    pub fn accuracy(&self) -> f64 {
        let total: usize = self.counts.iter().flatten().sum();
        let hits: usize = (0..4).map(|i| self.counts[i][i]).sum();
        hits as f64 / total.max(1) as f64
    }
}

pub fn confusion_from_predictions(pairs: &[(Emotion, Emotion)]) -> Result<ConfusionMatrix> {
    let mut counts = [[0usize; 4]; 4];
    for &(truth, pred) in pairs {
        counts[truth.index()][pred.index()] += 1;
    }
    let mut values = [[0.0; 4]; 4];
    for (i, row) in counts.iter().enumerate() {
        let n: usize = row.iter().sum();
        if n == 0 {
            return Err(Error::MissingClass(Emotion::ALL[i].name()));
        }
        for j in 0..4 {
            values[i][j] = row[j] as f64 / n as f64;
        }
    }
    Ok(ConfusionMatrix { values, counts })
}

/// Confusion of the discriminator over labeled embeddings.
pub fn confusion(enc: &TrainedEncoder, samples: &[(ProsodyEmbedding, Emotion)]) -> Result<ConfusionMatrix> {
    let pairs = samples
        .iter()
        .map(|(u, truth)| Ok((*truth, enc.classify(u)?)))
        .collect::<Result<Vec<_>>>()?;
    confusion_from_predictions(&pairs)
}

/// Confusion of the discriminator over labeled clips; neutral clips are skipped.
pub fn confusion_from_features(enc: &TrainedEncoder, clips: &[SpeechFeatures]) -> Result<ConfusionMatrix> {
    let mut pairs = Vec::new();
    for s in clips {
        if let Some(truth) = s.emotion.primary() {
            pairs.push((truth, enc.classify(&enc.encode(s)?)?));
        }
    }
    confusion_from_predictions(&pairs)
}

/// Explained-variance ratios over every component, descending.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceProfile {
    pub ratios: Vec<f64>,
    pub cumulative: Vec<f64>,
}

impl VarianceProfile {
    pub fn from_eigenvalues(spectrum: &[f64]) -> Result<Self> {
        let total: f64 = spectrum.iter().map(|v| v.max(0.0)).sum();
        if !(total > 0.0) {
            return Err(Error::ZeroVariance);
        }
        let mut sorted: Vec<f64> = spectrum.iter().map(|v| v.max(0.0)).collect();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let ratios: Vec<f64> = sorted.iter().map(|v| v / total).collect();
        let mut acc = 0.0;
        let cumulative = ratios
            .iter()
            .map(|r| {
                acc += r;
                acc
            })
            .collect();
        Ok(Self { ratios, cumulative })
    }

    /// Shannon entropy (nats) of the ratios; maximal for uniform variance.
    pub fn entropy(&self) -> f64 {
        -self.ratios.iter().filter(|&&r| r > 0.0).map(|&r| r * math::ln(r)).sum::<f64>()
    }
}

pub fn variance_profile(basis: &ProsodyBasis) -> Result<VarianceProfile> {
    VarianceProfile::from_eigenvalues(&basis.spectrum)
}

pub fn variance_profile_of_set(set: &EmbeddingSet) -> Result<VarianceProfile> {
    variance_profile(&fit_basis(set, 1)?)
}

/// Plot-ready 2-D coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMap {
    pub points: Vec<[f64; 2]>,
    pub labels: Vec<EmotionLabel>,
    /// Class means in the same coordinates, [`Emotion::ALL`] order.
    pub class_means: [[f64; 2]; 4],
}

/// Coordinates on the two leading principal axes of `set`.
pub fn project_2d(set: &EmbeddingSet) -> Result<ProjectionMap> {
    if set.len() < 3 {
        return Err(Error::InvalidInput(alloc::format!("need at least 3 rows, got {}", set.len())));
    }
    let basis = fit_basis(set, 2)?;
    if basis.eigenvalues[1] <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    project_2d_with(set, &basis)
}

/// Coordinates on the first two axes of an existing basis.
pub fn project_2d_with(set: &EmbeddingSet, basis: &ProsodyBasis) -> Result<ProjectionMap> {
    if basis.components() < 2 {
        return Err(Error::ComponentsOutOfRange { n: basis.components(), max: 2 });
    }
    let two = basis.truncate(2);
    let mut points = Vec::with_capacity(set.len());
    for i in 0..set.len() {
        let w = two.project_slice(set.row(i))?;
        points.push([w.values()[0], w.values()[1]]);
    }
    let mut class_means = [[0.0; 2]; 4];
    for e in Emotion::ALL {
        let (mut sum, mut n) = ([0.0; 2], 0);
        for (p, l) in points.iter().zip(set.labels()) {
            if *l == EmotionLabel::Primary(e) {
                sum[0] += p[0];
                sum[1] += p[1];
                n += 1;
            }
        }
        if n > 0 {
            class_means[e.index()] = [sum[0] / n as f64, sum[1] / n as f64];
        }
    }
    Ok(ProjectionMap { points, labels: set.labels().to_vec(), class_means })
}

/// Mean silhouette of the primary-labeled rows grouped by emotion
/// (Euclidean distance). Rows whose class has a single member score 0.
pub fn silhouette(set: &EmbeddingSet) -> Result<f64> {
    let primary = set.primary_only();
    let m = primary.len();
    let classes: Vec<usize> = primary.labels().iter().map(|l| l.primary().map_or(0, Emotion::index)).collect();
    let present = (0..4).filter(|c| classes.contains(c)).count();
    if present < 2 {
        return Err(Error::InvalidInput("silhouette needs at least two classes".into()));
    }
    let mut dist = vec![0.0; m * m];
    for i in 0..m {
        for j in i + 1..m {
            let d = math::sqrt(primary.row(i).iter().zip(primary.row(j)).map(|(a, b)| (a - b) * (a - b)).sum());
            dist[i * m + j] = d;
            dist[j * m + i] = d;
        }
    }
    let mut total = 0.0;
    for i in 0..m {
        let mut sums = [0.0; 4];
        let mut counts = [0usize; 4];
        for j in 0..m {
            if i != j {
                sums[classes[j]] += dist[i * m + j];
                counts[classes[j]] += 1;
            }
        }
        let own = classes[i];
        if counts[own] == 0 {
            continue;
        }
        let a = sums[own] / counts[own] as f64;
        let b = (0..4)
            .filter(|&c| c != own && counts[c] > 0)
            .map(|c| sums[c] / counts[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    Ok(total / m as f64)
}

/// One arm of the ablation.
#[derive(Debug, Clone, PartialEq)]
pub struct AblationArm {
    pub lambda_ce: f64,
    pub silhouette: f64,
    pub variance: VarianceProfile,
    pub variance_entropy: f64,
    pub projection: ProjectionMap,
    pub report: TrainReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationReport {
    pub with_discriminator: AblationArm,
    pub without_discriminator: AblationArm,
}

impl AblationReport {
    pub fn separability_improved(&self) -> bool {
        self.with_discriminator.silhouette > self.without_discriminator.silhouette
    }

    pub fn ablation_more_uniform(&self) -> bool {
        self.without_discriminator.variance_entropy > self.with_discriminator.variance_entropy
    }
}

/// Evaluates a trained encoder on `corpus` the way the ablation does.
pub fn evaluate_arm(enc: &TrainedEncoder, report: TrainReport, corpus: &[SpeechFeatures]) -> Result<AblationArm> {
    let set = enc.embed_corpus(corpus)?.primary_only();
    let variance = variance_profile_of_set(&set)?;
    Ok(AblationArm {
        lambda_ce: enc.config.effective_lambda_ce(),
        silhouette: silhouette(&set)?,
        variance_entropy: variance.entropy(),
        variance,
        projection: project_2d(&set)?,
        report,
    })
}

/// Trains with and without the discriminator on the same corpus and seed.
/// `cfg.lambda_ce` is used for the first arm (must be positive).
pub fn ablation_report(corpus: &[SpeechFeatures], cfg: &EncoderConfig) -> Result<AblationReport> {
    let with_cfg = EncoderConfig { discriminator_enabled: true, ..cfg.clone() };
    if with_cfg.effective_lambda_ce() <= 0.0 {
        return Err(Error::InvalidConfig("ablation needs lambda_ce > 0".into()));
    }
    let without_cfg = EncoderConfig { discriminator_enabled: false, ..cfg.clone() };
    let (enc_with, rep_with) = encoder::train(corpus, &with_cfg)?;
    let (enc_without, rep_without) = encoder::train(corpus, &without_cfg)?;
    Ok(AblationReport {
        with_discriminator: evaluate_arm(&enc_with, rep_with, corpus)?,
        without_discriminator: evaluate_arm(&enc_without, rep_without, corpus)?,
    })
}
