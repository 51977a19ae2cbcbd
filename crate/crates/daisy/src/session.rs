//! Loaded artifacts plus the request logic shared by the CLI and the service.

use serde::{Deserialize, Serialize};

use daisy_core::algebra::{
    mix_weighted, negate, sample_around, sample_primary, EmbeddingSet, EmotionSpace, WeightVector,
    DEFAULT_TRANSFER_TAU,
};
use daisy_core::analysis::{
    cosine_matrix, project_2d_with, variance_profile, ProjectionMap, SimilarityMatrix, VarianceProfile,
};
use daisy_core::encoder::{softmax, ProsodyEmbedding, TrainedEncoder};
use daisy_core::features::{ProsodyStats, SpeechFeatures};
use daisy_core::{Emotion, SECONDARY_EMOTIONS};

/// A request that could not be served.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RequestError {
    /// Not parseable as the expected JSON shape.
    #[error("malformed request: {0}")]
    Malformed(String),
    /// Well-formed but semantically invalid, e.g. an unknown emotion name.
    #[error("{0}")]
    Unprocessable(String),
}

impl From<daisy_core::Error> for RequestError {
    fn from(e: daisy_core::Error) -> Self {
        RequestError::Unprocessable(e.to_string())
    }
}

pub type RequestResult<T> = std::result::Result<T, RequestError>;

fn parse_emotion(name: &str) -> RequestResult<Emotion> {
    name.parse().map_err(|_| RequestError::Unprocessable(format!("unknown emotion {name:?}")))
}

pub fn parse_json<'a, T: Deserialize<'a>>(body: &'a [u8]) -> RequestResult<T> {
    serde_json::from_slice(body).map_err(|e| RequestError::Malformed(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MixMode {
    Primary,
    Secondary,
    Transfer,
}

/// JSON body of `POST /mix`. `mode` may be omitted when exactly one of
/// `emotion`, `pair` or `embedding` is given.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixBody {
    pub mode: Option<String>,
    pub emotion: Option<String>,
    pub pair: Option<[String; 2]>,
    pub embedding: Option<Vec<f64>>,
    pub beta: Option<f64>,
    pub alpha: Option<f64>,
    #[serde(default)]
    pub negate: bool,
    pub tau: Option<f64>,
    pub seed: u64,
}

/// JSON body of `POST /sample`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleBody {
    pub emotion: String,
    pub alpha: Option<f64>,
    #[serde(default)]
    pub negate: bool,
    pub seed: u64,
}

/// Body of `POST /classify` and `POST /stats`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingBody {
    pub embedding: Vec<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MixTarget {
    Primary(Emotion),
    Secondary(Emotion, Emotion),
    /// Embedding of a reference clip.
    Transfer(Vec<f64>),
}

/// Validated mixing request.
#[derive(Debug, Clone, PartialEq)]
pub struct MixRequest {
    pub target: MixTarget,
    pub beta: f64,
    pub alpha: f64,
    pub negate: bool,
    pub tau: f64,
    pub seed: u64,
}

impl MixRequest {
    pub fn primary(emotion: Emotion, alpha: f64, negate: bool, seed: u64) -> Self {
        Self { target: MixTarget::Primary(emotion), beta: 0.5, alpha, negate, tau: DEFAULT_TRANSFER_TAU, seed }
    }

    pub fn secondary(a: Emotion, b: Emotion, beta: f64, alpha: f64, negate: bool, seed: u64) -> Self {
        Self { target: MixTarget::Secondary(a, b), beta, alpha, negate, tau: DEFAULT_TRANSFER_TAU, seed }
    }

    pub fn mode(&self) -> MixMode {
        match self.target {
            MixTarget::Primary(_) => MixMode::Primary,
            MixTarget::Secondary(..) => MixMode::Secondary,
            MixTarget::Transfer(_) => MixMode::Transfer,
        }
    }

    pub fn validate(&self) -> RequestResult<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(RequestError::Unprocessable(format!("alpha must be finite and positive, got {}", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(RequestError::Unprocessable(format!("beta must lie in [0, 1], got {}", self.beta)));
        }
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return Err(RequestError::Unprocessable(format!("tau must be non-negative, got {}", self.tau)));
        }
        if let MixTarget::Transfer(u) = &self.target {
            if u.iter().any(|x| !x.is_finite()) {
                return Err(RequestError::Unprocessable("embedding contains non-finite values".into()));
            }
        }
        Ok(())
    }
}

impl TryFrom<MixBody> for MixRequest {
    type Error = RequestError;

    fn try_from(body: MixBody) -> RequestResult<Self> {
        let mode = match body.mode.as_deref().map(str::to_ascii_lowercase).as_deref() {
            Some("primary") => MixMode::Primary,
            Some("secondary") => MixMode::Secondary,
            Some("transfer") => MixMode::Transfer,
            Some(other) => return Err(RequestError::Unprocessable(format!("unknown mode {other:?}"))),
            None => match (&body.emotion, &body.pair, &body.embedding) {
                (Some(_), None, None) => MixMode::Primary,
                (None, Some(_), None) => MixMode::Secondary,
                (None, None, Some(_)) => MixMode::Transfer,
                _ => {
                    return Err(RequestError::Malformed(
                        "give exactly one of emotion, pair, embedding, or an explicit mode".into(),
                    ))
                }
            },
        };
        let target = match mode {
            MixMode::Primary => {
                let name = body.emotion.ok_or_else(|| RequestError::Malformed("primary mode needs emotion".into()))?;
                MixTarget::Primary(parse_emotion(&name)?)
            }
            MixMode::Secondary => {
                let [a, b] = body.pair.ok_or_else(|| RequestError::Malformed("secondary mode needs pair".into()))?;
                MixTarget::Secondary(parse_emotion(&a)?, parse_emotion(&b)?)
            }
            MixMode::Transfer => MixTarget::Transfer(
                body.embedding.ok_or_else(|| RequestError::Malformed("transfer mode needs embedding".into()))?,
            ),
        };
        let req = MixRequest {
            target,
            beta: body.beta.unwrap_or(0.5),
            alpha: body.alpha.unwrap_or(1.0),
            negate: body.negate,
            tau: body.tau.unwrap_or(DEFAULT_TRANSFER_TAU),
            seed: body.seed,
        };
        req.validate()?;
        Ok(req)
    }
}

impl TryFrom<SampleBody> for MixRequest {
    type Error = RequestError;

    fn try_from(body: SampleBody) -> RequestResult<Self> {
        let req = MixRequest::primary(parse_emotion(&body.emotion)?, body.alpha.unwrap_or(1.0), body.negate, body.seed);
        req.validate()?;
        Ok(req)
    }
}

/// Result of a mixing request, serialized as-is by both front ends.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixOutcome {
    pub seed: u64,
    pub mode: MixMode,
    /// Display label, e.g. `"anger"`, `"envy"` or `"polar joy"`.
    pub label: String,
    /// Secondary-emotion name when the pair is in the table.
    pub name: Option<&'static str>,
    pub parents: Vec<&'static str>,
    pub beta: Option<f64>,
    /// Weighted mixtures (beta != 0.5) go beyond the equal-precision fusion.
    pub extension: bool,
    pub self_mixture: bool,
    pub alpha: f64,
    pub negate: bool,
    pub tau: Option<f64>,
    pub w: Vec<f64>,
    pub embedding: Vec<f64>,
    /// Position in the projection map.
    pub point: [f64; 2],
}

/// Samples `w` for `req`; shared by `daisy mix`, `POST /mix` and `POST /sample`.
pub fn run_mix(space: &EmotionSpace, req: &MixRequest) -> RequestResult<MixOutcome> {
    req.validate()?;
    let stats = &space.stats;
    let (w, base_label, name, parents, beta, extension, self_mixture, tau) = match &req.target {
        MixTarget::Primary(e) => {
            let w = sample_primary(stats, *e, req.seed)?;
            (w, e.name().to_string(), None, vec![e.name()], None, false, false, None)
        }
        MixTarget::Secondary(a, b) => {
            let (mix, w) = mix_weighted(stats, *a, *b, req.beta, req.seed)?;
            let label = match mix.name {
                Some(n) => n.to_string(),
                None if a == b => a.name().to_string(),
                None => format!("{}+{}", a.name(), b.name()),
            };
            let ext = mix.is_extension();
            (w, label, mix.name, vec![a.name(), b.name()], Some(req.beta), ext, mix.is_self_mixture(), None)
        }
        MixTarget::Transfer(u) => {
            let center = space.basis.project_slice(u)?;
            let w = sample_around(&center, stats, req.tau, req.seed)?;
            (w, "transfer".to_string(), None, vec![], None, false, false, Some(req.tau))
        }
    };
    let w = if req.negate { negate(&w) } else { w };
    let embedding = space.basis.reconstruct(&w, req.alpha)?.into_vec();
    let point = point_of(&w, req.alpha);
    Ok(MixOutcome {
        seed: req.seed,
        mode: req.mode(),
        label: if req.negate { format!("polar {base_label}") } else { base_label },
        name,
        parents,
        beta,
        extension,
        self_mixture,
        alpha: req.alpha,
        negate: req.negate,
        tau,
        w: w.into_vec(),
        embedding,
        point,
    })
}

/// Map coordinates of `reconstruct(w, alpha)`: the first two scaled weights.
fn point_of(w: &WeightVector, alpha: f64) -> [f64; 2] {
    let v = w.values();
    [alpha * v.first().copied().unwrap_or(0.0), alpha * v.get(1).copied().unwrap_or(0.0)]
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyOutcome {
    pub seed: Option<u64>,
    pub emotion: &'static str,
    pub labels: [&'static str; 4],
    pub logits: [f64; 4],
    pub probabilities: [f64; 4],
}

#[derive(Debug, Clone, Serialize)]
pub struct StatsDto {
    pub pitch_mean: f64,
    pub pitch_std: f64,
    pub pitch_slope: f64,
    pub energy_mean: f64,
    pub energy_std: f64,
    pub voiced_fraction: f64,
}

impl From<ProsodyStats> for StatsDto {
    fn from(s: ProsodyStats) -> Self {
        Self {
            pitch_mean: s.pitch_mean,
            pitch_std: s.pitch_std,
            pitch_slope: s.pitch_slope,
            energy_mean: s.energy_mean,
            energy_std: s.energy_std,
            voiced_fraction: s.voiced_fraction,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StatsOutcome {
    pub seed: Option<u64>,
    pub stats: StatsDto,
}

#[derive(Debug, Clone, Serialize)]
pub struct SecondaryDto {
    pub name: &'static str,
    pub pair: [&'static str; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct EmotionsDto {
    pub seed: Option<u64>,
    pub primaries: Vec<&'static str>,
    pub secondaries: Vec<SecondaryDto>,
}

pub fn emotions(seed: Option<u64>) -> EmotionsDto {
    EmotionsDto {
        seed,
        primaries: Emotion::ALL.iter().map(|e| e.name()).collect(),
        secondaries: SECONDARY_EMOTIONS
            .iter()
            .map(|s| SecondaryDto { name: s.name, pair: [s.pair.0.name(), s.pair.1.name()] })
            .collect(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PointDto {
    pub x: f64,
    pub y: f64,
    pub label: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassMeanDto {
    pub emotion: &'static str,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProjectionDto {
    pub seed: Option<u64>,
    pub points: Vec<PointDto>,
    pub class_means: Vec<ClassMeanDto>,
}

impl ProjectionDto {
    pub fn new(map: &ProjectionMap, seed: Option<u64>) -> Self {
        Self {
            seed,
            points: map
                .points
                .iter()
                .zip(&map.labels)
                .map(|(p, l)| PointDto { x: p[0], y: p[1], label: l.name() })
                .collect(),
            class_means: Emotion::ALL
                .iter()
                .map(|e| {
                    let [x, y] = map.class_means[e.index()];
                    ClassMeanDto { emotion: e.name(), x, y }
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimilarityDto {
    pub seed: Option<u64>,
    pub labels: [&'static str; 4],
    pub matrix: [[f64; 4]; 4],
}

impl SimilarityDto {
    pub fn new(s: &SimilarityMatrix, seed: Option<u64>) -> Self {
        Self { seed, labels: Emotion::ALL.map(Emotion::name), matrix: s.values }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VarianceDto {
    pub seed: Option<u64>,
    /// Components kept by the fitted basis.
    pub retained: usize,
    pub ratios: Vec<f64>,
    pub cumulative: Vec<f64>,
    pub entropy: f64,
}

impl VarianceDto {
    pub fn new(v: &VarianceProfile, retained: usize, seed: Option<u64>) -> Self {
        Self { seed, retained, ratios: v.ratios.clone(), cumulative: v.cumulative.clone(), entropy: v.entropy() }
    }
}

/// Everything the service needs, loaded once and then read-only.
#[derive(Debug, Clone)]
pub struct SessionState {
    pub encoder: TrainedEncoder,
    pub space: EmotionSpace,
    pub set: EmbeddingSet,
    pub projection: ProjectionMap,
    pub similarity: SimilarityMatrix,
    pub variance: VarianceProfile,
}

impl SessionState {
    /// Embeds `corpus` with `encoder` and precomputes the static views.
    pub fn new(encoder: TrainedEncoder, space: EmotionSpace, corpus: &[SpeechFeatures]) -> crate::Result<Self> {
        if space.basis.dim() != encoder.embed_dim() {
            return Err(daisy_core::Error::DimensionMismatch { expected: encoder.embed_dim(), got: space.basis.dim() }.into());
        }
        let set = encoder.embed_corpus(corpus)?;
        let projection = projection_of(&set, &space)?;
        let similarity = cosine_matrix(&set.primary_only())?;
        let variance = variance_profile(&space.basis)?;
        Ok(Self { encoder, space, set, projection, similarity, variance })
    }

    pub fn mix(&self, req: &MixRequest) -> RequestResult<MixOutcome> {
        run_mix(&self.space, req)
    }

    fn embedding(&self, values: Vec<f64>) -> RequestResult<ProsodyEmbedding> {
        if values.len() != self.encoder.embed_dim() {
            return Err(RequestError::Unprocessable(format!(
                "embedding has length {}, expected {}",
                values.len(),
                self.encoder.embed_dim()
            )));
        }
        Ok(ProsodyEmbedding::new(values)?)
    }

    pub fn classify(&self, body: EmbeddingBody) -> RequestResult<ClassifyOutcome> {
        let u = self.embedding(body.embedding)?;
        let logits = self.encoder.discriminate(&u)?;
        let probabilities = softmax(&logits);
        let emotion = self.encoder.classify(&u)?;
        Ok(ClassifyOutcome { seed: body.seed, emotion: emotion.name(), labels: Emotion::ALL.map(Emotion::name), logits, probabilities })
    }

    pub fn stats(&self, body: EmbeddingBody) -> RequestResult<StatsOutcome> {
        let u = self.embedding(body.embedding)?;
        Ok(StatsOutcome { seed: body.seed, stats: self.encoder.decode_prosody_stats(&u)?.into() })
    }
}

/// Projection onto the first two axes of the space; a one-axis space maps to
/// the x axis.
pub fn projection_of(set: &EmbeddingSet, space: &EmotionSpace) -> crate::Result<ProjectionMap> {
    if space.basis.components() >= 2 {
        return Ok(project_2d_with(set, &space.basis)?);
    }
    let mut points = Vec::with_capacity(set.len());
    for i in 0..set.len() {
        let w = space.basis.project_slice(set.row(i))?;
        points.push([w.values()[0], 0.0]);
    }
    let mut class_means = [[0.0; 2]; 4];
    for e in Emotion::ALL {
        class_means[e.index()] = [space.stats.mean(e)[0], 0.0];
    }
    Ok(ProjectionMap { points, labels: set.labels().to_vec(), class_means })
}

