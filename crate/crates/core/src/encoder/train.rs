//! Mini-batch gradient descent on
//! `lambda_ce * CE(discriminator(u), label) + lambda_aux * MSE(aux(u), stats)`.

use alloc::format;

use alloc::vec::Vec;

use super::network::{softmax, Network, CLASSES, STAT_DIM};
use super::{check_features, normalize_channels, raw_channels, EncoderConfig, Normalizer, TrainedEncoder};
use crate::emotion::{Emotion, EmotionLabel};
use crate::error::{Error, Result};
use crate::features::{ProsodyStats, SpeechFeatures};
use crate::rng;

/// Loss components, averaged over the clips they apply to.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossParts {
    pub total: f64,
    pub cross_entropy: f64,
    pub aux: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: LossParts,
    /// Discriminator accuracy on the training split after this epoch.
    pub train_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub epochs: Vec<EpochRecord>,
    /// Accuracy on the held-out split; on the training split when nothing
    /// was held out.
    pub heldout_accuracy: f64,
    pub heldout_size: usize,
    pub epoch_count: usize,
    /// Filled in by callers that have a clock.
    pub wall_clock_s: Option<f64>,
}

/// One prepared training example.
pub(crate) struct Example {
    pub input: Vec<f64>,
    pub frames: usize,
    pub label: Option<usize>,
    pub target: [f64; STAT_DIM],
}

/// Loss over `batch` and, when `grad` is given, its gradient accumulated
/// into `grad`. Cross-entropy is averaged over emotion-labeled clips only.
pub(crate) fn loss_and_grad(
    net: &Network,
    batch: &[&Example],
    lambda_ce: f64,
    lambda_aux: f64,
    mut grad: Option<&mut Network>,
) -> LossParts {
    let labeled = batch.iter().filter(|e| e.label.is_some()).count();
    let mut ce_sum = 0.0;
    let mut aux_sum = 0.0;
    for ex in batch {
        let fwd = net.forward(&ex.input, ex.frames);
        let mut dlogits = [0.0; CLASSES];
        if let Some(y) = ex.label {
            let p = softmax(&net.logits(&fwd.embedding));
            ce_sum += -crate::math::ln(p[y].max(1e-300));
            for k in 0..CLASSES {
                dlogits[k] = lambda_ce * (p[k] - if k == y { 1.0 } else { 0.0 }) / labeled as f64;
            }
        }
        let aux = net.aux(&fwd.embedding);
        let mut daux = [0.0; STAT_DIM];
        for j in 0..STAT_DIM {
            let r = aux[j] - ex.target[j];
            aux_sum += r * r;
            daux[j] = lambda_aux * 2.0 * r / (STAT_DIM * batch.len()) as f64;
        }
        if let Some(g) = grad.as_deref_mut() {
            net.backward(&fwd, &dlogits, &daux, g);
        }
    }
    let cross_entropy = if labeled > 0 { ce_sum / labeled as f64 } else { 0.0 };
    let aux = aux_sum / (STAT_DIM * batch.len().max(1)) as f64;
    LossParts { total: lambda_ce * cross_entropy + lambda_aux * aux, cross_entropy, aux }
}

/// Loss and full gradient over a set of clips for an arbitrary network,
/// normalizing inputs and targets with the given statistics. Exposed for
/// gradient verification.
pub fn batch_loss(
    net: &Network,
    clips: &[SpeechFeatures],
    input_norm: &Normalizer,
    stat_norm: &Normalizer,
    lambda_ce: f64,
    lambda_aux: f64,
) -> Result<(LossParts, Network)> {
    let examples = clips
        .iter()
        .map(|s| prepare_example(s, s.n_mels(), input_norm, stat_norm))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&Example> = examples.iter().collect();
    let mut grad = net.zeros_like();
    let loss = loss_and_grad(net, &refs, lambda_ce, lambda_aux, Some(&mut grad));
    Ok((loss, grad))
}

fn prepare_example(s: &SpeechFeatures, n_mels: usize, input_norm: &Normalizer, stat_norm: &Normalizer) -> Result<Example> {
    check_features(s, n_mels)?;
    let mut input = raw_channels(s);
    normalize_channels(&mut input, s.frames(), input_norm);
    let raw = ProsodyStats::of(s).to_array();
    let mut target = [0.0; STAT_DIM];
    for j in 0..STAT_DIM {
        target[j] = (raw[j] - stat_norm.mean[j]) / stat_norm.std[j];
    }
    Ok(Example { input, frames: s.frames(), label: s.emotion.primary().map(Emotion::index), target })
}

/// Stratified split of corpus indices into (train, held-out). Each label's
/// clips are shuffled with a seed-derived stream and the first
/// `floor(n * holdout_fraction)` are held out.
pub fn split_indices(corpus: &[SpeechFeatures], holdout_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut train = Vec::new();
    let mut held = Vec::new();
    for label in EmotionLabel::ALL {
        let members: Vec<usize> = (0..corpus.len()).filter(|&i| corpus[i].emotion == label).collect();
        let mut r = rng::stream(seed, (1 << 32) + label.code() as u64);
        let order = rng::permutation(&mut r, members.len());
        let n_held = (members.len() as f64 * holdout_fraction) as usize;
        for (k, &o) in order.iter().enumerate() {
            if k < n_held {
                held.push(members[o]);
            } else {
                train.push(members[o]);
            }
        }
    }
    train.sort_unstable();
    held.sort_unstable();
    (train, held)
}

fn accuracy(net: &Network, examples: &[&Example]) -> f64 {
    let mut hits = 0usize;
    let mut total = 0usize;
    for ex in examples {
        if let Some(y) = ex.label {
            let logits = net.logits(&net.embed(&ex.input, ex.frames));
            let best = (0..CLASSES).max_by(|&a, &b| logits[a].total_cmp(&logits[b])).unwrap_or(0);
            hits += usize::from(best == y);
            total += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        hits as f64 / total as f64
    }
}

pub fn train(corpus: &[SpeechFeatures], cfg: &EncoderConfig) -> Result<(TrainedEncoder, TrainReport)> {
    train_with_progress(corpus, cfg, |_| {})
}

/// Like [`train`], calling `progress` after every epoch.
pub fn train_with_progress(
    corpus: &[SpeechFeatures],
    cfg: &EncoderConfig,
    mut progress: impl FnMut(&EpochRecord),
) -> Result<(TrainedEncoder, TrainReport)> {
    cfg.validate()?;
    for e in Emotion::ALL {
        let n = corpus.iter().filter(|s| s.emotion == e.into()).count();
        if n < 2 {
            return Err(Error::CorpusTooSmall(format!("{n} clips of {e}, need at least 2")));
        }
    }
    let n_mels = corpus[0].n_mels();
    for s in corpus {
        check_features(s, n_mels)?;
    }

    let (train_idx, held_idx) = split_indices(corpus, cfg.holdout_fraction, cfg.rng_seed);

    let raw: Vec<Vec<f64>> = train_idx.iter().map(|&i| raw_channels(&corpus[i])).collect();
    let in_ch = n_mels + 2;
    let input_norm = {
        let mut frames_by_channel = Vec::new();
        for (k, &i) in train_idx.iter().enumerate() {
            let t = corpus[i].frames();
            for f in 0..t {
                frames_by_channel.push((0..in_ch).map(|c| raw[k][c * t + f]).collect::<Vec<f64>>());
            }
        }
        Normalizer::fit(in_ch, frames_by_channel.iter().map(Vec::as_slice))
    };
    drop(raw);
    let stats: Vec<[f64; STAT_DIM]> = train_idx.iter().map(|&i| ProsodyStats::of(&corpus[i]).to_array()).collect();
    let stat_norm = Normalizer::fit(STAT_DIM, stats.iter().map(|s| s.as_slice()));

    let examples: Vec<Example> = train_idx
        .iter()
        .map(|&i| prepare_example(&corpus[i], n_mels, &input_norm, &stat_norm))
        .collect::<Result<_>>()?;
    let heldout: Vec<Example> = held_idx
        .iter()
        .map(|&i| prepare_example(&corpus[i], n_mels, &input_norm, &stat_norm))
        .collect::<Result<_>>()?;

    let mut net = Network::init(in_ch, &cfg.channels, cfg.embed_dim, cfg.rng_seed);
    let lambda_ce = cfg.effective_lambda_ce();
    let mut grad = net.zeros_like();
    let mut records = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        let mut r = rng::stream(cfg.rng_seed, epoch as u64);
        let order = rng::permutation(&mut r, examples.len());
        let mut sum = LossParts::default();
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<&Example> = chunk.iter().map(|&i| &examples[i]).collect();
            grad.tensors_mut().into_iter().for_each(|t| t.data.iter_mut().for_each(|v| *v = 0.0));
            let loss = loss_and_grad(&net, &batch, lambda_ce, cfg.lambda_aux, Some(&mut grad));
            if !loss.total.is_finite() {
                return Err(Error::Diverged { epoch: epoch + 1, what: "loss" });
            }
            net.add_scaled(&grad, -cfg.learning_rate);
            let w = batch.len() as f64;
            sum.total += loss.total * w;
            sum.cross_entropy += loss.cross_entropy * w;
            sum.aux += loss.aux * w;
        }
        let n = examples.len() as f64;
        let loss = LossParts { total: sum.total / n, cross_entropy: sum.cross_entropy / n, aux: sum.aux / n };
        let refs: Vec<&Example> = examples.iter().collect();
        let record = EpochRecord { epoch: epoch + 1, loss, train_accuracy: accuracy(&net, &refs) };
        progress(&record);
        records.push(record);
    }

    let mut encoder = TrainedEncoder { config: cfg.clone(), n_mels, network: net, input_norm, stat_norm };
    encoder.quantize();
    if encoder.network.tensors().iter().any(|t| t.data.iter().any(|v| !v.is_finite())) {
        return Err(Error::Diverged { epoch: cfg.epochs, what: "parameters" });
    }

    let evaluated: Vec<&Example> = if heldout.is_empty() { examples.iter().collect() } else { heldout.iter().collect() };
    let report = TrainReport {
        heldout_accuracy: accuracy(&encoder.network, &evaluated),
        heldout_size: heldout.len(),
        epoch_count: cfg.epochs,
        epochs: records,
        wall_clock_s: None,
    };
    Ok((encoder, report))
}
