//! `daisy` command line.

use std::fs;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use daisy_core::algebra::{negate, EmotionSpace, WeightVector, DEFAULT_TRANSFER_TAU};
use daisy_core::analysis::{
    ablation_report, confusion_from_features, silhouette, AblationArm, ConfusionMatrix,
};
use daisy_core::encoder::{train_with_progress, EncoderConfig, TrainedEncoder};
use daisy_core::features::{
    extract_features, generate_synthetic_corpus, FeatureConfig, ProsodyProfile, SpeechFeatures,
    SyntheticCorpusSpec, DEFAULT_SAMPLE_RATE,
};
use daisy_core::{Emotion, EmotionLabel};

use crate::error::{Error, Result};
use crate::formats::{read_basis, read_encoder, read_features, write_basis, write_encoder, write_features, BasisFile};
use crate::session::{projection_of, run_mix, MixOutcome, MixRequest, MixTarget, SessionState, SimilarityDto, VarianceDto};
use crate::{corpus_dir, svg, wav};

const DEFAULT_HOME: &str = ".daisy";

#[derive(Debug, Parser)]
#[command(name = "daisy", version, about = "Emotion-separable prosody embeddings and their PCA/Gaussian algebra")]
pub struct Cli {
    /// Directory for default artifact paths.
    #[arg(long, env = "DAISY_HOME", global = true)]
    pub home: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize a labeled corpus and write its feature cache.
    GenCorpus(GenCorpusArgs),
    /// Extract features from a `<speaker>/<emotion>/<clip>.wav` directory.
    Extract(ExtractArgs),
    /// Train the prosody encoder; prints one JSON record per epoch.
    Train(TrainArgs),
    /// Fit the PCA basis and emotion statistics.
    Fit(FitArgs),
    /// Sample a primary emotion.
    Sample(SampleArgs),
    /// Sample a secondary mixture, a primary, or a transferred clip.
    Mix(MixArgs),
    /// Write similarity, confusion, variance and projection reports.
    Analyze(AnalyzeArgs),
    /// Serve the JSON API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct GenCorpusArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Clips per emotion and speaker.
    #[arg(long, default_value_t = 50)]
    pub clips_per_emotion: usize,
    #[arg(long, default_value_t = 2)]
    pub speakers: usize,
    /// Also synthesize neutral clips (used only by the auxiliary loss).
    #[arg(long)]
    pub neutral: bool,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub embed_dim: Option<usize>,
    #[arg(long)]
    pub lambda_ce: Option<f64>,
    #[arg(long)]
    pub lambda_aux: Option<f64>,
    /// Train without the emotion discriminator (lambda_ce = 0).
    #[arg(long)]
    pub no_discriminator: bool,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Retained components; default is the 95% explained-variance rule.
    #[arg(long)]
    pub components: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub basis: Option<PathBuf>,
    #[arg(long)]
    pub emotion: Emotion,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long)]
    pub negate: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("target").required(true).args(["pair", "emotion", "wav"])))]
pub struct MixArgs {
    #[arg(long)]
    pub basis: Option<PathBuf>,
    /// Two primaries, e.g. `--pair anger sadness`.
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    pub pair: Option<Vec<Emotion>>,
    #[arg(long)]
    pub emotion: Option<Emotion>,
    /// Reference clip for transfer; needs the model.
    #[arg(long)]
    pub wav: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Weight toward the second parent; 0.5 is the equal fusion.
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long)]
    pub negate: bool,
    /// Spread around a transferred clip, as a fraction of the covariance.
    #[arg(long, default_value_t = DEFAULT_TRANSFER_TAU)]
    pub tau: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub basis: Option<PathBuf>,
    /// Output directory for JSON and SVG reports.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also retrain with and without the discriminator and compare.
    #[arg(long)]
    pub ablation: bool,
    /// Seed for the ablation runs; defaults to the model's training seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub basis: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: IpAddr,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
}

struct Home(PathBuf);

impl Home {
    fn or(&self, given: &Option<PathBuf>, name: &str) -> PathBuf {
        given.clone().unwrap_or_else(|| self.0.join(name))
    }
}

/// Parses `args` and runs; returns the process exit code.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("daisy: error: {e}");
            ExitCode::from(1)
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let home = Home(cli.home.unwrap_or_else(|| PathBuf::from(DEFAULT_HOME)));
    match cli.command {
        Command::GenCorpus(a) => gen_corpus(&home, a),
        Command::Extract(a) => extract(&home, a),
        Command::Train(a) => train(&home, a),
        Command::Fit(a) => fit(&home, a),
        Command::Sample(a) => {
            let space = read_basis(&home.or(&a.basis, "basis.bin"))?.space;
            print_json(&mix_or_err(&space, &MixRequest::primary(a.emotion, a.alpha, a.negate, a.seed))?)
        }
        Command::Mix(a) => mix(&home, a),
        Command::Analyze(a) => analyze(&home, a),
        Command::Serve(a) => serve(&home, a),
    }
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer(&mut out, v)?;
    writeln!(out).map_err(|e| Error::io("<stdout>", e))
}

fn mix_or_err(space: &EmotionSpace, req: &MixRequest) -> Result<MixOutcome> {
    run_mix(space, req).map_err(|e| Error::format("request", e.to_string()))
}

fn gen_corpus(home: &Home, a: GenCorpusArgs) -> Result<()> {
    let spec = SyntheticCorpusSpec {
        clips_per_emotion: a.clips_per_emotion,
        speakers: a.speakers,
        neutral: a.neutral.then(|| ProsodyProfile::default_for(EmotionLabel::Neutral)),
        rng_seed: a.seed,
        ..SyntheticCorpusSpec::default()
    };
    let corpus = generate_synthetic_corpus(&spec)?;
    let out = home.or(&a.out, "corpus.bin");
    write_features(&out, &corpus)?;
    eprintln!("wrote {} clips to {}", corpus.len(), out.display());
    Ok(())
}

fn extract(home: &Home, a: ExtractArgs) -> Result<()> {
    let corpus = corpus_dir::load_corpus_dir(&a.input, &FeatureConfig::default())?;
    if corpus.is_empty() {
        return Err(Error::format("corpus directory", format!("no labeled WAV files under {}", a.input.display())));
    }
    let out = home.or(&a.out, "corpus.bin");
    write_features(&out, &corpus)?;
    eprintln!("wrote {} clips to {}", corpus.len(), out.display());
    Ok(())
}

#[derive(Serialize)]
struct EpochLine {
    event: &'static str,
    epoch: usize,
    loss: f64,
    cross_entropy: f64,
    aux: f64,
    train_accuracy: f64,
}

#[derive(Serialize)]
struct TrainDone<'a> {
    event: &'static str,
    epochs: usize,
    heldout_accuracy: f64,
    heldout_size: usize,
    wall_clock_s: Option<f64>,
    model: &'a Path,
}

fn train(home: &Home, a: TrainArgs) -> Result<()> {
    let corpus = read_features(&home.or(&a.corpus, "corpus.bin"))?;
    let d = EncoderConfig::default();
    let cfg = EncoderConfig {
        embed_dim: a.embed_dim.unwrap_or(d.embed_dim),
        learning_rate: a.learning_rate.unwrap_or(d.learning_rate),
        batch_size: a.batch_size.unwrap_or(d.batch_size),
        epochs: a.epochs.unwrap_or(d.epochs),
        rng_seed: a.seed,
        discriminator_enabled: !a.no_discriminator,
        lambda_ce: a.lambda_ce.unwrap_or(d.lambda_ce),
        lambda_aux: a.lambda_aux.unwrap_or(d.lambda_aux),
        ..d
    };
    let start = Instant::now();
    let mut write_err = None;
    let (enc, mut report) = train_with_progress(&corpus, &cfg, |r| {
        let line = EpochLine {
            event: "epoch",
            epoch: r.epoch,
            loss: r.loss.total,
            cross_entropy: r.loss.cross_entropy,
            aux: r.loss.aux,
            train_accuracy: r.train_accuracy,
        };
        if let Err(e) = print_json(&line) {
            write_err.get_or_insert(e);
        }
    })?;
    if let Some(e) = write_err {
        return Err(e);
    }
    report.wall_clock_s = Some(start.elapsed().as_secs_f64());
    let out = home.or(&a.out, "model.bin");
    write_encoder(&out, &enc)?;
    print_json(&TrainDone {
        event: "done",
        epochs: report.epoch_count,
        heldout_accuracy: report.heldout_accuracy,
        heldout_size: report.heldout_size,
        wall_clock_s: report.wall_clock_s,
        model: &out,
    })
}

fn fit(home: &Home, a: FitArgs) -> Result<()> {
    let enc = read_encoder(&home.or(&a.model, "model.bin"))?;
    let corpus = read_features(&home.or(&a.corpus, "corpus.bin"))?;
    let set = enc.embed_corpus(&corpus)?;
    let space = EmotionSpace::fit(&set, a.components)?;
    let out = home.or(&a.out, "basis.bin");
    write_basis(&out, &BasisFile::new(space.clone()))?;
    #[derive(Serialize)]
    struct Fitted<'a> {
        components: usize,
        dim: usize,
        eigenvalues: &'a [f64],
        basis: &'a Path,
    }
    print_json(&Fitted {
        components: space.basis.components(),
        dim: space.basis.dim(),
        eigenvalues: &space.basis.eigenvalues,
        basis: &out,
    })
}

fn mix(home: &Home, a: MixArgs) -> Result<()> {
    let space = read_basis(&home.or(&a.basis, "basis.bin"))?.space;
    let target = match (a.pair, a.emotion, a.wav) {
        (Some(p), _, _) => MixTarget::Secondary(p[0], p[1]),
        (None, Some(e), _) => MixTarget::Primary(e),
        (None, None, Some(path)) => {
            let enc = read_encoder(&home.or(&a.model, "model.bin"))?;
            MixTarget::Transfer(embed_wav(&enc, &path)?)
        }
        (None, None, None) => unreachable!("clap enforces the target group"),
    };
    let req = MixRequest { target, beta: a.beta, alpha: a.alpha, negate: a.negate, tau: a.tau, seed: a.seed };
    print_json(&mix_or_err(&space, &req)?)
}

fn embed_wav(enc: &TrainedEncoder, path: &Path) -> Result<Vec<f64>> {
    let clip = wav::load_audio(path, DEFAULT_SAMPLE_RATE)?;
    let features = extract_features(&clip, EmotionLabel::Neutral, "reference", &FeatureConfig::default())?;
    Ok(enc.encode(&features)?.into_vec())
}

#[derive(Serialize)]
struct ConfusionDto {
    labels: [&'static str; 4],
    matrix: [[f64; 4]; 4],
    counts: [[usize; 4]; 4],
    accuracy: f64,
}

impl From<&ConfusionMatrix> for ConfusionDto {
    fn from(c: &ConfusionMatrix) -> Self {
        Self { labels: Emotion::ALL.map(Emotion::name), matrix: c.values, counts: c.counts, accuracy: c.accuracy() }
    }
}

#[derive(Serialize)]
struct PolarityDto {
    emotion: &'static str,
    most_opposite: &'static str,
    negated_class: &'static str,
}

#[derive(Serialize)]
struct ArmDto {
    lambda_ce: f64,
    silhouette: f64,
    variance_entropy: f64,
    heldout_accuracy: f64,
    ratios: Vec<f64>,
}

impl From<&AblationArm> for ArmDto {
    fn from(a: &AblationArm) -> Self {
        Self {
            lambda_ce: a.lambda_ce,
            silhouette: a.silhouette,
            variance_entropy: a.variance_entropy,
            heldout_accuracy: a.report.heldout_accuracy,
            ratios: a.variance.ratios.clone(),
        }
    }
}

#[derive(Serialize)]
struct AblationDto {
    with_discriminator: ArmDto,
    without_discriminator: ArmDto,
    separability_improved: bool,
    ablation_more_uniform: bool,
}

#[derive(Serialize)]
struct AnalysisReport {
    clips: usize,
    components: usize,
    silhouette: f64,
    similarity: SimilarityDto,
    confusion: ConfusionDto,
    variance: VarianceDto,
    polarity: Vec<PolarityDto>,
    ablation: Option<AblationDto>,
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn analyze(home: &Home, a: AnalyzeArgs) -> Result<()> {
    let enc = read_encoder(&home.or(&a.model, "model.bin"))?;
    let corpus = read_features(&home.or(&a.corpus, "corpus.bin"))?;
    let space = read_basis(&home.or(&a.basis, "basis.bin"))?.space;
    let out = home.or(&a.out, "analysis");
    fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;

    let ablation_cfg = a.seed.map_or_else(|| enc.config.clone(), |s| EncoderConfig { rng_seed: s, ..enc.config.clone() });
    let state = SessionState::new(enc, space, &corpus)?;
    let primary_clips: Vec<SpeechFeatures> = corpus.iter().filter(|s| s.emotion.primary().is_some()).cloned().collect();
    let confusion = confusion_from_features(&state.encoder, &primary_clips)?;
    let polarity = Emotion::ALL
        .iter()
        .map(|&e| {
            let mu = WeightVector::new(state.space.stats.mean(e).to_vec())?;
            let u = state.space.basis.reconstruct(&negate(&mu), 1.0)?;
            Ok(PolarityDto {
                emotion: e.name(),
                most_opposite: state.similarity.most_opposite(e).name(),
                negated_class: state.encoder.classify(&u)?.name(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let ablation = if a.ablation {
        let rep = ablation_report(&corpus, &ablation_cfg)?;
        let (w, wo) = (&rep.with_discriminator, &rep.without_discriminator);
        write_text(&out.join("projection_with.svg"), &svg::scatter(&w.projection, "with discriminator"))?;
        write_text(&out.join("projection_without.svg"), &svg::scatter(&wo.projection, "without discriminator"))?;
        let series = [("with discriminator", w.variance.ratios.as_slice()), ("without", wo.variance.ratios.as_slice())];
        write_text(&out.join("variance_ablation.svg"), &svg::variance_bars(&series, "explained variance ratio"))?;
        Some(AblationDto {
            with_discriminator: w.into(),
            without_discriminator: wo.into(),
            separability_improved: rep.separability_improved(),
            ablation_more_uniform: rep.ablation_more_uniform(),
        })
    } else {
        None
    };

    let projection = projection_of(&state.set, &state.space)?;
    write_text(&out.join("projection.svg"), &svg::scatter(&projection, "prosody embeddings, first two axes"))?;
    write_text(
        &out.join("variance.svg"),
        &svg::variance_bars(&[("embedding", state.variance.ratios.as_slice())], "explained variance ratio"),
    )?;

    let report = AnalysisReport {
        clips: corpus.len(),
        components: state.space.basis.components(),
        silhouette: silhouette(&state.set)?,
        similarity: SimilarityDto::new(&state.similarity, None),
        confusion: (&confusion).into(),
        variance: VarianceDto::new(&state.variance, state.space.basis.components(), None),
        polarity,
        ablation,
    };
    let json = serde_json::to_string_pretty(&report)?;
    write_text(&out.join("report.json"), &json)?;
    print_json(&report)
}

fn serve(home: &Home, a: ServeArgs) -> Result<()> {
    let enc = read_encoder(&home.or(&a.model, "model.bin"))?;
    let corpus = read_features(&home.or(&a.corpus, "corpus.bin"))?;
    let space = read_basis(&home.or(&a.basis, "basis.bin"))?.space;
    let state = SessionState::new(enc, space, &corpus)?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Error::io("<runtime>", e))?;
    let addr = SocketAddr::new(a.host, a.port);
    runtime.block_on(crate::service::serve(state, addr)).map_err(|e| Error::io(format!("{addr}"), e))
}
