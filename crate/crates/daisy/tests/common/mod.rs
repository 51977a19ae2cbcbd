#![allow(dead_code)]

use std::sync::{Arc, OnceLock};

use daisy::session::SessionState;
use daisy_core::algebra::EmotionSpace;
use daisy_core::encoder::{train, EncoderConfig, TrainedEncoder};
use daisy_core::features::{generate_synthetic_corpus, SpeechFeatures, SyntheticCorpusSpec};

pub fn small_corpus() -> Vec<SpeechFeatures> {
    let spec = SyntheticCorpusSpec { clips_per_emotion: 4, speakers: 1, ..SyntheticCorpusSpec::default() };
    generate_synthetic_corpus(&spec).unwrap()
}

pub fn small_config() -> EncoderConfig {
    EncoderConfig { epochs: 3, channels: vec![8, 8], embed_dim: 12, ..EncoderConfig::default() }
}

pub struct Fixture {
    pub corpus: Vec<SpeechFeatures>,
    pub encoder: TrainedEncoder,
    pub space: EmotionSpace,
    pub state: Arc<SessionState>,
}

/// A quickly trained session, shared by every test in the binary.
pub fn fixture() -> &'static Fixture {
    static CELL: OnceLock<Fixture> = OnceLock::new();
    CELL.get_or_init(|| {
        let corpus = small_corpus();
        let (encoder, _) = train(&corpus, &small_config()).unwrap();
        let space = EmotionSpace::fit(&encoder.embed_corpus(&corpus).unwrap(), None).unwrap();
        let state = Arc::new(SessionState::new(encoder.clone(), space.clone(), &corpus).unwrap());
        Fixture { corpus, encoder, space, state }
    })
}
