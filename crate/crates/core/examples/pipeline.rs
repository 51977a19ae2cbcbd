//! Train on a small synthetic corpus, fit the emotion space and mix two
//! emotions.

use daisy_core::algebra::{mix_secondary, EmotionSpace};
use daisy_core::encoder::{train, EncoderConfig};
use daisy_core::features::{generate_synthetic_corpus, SyntheticCorpusSpec};
use daisy_core::Emotion;

fn main() -> Result<(), daisy_core::Error> {
    let spec = SyntheticCorpusSpec { clips_per_emotion: 20, ..SyntheticCorpusSpec::default() };
    let corpus = generate_synthetic_corpus(&spec)?;
    let (encoder, report) = train(&corpus, &EncoderConfig::default())?;
    println!("held-out accuracy {:.3}", report.heldout_accuracy);

    let set = encoder.embed_corpus(&corpus)?;
    let space = EmotionSpace::fit(&set, None)?;
    println!("retained components: {}", space.basis.components());

    let (mix, w) = mix_secondary(&space.stats, Emotion::Joy, Emotion::Sadness, 1)?;
    let u = space.basis.reconstruct(&w, 1.0)?;
    println!("{:?} -> classified as {}", mix.name, encoder.classify(&u)?);
    Ok(())
}
