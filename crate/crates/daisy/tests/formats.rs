mod common;

use daisy::formats::{
    decode_basis, decode_encoder, decode_features, encode_basis, encode_encoder, encode_features, read_features,
    write_features, BasisFile,
};
use daisy::Error;
use daisy_core::features::SpeechFeatures;
use daisy_core::EmotionLabel;
use proptest::prelude::*;

#[test]
fn feature_cache_round_trips() {
    let corpus = common::small_corpus();
    let bytes = encode_features(&corpus);
    assert_eq!(&bytes[..8], b"DAISYF1\0");
    let back = decode_features(&bytes).unwrap();
    assert_eq!(back, corpus);
    assert_eq!(encode_features(&back), bytes);
}

#[test]
fn feature_cache_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested/c.bin");
    let corpus = common::small_corpus();
    write_features(&path, &corpus).unwrap();
    assert_eq!(read_features(&path).unwrap(), corpus);
    assert!(matches!(read_features(&dir.path().join("missing.bin")), Err(Error::Io { .. })));
}

#[test]
fn model_file_round_trips_exactly() {
    let f = common::fixture();
    let bytes = encode_encoder(&f.encoder);
    assert_eq!(&bytes[..8], b"DAISYE1\0");
    let back = decode_encoder(&bytes).unwrap();
    assert_eq!(back, f.encoder);
    assert_eq!(encode_encoder(&back), bytes);
    let u = back.encode(&f.corpus[0]).unwrap();
    assert_eq!(u, f.encoder.encode(&f.corpus[0]).unwrap());
}

#[test]
fn basis_file_round_trips_exactly() {
    let f = common::fixture();
    let file = BasisFile::new(f.space.clone());
    assert_eq!(file.secondary_table.len(), 6);
    let bytes = encode_basis(&file);
    assert_eq!(&bytes[..8], b"DAISYB1\0");
    let back = decode_basis(&bytes).unwrap();
    assert_eq!(back, file);
    assert_eq!(encode_basis(&back), bytes);
}

#[test]
fn corrupt_files_are_rejected() {
    let f = common::fixture();
    let bytes = encode_encoder(&f.encoder);
    assert!(matches!(decode_features(&bytes), Err(Error::Format { .. })));
    assert!(matches!(decode_encoder(&bytes[..bytes.len() - 3]), Err(Error::Format { .. })));
    let mut extra = encode_basis(&BasisFile::new(f.space.clone()));
    extra.push(0);
    assert!(matches!(decode_basis(&extra), Err(Error::Format { .. })));
    assert!(decode_features(b"").is_err());
}

fn features_strategy() -> impl Strategy<Value = SpeechFeatures> {
    (1usize..6, 1usize..12, 0u8..5, "[a-z0-9]{0,6}").prop_flat_map(|(n_mels, frames, code, speaker)| {
        (
            prop::collection::vec(-20.0f32..5.0, n_mels * frames),
            prop::collection::vec(0.0f32..600.0, frames),
            prop::collection::vec(0.0f32..1.0, frames),
        )
            .prop_map(move |(mel, pitch, energy)| {
                let label = EmotionLabel::from_code(code).unwrap();
                SpeechFeatures::new(n_mels, mel, pitch, energy, label, speaker.clone()).unwrap()
            })
    })
}

proptest! {
    #[test]
    fn any_feature_cache_round_trips(corpus in prop::collection::vec(features_strategy(), 0..5)) {
        let bytes = encode_features(&corpus);
        let back = decode_features(&bytes).unwrap();
        prop_assert_eq!(&back, &corpus);
        prop_assert_eq!(encode_features(&back), bytes);
    }
}
