use daisy_core::features::{
    compute_energy, compute_mel, compute_pitch, generate_synthetic_corpus, AudioClip, FeatureConfig,
    SyntheticCorpusSpec,
};
use daisy_core::rng;
use daisy_core::{Emotion, EmotionLabel};
use proptest::prelude::*;

fn sine(freq: f64, amp: f64, secs: f64) -> AudioClip {
    let n = (secs * 22050.0) as usize;
    let s = (0..n)
        .map(|i| amp * (2.0 * std::f64::consts::PI * freq * i as f64 / 22050.0).sin())
        .collect();
    AudioClip::new(s, 22050).unwrap()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

#[test]
fn mel_frame_count_follows_center_framing() {
    let mel = compute_mel(&sine(300.0, 0.3, 1.0), &FeatureConfig::default()).unwrap();
    assert_eq!((mel.rows(), mel.cols()), (87, 80));
    assert!(mel.as_slice().iter().all(|v| v.is_finite()));
}

// Independent Slaney-scale centers: linear 200/3 Hz per mel below 1 kHz,
// log step ln(6.4)/27 above.
fn oracle_centers(n_mels: usize, sr: f64) -> Vec<f64> {
    let to_mel = |f: f64| if f < 1000.0 { 3.0 * f / 200.0 } else { 15.0 + (f / 1000.0).ln() * 27.0 / 6.4f64.ln() };
    let to_hz = |m: f64| if m < 15.0 { 200.0 * m / 3.0 } else { 1000.0 * ((m - 15.0) * 6.4f64.ln() / 27.0).exp() };
    let top = to_mel(sr / 2.0);
    (1..=n_mels).map(|i| to_hz(top * i as f64 / (n_mels + 1) as f64)).collect()
}

#[test]
fn pure_tone_peaks_in_nearest_band() {
    let centers = oracle_centers(80, 22050.0);
    let nearest = centers
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - 1000.0).abs().total_cmp(&(b.1 - 1000.0).abs()))
        .unwrap()
        .0;
    let mel = compute_mel(&sine(1000.0, 0.5, 1.0), &FeatureConfig::default()).unwrap();
    for t in 4..mel.rows() - 4 {
        let row = mel.row(t);
        let argmax = (0..80).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
        assert_eq!(argmax, nearest, "frame {t}");
    }
}

#[test]
fn pitch_tracks_pure_sines_within_one_percent() {
    let cfg = FeatureConfig::default();
    for f0 in [110.0, 220.0, 440.0] {
        let pitch = compute_pitch(&sine(f0, 0.5, 1.0), &cfg).unwrap();
        let voiced: Vec<f64> = pitch.iter().copied().filter(|&p| p > 0.0).collect();
        assert!(voiced.len() > pitch.len() * 9 / 10, "{f0}: {} of {} voiced", voiced.len(), pitch.len());
        assert!((median(voiced.clone()) - f0).abs() < 0.01 * f0);
        if f0 == 220.0 {
            for p in &voiced {
                assert!((p - f0).abs() < 0.01 * f0, "frame estimate {p}");
            }
        }
    }
}

#[test]
fn white_noise_is_mostly_unvoiced() {
    let mut r = rng::seeded(42);
    let s: Vec<f64> = (0..22050).map(|_| (0.3 * rng::normal(&mut r)).clamp(-1.0, 1.0)).collect();
    let pitch = compute_pitch(&AudioClip::new(s, 22050).unwrap(), &FeatureConfig::default()).unwrap();
    let unvoiced = pitch.iter().filter(|&&p| p == 0.0).count() as f64 / pitch.len() as f64;
    assert!(unvoiced >= 0.9, "unvoiced rate {unvoiced}");
}

#[test]
fn corpus_counts_and_determinism() {
    let spec = SyntheticCorpusSpec { clips_per_emotion: 3, ..Default::default() };
    let a = generate_synthetic_corpus(&spec).unwrap();
    let b = generate_synthetic_corpus(&spec).unwrap();
    assert_eq!(a.len(), 24);
    assert_eq!(a, b);
    for e in Emotion::ALL {
        assert_eq!(a.iter().filter(|f| f.emotion == EmotionLabel::Primary(e)).count(), 6);
    }
    let other = generate_synthetic_corpus(&SyntheticCorpusSpec { rng_seed: 8, ..spec.clone() }).unwrap();
    assert_ne!(a, other);
}

#[test]
fn default_corpus_has_the_expected_size_and_pitch_ordering() {
    let corpus = generate_synthetic_corpus(&SyntheticCorpusSpec::default()).unwrap();
    assert_eq!(corpus.len(), 400);
    let mean_pitch = |e: Emotion| {
        let v: Vec<f64> = corpus
            .iter()
            .filter(|f| f.emotion == e.into())
            .flat_map(|f| f.pitch().iter().filter(|&&p| p > 0.0).map(|&p| p as f64))
            .collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let (joy, sad) = (mean_pitch(Emotion::Joy), mean_pitch(Emotion::Sadness));
    assert!(joy > sad, "joy {joy} sadness {sad}");
    for f in &corpus {
        assert_eq!(f.frames(), f.energy().len());
        assert!(f.pitch().iter().all(|&p| p == 0.0 || (60.0..=600.0).contains(&p)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn energy_is_homogeneous(k in 0.1f64..1.9, seed in 0u64..1000) {
        let mut r = rng::seeded(seed);
        let s: Vec<f64> = (0..3000).map(|_| rng::uniform(&mut r, -0.5, 0.5)).collect();
        let scaled: Vec<f64> = s.iter().map(|x| k * x).collect();
        let cfg = FeatureConfig::default();
        let a = compute_energy(&AudioClip::new(s, 22050).unwrap(), &cfg).unwrap();
        let b = compute_energy(&AudioClip::new(scaled, 22050).unwrap(), &cfg).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((k * x - y).abs() <= 1e-12 * y.abs().max(1e-12));
        }
    }

    #[test]
    fn louder_never_lowers_log_mel(k in 1.01f64..1.9, seed in 0u64..1000) {
        let mut r = rng::seeded(seed);
        let s: Vec<f64> = (0..3000).map(|_| rng::uniform(&mut r, -0.5, 0.5)).collect();
        let scaled: Vec<f64> = s.iter().map(|x| k * x).collect();
        let cfg = FeatureConfig::default();
        let a = compute_mel(&AudioClip::new(s, 22050).unwrap(), &cfg).unwrap();
        let b = compute_mel(&AudioClip::new(scaled, 22050).unwrap(), &cfg).unwrap();
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            prop_assert!(y >= x);
        }
    }
}
