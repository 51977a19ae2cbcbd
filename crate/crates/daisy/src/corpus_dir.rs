//! Labeled corpus directories laid out as `<root>/<speaker>/<emotion>/<clip>.wav`.

use std::fs;
use std::path::{Path, PathBuf};

use daisy_core::features::{extract_features, FeatureConfig, SpeechFeatures, DEFAULT_SAMPLE_RATE};
use daisy_core::EmotionLabel;

use crate::error::{Error, Result};
use crate::wav::load_audio;

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<_>>()?;
    out.sort();
    Ok(out)
}

/// Every WAV under the layout, with its labels, in sorted path order.
/// Directories whose name is not an emotion are skipped.
pub fn list_corpus(root: &Path) -> Result<Vec<(PathBuf, EmotionLabel, String)>> {
    let mut out = Vec::new();
    for speaker_dir in sorted_entries(root)?.into_iter().filter(|p| p.is_dir()) {
        let speaker = speaker_dir.file_name().unwrap_or_default().to_string_lossy().into_owned();
        for emotion_dir in sorted_entries(&speaker_dir)?.into_iter().filter(|p| p.is_dir()) {
            let name = emotion_dir.file_name().unwrap_or_default().to_string_lossy().into_owned();
            let Ok(label) = name.parse::<EmotionLabel>() else { continue };
            for clip in sorted_entries(&emotion_dir)? {
                let is_wav = clip.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav"));
                if clip.is_file() && is_wav {
                    out.push((clip, label, speaker.clone()));
                }
            }
        }
    }
    Ok(out)
}

pub fn load_corpus_dir(root: &Path, cfg: &FeatureConfig) -> Result<Vec<SpeechFeatures>> {
    list_corpus(root)?
        .into_iter()
        .map(|(path, label, speaker)| {
            let clip = load_audio(&path, DEFAULT_SAMPLE_RATE)?;
            Ok(extract_features(&clip, label, &speaker, cfg)?)
        })
        .collect()
}
