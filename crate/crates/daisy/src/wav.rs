//! PCM WAV input (16-bit integer or 32-bit float, little-endian). Multi-channel
//! files contribute their first channel.

use std::fs;
use std::path::Path;

use daisy_core::features::AudioClip;
use hound::{SampleFormat, WavReader};

use crate::error::{Error, Result};

pub fn load_audio(path: &Path, target_rate: u32) -> Result<AudioClip> {
    let meta = fs::metadata(path).map_err(|e| Error::io(path, e))?;
    if meta.len() == 0 {
        return Err(Error::EmptyAudio(path.to_path_buf()));
    }
    let reader = WavReader::open(path).map_err(|e| wav_err(path, e))?;
    let spec = reader.spec();
    let channels = spec.channels.max(1) as usize;
    let samples: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .step_by(channels)
            .map(|s| s.map(|v| v as f64 / 32768.0))
            .collect::<Result<_, _>>()
            .map_err(|e| wav_err(path, e))?,
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .step_by(channels)
            .map(|s| s.map(|v| (v as f64).clamp(-1.0, 1.0)))
            .collect::<Result<_, _>>()
            .map_err(|e| wav_err(path, e))?,
        (fmt, bits) => {
            return Err(Error::UnsupportedEncoding {
                path: path.to_path_buf(),
                detail: format!("{fmt:?} {bits}-bit"),
            })
        }
    };
    if samples.is_empty() {
        return Err(Error::EmptyAudio(path.to_path_buf()));
    }
    let clip = AudioClip::new(samples, spec.sample_rate)?;
    Ok(clip.resample(target_rate)?)
}

fn wav_err(path: &Path, e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) => Error::io(path, io),
        hound::Error::Unsupported => Error::UnsupportedEncoding { path: path.to_path_buf(), detail: "unsupported".into() },
        other => Error::Wav { path: path.to_path_buf(), detail: other.to_string() },
    }
}

/// Writes mono 16-bit PCM; used by tooling and tests.
pub fn write_wav_i16(path: &Path, clip: &AudioClip) -> Result<()> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate(),
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut w = hound::WavWriter::create(path, spec).map_err(|e| wav_err(path, e))?;
    for &s in clip.samples() {
        w.write_sample((s * 32767.0).round() as i16).map_err(|e| wav_err(path, e))?;
    }
    w.finalize().map_err(|e| wav_err(path, e))
}
