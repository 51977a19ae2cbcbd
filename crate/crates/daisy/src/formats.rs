//! Versioned little-endian binary files.
//!
//! | magic     | contents                                                        |
//! |-----------|-----------------------------------------------------------------|
//! | `DAISYF1` | feature cache: per clip frame count, n_mels, labels, then mel (row-major), pitch, energy as `f32` |
//! | `DAISYE1` | trained encoder: config snapshot, normalization stats, parameter tensors (`f32`, explicit shapes) |
//! | `DAISYB1` | emotion space: mean, axes, eigenvalues, class means (`f64`) and the secondary-emotion table |
//!
//! Every magic is 7 ASCII bytes padded with a NUL to 8. Counts are `u32`,
//! strings are `u16` length + UTF-8.

use std::fs;
use std::path::Path;

use daisy_core::algebra::{EmotionSpace, EmotionStats, ProsodyBasis};
use daisy_core::encoder::{EncoderConfig, Network, Normalizer, TrainedEncoder};
use daisy_core::features::SpeechFeatures;
use daisy_core::{Emotion, EmotionLabel, SECONDARY_EMOTIONS};

use crate::error::{Error, Result};

pub const FEATURES_MAGIC: &[u8; 8] = b"DAISYF1\0";
pub const ENCODER_MAGIC: &[u8; 8] = b"DAISYE1\0";
pub const BASIS_MAGIC: &[u8; 8] = b"DAISYB1\0";

#[derive(Default)]
struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn bytes(&mut self, b: &[u8]) {
        self.buf.extend_from_slice(b);
    }
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u32(&mut self, v: usize) {
        self.bytes(&u32::try_from(v).expect("count fits u32").to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.bytes(&v.to_le_bytes());
    }
    fn f32(&mut self, v: f64) {
        self.bytes(&(v as f32).to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.bytes(&v.to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.bytes(&u16::try_from(s.len()).expect("short string").to_le_bytes());
        self.bytes(s.as_bytes());
    }
    fn f32s(&mut self, vs: &[f64]) {
        self.u32(vs.len());
        vs.iter().for_each(|&v| self.f32(v));
    }
    fn f64s(&mut self, vs: &[f64]) {
        self.u32(vs.len());
        vs.iter().for_each(|&v| self.f64(v));
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    what: &'static str,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8], magic: &[u8; 8], what: &'static str) -> Result<Self> {
        if buf.len() < 8 || &buf[..8] != magic {
            return Err(Error::format(what, format!("bad magic, expected {:?}", String::from_utf8_lossy(&magic[..7]))));
        }
        Ok(Self { buf, pos: 8, what })
    }
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::format(self.what, "truncated"));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn str(&mut self) -> Result<String> {
        let n = self.u16()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| Error::format(self.what, "invalid UTF-8"))
    }
    fn f32_vec(&mut self, n: usize) -> Result<Vec<f32>> {
        let raw = self.take(n.checked_mul(4).ok_or_else(|| Error::format(self.what, "length overflow"))?)?;
        Ok(raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect())
    }
    fn f32s(&mut self) -> Result<Vec<f64>> {
        let n = self.u32()?;
        Ok(self.f32_vec(n)?.into_iter().map(f64::from).collect())
    }
    fn f64s(&mut self) -> Result<Vec<f64>> {
        let n = self.u32()?;
        (0..n).map(|_| self.f64()).collect()
    }
    fn label(&mut self) -> Result<EmotionLabel> {
        let code = self.u8()?;
        EmotionLabel::from_code(code).ok_or_else(|| Error::format(self.what, format!("bad emotion code {code}")))
    }
    fn emotion(&mut self) -> Result<Emotion> {
        self.label()?.primary().ok_or_else(|| Error::format(self.what, "expected a primary emotion"))
    }
    fn finish(self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::format(self.what, "trailing bytes"));
        }
        Ok(())
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn encode_features(corpus: &[SpeechFeatures]) -> Vec<u8> {
    let mut w = Writer::default();
    w.bytes(FEATURES_MAGIC);
    w.u32(corpus.len());
    for s in corpus {
        w.u32(s.frames());
        w.u32(s.n_mels());
        w.u8(s.emotion.code());
        w.str(&s.speaker);
        for v in s.mel().iter().chain(s.pitch()).chain(s.energy()) {
            w.bytes(&v.to_le_bytes());
        }
    }
    w.buf
}

pub fn decode_features(buf: &[u8]) -> Result<Vec<SpeechFeatures>> {
    let mut r = Reader::new(buf, FEATURES_MAGIC, "feature cache")?;
    let count = r.u32()?;
    let mut out = Vec::with_capacity(count.min(1 << 16));
    for _ in 0..count {
        let frames = r.u32()?;
        let n_mels = r.u32()?;
        let emotion = r.label()?;
        let speaker = r.str()?;
        let mel = r.f32_vec(frames * n_mels)?;
        let pitch = r.f32_vec(frames)?;
        let energy = r.f32_vec(frames)?;
        out.push(SpeechFeatures::new(n_mels, mel, pitch, energy, emotion, speaker)?);
    }
    r.finish()?;
    Ok(out)
}

pub fn write_features(path: &Path, corpus: &[SpeechFeatures]) -> Result<()> {
    write_file(path, &encode_features(corpus))
}

pub fn read_features(path: &Path) -> Result<Vec<SpeechFeatures>> {
    decode_features(&read_file(path)?)
}

fn write_normalizer(w: &mut Writer, n: &Normalizer) {
    w.f32s(&n.mean);
    w.f32s(&n.std);
}

fn read_normalizer(r: &mut Reader) -> Result<Normalizer> {
    let mean = r.f32s()?;
    let std = r.f32s()?;
    let n = Normalizer { mean, std };
    if !n.is_valid() {
        return Err(Error::format(r.what, "invalid normalization statistics"));
    }
    Ok(n)
}

pub fn encode_encoder(enc: &TrainedEncoder) -> Vec<u8> {
    let c = &enc.config;
    let mut w = Writer::default();
    w.bytes(ENCODER_MAGIC);
    w.u32(c.embed_dim);
    w.u32(c.channels.len());
    c.channels.iter().for_each(|&ch| w.u32(ch));
    w.f32(c.learning_rate);
    w.u32(c.batch_size);
    w.u32(c.epochs);
    w.u64(c.rng_seed);
    w.u8(u8::from(c.discriminator_enabled));
    w.f32(c.lambda_ce);
    w.f32(c.lambda_aux);
    w.f32(c.holdout_fraction);
    w.u32(enc.n_mels);
    write_normalizer(&mut w, &enc.input_norm);
    write_normalizer(&mut w, &enc.stat_norm);
    let tensors = enc.network.tensors();
    w.u32(tensors.len());
    for t in tensors {
        w.str(&t.name);
        w.u32(t.shape.len());
        t.shape.iter().for_each(|&d| w.u32(d));
        t.data.iter().for_each(|&v| w.f32(v));
    }
    w.buf
}

pub fn decode_encoder(buf: &[u8]) -> Result<TrainedEncoder> {
    let mut r = Reader::new(buf, ENCODER_MAGIC, "model file")?;
    let embed_dim = r.u32()?;
    let n_blocks = r.u32()?;
    if n_blocks > 64 {
        return Err(Error::format("model file", "implausible block count"));
    }
    let channels = (0..n_blocks).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
    let config = EncoderConfig {
        embed_dim,
        channels,
        learning_rate: r.f32()? as f64,
        batch_size: r.u32()?,
        epochs: r.u32()?,
        rng_seed: r.u64()?,
        discriminator_enabled: r.u8()? != 0,
        lambda_ce: r.f32()? as f64,
        lambda_aux: r.f32()? as f64,
        holdout_fraction: r.f32()? as f64,
    };
    config.validate()?;
    let n_mels = r.u32()?;
    let input_norm = read_normalizer(&mut r)?;
    let stat_norm = read_normalizer(&mut r)?;
    if input_norm.dim() != n_mels + 2 || stat_norm.dim() != daisy_core::encoder::STAT_DIM {
        return Err(Error::format("model file", "normalization dimensions do not match"));
    }

    let mut network = Network::init(n_mels + 2, &config.channels, config.embed_dim, 0);
    let count = r.u32()?;
    let mut slots = network.tensors_mut();
    if count != slots.len() {
        return Err(Error::format("model file", format!("expected {} tensors, found {count}", slots.len())));
    }
    for slot in slots.iter_mut() {
        let name = r.str()?;
        let rank = r.u32()?;
        let shape = (0..rank).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
        if name != slot.name || shape != slot.shape {
            return Err(Error::format(
                "model file",
                format!("tensor {name} {shape:?} does not match {} {:?}", slot.name, slot.shape),
            ));
        }
        let data = r.f32_vec(slot.data.len())?;
        slot.data.iter_mut().zip(data).for_each(|(d, v)| *d = v as f64);
    }
    drop(slots);
    r.finish()?;
    Ok(TrainedEncoder { config, n_mels, network, input_norm, stat_norm })
}

pub fn write_encoder(path: &Path, enc: &TrainedEncoder) -> Result<()> {
    write_file(path, &encode_encoder(enc))
}

pub fn read_encoder(path: &Path) -> Result<TrainedEncoder> {
    decode_encoder(&read_file(path)?)
}

/// Contents of a `DAISYB1` file.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisFile {
    pub space: EmotionSpace,
    /// Secondary-emotion table as stored: `(first, second, name)`.
    pub secondary_table: Vec<(Emotion, Emotion, String)>,
}

impl BasisFile {
    /// Snapshot of the built-in secondary table.
    pub fn new(space: EmotionSpace) -> Self {
        let secondary_table = SECONDARY_EMOTIONS.iter().map(|s| (s.pair.0, s.pair.1, s.name.to_string())).collect();
        Self { space, secondary_table }
    }
}

pub fn encode_basis(file: &BasisFile) -> Vec<u8> {
    let b = &file.space.basis;
    let s = &file.space.stats;
    let mut w = Writer::default();
    w.bytes(BASIS_MAGIC);
    w.u32(b.dim());
    w.u32(b.components());
    w.f64s(&b.mean);
    for v in &b.vectors {
        v.iter().for_each(|&x| w.f64(x));
    }
    w.f64s(&b.eigenvalues);
    w.f64s(&b.spectrum);
    w.f64s(&s.variances);
    for m in &s.means {
        m.iter().for_each(|&x| w.f64(x));
    }
    w.u32(file.secondary_table.len());
    for (a, bb, name) in &file.secondary_table {
        w.u8(a.index() as u8);
        w.u8(bb.index() as u8);
        w.str(name);
    }
    w.buf
}

pub fn decode_basis(buf: &[u8]) -> Result<BasisFile> {
    let mut r = Reader::new(buf, BASIS_MAGIC, "basis file")?;
    let d = r.u32()?;
    let n = r.u32()?;
    let mean = r.f64s()?;
    if mean.len() != d || n > d {
        return Err(Error::format("basis file", "inconsistent dimensions"));
    }
    let vectors = (0..n)
        .map(|_| (0..d).map(|_| r.f64()).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let eigenvalues = r.f64s()?;
    let spectrum = r.f64s()?;
    let variances = r.f64s()?;
    if eigenvalues.len() != n || variances.len() != n {
        return Err(Error::format("basis file", "eigenvalue count does not match components"));
    }
    let mut means: [Vec<f64>; 4] = Default::default();
    for m in means.iter_mut() {
        *m = (0..n).map(|_| r.f64()).collect::<Result<_>>()?;
    }
    let count = r.u32()?;
    let mut secondary_table = Vec::with_capacity(count.min(64));
    for _ in 0..count {
        let a = r.emotion()?;
        let b = r.emotion()?;
        secondary_table.push((a, b, r.str()?));
    }
    r.finish()?;
    let basis = ProsodyBasis { mean, vectors, eigenvalues, spectrum };
    let stats = EmotionStats::new(means, variances)?;
    Ok(BasisFile { space: EmotionSpace::new(basis, stats)?, secondary_table })
}

pub fn write_basis(path: &Path, file: &BasisFile) -> Result<()> {
    write_file(path, &encode_basis(file))
}

pub fn read_basis(path: &Path) -> Result<BasisFile> {
    decode_basis(&read_file(path)?)
}
