//! Emotion-separable prosody embeddings and an embedding algebra for
//! simulating primary emotions, secondary mixtures, intensity and polarity.
//!
//! The crate is `no_std` and only needs `alloc`. IO, file formats, the CLI and
//! the HTTP service live in the `daisy` crate.
//!
//! Pipeline:
//!
//! 1. [`features`] turns audio into aligned mel / pitch / energy streams, or
//!    synthesizes a labeled corpus of emotional prosody.
//! 2. [`encoder`] learns a temporal-collapse encoder whose embeddings are
//!    pushed apart by an auxiliary emotion discriminator.
//! 3. [`algebra`] decomposes the embedding set with PCA and samples, mixes,
//!    scales and negates emotions in weight space.
//! 4. [`analysis`] produces similarity / confusion matrices, variance profiles,
//!    2-D maps and the discriminator ablation.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod algebra;
pub mod analysis;
pub mod emotion;
pub mod encoder;
mod error;
pub mod features;
pub mod linalg;
pub(crate) mod math;
pub mod rng;

pub use emotion::{Emotion, EmotionLabel, SecondaryEmotion, SECONDARY_EMOTIONS};
pub use error::{Error, Result};
