//! Files, audio IO, command line and HTTP service around [`daisy_core`].

pub mod cli;
pub mod corpus_dir;
mod error;
pub mod formats;
pub mod service;
pub mod session;
pub mod svg;
pub mod wav;

pub use error::{Error, Result};
