//! Toolkit for noise-induced quantum controllability.

pub mod chain;
pub mod cli;
pub mod channels;
pub mod error;
pub mod grape;
pub mod lie;
pub mod lindblad;
pub mod models;
pub mod ops;
pub mod zeno;

pub use error::{Error, Result};
