//! Core library for ledgerlens: unsupervised anomaly detection on
//! categorical journal-entry data.
//!
//! The pipeline is: load or synthesize journal entries ([`data`],
//! [`generator`]), one-hot encode them, train a dense autoencoder from
//! scratch ([`nn`]), then rank every entry by a combination of its
//! normalized reconstruction error and the rarity of its attribute values
//! ([`scoring`]). Detection quality is measured under an audit-style
//! protocol where every known anomaly must be flagged ([`metrics`]), and
//! compared against PCA reconstruction error and Local Outlier Factor
//! ([`baselines`]).

pub mod baselines;
pub mod data;
pub mod error;
pub mod generator;
pub mod metrics;
pub mod nn;
pub mod scoring;
pub mod util;

pub use error::{Error, Result};
