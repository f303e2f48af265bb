//! Communication-efficient distributed learning.
//!
//! Parties hold disjoint shares of a labelled point set and cooperate to
//! learn a linear classifier for the union, counting every word they
//! exchange. The crate provides the multiplicative-weights protocols for two
//! and `k` parties, the usual baselines, and a small distributed
//! optimization toolkit (soft-constraint LP solving by multiplicative
//! weights, and a streaming-to-distributed adapter).

pub mod comm;
pub mod datagen;
pub mod error;
pub mod experiment;
pub mod learner;
pub mod libsvm;
pub mod opt;
pub mod protocols;
pub mod sampling;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    accuracy, classify, ensemble_classify, weighted_error, Label, LabeledPoint, LinearClassifier,
    MajorityEnsemble, WeightedDataset,
};
