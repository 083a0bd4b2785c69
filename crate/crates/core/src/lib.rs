//! Evaluation of topic models by how well they cover a set of reference topics.
//!
//! The crate provides the unsupervised coverage-distance curve and its area
//! (AuCDC), supervised coverage driven by a logistic topic matcher, stability
//! and coherence measures, and small trainers (collapsed-Gibbs LDA, fixed-topic
//! LDA, projected-gradient NMF) for producing models to evaluate.
//!
//! Data-parallel loops go through [`par`]; build with
//! `--no-default-features` for a purely sequential crate with identical output.

pub mod analysis;
pub mod coherence;
pub mod corpus;
pub mod coverage;
pub mod distance;
pub mod error;
pub mod matcher;
pub mod models;
pub mod par;
pub mod sparse;
pub mod stability;
pub mod synthetic;
pub mod topics;

pub use error::{Error, Result};
pub use sparse::SparseVector;
pub use topics::{ModelType, ReferenceTopicSet, Topic, TopicModel};
