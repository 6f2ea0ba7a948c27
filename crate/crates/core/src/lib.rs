//! # vnner
//!
//! Feature-rich named-entity recognition with a linear-chain CRF.
//!
//! The crate is split by stage of the pipeline:
//!
//! - [`corpus`]: column-formatted corpora, BIO tags, entity spans and
//!   word/syllable conversion.
//! - [`features`]: template-driven attribute extraction (word identity,
//!   affixes, word shapes, PoS/chunk tags, Brown clusters, embeddings).
//! - [`crf`]: lattice inference, SGD training with L2 regularization,
//!   Viterbi decoding and model persistence.
//! - [`brown`]: Brown clustering producing bit-string paths for the
//!   cluster features.
//! - [`eval`]: entity-level precision/recall/F1 and the ablation harness.
//! - [`synthetic`]: seeded generators for smoke corpora and lexicons.

pub mod brown;
pub mod corpus;
pub mod crf;
pub mod eval;
pub mod features;
pub mod synthetic;

pub use corpus::{Column, Corpus, CorpusError, EntitySpan, Layout, Sentence, Tag, Token};
pub use crf::{CrfModel, TrainConfig, Trainer};
pub use eval::{AblationSpec, ScoreReport};
pub use features::{ClusterLexicon, EmbeddingLexicon, ExtractedFeatures, FeatureConfig, Lexicons};
