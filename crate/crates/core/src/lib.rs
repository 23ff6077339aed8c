//! Correctness signals from chain-of-thought text.
//!
//! The crate ingests graded model responses, extracts surface features from
//! their reasoning traces (length, hedging rate, sentiment volatility, word
//! presence), builds relative-accuracy lexicons, trains a small feed-forward
//! classifier and evaluates everything with the usual binary metrics.

pub mod corpus;
pub mod error;
pub mod heuristics;
pub mod lexicon;
pub mod metrics;
pub mod mlp;
pub mod pipeline;
pub mod plot;
pub mod seed;
pub mod sentiment;
pub mod synth;
pub mod textfeat;

pub use corpus::{Corpus, CotRecord, Grade};
pub use error::{Error, Result};
pub use textfeat::{FeatureVector, HedgingLexicon, SentimentTriple};
