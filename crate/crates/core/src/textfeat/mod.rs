//! Deterministic text features for chain-of-thought traces.

mod features;
mod hedging;
mod lemma;
mod sentiment;
mod tokenize;

pub use features::{featurize, FeatureOptions, FeatureSet, FeatureVector, WordEncoding};
pub use hedging::{hedging_rate, naive_hedging_rate, sentence_has_hedge, HedgingLexicon};
pub use lemma::lemmatize;
pub use sentiment::{volatility, SentimentTriple};
pub use tokenize::{cot_length, split_sentences, tokenize};
