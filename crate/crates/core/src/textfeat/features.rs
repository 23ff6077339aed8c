use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::hedging::{hedging_rate, HedgingLexicon};
use super::sentiment::volatility;
use super::tokenize::tokenize;
use crate::corpus::CotRecord;
use crate::error::{Error, Result};

/// How configured words are encoded in a feature vector.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WordEncoding {
    #[default]
    Presence,
    Count,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureOptions {
    /// Compute sentiment volatility; requires every record to carry a triple.
    pub volatility: bool,
    pub encoding: WordEncoding,
}

impl Default for FeatureOptions {
    fn default() -> Self {
        FeatureOptions {
            volatility: true,
            encoding: WordEncoding::Presence,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub length_words: usize,
    pub hedging_rate: f64,
    pub volatility: Option<f64>,
    /// One entry per configured word, in configuration order.
    pub word_flags: Vec<(String, u32)>,
}

impl FeatureVector {
    pub fn flag(&self, word: &str) -> Option<u32> {
        self.word_flags.iter().find(|(w, _)| w == word).map(|(_, v)| *v)
    }

    /// Numeric row for the selected feature groups. Order: words, length,
    /// volatility, hedging.
    pub fn to_row(&self, set: &FeatureSet) -> Result<Vec<f64>> {
        let mut row = Vec::with_capacity(self.word_flags.len() + 3);
        if set.words {
            row.extend(self.word_flags.iter().map(|(_, v)| f64::from(*v)));
        }
        if set.length {
            row.push(self.length_words as f64);
        }
        if set.volatility {
            row.push(
                self.volatility
                    .ok_or_else(|| Error::invalid("volatility requested but not computed"))?,
            );
        }
        if set.hedging {
            row.push(self.hedging_rate);
        }
        Ok(row)
    }
}

/// A combination of feature groups fed to the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FeatureSet {
    pub words: bool,
    pub length: bool,
    pub volatility: bool,
    pub hedging: bool,
}

impl FeatureSet {
    pub const WORDS: FeatureSet = FeatureSet {
        words: true,
        length: false,
        volatility: false,
        hedging: false,
    };

    /// Parses names like `words`, `length`, `volatility` (or `emotion`), `hedging`.
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let mut set = FeatureSet {
            words: false,
            length: false,
            volatility: false,
            hedging: false,
        };
        for n in names {
            match n.as_ref().trim() {
                "words" => set.words = true,
                "length" => set.length = true,
                "volatility" | "emotion" => set.volatility = true,
                "hedging" => set.hedging = true,
                other => return Err(Error::invalid(format!("unknown feature group {other:?}"))),
            }
        }
        if set.is_empty() {
            return Err(Error::invalid("feature set is empty"));
        }
        Ok(set)
    }

    pub fn is_empty(&self) -> bool {
        !(self.words || self.length || self.volatility || self.hedging)
    }

    /// Stable label, e.g. `words+length`.
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if self.words {
            parts.push("words");
        }
        if self.length {
            parts.push("length");
        }
        if self.volatility {
            parts.push("volatility");
        }
        if self.hedging {
            parts.push("hedging");
        }
        parts.join("+")
    }

    pub fn dim(&self, n_words: usize) -> usize {
        (if self.words { n_words } else { 0 })
            + usize::from(self.length)
            + usize::from(self.volatility)
            + usize::from(self.hedging)
    }
}

/// Assembles the feature vector of one record. Word flags use the surface
/// (non-lemmatized) tokens of the trace.
pub fn featurize(
    record: &CotRecord,
    word_list: &[String],
    lexicon: &HedgingLexicon,
    options: &FeatureOptions,
) -> Result<FeatureVector> {
    let tokens = tokenize(&record.cot);
    let mut counts: HashMap<&str, u32> = HashMap::new();
    for t in &tokens {
        *counts.entry(t.as_str()).or_default() += 1;
    }

    let mut word_flags: Vec<(String, u32)> = Vec::with_capacity(word_list.len());
    for w in word_list {
        if word_flags.iter().any(|(seen, _)| seen == w) {
            continue;
        }
        let c = counts.get(w.as_str()).copied().unwrap_or(0);
        let v = match options.encoding {
            WordEncoding::Presence => u32::from(c > 0),
            WordEncoding::Count => c,
        };
        word_flags.push((w.clone(), v));
    }

    let volatility = if options.volatility {
        let s = record.sentiment.as_ref().ok_or_else(|| Error::Record {
            record_id: record.record_id.clone(),
            reason: "volatility requested but record has no sentiment".into(),
        })?;
        Some(volatility(s))
    } else {
        None
    };

    let hedging = hedging_rate(&record.cot, lexicon).map_err(|e| Error::Record {
        record_id: record.record_id.clone(),
        reason: e.to_string(),
    })?;

    Ok(FeatureVector {
        length_words: tokens.len(),
        hedging_rate: hedging,
        volatility,
        word_flags,
    })
}
