//! Per-word relative-accuracy lexicons across several (benchmark, model) sets.
//!
//! The relative accuracy of a word in one set is the accuracy of the
//! records whose trace contains the word divided by the accuracy of the
//! whole set. A word is retained only when it occurs in at least
//! `min_occurrences` records of every set.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;

use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::seed::keyed_rng;
use crate::textfeat::{lemmatize, tokenize};

/// The 25 most consistently harmful surface words of the published
/// analysis, in rank order; the default word features of the classifier.
pub const PUBLISHED_HARMFUL_WORDS: [&str; 25] = [
    "complexity", "guess", "stuck", "hard", "involved", "positions", "involves", "involve", "information", "comes",
    "likely", "probably", "constraints", "called", "depend", "missing", "often", "possibly", "combination", "based",
    "four", "require", "structure", "per", "requires",
];

/// Token → ascending positions of the records whose trace contains it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WordIndex {
    pub lemma_mode: bool,
    map: BTreeMap<String, Vec<usize>>,
}

impl WordIndex {
    pub fn get(&self, token: &str) -> Option<&[usize]> {
        self.map.get(token).map(Vec::as_slice)
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.map.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Record ids containing `token`.
    pub fn record_ids<'a>(&self, token: &str, corpus: &'a Corpus) -> Vec<&'a str> {
        self.get(token)
            .unwrap_or_default()
            .iter()
            .map(|&i| corpus.records()[i].record_id.as_str())
            .collect()
    }
}

pub fn record_tokens(cot: &str, lemma_mode: bool) -> HashSet<String> {
    let tokens = tokenize(cot);
    if lemma_mode {
        tokens.iter().map(|t| lemmatize(t)).collect()
    } else {
        tokens.into_iter().collect()
    }
}

pub fn word_index(corpus: &Corpus, lemma_mode: bool) -> WordIndex {
    let mut map: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, r) in corpus.iter().enumerate() {
        for t in record_tokens(&r.cot, lemma_mode) {
            map.entry(t).or_default().push(i);
        }
    }
    WordIndex { lemma_mode, map }
}

fn subset_stats(token: &str, corpus: &Corpus, index: &WordIndex) -> Result<(usize, usize)> {
    let members = index
        .get(token)
        .filter(|m| !m.is_empty())
        .ok_or_else(|| Error::invalid(format!("token {token:?} occurs in no record")))?;
    let correct = members.iter().filter(|&&i| corpus.records()[i].is_correct()).count();
    Ok((members.len(), correct))
}

fn dataset_accuracy(corpus: &Corpus) -> Result<f64> {
    let acc = corpus.accuracy();
    if acc == 0.0 {
        return Err(Error::invalid(format!(
            "dataset accuracy of {} is zero; relative accuracy undefined",
            corpus.provenance.source
        )));
    }
    Ok(acc)
}

/// Accuracy over records containing `token` divided by corpus accuracy.
pub fn relative_accuracy(token: &str, corpus: &Corpus, index: &WordIndex) -> Result<f64> {
    let (n, c) = subset_stats(token, corpus, index)?;
    Ok((c as f64 / n as f64) / dataset_accuracy(corpus)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub resamples: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            resamples: 1000,
            level: 0.95,
            seed: 0,
        }
    }
}

/// Linear-interpolation quantile of sorted data.
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Percentile bootstrap of a relative accuracy from `n` containing records
/// of which `correct` are right, dataset accuracy held fixed.
///
/// Resampling `n` binary outcomes with replacement leaves the number of
/// correct draws Binomial(n, correct/n) distributed, so each resample is a
/// single binomial draw.
pub fn bootstrap_ratio_ci(
    n: usize,
    correct: usize,
    dataset_acc: f64,
    cfg: &BootstrapConfig,
    stream: &str,
) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::invalid("bootstrap needs at least two containing records"));
    }
    if cfg.resamples < 2 || !(cfg.level > 0.0 && cfg.level < 1.0) {
        return Err(Error::invalid("bootstrap needs >= 2 resamples and a level in (0, 1)"));
    }
    let p = correct as f64 / n as f64;
    let binom = Binomial::new(n as u64, p).map_err(|e| Error::invalid(e.to_string()))?;
    let mut rng = keyed_rng(cfg.seed, stream);
    let mut stats: Vec<f64> = (0..cfg.resamples)
        .map(|_| (binom.sample(&mut rng) as f64 / n as f64) / dataset_acc)
        .collect();
    stats.sort_by(f64::total_cmp);
    let alpha = (1.0 - cfg.level) / 2.0;
    Ok((quantile_sorted(&stats, alpha), quantile_sorted(&stats, 1.0 - alpha)))
}

/// Bootstrap interval for one token's relative accuracy within a corpus.
pub fn bootstrap_ci(token: &str, corpus: &Corpus, index: &WordIndex, cfg: &BootstrapConfig) -> Result<(f64, f64)> {
    let (n, c) = subset_stats(token, corpus, index)?;
    bootstrap_ratio_ci(n, c, dataset_accuracy(corpus)?, cfg, token)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetStats {
    pub occurrences: usize,
    pub subset_accuracy: f64,
    pub dataset_accuracy: f64,
    pub relative_accuracy: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub token: String,
    pub lemma_mode: bool,
    pub per_set: BTreeMap<String, SetStats>,
    pub mean_relative_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LexiconConfig {
    /// Minimum number of records containing the token, in every set.
    pub min_occurrences: usize,
    pub lemma_mode: bool,
    /// `None` skips interval estimation (ci fields are NaN).
    pub bootstrap: Option<BootstrapConfig>,
}

impl Default for LexiconConfig {
    fn default() -> Self {
        LexiconConfig {
            min_occurrences: 300,
            lemma_mode: false,
            bootstrap: Some(BootstrapConfig::default()),
        }
    }
}

/// Builds entries for every token that clears the occurrence threshold in
/// all sets, sorted by mean relative accuracy (ascending), then token.
pub fn build_lexicon(corpora: &BTreeMap<String, Corpus>, cfg: &LexiconConfig) -> Result<Vec<LexiconEntry>> {
    if corpora.is_empty() {
        return Err(Error::invalid("lexicon needs at least one corpus"));
    }
    let indexed: Vec<(&String, &Corpus, WordIndex, f64)> = corpora
        .iter()
        .map(|(id, c)| Ok((id, c, word_index(c, cfg.lemma_mode), dataset_accuracy(c)?)))
        .collect::<Result<_>>()?;

    let first = &indexed[0].2;
    let candidates: Vec<&str> = first
        .tokens()
        .filter(|t| {
            indexed
                .iter()
                .all(|(_, _, idx, _)| idx.get(t).is_some_and(|m| m.len() >= cfg.min_occurrences.max(1)))
        })
        .collect();

    let build = |token: &str| -> Result<LexiconEntry> {
        let mut per_set = BTreeMap::new();
        for (set_id, corpus, idx, acc) in &indexed {
            let (n, c) = subset_stats(token, corpus, idx)?;
            let subset_accuracy = c as f64 / n as f64;
            let (ci_low, ci_high) = match &cfg.bootstrap {
                Some(b) if n >= 2 => bootstrap_ratio_ci(n, c, *acc, b, &format!("{set_id}\u{1f}{token}"))?,
                _ => (f64::NAN, f64::NAN),
            };
            per_set.insert(
                (*set_id).clone(),
                SetStats {
                    occurrences: n,
                    subset_accuracy,
                    dataset_accuracy: *acc,
                    relative_accuracy: subset_accuracy / acc,
                    ci_low,
                    ci_high,
                },
            );
        }
        let mean = per_set.values().map(|s| s.relative_accuracy).sum::<f64>() / per_set.len() as f64;
        Ok(LexiconEntry {
            token: token.to_string(),
            lemma_mode: cfg.lemma_mode,
            per_set,
            mean_relative_accuracy: mean,
        })
    };

    #[cfg(feature = "parallel")]
    let mut entries: Vec<LexiconEntry> = {
        use rayon::prelude::*;
        candidates.par_iter().map(|t| build(t)).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let mut entries: Vec<LexiconEntry> = candidates.iter().map(|t| build(t)).collect::<Result<_>>()?;

    entries.sort_by(|a, b| {
        a.mean_relative_accuracy
            .total_cmp(&b.mean_relative_accuracy)
            .then_with(|| a.token.cmp(&b.token))
    });
    Ok(entries)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Harmful,
    Booster,
}

/// Words whose relative accuracy is below 1 (harmful) or above 1 (booster)
/// in every set, ranked by mean relative accuracy, truncated to `top_k`.
pub fn select_consistent(lexicon: &[LexiconEntry], direction: Direction, top_k: usize) -> Result<Vec<String>> {
    if top_k == 0 {
        return Err(Error::invalid("top_k must be positive"));
    }
    if lexicon.is_empty() {
        return Err(Error::invalid("lexicon is empty"));
    }
    let mut picked: Vec<&LexiconEntry> = lexicon
        .iter()
        .filter(|e| {
            e.per_set.values().all(|s| match direction {
                Direction::Harmful => s.relative_accuracy < 1.0,
                Direction::Booster => s.relative_accuracy > 1.0,
            })
        })
        .collect();
    picked.sort_by(|a, b| {
        let ord = a.mean_relative_accuracy.total_cmp(&b.mean_relative_accuracy);
        let ord = match direction {
            Direction::Harmful => ord,
            Direction::Booster => ord.reverse(),
        };
        ord.then_with(|| a.token.cmp(&b.token))
    });
    Ok(picked.into_iter().take(top_k).map(|e| e.token.clone()).collect())
}

/// One CSV row per (token, set).
pub fn write_lexicon_csv<W: Write>(entries: &[LexiconEntry], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "token",
        "set_id",
        "occurrences",
        "subset_accuracy",
        "dataset_accuracy",
        "relative_accuracy",
        "ci_low",
        "ci_high",
        "mean_relative_accuracy",
    ])?;
    for e in entries {
        for (set_id, s) in &e.per_set {
            w.write_record([
                e.token.clone(),
                set_id.clone(),
                s.occurrences.to_string(),
                format!("{:.6}", s.subset_accuracy),
                format!("{:.6}", s.dataset_accuracy),
                format!("{:.6}", s.relative_accuracy),
                format!("{:.6}", s.ci_low),
                format!("{:.6}", s.ci_high),
                format!("{:.6}", e.mean_relative_accuracy),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}
