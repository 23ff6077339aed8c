//! Baseline predictors: the harmful-word rule and the confidence coin-flip.
//!
//! Predictions are `true` for "correct".

use std::collections::HashSet;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::CotRecord;
use crate::error::{Error, Result};
use crate::metrics::{confusion, mcc, ConfusionMatrix};
use crate::seed::keyed_rng;
use crate::textfeat::tokenize;

pub const DEFAULT_HARMFUL_WORDS: [&str; 5] = ["complexity", "guess", "stuck", "hard", "involved"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeuristicConfig {
    pub harmful_words: Vec<String>,
    pub rng_seed: u64,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        HeuristicConfig {
            harmful_words: DEFAULT_HARMFUL_WORDS.iter().map(|s| s.to_string()).collect(),
            rng_seed: 0,
        }
    }
}

/// Reads one token per line; blank lines and `#` comments are skipped.
/// Entries are lowercased and must be single alphabetic tokens.
pub fn parse_word_list(text: &str) -> Result<Vec<String>> {
    let mut out: Vec<String> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks = tokenize(line);
        if toks.len() != 1 {
            return Err(Error::Malformed {
                line: i + 1,
                reason: format!("{line:?} is not a single word token"),
            });
        }
        if !out.contains(&toks[0]) {
            out.push(toks[0].clone());
        }
    }
    if out.is_empty() {
        return Err(Error::invalid("word list is empty"));
    }
    Ok(out)
}

pub fn load_word_list(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_word_list(&text)
}

/// Predicts incorrect iff any configured word appears as a whole token.
pub fn harmful_word_rule(record: &CotRecord, cfg: &HeuristicConfig) -> Result<bool> {
    if cfg.harmful_words.is_empty() {
        return Err(Error::invalid("harmful word list is empty"));
    }
    let tokens: HashSet<String> = tokenize(&record.cot).into_iter().collect();
    Ok(!cfg.harmful_words.iter().any(|w| tokens.contains(w)))
}

/// Predicts correct with probability `confidence_pct / 100`, drawing from a
/// stream keyed by `(seed, record_id)`.
pub fn confidence_coinflip(record: &CotRecord, seed: u64) -> bool {
    let u: f64 = keyed_rng(seed, &record.record_id).random();
    u < record.confidence_pct / 100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicResult {
    pub confusion: ConfusionMatrix,
    pub mcc: f64,
}

pub fn evaluate_word_rule(records: &[CotRecord], cfg: &HeuristicConfig) -> Result<HeuristicResult> {
    let preds = records.iter().map(|r| harmful_word_rule(r, cfg)).collect::<Result<Vec<_>>>()?;
    let labels: Vec<bool> = records.iter().map(CotRecord::is_correct).collect();
    let cm = confusion(&preds, &labels)?;
    Ok(HeuristicResult { mcc: mcc(&cm), confusion: cm })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoinflipSummary {
    pub seeds: Vec<u64>,
    pub per_seed_mcc: Vec<f64>,
    pub mean_mcc: f64,
    pub std_mcc: f64,
    /// Confusion counts summed over all seeds.
    pub pooled: ConfusionMatrix,
}

/// Coin-flip MCC averaged over the given seeds.
pub fn evaluate_coinflip(records: &[CotRecord], seeds: &[u64]) -> Result<CoinflipSummary> {
    if seeds.is_empty() {
        return Err(Error::invalid("coin-flip needs at least one seed"));
    }
    let labels: Vec<bool> = records.iter().map(CotRecord::is_correct).collect();
    let mut per_seed_mcc = Vec::with_capacity(seeds.len());
    let mut pooled = ConfusionMatrix::default();
    for &s in seeds {
        let preds: Vec<bool> = records.iter().map(|r| confidence_coinflip(r, s)).collect();
        let cm = confusion(&preds, &labels)?;
        per_seed_mcc.push(mcc(&cm));
        pooled = pooled + cm;
    }
    let n = per_seed_mcc.len() as f64;
    let mean = per_seed_mcc.iter().sum::<f64>() / n;
    let var = if per_seed_mcc.len() > 1 {
        per_seed_mcc.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(CoinflipSummary {
        seeds: seeds.to_vec(),
        per_seed_mcc,
        mean_mcc: mean,
        std_mcc: var.sqrt(),
        pooled,
    })
}
