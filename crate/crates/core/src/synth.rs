//! Seeded synthetic corpora with planted signals, for tests and demos.
//!
//! Incorrect records are longer, hedge more, and a configurable fraction of
//! them carry one or more planted tokens that never occur in correct records.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, CotRecord, Grade};
use crate::error::{Error, Result};
use crate::heuristics::DEFAULT_HARMFUL_WORDS;
use crate::seed::keyed_rng;
use crate::textfeat::SentimentTriple;

const BACKGROUND: &[&str] = &[
    "we", "the", "a", "of", "to", "and", "is", "that", "this", "then", "so", "let", "now", "value", "sum",
    "number", "term", "side", "equation", "factor", "root", "square", "prime", "integer", "set", "case",
    "step", "check", "compute", "write", "gives", "equals", "consider", "note", "since", "both", "each",
    "first", "second", "next", "total", "count", "ways", "answer", "result", "function", "point", "line",
    "circle", "angle", "triangle", "area", "length", "base", "height", "ratio", "product", "difference",
    "even", "odd", "positive", "negative", "remainder", "modulo", "divide", "multiply", "add", "subtract",
    "expand", "simplify", "substitute", "solve", "find", "show", "expression", "variable", "constant",
    "coefficient", "polynomial", "degree", "sequence", "series", "limit", "bound", "minimum", "maximum",
    "order", "group", "element", "matrix", "vector", "graph", "vertex", "edge", "path", "probability",
    "event", "outcome", "table", "list", "known", "given", "required", "condition", "therefore", "thus",
    "hence", "clearly", "directly", "again", "here", "there", "with", "for", "from", "into", "over", "under",
];

const HEDGES: &[&str] = &["might", "perhaps", "possibly", "probably", "could", "seems", "likely"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub benchmarks: Vec<String>,
    pub models: Vec<String>,
    /// Records per (benchmark, model) set.
    pub records_per_set: usize,
    /// Probability that a record is graded correct.
    pub accuracy: f64,
    pub planted_tokens: Vec<String>,
    /// Fraction of incorrect records that receive planted tokens.
    pub plant_rate: f64,
    /// Per-sentence hedge probability for correct / incorrect records.
    pub hedge_rate: (f64, f64),
    /// Mean sentence count for correct / incorrect records.
    pub mean_sentences: (f64, f64),
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            benchmarks: vec!["alpha".into(), "beta".into()],
            models: vec!["m1".into(), "m2".into()],
            records_per_set: 500,
            accuracy: 0.5,
            planted_tokens: DEFAULT_HARMFUL_WORDS.iter().map(|s| s.to_string()).collect(),
            plant_rate: 0.7,
            hedge_rate: (0.1, 0.25),
            mean_sentences: (8.0, 11.0),
            seed: 0,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        if self.benchmarks.is_empty() || self.models.is_empty() || self.records_per_set == 0 {
            return Err(Error::invalid("synthetic corpus needs benchmarks, models and records"));
        }
        for (name, p) in [("accuracy", self.accuracy), ("plant_rate", self.plant_rate), ("hedge_rate", self.hedge_rate.0), ("hedge_rate", self.hedge_rate.1)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("{name} {p} outside [0, 1]")));
            }
        }
        if self.mean_sentences.0 < 1.0 || self.mean_sentences.1 < 1.0 {
            return Err(Error::invalid("mean sentence counts must be at least 1"));
        }
        for t in &self.planted_tokens {
            if t.is_empty() || !t.chars().all(|c| c.is_ascii_lowercase()) {
                return Err(Error::invalid(format!("planted token {t:?} must be lowercase ascii letters")));
            }
            if BACKGROUND.contains(&t.as_str()) || HEDGES.contains(&t.as_str()) {
                return Err(Error::invalid(format!("planted token {t:?} collides with the background vocabulary")));
            }
        }
        Ok(())
    }
}

fn sentence<R: Rng>(rng: &mut R, hedge: bool, plant: Option<&str>) -> String {
    let n = rng.random_range(5..14);
    let mut words: Vec<&str> = (0..n).map(|_| *BACKGROUND.choose(rng).unwrap()).collect();
    if hedge {
        let at = rng.random_range(0..=words.len());
        words.insert(at, HEDGES.choose(rng).unwrap());
    }
    if let Some(p) = plant {
        let at = rng.random_range(0..=words.len());
        words.insert(at, p);
    }
    let mut s = words.join(" ");
    s[..1].make_ascii_uppercase();
    s.push('.');
    s
}

fn record(cfg: &SynthConfig, bench: &str, model: &str, i: usize) -> CotRecord {
    let id = format!("{bench}-{model}-{i:05}");
    let mut rng = keyed_rng(cfg.seed, &id);
    let correct = rng.random_bool(cfg.accuracy);

    let mean = if correct { cfg.mean_sentences.0 } else { cfg.mean_sentences.1 };
    let n_sent = (Normal::new(mean, mean / 4.0).unwrap().sample(&mut rng).round() as i64).max(1) as usize;

    let mut plants: Vec<&str> = Vec::new();
    if !correct && !cfg.planted_tokens.is_empty() && rng.random_bool(cfg.plant_rate) {
        for t in &cfg.planted_tokens {
            if rng.random_bool(0.6) {
                plants.push(t);
            }
        }
        if plants.is_empty() {
            plants.push(cfg.planted_tokens.choose(&mut rng).unwrap());
        }
    }
    let hedge_p = if correct { cfg.hedge_rate.0 } else { cfg.hedge_rate.1 };
    let sentences: Vec<String> = (0..n_sent.max(plants.len()))
        .map(|k| {
            let hedge = rng.random_bool(hedge_p);
            sentence(&mut rng, hedge, plants.get(k).copied())
        })
        .collect();

    let conf_mean: f64 = if correct { 75.0 } else { 62.0 };
    let confidence: f64 = Normal::new(conf_mean, 15.0).unwrap().sample(&mut rng).round().clamp(0.0, 100.0);

    let a: f64 = rng.random_range(-0.2..0.9);
    let b: f64 = rng.random_range(-0.9..0.2);
    let (pos, neg) = if a >= b { (a, b) } else { (b, a) };
    let round2 = |v: f64| (v * 100.0).round() / 100.0;
    let direction = if correct { *[1i8, 1, 0, -1].choose(&mut rng).unwrap() } else { *[1i8, 0, -1, -1].choose(&mut rng).unwrap() };
    let sentiment = SentimentTriple::new(round2(pos), round2(neg), direction).expect("generated triple is valid");

    CotRecord::new(id, bench, model, sentences.join(" "), i.to_string(), confidence, Grade::from_bool(correct))
        .with_sentiment(Some(sentiment))
}

/// Generates one corpus containing every (benchmark, model) set.
pub fn synth_corpus(cfg: &SynthConfig) -> Result<Corpus> {
    cfg.validate()?;
    let mut records = Vec::with_capacity(cfg.benchmarks.len() * cfg.models.len() * cfg.records_per_set);
    for b in &cfg.benchmarks {
        for m in &cfg.models {
            records.extend((0..cfg.records_per_set).map(|i| record(cfg, b, m, i)));
        }
    }
    Corpus::from_records(records, format!("synthetic(seed={})", cfg.seed))
}

/// Records whose self-reported confidence matches the empirical accuracy of
/// each decile exactly: confidence `c` with a `c`% share of correct answers.
pub fn calibrated_records(per_level: usize) -> Vec<(f64, bool)> {
    let mut out = Vec::new();
    for c in [5.0, 15.0, 25.0, 35.0, 45.0, 55.0, 65.0, 75.0, 85.0, 95.0] {
        let n = per_level * 20;
        let k = (n as f64 * c / 100.0).round() as usize;
        out.extend((0..n).map(|i| (c, i < k)));
    }
    out
}
