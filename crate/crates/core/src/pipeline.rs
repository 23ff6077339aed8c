//! End-to-end analysis run driven by a TOML config: corpora → descriptive
//! statistics → lexicon → classifier grid → heuristics → reports.
//!
//! Outputs contain no timestamps or absolute run-time facts, so two runs of
//! the same config produce byte-identical directories.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{filter_agreement, load_corpus, Corpus, CotRecord};
use crate::error::{Error, Result};
use crate::heuristics::{evaluate_coinflip, evaluate_word_rule, HeuristicConfig, DEFAULT_HARMFUL_WORDS};
use crate::lexicon::{build_lexicon, select_consistent, BootstrapConfig, Direction, LexiconConfig, LexiconEntry, PUBLISHED_HARMFUL_WORDS};
use crate::metrics::{
    balanced_sample, binned_accuracy, calibration_error, confusion, length_slope, mcc, pointbiserial, roc_auc,
    roc_band, split_train_balanced_test, BinPoint, ConfusionMatrix,
};
use crate::mlp::{train, MlpModel, Standardizer, TrainConfig};
use crate::plot::{bar_svg, line_svg, Bar, BarChart, LineChart, Series};
use crate::sentiment::attach_offline;
use crate::synth::{synth_corpus, SynthConfig};
use crate::textfeat::{featurize, hedging_rate, FeatureOptions, FeatureSet, HedgingLexicon, WordEncoding};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorporaConfig {
    /// Benchmark name → JSONL files (one per model, typically). Records of
    /// all files of a benchmark are pooled.
    pub benchmarks: BTreeMap<String, Vec<PathBuf>>,
    pub strict: bool,
    /// Benchmarks restricted to records whose human and automatic grades agree.
    pub agreement_filter: Vec<String>,
    /// Offline sentiment triples (`{record_id, sentiment}` JSONL).
    pub sentiment_file: Option<PathBuf>,
    /// Generate a synthetic corpus instead of (or besides) reading files.
    pub synthetic: Option<SynthConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WordSource {
    /// The frozen published list (or `features.words` when given).
    Published,
    /// Consistently harmful words of each training split.
    TrainingLexicon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeaturesConfig {
    /// Feature groups per classifier run, e.g. `[["words"], ["words", "length"]]`.
    pub sets: Vec<Vec<String>>,
    pub word_source: WordSource,
    pub words: Option<Vec<String>>,
    pub top_k: usize,
    pub min_occurrences: usize,
    pub lemma_mode: bool,
    pub encoding: WordEncoding,
    pub hedging_lexicon: Option<PathBuf>,
    pub length_bin_width: f64,
    pub volatility_bin_width: f64,
    pub bin_min_count: usize,
}

impl Default for FeaturesConfig {
    fn default() -> Self {
        FeaturesConfig {
            sets: vec![
                vec!["words".into()],
                vec!["words".into(), "length".into(), "volatility".into(), "hedging".into()],
            ],
            word_source: WordSource::Published,
            words: None,
            top_k: 25,
            min_occurrences: 300,
            lemma_mode: false,
            encoding: WordEncoding::Presence,
            hedging_lexicon: None,
            length_bin_width: 1000.0,
            volatility_bin_width: 0.2,
            bin_min_count: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CrossMode {
    /// Foreign benchmark's balanced held-out split for the same seed.
    Split,
    /// Whole foreign corpus, balanced by seeded downsampling.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub threshold: f64,
    pub train_ratio: f64,
    pub standardize: bool,
    pub cross_benchmark: CrossMode,
    pub roc_grid: usize,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        ClassifierConfig {
            epochs: t.epochs,
            batch_size: t.batch_size,
            learning_rate: t.learning_rate,
            threshold: 0.5,
            train_ratio: 0.8,
            standardize: true,
            cross_benchmark: CrossMode::Split,
            roc_grid: 101,
        }
    }
}

impl ClassifierConfig {
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            batch_size: self.batch_size,
            ..TrainConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeuristicsConfig {
    pub harmful_words: Vec<String>,
    pub coinflip_seeds: usize,
}

impl Default for HeuristicsConfig {
    fn default() -> Self {
        HeuristicsConfig {
            harmful_words: DEFAULT_HARMFUL_WORDS.iter().map(|s| s.to_string()).collect(),
            coinflip_seeds: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeedsConfig {
    /// Split + initialization seeds of the classifier grid.
    pub classifier: Vec<u64>,
    pub bootstrap: u64,
}

impl Default for SeedsConfig {
    fn default() -> Self {
        SeedsConfig {
            classifier: (0..30).collect(),
            bootstrap: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub plots: bool,
    /// Bootstrap intervals in the lexicon export.
    pub lexicon_ci: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("report"),
            plots: true,
            lexicon_ci: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpora: CorporaConfig,
    pub features: FeaturesConfig,
    pub classifier: ClassifierConfig,
    pub heuristics: HeuristicsConfig,
    pub seeds: SeedsConfig,
    pub output: OutputConfig,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses a config file; relative paths are taken relative to its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for files in cfg.corpora.benchmarks.values_mut() {
            files.iter_mut().for_each(fix);
        }
        cfg.corpora.sentiment_file.iter_mut().for_each(fix);
        cfg.features.hedging_lexicon.iter_mut().for_each(fix);
        fix(&mut cfg.output.dir);
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.corpora.benchmarks.is_empty() && self.corpora.synthetic.is_none() {
            return bad("[corpora] names no benchmarks and no synthetic source".into());
        }
        for (b, files) in &self.corpora.benchmarks {
            if files.is_empty() {
                return bad(format!("benchmark {b:?} lists no files"));
            }
        }
        if self.features.sets.is_empty() {
            return bad("[features] sets is empty".into());
        }
        for s in &self.features.sets {
            FeatureSet::from_names(s).map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.features.top_k == 0 || self.features.min_occurrences == 0 {
            return bad("top_k and min_occurrences must be positive".into());
        }
        if !(self.features.length_bin_width > 0.0 && self.features.volatility_bin_width > 0.0) {
            return bad("bin widths must be positive".into());
        }
        let c = &self.classifier;
        if !(c.train_ratio > 0.0 && c.train_ratio < 1.0) {
            return bad(format!("train_ratio {} not in (0, 1)", c.train_ratio));
        }
        if c.roc_grid < 2 {
            return bad("roc_grid must be at least 2".into());
        }
        c.train_config().validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.seeds.classifier.is_empty() {
            return bad("[seeds] classifier list is empty".into());
        }
        if self.heuristics.harmful_words.is_empty() || self.heuristics.coinflip_seeds == 0 {
            return bad("[heuristics] needs harmful words and at least one coin-flip seed".into());
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form of the config.
    pub fn sha256(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex(&Sha256::digest(json.as_bytes()))
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSummary {
    pub benchmark: String,
    pub sources: Vec<String>,
    pub records: usize,
    pub accuracy: f64,
    pub skipped_lines: usize,
    pub unresolved: usize,
    /// `(agreed, total)` when the agreement filter applied.
    pub agreement: Option<(usize, usize)>,
}

pub struct LoadedCorpora {
    pub benchmarks: BTreeMap<String, Corpus>,
    pub summaries: Vec<BenchmarkSummary>,
}

/// Loads (or generates) every benchmark corpus named by the config.
pub fn load_benchmarks(cfg: &CorporaConfig) -> Result<LoadedCorpora> {
    let mut parts: BTreeMap<String, (Vec<Corpus>, Vec<String>, usize, usize)> = BTreeMap::new();
    for (bench, files) in &cfg.benchmarks {
        for f in files {
            let rep = load_corpus(f, cfg.strict)?;
            let e = parts.entry(bench.clone()).or_default();
            e.0.push(rep.corpus);
            e.1.push(f.display().to_string());
            e.2 += rep.skipped.len();
            e.3 += rep.unresolved.len();
        }
    }
    if let Some(s) = &cfg.synthetic {
        let all = synth_corpus(s)?;
        for b in &s.benchmarks {
            let idx: Vec<usize> = all.iter().enumerate().filter(|(_, r)| &r.benchmark == b).map(|(i, _)| i).collect();
            let e = parts.entry(b.clone()).or_default();
            e.0.push(all.subset(&idx, format!("synthetic:{b}"))?);
            e.1.push(format!("synthetic(seed={})", s.seed));
        }
    }

    let mut benchmarks = BTreeMap::new();
    let mut summaries = Vec::new();
    for (bench, (corpora, sources, skipped, unresolved)) in parts {
        let mut c = Corpus::merge(&corpora, bench.clone())?;
        if let Some(p) = &cfg.sentiment_file {
            c = attach_offline(&c, p, false)?;
        }
        let mut agreement = None;
        if cfg.agreement_filter.contains(&bench) {
            let f = filter_agreement(&c)?;
            agreement = Some((f.agreed, f.total));
            c = f.corpus;
        }
        summaries.push(BenchmarkSummary {
            benchmark: bench.clone(),
            sources,
            records: c.len(),
            accuracy: c.accuracy(),
            skipped_lines: skipped,
            unresolved,
            agreement,
        });
        benchmarks.insert(bench, c);
    }
    for b in &cfg.agreement_filter {
        if !benchmarks.contains_key(b) {
            return Err(Error::Config(format!("agreement_filter names unknown benchmark {b:?}")));
        }
    }
    Ok(LoadedCorpora { benchmarks, summaries })
}

/// Splits a corpus into its (benchmark, model) sets, keyed `benchmark/model`.
pub fn model_sets(corpus: &Corpus) -> Result<BTreeMap<String, Corpus>> {
    let mut idx: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, r) in corpus.iter().enumerate() {
        idx.entry(format!("{}/{}", r.benchmark, r.model)).or_default().push(i);
    }
    idx.into_iter().map(|(k, v)| Ok((k.clone(), corpus.subset(&v, k)?))).collect()
}

/// A trained classifier together with everything needed to featurize new records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedClassifier {
    pub feature_set: FeatureSet,
    pub words: Vec<String>,
    pub encoding: WordEncoding,
    pub hedging: HedgingLexicon,
    pub standardizer: Option<Standardizer>,
    pub model: MlpModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellMetrics {
    pub confusion: ConfusionMatrix,
    pub mcc: f64,
    pub accuracy: f64,
    pub auc: f64,
}

fn feature_options(set: &FeatureSet, encoding: WordEncoding) -> FeatureOptions {
    FeatureOptions {
        volatility: set.volatility,
        encoding,
    }
}

fn rows_for(records: &[&CotRecord], words: &[String], hedging: &HedgingLexicon, set: &FeatureSet, enc: WordEncoding) -> Result<Vec<Vec<f64>>> {
    let opts = feature_options(set, enc);
    let ws: &[String] = if set.words { words } else { &[] };
    records.iter().map(|r| featurize(r, ws, hedging, &opts)?.to_row(set)).collect()
}

impl TrainedClassifier {
    pub fn rows(&self, records: &[&CotRecord]) -> Result<Vec<Vec<f64>>> {
        let rows = rows_for(records, &self.words, &self.hedging, &self.feature_set, self.encoding)?;
        match &self.standardizer {
            Some(s) => s.transform(&rows),
            None => Ok(rows),
        }
    }

    pub fn scores(&self, records: &[&CotRecord]) -> Result<Vec<f64>> {
        self.model.predict_proba(&self.rows(records)?)
    }

    pub fn evaluate(&self, records: &[&CotRecord], threshold: f64) -> Result<(CellMetrics, Vec<(f64, f64)>)> {
        let scores = self.scores(records)?;
        let labels: Vec<bool> = records.iter().map(|r| r.is_correct()).collect();
        let preds: Vec<bool> = scores.iter().map(|&s| s >= threshold).collect();
        let cm = confusion(&preds, &labels)?;
        let roc = roc_auc(&scores, &labels)?;
        Ok((
            CellMetrics {
                confusion: cm,
                mcc: mcc(&cm),
                accuracy: cm.accuracy(),
                auc: roc.auc,
            },
            roc.curve,
        ))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let c: TrainedClassifier = serde_json::from_str(&text)?;
        c.model.validate()?;
        Ok(c)
    }
}

/// Trains one classifier on `records`. Standardization statistics come from
/// these records only.
pub fn train_classifier(
    records: &[&CotRecord],
    words: &[String],
    hedging: &HedgingLexicon,
    set: FeatureSet,
    encoding: WordEncoding,
    standardize: bool,
    train_cfg: &TrainConfig,
    seed: u64,
) -> Result<TrainedClassifier> {
    if set.words && words.is_empty() {
        return Err(Error::invalid("feature set uses words but the word list is empty"));
    }
    let raw = rows_for(records, words, hedging, &set, encoding)?;
    let standardizer = if standardize { Some(Standardizer::fit(&raw)?) } else { None };
    let rows = match &standardizer {
        Some(s) => s.transform(&raw)?,
        None => raw,
    };
    let labels: Vec<bool> = records.iter().map(|r| r.is_correct()).collect();
    let model = train(&rows, &labels, train_cfg, seed)?;
    Ok(TrainedClassifier {
        feature_set: set,
        words: if set.words { words.to_vec() } else { Vec::new() },
        encoding,
        hedging: hedging.clone(),
        standardizer,
        model,
    })
}

/// Consistently harmful words of a training corpus, lexicon built per model.
pub fn training_words(train: &Corpus, cfg: &FeaturesConfig) -> Result<Vec<String>> {
    let sets = model_sets(train)?;
    let lex = build_lexicon(
        &sets,
        &LexiconConfig {
            min_occurrences: cfg.min_occurrences,
            lemma_mode: false,
            bootstrap: None,
        },
    )?;
    let words = if lex.is_empty() { Vec::new() } else { select_consistent(&lex, Direction::Harmful, cfg.top_k)? };
    if words.is_empty() {
        return Err(Error::invalid(format!(
            "no consistently harmful word reaches {} occurrences in {}",
            cfg.min_occurrences, train.provenance.source
        )));
    }
    Ok(words)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub train: String,
    pub test: String,
    pub feature_set: String,
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub metrics: CellMetrics,
    #[serde(skip)]
    pub roc_curve: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub train: String,
    pub test: String,
    pub feature_set: String,
    pub n_seeds: usize,
    pub mean_mcc: f64,
    pub sd_mcc: f64,
    pub sem_mcc: f64,
    pub mean_auc: f64,
    pub auc_ci: (f64, f64),
    pub mean_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicRow {
    pub benchmark: String,
    pub heuristic: String,
    /// Confusion counts on the first seed's balanced test split.
    pub confusion: ConfusionMatrix,
    pub mcc: f64,
    /// MCC averaged over every classifier seed's test split.
    pub mean_mcc_over_splits: f64,
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let sd = if v.len() > 1 { (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
    (m, sd)
}

/// Mean, spread and AUC interval per (train, test, feature set) over seeds.
pub fn summarize(cells: &[CellResult]) -> Vec<CellSummary> {
    let mut groups: BTreeMap<(String, String, String), Vec<&CellResult>> = BTreeMap::new();
    for c in cells {
        groups.entry((c.train.clone(), c.test.clone(), c.feature_set.clone())).or_default().push(c);
    }
    groups
        .into_iter()
        .map(|((train, test, fs), cs)| {
            let mccs: Vec<f64> = cs.iter().map(|c| c.metrics.mcc).collect();
            let aucs: Vec<f64> = cs.iter().map(|c| c.metrics.auc).collect();
            let accs: Vec<f64> = cs.iter().map(|c| c.metrics.accuracy).collect();
            let (m, sd) = mean_sd(&mccs);
            let (am, asd) = mean_sd(&aucs);
            let half = 1.96 * asd / (aucs.len() as f64).sqrt();
            CellSummary {
                train,
                test,
                feature_set: fs,
                n_seeds: cs.len(),
                mean_mcc: m,
                sd_mcc: sd,
                sem_mcc: sd / (mccs.len() as f64).sqrt(),
                mean_auc: am,
                auc_ci: (am - half, am + half),
                mean_accuracy: mean_sd(&accs).0,
            }
        })
        .collect()
}

struct Job {
    train: String,
    seed: u64,
}

/// Every (train benchmark, test benchmark, feature set, seed) cell.
pub fn run_classifier_grid(
    benchmarks: &BTreeMap<String, Corpus>,
    features: &FeaturesConfig,
    classifier: &ClassifierConfig,
    hedging: &HedgingLexicon,
    seeds: &[u64],
) -> Result<Vec<CellResult>> {
    let all: Vec<String> = benchmarks.keys().cloned().collect();
    run_classifier_cells(benchmarks, &all, features, classifier, hedging, seeds)
}

/// Like [`run_classifier_grid`], but trains only on the benchmarks in `train_on`.
/// Every benchmark in the map is still a test target.
pub fn run_classifier_cells(
    benchmarks: &BTreeMap<String, Corpus>,
    train_on: &[String],
    features: &FeaturesConfig,
    classifier: &ClassifierConfig,
    hedging: &HedgingLexicon,
    seeds: &[u64],
) -> Result<Vec<CellResult>> {
    for b in train_on {
        if !benchmarks.contains_key(b) {
            return Err(Error::Config(format!("unknown training benchmark {b:?}")));
        }
    }
    let sets: Vec<FeatureSet> = features.sets.iter().map(|s| FeatureSet::from_names(s)).collect::<Result<_>>()?;
    let mut splits: BTreeMap<(String, u64), (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (b, c) in benchmarks {
        for &s in seeds {
            let plan = split_train_balanced_test(&c.labels(), classifier.train_ratio, s)?;
            splits.insert((b.clone(), s), (plan.train, plan.test));
        }
    }
    let published: Vec<String> = features
        .words
        .clone()
        .unwrap_or_else(|| PUBLISHED_HARMFUL_WORDS.iter().map(|s| s.to_string()).collect());
    let train_cfg = classifier.train_config();

    let jobs: Vec<Job> = train_on
        .iter()
        .flat_map(|b| seeds.iter().map(move |&s| Job { train: b.clone(), seed: s }))
        .collect();

    let run = |job: &Job| -> Result<Vec<CellResult>> {
        let corpus = &benchmarks[&job.train];
        let (train_idx, _) = &splits[&(job.train.clone(), job.seed)];
        let train_recs: Vec<&CotRecord> = train_idx.iter().map(|&i| &corpus.records()[i]).collect();
        let words = match features.word_source {
            WordSource::Published => published.clone(),
            WordSource::TrainingLexicon => {
                let sub = corpus.subset(train_idx, format!("{} train split (seed {})", job.train, job.seed))?;
                training_words(&sub, features)?
            }
        };
        let mut out = Vec::new();
        for set in &sets {
            let clf = train_classifier(
                &train_recs,
                &words,
                hedging,
                *set,
                features.encoding,
                classifier.standardize,
                &train_cfg,
                job.seed,
            )?;
            for (test_b, test_c) in benchmarks {
                let idx: Vec<usize> = if *test_b == job.train || classifier.cross_benchmark == CrossMode::Split {
                    splits[&(test_b.clone(), job.seed)].1.clone()
                } else {
                    balanced_sample(&test_c.labels(), job.seed)?
                };
                let recs: Vec<&CotRecord> = idx.iter().map(|&i| &test_c.records()[i]).collect();
                let (metrics, curve) = clf.evaluate(&recs, classifier.threshold)?;
                out.push(CellResult {
                    train: job.train.clone(),
                    test: test_b.clone(),
                    feature_set: set.label(),
                    seed: job.seed,
                    n_train: train_recs.len(),
                    n_test: recs.len(),
                    metrics,
                    roc_curve: curve,
                });
            }
        }
        Ok(out)
    };

    #[cfg(feature = "parallel")]
    let nested: Vec<Vec<CellResult>> = {
        use rayon::prelude::*;
        jobs.par_iter().map(run).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let nested: Vec<Vec<CellResult>> = jobs.iter().map(run).collect::<Result<_>>()?;

    let mut cells: Vec<CellResult> = nested.into_iter().flatten().collect();
    cells.sort_by(|a, b| {
        (&a.train, &a.test, &a.feature_set, a.seed).cmp(&(&b.train, &b.test, &b.feature_set, b.seed))
    });
    Ok(cells)
}

/// Both heuristics on each benchmark's balanced test splits.
pub fn run_heuristics(
    benchmarks: &BTreeMap<String, Corpus>,
    cfg: &HeuristicsConfig,
    train_ratio: f64,
    seeds: &[u64],
) -> Result<Vec<HeuristicRow>> {
    let word_cfg = HeuristicConfig {
        harmful_words: cfg.harmful_words.clone(),
        rng_seed: 0,
    };
    let coin_seeds: Vec<u64> = (0..cfg.coinflip_seeds as u64).collect();
    let mut rows = Vec::new();
    for (b, c) in benchmarks {
        let mut word = Vec::new();
        let mut coin = Vec::new();
        for &s in seeds {
            let plan = split_train_balanced_test(&c.labels(), train_ratio, s)?;
            let recs: Vec<CotRecord> = plan.test.iter().map(|&i| c.records()[i].clone()).collect();
            word.push(evaluate_word_rule(&recs, &word_cfg)?);
            coin.push(evaluate_coinflip(&recs, &coin_seeds)?);
        }
        let first_coin_mean = coin[0].mean_mcc;
        // expected confusion of one coin-flip run: pooled counts / seeds, rounded
        let k = coin_seeds.len() as f64;
        let p = coin[0].pooled;
        let avg = |v: u64| (v as f64 / k).round() as u64;
        rows.push(HeuristicRow {
            benchmark: b.clone(),
            heuristic: "harmful-words".into(),
            confusion: word[0].confusion,
            mcc: word[0].mcc,
            mean_mcc_over_splits: mean_sd(&word.iter().map(|w| w.mcc).collect::<Vec<_>>()).0,
        });
        rows.push(HeuristicRow {
            benchmark: b.clone(),
            heuristic: "confidence-coinflip".into(),
            confusion: ConfusionMatrix::new(avg(p.tn), avg(p.fp), avg(p.fn_), avg(p.tp)),
            mcc: first_coin_mean,
            mean_mcc_over_splits: mean_sd(&coin.iter().map(|c| c.mean_mcc).collect::<Vec<_>>()).0,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetDescriptives {
    pub set: String,
    pub records: usize,
    pub accuracy_pct: f64,
    pub calibration_error_pct: f64,
    pub hedging_r: f64,
    pub hedging_p: f64,
    pub length_slope_per_1000: f64,
    pub length_slope_se: f64,
    pub length_slope_p: f64,
    pub mean_length_words: f64,
}

struct SetCurves {
    length: Vec<BinPoint>,
    volatility: Option<(Vec<BinPoint>, Vec<BinPoint>)>,
    calibration: crate::metrics::CalibrationReport,
}

fn describe_set(name: &str, c: &Corpus, hedging: &HedgingLexicon, f: &FeaturesConfig) -> Result<(SetDescriptives, SetCurves)> {
    let labels = c.labels();
    let conf: Vec<(f64, bool)> = c.iter().map(|r| (r.confidence_pct, r.is_correct())).collect();
    let calibration = calibration_error(&conf)?;
    let rates: Vec<f64> = c
        .iter()
        .map(|r| {
            hedging_rate(&r.cot, hedging).map_err(|e| Error::Record {
                record_id: r.record_id.clone(),
                reason: e.to_string(),
            })
        })
        .collect::<Result<_>>()?;
    let (hedging_r, hedging_p) = match pointbiserial(&rates, &labels) {
        Ok(corr) => (corr.r, corr.p),
        Err(_) => (f64::NAN, f64::NAN),
    };
    let lengths: Vec<(f64, bool)> = c.iter().map(|r| (crate::textfeat::cot_length(&r.cot) as f64, r.is_correct())).collect();
    let slope = length_slope(&lengths).ok();
    let length = binned_accuracy(&lengths, f.length_bin_width, f.bin_min_count, false)?;
    let volatility = if c.iter().all(|r| r.sentiment.is_some()) {
        let v: Vec<(f64, bool)> = c
            .iter()
            .map(|r| (crate::textfeat::volatility(r.sentiment.as_ref().unwrap()), r.is_correct()))
            .collect();
        Some((
            binned_accuracy(&v, f.volatility_bin_width, f.bin_min_count, false)?,
            binned_accuracy(&v, f.volatility_bin_width, f.bin_min_count, true)?,
        ))
    } else {
        None
    };
    let nan = f64::NAN;
    Ok((
        SetDescriptives {
            set: name.to_string(),
            records: c.len(),
            accuracy_pct: 100.0 * c.accuracy(),
            calibration_error_pct: calibration.calibration_error_pct,
            hedging_r,
            hedging_p,
            length_slope_per_1000: slope.as_ref().map_or(nan, |s| s.slope_per_1000),
            length_slope_se: slope.as_ref().map_or(nan, |s| s.std_error_per_1000),
            length_slope_p: slope.as_ref().map_or(nan, |s| s.p),
            mean_length_words: lengths.iter().map(|l| l.0).sum::<f64>() / lengths.len() as f64,
        },
        SetCurves {
            length,
            volatility,
            calibration,
        },
    ))
}

/// Writes report files into one directory, recording their names.
struct ReportWriter<'a> {
    dir: PathBuf,
    config: &'a PipelineConfig,
    sha: String,
    files: Vec<String>,
}

impl ReportWriter<'_> {
    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    fn write(&mut self, name: &str, body: &str) -> Result<()> {
        let p = self.path(name);
        std::fs::write(&p, body).map_err(|e| Error::io(&p, e))
    }

    fn json<T: Serialize>(&mut self, name: &str, data: &T) -> Result<()> {
        let doc = serde_json::json!({
            "config_sha256": self.sha,
            "seeds": self.config.seeds,
            "config": self.config,
            "data": data,
        });
        self.write(name, &(serde_json::to_string_pretty(&doc)? + "\n"))
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut body = format!(
            "# config-sha256: {}; seeds: classifier={:?} bootstrap={}\n",
            self.sha, self.config.seeds.classifier, self.config.seeds.bootstrap
        );
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
        body.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
        self.write(name, &body)
    }
}

fn f6(v: f64) -> String {
    format!("{v:.6}")
}

fn slug(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub files: Vec<String>,
    pub cells: usize,
    pub config_sha256: String,
}

/// Runs every analysis and writes the report directory.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let loaded = load_benchmarks(&cfg.corpora)?;
    let hedging = match &cfg.features.hedging_lexicon {
        Some(p) => HedgingLexicon::load(p)?,
        None => HedgingLexicon::default(),
    };
    let dir = cfg.output.dir.clone();
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut w = ReportWriter {
        dir,
        config: cfg,
        sha: cfg.sha256(),
        files: Vec::new(),
    };

    // descriptive statistics per (benchmark, model) set
    let mut sets = BTreeMap::new();
    for c in loaded.benchmarks.values() {
        sets.extend(model_sets(c)?);
    }
    let mut descriptives = Vec::new();
    let mut curves = BTreeMap::new();
    for (name, c) in &sets {
        let (d, cv) = describe_set(name, c, &hedging, &cfg.features)?;
        descriptives.push(d);
        curves.insert(name.clone(), cv);
    }
    w.json("descriptives.json", &descriptives)?;
    w.csv(
        "descriptives.csv",
        &["set", "records", "accuracy_pct", "calibration_error_pct", "hedging_r", "hedging_p", "length_slope_per_1000", "length_slope_se", "length_slope_p", "mean_length_words"],
        &descriptives
            .iter()
            .map(|d| {
                vec![
                    d.set.clone(),
                    d.records.to_string(),
                    f6(d.accuracy_pct),
                    f6(d.calibration_error_pct),
                    f6(d.hedging_r),
                    format!("{:.6e}", d.hedging_p),
                    f6(d.length_slope_per_1000),
                    f6(d.length_slope_se),
                    format!("{:.6e}", d.length_slope_p),
                    f6(d.mean_length_words),
                ]
            })
            .collect::<Vec<_>>(),
    )?;
    let mut cal_rows = Vec::new();
    let mut len_rows = Vec::new();
    let mut vol_rows = Vec::new();
    for (name, cv) in &curves {
        for b in &cv.calibration.bins {
            cal_rows.push(vec![name.clone(), f6(b.lo), f6(b.hi), b.count.to_string(), f6(b.mean_confidence_pct), f6(b.empirical_accuracy_pct)]);
        }
        for p in &cv.length {
            len_rows.push(vec![name.clone(), f6(p.center), f6(p.accuracy), p.count.to_string()]);
        }
        if let Some((raw, centered)) = &cv.volatility {
            for (kind, pts) in [("raw", raw), ("mean-centered", centered)] {
                for p in pts {
                    vol_rows.push(vec![name.clone(), kind.to_string(), f6(p.center), f6(p.accuracy), p.count.to_string()]);
                }
            }
        }
    }
    w.csv("calibration.csv", &["set", "bin_lo", "bin_hi", "count", "mean_confidence_pct", "accuracy_pct"], &cal_rows)?;
    w.csv("length_curve.csv", &["set", "bin_center_words", "accuracy", "count"], &len_rows)?;
    w.csv("volatility_curve.csv", &["set", "kind", "bin_center", "accuracy", "count"], &vol_rows)?;

    // lexicon over all (benchmark, model) sets
    let lex_cfg = LexiconConfig {
        min_occurrences: cfg.features.min_occurrences,
        lemma_mode: cfg.features.lemma_mode,
        bootstrap: cfg.output.lexicon_ci.then_some(BootstrapConfig {
            seed: cfg.seeds.bootstrap,
            ..BootstrapConfig::default()
        }),
    };
    let lexicon: Vec<LexiconEntry> = build_lexicon(&sets, &lex_cfg)?;
    let mut lex_csv = Vec::new();
    crate::lexicon::write_lexicon_csv(&lexicon, &mut lex_csv)?;
    let body = format!(
        "# config-sha256: {}; seeds: bootstrap={}; min_occurrences={}; lemma_mode={}\n{}",
        w.sha,
        cfg.seeds.bootstrap,
        cfg.features.min_occurrences,
        cfg.features.lemma_mode,
        String::from_utf8(lex_csv).expect("utf-8")
    );
    w.write("lexicon.csv", &body)?;
    let harmful = if lexicon.is_empty() { Vec::new() } else { select_consistent(&lexicon, Direction::Harmful, 30)? };
    let booster = if lexicon.is_empty() { Vec::new() } else { select_consistent(&lexicon, Direction::Booster, 30)? };
    w.json("lexicon_selection.json", &serde_json::json!({"harmful": harmful, "booster": booster, "min_occurrences": cfg.features.min_occurrences}))?;

    // classifier grid and heuristics
    let cells = run_classifier_grid(&loaded.benchmarks, &cfg.features, &cfg.classifier, &hedging, &cfg.seeds.classifier)?;
    let summary = summarize(&cells);
    w.csv(
        "classifier_cells.csv",
        &["train", "test", "feature_set", "seed", "n_train", "n_test", "tn", "fp", "fn", "tp", "mcc", "accuracy", "auc"],
        &cells
            .iter()
            .map(|c| {
                let m = &c.metrics;
                vec![
                    c.train.clone(),
                    c.test.clone(),
                    c.feature_set.clone(),
                    c.seed.to_string(),
                    c.n_train.to_string(),
                    c.n_test.to_string(),
                    m.confusion.tn.to_string(),
                    m.confusion.fp.to_string(),
                    m.confusion.fn_.to_string(),
                    m.confusion.tp.to_string(),
                    f6(m.mcc),
                    f6(m.accuracy),
                    f6(m.auc),
                ]
            })
            .collect::<Vec<_>>(),
    )?;
    w.csv(
        "classifier_summary.csv",
        &["train", "test", "feature_set", "n_seeds", "mean_mcc", "sd_mcc", "sem_mcc", "mean_auc", "auc_ci_low", "auc_ci_high", "mean_accuracy"],
        &summary
            .iter()
            .map(|s| {
                vec![
                    s.train.clone(),
                    s.test.clone(),
                    s.feature_set.clone(),
                    s.n_seeds.to_string(),
                    f6(s.mean_mcc),
                    f6(s.sd_mcc),
                    f6(s.sem_mcc),
                    f6(s.mean_auc),
                    f6(s.auc_ci.0),
                    f6(s.auc_ci.1),
                    f6(s.mean_accuracy),
                ]
            })
            .collect::<Vec<_>>(),
    )?;
    w.json("classifier_summary.json", &summary)?;

    let heuristics = run_heuristics(&loaded.benchmarks, &cfg.heuristics, cfg.classifier.train_ratio, &cfg.seeds.classifier)?;
    w.json("heuristics.json", &heuristics)?;
    w.csv(
        "heuristics.csv",
        &["benchmark", "heuristic", "tn", "fp", "fn", "tp", "mcc", "mean_mcc_over_splits"],
        &heuristics
            .iter()
            .map(|h| {
                vec![
                    h.benchmark.clone(),
                    h.heuristic.clone(),
                    h.confusion.tn.to_string(),
                    h.confusion.fp.to_string(),
                    h.confusion.fn_.to_string(),
                    h.confusion.tp.to_string(),
                    f6(h.mcc),
                    f6(h.mean_mcc_over_splits),
                ]
            })
            .collect::<Vec<_>>(),
    )?;

    // ROC bands across seeds
    let mut band_rows = Vec::new();
    let mut bands = Vec::new();
    for s in &summary {
        let curves: Vec<Vec<(f64, f64)>> = cells
            .iter()
            .filter(|c| c.train == s.train && c.test == s.test && c.feature_set == s.feature_set)
            .map(|c| c.roc_curve.clone())
            .collect();
        let band = roc_band(&curves, cfg.classifier.roc_grid)?;
        for i in 0..band.fpr.len() {
            band_rows.push(vec![
                s.train.clone(),
                s.test.clone(),
                s.feature_set.clone(),
                f6(band.fpr[i]),
                f6(band.mean_tpr[i]),
                f6(band.lower[i]),
                f6(band.upper[i]),
            ]);
        }
        bands.push((s, band));
    }
    w.csv("roc_band.csv", &["train", "test", "feature_set", "fpr", "mean_tpr", "lower", "upper"], &band_rows)?;

    if cfg.output.plots {
        write_plots(&mut w, &curves, &lexicon, &harmful, &summary, &bands)?;
    }

    let notes = vec![
        "classifier training pools every model of a benchmark".to_string(),
        "feature standardization is fitted on each training split only".to_string(),
        format!("word features: {:?}", cfg.features.word_source),
        format!("cross-benchmark test sets: {:?}", cfg.classifier.cross_benchmark),
        "heuristic confusion counts use the first classifier seed's balanced test split".to_string(),
    ];
    w.files.push("manifest.json".into());
    let mut files = w.files.clone();
    files.sort();
    let manifest = serde_json::json!({
        "tool": concat!("cot-signal ", env!("CARGO_PKG_VERSION")),
        "config_sha256": w.sha,
        "config": cfg,
        "seeds": cfg.seeds,
        "train_config": cfg.classifier.train_config(),
        "corpora": loaded.summaries,
        "cells": cells.len(),
        "notes": notes,
        "files": files,
    });
    let p = w.dir.join("manifest.json");
    std::fs::write(&p, serde_json::to_string_pretty(&manifest)? + "\n").map_err(|e| Error::io(&p, e))?;

    Ok(RunSummary {
        dir: w.dir.clone(),
        files,
        cells: cells.len(),
        config_sha256: w.sha.clone(),
    })
}

fn write_plots(
    w: &mut ReportWriter<'_>,
    curves: &BTreeMap<String, SetCurves>,
    lexicon: &[LexiconEntry],
    harmful: &[String],
    summary: &[CellSummary],
    bands: &[(&CellSummary, crate::metrics::RocBand)],
) -> Result<()> {
    let series = |f: &dyn Fn(&SetCurves) -> Option<Vec<(f64, f64)>>| -> Vec<Series> {
        curves.iter().filter_map(|(n, c)| f(c).map(|pts| Series::new(n.clone(), pts))).collect()
    };
    let length = LineChart {
        title: "Accuracy by CoT length".into(),
        x_label: "words".into(),
        y_label: "accuracy".into(),
        series: series(&|c| Some(c.length.iter().map(|p| (p.center, p.accuracy)).collect())),
        x_range: None,
        y_range: Some((0.0, 1.0)),
    };
    w.write("length_curve.svg", &line_svg(&length))?;
    let vol = LineChart {
        title: "Accuracy by sentiment volatility".into(),
        x_label: "volatility".into(),
        y_label: "accuracy".into(),
        series: series(&|c| c.volatility.as_ref().map(|v| v.0.iter().map(|p| (p.center, p.accuracy)).collect())),
        x_range: None,
        y_range: Some((0.0, 1.0)),
    };
    w.write("volatility_curve.svg", &line_svg(&vol))?;
    let cal = LineChart {
        title: "Calibration".into(),
        x_label: "mean confidence (%)".into(),
        y_label: "accuracy (%)".into(),
        series: {
            let mut s = series(&|c| Some(c.calibration.bins.iter().map(|b| (b.mean_confidence_pct, b.empirical_accuracy_pct)).collect()));
            s.push(Series { dashed: true, ..Series::new("ideal", vec![(0.0, 0.0), (100.0, 100.0)]) });
            s
        },
        x_range: Some((0.0, 100.0)),
        y_range: Some((0.0, 100.0)),
    };
    w.write("calibration.svg", &line_svg(&cal))?;

    let bars: Vec<Bar> = lexicon
        .iter()
        .take(30)
        .map(|e| Bar {
            label: e.token.clone(),
            value: e.mean_relative_accuracy,
            error: None,
            highlight: harmful.contains(&e.token),
        })
        .collect();
    w.write(
        "lexicon_harmful.svg",
        &bar_svg(&BarChart {
            title: "Lowest mean relative accuracy".into(),
            y_label: "relative accuracy".into(),
            bars,
            reference: Some(1.0),
        }),
    )?;
    w.write(
        "classifier_mcc.svg",
        &bar_svg(&BarChart {
            title: "Classifier MCC (mean ± sd over seeds)".into(),
            y_label: "MCC".into(),
            bars: summary
                .iter()
                .map(|s| Bar {
                    label: format!("{}→{} {}", s.train, s.test, s.feature_set),
                    value: s.mean_mcc,
                    error: Some(s.sd_mcc),
                    highlight: s.train == s.test,
                })
                .collect(),
            reference: None,
        }),
    )?;
    for (s, band) in bands {
        let mut main = Series::new(
            format!("AUC {:.3} [{:.3}, {:.3}]", s.mean_auc, s.auc_ci.0, s.auc_ci.1),
            band.fpr.iter().copied().zip(band.mean_tpr.iter().copied()).collect(),
        );
        main.band = Some(band.lower.iter().copied().zip(band.upper.iter().copied()).collect());
        let chart = LineChart {
            title: format!("ROC {}→{} ({})", s.train, s.test, s.feature_set),
            x_label: "false positive rate".into(),
            y_label: "true positive rate".into(),
            series: vec![main, Series { dashed: true, ..Series::new("chance", vec![(0.0, 0.0), (1.0, 1.0)]) }],
            x_range: Some((0.0, 1.0)),
            y_range: Some((0.0, 1.0)),
        };
        let name = format!("roc_{}_{}_{}.svg", slug(&s.train), slug(&s.test), slug(&s.feature_set));
        w.write(&name, &line_svg(&chart))?;
    }
    Ok(())
}
