use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use cot_signal::corpus::load_corpus;
use cot_signal::heuristics::load_word_list;
use cot_signal::lexicon::{build_lexicon, select_consistent, write_lexicon_csv, BootstrapConfig, Direction, LexiconConfig, PUBLISHED_HARMFUL_WORDS};
use cot_signal::metrics::{calibration_error, split_train_balanced_test};
use cot_signal::pipeline::{
    load_benchmarks, model_sets, run_classifier_cells, run_heuristics, run_pipeline, summarize, train_classifier, training_words,
    ClassifierConfig, CorporaConfig, CrossMode, FeaturesConfig, HeuristicsConfig, LoadedCorpora, PipelineConfig, WordSource,
};
use cot_signal::synth::{synth_corpus, SynthConfig};
use cot_signal::textfeat::{featurize, FeatureOptions, FeatureSet, HedgingLexicon, WordEncoding};
use cot_signal::{Corpus, CotRecord, Error};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::args::*;

/// An error with the process exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

pub const EXIT_DATA: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NonFiniteLoss { .. } | Error::Evaluator { .. } | Error::Dimension { .. } => EXIT_RUNTIME,
            _ => EXIT_DATA,
        };
        Failure { code, message: e.to_string() }
    }
}

fn runtime(msg: impl std::fmt::Display) -> Failure {
    Failure { code: EXIT_RUNTIME, message: msg.to_string() }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: 1, message: msg.into() }
}

type Res<T> = std::result::Result<T, Failure>;

fn sha256_json<T: Serialize>(v: &T) -> String {
    let text = serde_json::to_string(v).expect("arguments serialize");
    Sha256::digest(text.as_bytes()).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Every printed or written report carries the invocation that produced it.
fn envelope<A: Serialize, D: Serialize>(command: &str, args: &A, seeds: Value, data: &D) -> Value {
    json!({
        "command": command,
        "config_sha256": sha256_json(args),
        "seeds": seeds,
        "config": args,
        "data": data,
    })
}

fn print_json(v: &Value) -> Res<()> {
    println!("{}", serde_json::to_string_pretty(v).map_err(runtime)?);
    Ok(())
}

fn write_file(path: &Path, body: &str) -> Res<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| runtime(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, body).map_err(|e| runtime(format!("{}: {e}", path.display())))
}

pub fn parse_seeds(s: &str) -> Res<Vec<u64>> {
    let bad = || usage(format!("invalid seeds {s:?}: expected e.g. 0..30 or 0,1,2"));
    let seeds: Vec<u64> = if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        (a..b).collect()
    } else {
        s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect::<Res<_>>()?
    };
    if seeds.is_empty() {
        return Err(bad());
    }
    Ok(seeds)
}

fn corpora_config(d: &DataArgs) -> Res<CorporaConfig> {
    let mut benchmarks: BTreeMap<String, Vec<PathBuf>> = BTreeMap::new();
    for spec in &d.data {
        let (name, path) = match spec.split_once('=') {
            Some((n, p)) if !n.is_empty() => (n.to_string(), PathBuf::from(p)),
            _ => {
                let p = PathBuf::from(spec);
                let stem = p.file_stem().and_then(|s| s.to_str()).ok_or_else(|| usage(format!("cannot name benchmark for {spec:?}")))?;
                (stem.to_string(), p)
            }
        };
        benchmarks.entry(name).or_default().push(path);
    }
    Ok(CorporaConfig {
        benchmarks,
        strict: d.strict,
        agreement_filter: d.agreement_filter.clone(),
        sentiment_file: d.sentiment.clone(),
        synthetic: None,
    })
}

fn load(d: &DataArgs) -> Res<LoadedCorpora> {
    Ok(load_benchmarks(&corpora_config(d)?)?)
}

fn hedging(path: &Option<PathBuf>) -> Res<HedgingLexicon> {
    Ok(match path {
        Some(p) => HedgingLexicon::load(p)?,
        None => HedgingLexicon::default(),
    })
}

fn published_words() -> Vec<String> {
    PUBLISHED_HARMFUL_WORDS.iter().map(|s| s.to_string()).collect()
}

fn csv_body(comment: &str, header: &[String], rows: &[Vec<String>]) -> Res<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(runtime)?;
    for r in rows {
        w.write_record(r).map_err(runtime)?;
    }
    let bytes = w.into_inner().map_err(runtime)?;
    Ok(format!("# {comment}\n{}", String::from_utf8(bytes).expect("csv is utf-8")))
}

pub fn ingest(a: &IngestArgs) -> Res<()> {
    let loaded = load(&a.data)?;
    let mut per_set = Vec::new();
    for c in loaded.benchmarks.values() {
        for (name, s) in model_sets(c)? {
            per_set.push(json!({"set": name, "records": s.len(), "accuracy": s.accuracy()}));
        }
    }
    if let Some(out) = &a.out {
        let merged = Corpus::merge(loaded.benchmarks.values(), "ingest")?;
        let mut buf = Vec::new();
        merged.write_jsonl(&mut buf)?;
        write_file(out, &String::from_utf8(buf).expect("jsonl is utf-8"))?;
    }
    print_json(&envelope("ingest", a, Value::Null, &json!({"benchmarks": loaded.summaries, "sets": per_set})))
}

pub fn features(a: &FeaturesArgs) -> Res<()> {
    let loaded = load(&a.data)?;
    let words = match &a.words {
        Some(p) => load_word_list(p)?,
        None => published_words(),
    };
    let lex = hedging(&a.hedging)?;
    let all: Vec<&CotRecord> = loaded.benchmarks.values().flat_map(|c| c.iter()).collect();
    let opts = FeatureOptions {
        volatility: all.iter().all(|r| r.sentiment.is_some()),
        encoding: match a.encoding {
            Encoding::Presence => WordEncoding::Presence,
            Encoding::Count => WordEncoding::Count,
        },
    };
    let mut header: Vec<String> = ["record_id", "benchmark", "model", "correct", "length_words", "hedging_rate", "volatility"].map(String::from).to_vec();
    header.extend(words.iter().map(|w| format!("w_{w}")));
    let mut rows = Vec::with_capacity(all.len());
    for r in all {
        let f = featurize(r, &words, &lex, &opts)?;
        let mut row = vec![
            r.record_id.clone(),
            r.benchmark.clone(),
            r.model.clone(),
            u8::from(r.is_correct()).to_string(),
            f.length_words.to_string(),
            format!("{:.6}", f.hedging_rate),
            f.volatility.map(|v| format!("{v:.6}")).unwrap_or_default(),
        ];
        row.extend(f.word_flags.iter().map(|(_, v)| v.to_string()));
        rows.push(row);
    }
    let body = csv_body(&format!("config-sha256: {}; seeds: none", sha256_json(a)), &header, &rows)?;
    match &a.out {
        Some(p) => write_file(p, &body),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

pub fn lexicon(a: &LexiconArgs) -> Res<()> {
    if a.min_occurrences == 0 || a.top_k == 0 {
        return Err(usage("--min-occurrences and --top-k must be positive"));
    }
    let loaded = load(&a.data)?;
    let mut sets = BTreeMap::new();
    for c in loaded.benchmarks.values() {
        sets.extend(model_sets(c)?);
    }
    let cfg = LexiconConfig {
        min_occurrences: a.min_occurrences,
        lemma_mode: a.lemma,
        bootstrap: a.ci.then_some(BootstrapConfig { seed: a.seed, ..BootstrapConfig::default() }),
    };
    let lex = build_lexicon(&sets, &cfg)?;
    let mut buf = Vec::new();
    write_lexicon_csv(&lex, &mut buf)?;
    let sha = sha256_json(a);
    write_file(
        &a.out.join("lexicon.csv"),
        &format!(
            "# config-sha256: {sha}; seeds: bootstrap={}; min_occurrences={}; lemma_mode={}\n{}",
            a.seed,
            a.min_occurrences,
            a.lemma,
            String::from_utf8(buf).expect("csv is utf-8")
        ),
    )?;
    let pick = |d| if lex.is_empty() { Ok(Vec::new()) } else { select_consistent(&lex, d, a.top_k) };
    let selection = json!({
        "min_occurrences": a.min_occurrences,
        "sets": sets.keys().collect::<Vec<_>>(),
        "tokens_retained": lex.len(),
        "harmful": pick(Direction::Harmful)?,
        "booster": pick(Direction::Booster)?,
    });
    let doc = envelope("lexicon", a, json!({"bootstrap": a.seed}), &selection);
    write_file(&a.out.join("manifest.json"), &(serde_json::to_string_pretty(&doc).map_err(runtime)? + "\n"))?;
    print_json(&doc)
}

fn features_config(m: &ModelArgs) -> Res<FeaturesConfig> {
    FeatureSet::from_names(&m.features)?;
    Ok(FeaturesConfig {
        sets: vec![m.features.clone()],
        word_source: match m.word_source {
            WordSourceArg::Published => WordSource::Published,
            WordSourceArg::TrainingLexicon => WordSource::TrainingLexicon,
        },
        words: m.words.as_deref().map(load_word_list).transpose()?,
        top_k: m.top_k,
        min_occurrences: m.min_occurrences,
        hedging_lexicon: m.hedging.clone(),
        ..FeaturesConfig::default()
    })
}

fn classifier_config(m: &ModelArgs, cross: CrossMode) -> Res<ClassifierConfig> {
    let d = ClassifierConfig::default();
    let c = ClassifierConfig {
        epochs: m.epochs.unwrap_or(d.epochs),
        learning_rate: m.learning_rate.unwrap_or(d.learning_rate),
        threshold: m.threshold,
        train_ratio: m.train_ratio,
        cross_benchmark: cross,
        ..d
    };
    if !(c.train_ratio > 0.0 && c.train_ratio < 1.0) {
        return Err(usage(format!("--train-ratio {} not in (0, 1)", c.train_ratio)));
    }
    c.train_config().validate().map_err(|e| usage(e.to_string()))?;
    Ok(c)
}

fn benchmark<'a>(loaded: &'a LoadedCorpora, name: &str) -> Res<&'a Corpus> {
    loaded.benchmarks.get(name).ok_or_else(|| Failure {
        code: EXIT_DATA,
        message: format!("no benchmark named {name:?}; loaded: {:?}", loaded.benchmarks.keys().collect::<Vec<_>>()),
    })
}

pub fn train(a: &TrainArgs) -> Res<()> {
    let loaded = load(&a.data)?;
    let fcfg = features_config(&a.model_args)?;
    let ccfg = classifier_config(&a.model_args, CrossMode::Split)?;
    let mut corpus = benchmark(&loaded, &a.benchmark)?.clone();
    if let Some(m) = &a.model {
        let idx: Vec<usize> = (0..corpus.len()).filter(|&i| &corpus.records()[i].model == m).collect();
        if idx.is_empty() {
            return Err(Failure { code: EXIT_DATA, message: format!("benchmark {:?} has no records of model {m:?}", a.benchmark) });
        }
        corpus = corpus.subset(&idx, format!("{}/{m}", a.benchmark))?;
    }
    let plan = split_train_balanced_test(&corpus.labels(), ccfg.train_ratio, a.seed)?;
    let train_c = corpus.subset(&plan.train, "train")?;
    let words = match fcfg.word_source {
        WordSource::Published => fcfg.words.clone().unwrap_or_else(published_words),
        WordSource::TrainingLexicon => training_words(&train_c, &fcfg)?,
    };
    let set = FeatureSet::from_names(&a.model_args.features)?;
    let train_recs: Vec<&CotRecord> = train_c.iter().collect();
    let clf = train_classifier(&train_recs, &words, &hedging(&fcfg.hedging_lexicon)?, set, fcfg.encoding, ccfg.standardize, &ccfg.train_config(), a.seed)?;
    let test: Vec<&CotRecord> = plan.test.iter().map(|&i| &corpus.records()[i]).collect();
    let (metrics, _) = clf.evaluate(&test, ccfg.threshold)?;
    if let Some(out) = &a.out {
        if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| runtime(format!("{}: {e}", dir.display())))?;
        }
        clf.save(out).map_err(runtime)?;
    }
    let data = json!({
        "feature_set": set.label(),
        "words": clf.words,
        "n_train": train_recs.len(),
        "n_test": test.len(),
        "metrics": metrics,
    });
    print_json(&envelope("train", a, json!([a.seed]), &data))
}

pub fn evaluate(a: &EvaluateArgs) -> Res<()> {
    let seeds = parse_seeds(&a.seeds)?;
    let loaded = load(&a.data)?;
    let fcfg = features_config(&a.model_args)?;
    let cross = match a.cross {
        CrossArg::Split => CrossMode::Split,
        CrossArg::Full => CrossMode::Full,
    };
    let ccfg = classifier_config(&a.model_args, cross)?;
    let mut pair = BTreeMap::new();
    for name in [&a.train, &a.test] {
        pair.insert(name.clone(), benchmark(&loaded, name)?.clone());
    }
    let cells: Vec<_> = run_classifier_cells(&pair, std::slice::from_ref(&a.train), &fcfg, &ccfg, &hedging(&fcfg.hedging_lexicon)?, &seeds)?
        .into_iter()
        .filter(|c| c.test == a.test)
        .collect();
    if let Some(p) = &a.cells {
        let header = ["train", "test", "feature_set", "seed", "n_train", "n_test", "tn", "fp", "fn", "tp", "mcc", "accuracy", "auc"].map(String::from);
        let rows: Vec<Vec<String>> = cells
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
                    format!("{:.6}", m.mcc),
                    format!("{:.6}", m.accuracy),
                    format!("{:.6}", m.auc),
                ]
            })
            .collect();
        write_file(p, &csv_body(&format!("config-sha256: {}; seeds: {seeds:?}", sha256_json(a)), &header, &rows)?)?;
    }
    let mode = if a.train == a.test {
        "in-benchmark: balanced held-out split"
    } else if cross == CrossMode::Split {
        "cross-benchmark: foreign balanced held-out split per seed"
    } else {
        "cross-benchmark: whole foreign corpus, balanced by seeded downsampling"
    };
    let data = json!({"test_set": mode, "summary": summarize(&cells)});
    print_json(&envelope("evaluate", a, json!(seeds), &data))
}

pub fn heuristics(a: &HeuristicsArgs) -> Res<()> {
    let seeds = parse_seeds(&a.seeds)?;
    if a.coinflip_seeds == 0 {
        return Err(usage("--coinflip-seeds must be positive"));
    }
    let loaded = load(&a.data)?;
    let cfg = HeuristicsConfig {
        harmful_words: match &a.harmful_words {
            Some(p) => load_word_list(p)?,
            None => HeuristicsConfig::default().harmful_words,
        },
        coinflip_seeds: a.coinflip_seeds,
    };
    let rows = run_heuristics(&loaded.benchmarks, &cfg, a.train_ratio, &seeds)?;
    let data = json!({"harmful_words": cfg.harmful_words, "rows": rows});
    print_json(&envelope("heuristics", a, json!({"splits": seeds, "coinflip": format!("0..{}", a.coinflip_seeds)}), &data))
}

pub fn calibration(a: &CalibrationArgs) -> Res<()> {
    let loaded = load(&a.data)?;
    let mut sets = BTreeMap::new();
    for (name, c) in &loaded.benchmarks {
        if a.pooled {
            sets.insert(name.clone(), c.clone());
        } else {
            sets.extend(model_sets(c)?);
        }
    }
    let mut out = Vec::new();
    for (name, c) in &sets {
        let recs: Vec<(f64, bool)> = c.iter().map(|r| (r.confidence_pct, r.is_correct())).collect();
        out.push(json!({"set": name, "records": c.len(), "report": calibration_error(&recs)?}));
    }
    print_json(&envelope("calibration", a, Value::Null, &out))
}

pub fn report(a: &ReportArgs) -> Res<()> {
    let mut cfg = PipelineConfig::load(&a.config)?;
    if let Some(o) = &a.out {
        cfg.output.dir = o.clone();
    }
    let summary = run_pipeline(&cfg)?;
    println!("{}", serde_json::to_string_pretty(&summary).map_err(runtime)?);
    Ok(())
}

pub fn attach(a: &AttachArgs) -> Res<()> {
    let corpus = load_corpus(&a.corpus, false)?.corpus;
    let joined = cot_signal::sentiment::attach_offline(&corpus, &a.scores, a.require_all)?;
    let with = joined.iter().filter(|r| r.sentiment.is_some()).count();
    joined.save(&a.out).map_err(runtime)?;
    print_json(&envelope("sentiment attach", a, Value::Null, &json!({"records": joined.len(), "with_sentiment": with})))
}

#[cfg(feature = "http")]
pub fn score(a: &ScoreArgs) -> Res<()> {
    use cot_signal::sentiment::{score_corpus, EndpointConfig, HttpEvaluator, RetryPolicy, ScoreOptions};
    let corpus = load_corpus(&a.corpus, false)?.corpus;
    let ev = HttpEvaluator::new(EndpointConfig {
        url: a.url.clone(),
        model: a.model.clone(),
        api_key_env: a.api_key_env.clone(),
        timeout_secs: a.timeout_secs,
        temperature: a.temperature,
    })?;
    let opts = ScoreOptions {
        concurrency: a.concurrency.max(1),
        min_interval_ms: a.min_interval_ms,
        retry: RetryPolicy::default(),
        cache_path: a.cache.clone(),
    };
    let rep = score_corpus(&corpus, &ev, &opts)?;
    rep.corpus.save(&a.out).map_err(runtime)?;
    let data = json!({
        "records": rep.corpus.len(),
        "preexisting": rep.preexisting,
        "from_cache": rep.from_cache,
        "requested": rep.requested,
        "failures": rep.failures,
    });
    print_json(&envelope("sentiment score", a, Value::Null, &data))
}

pub fn synth(a: &SynthArgs) -> Res<()> {
    let cfg = SynthConfig { records_per_set: a.records_per_set, seed: a.seed, accuracy: a.accuracy, ..SynthConfig::default() };
    let c = synth_corpus(&cfg).map_err(|e| usage(e.to_string()))?;
    c.save(&a.out).map_err(runtime)?;
    print_json(&envelope("synth", a, json!([a.seed]), &json!({"records": c.len(), "accuracy": c.accuracy(), "synth_config": cfg})))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_ranges_and_lists() {
        assert_eq!(parse_seeds("0..3").unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_seeds("4, 7").unwrap(), vec![4, 7]);
        assert_eq!(parse_seeds("5..5").unwrap_err().code, 1);
        assert!(parse_seeds("a").is_err());
    }

    #[test]
    fn data_specs_name_benchmarks() {
        let d = DataArgs { data: vec!["hle=x/a.jsonl".into(), "dir/omni.jsonl".into(), "hle=b.jsonl".into()], strict: false, agreement_filter: vec![], sentiment: None };
        let c = corpora_config(&d).unwrap();
        assert_eq!(c.benchmarks["hle"].len(), 2);
        assert_eq!(c.benchmarks["omni"], vec![PathBuf::from("dir/omni.jsonl")]);
    }
}
