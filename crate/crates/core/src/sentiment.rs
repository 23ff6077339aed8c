//! External sentiment evaluator: prompt construction, trailer parsing,
//! bounded-concurrency scoring with retries, and an append-only cache.
//!
//! Offline use needs none of the network pieces: [`attach_offline`] reads
//! precomputed triples from a JSONL file.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Mutex, OnceLock};
use std::time::{Duration, Instant};

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::textfeat::SentimentTriple;

pub const PREAMBLE: &str = "Judge how emotional this text is by reporting on its most positive emotion and its most negative emotion on a scale from -1 (negative) to 1 (positive), and the order in which they appear, i.e. direction in which they appear, if the most negative emotion appears before the most positive emotion the direction is upward so, 1, if inverse is true the direction is -1 if the text is completely neutral and no gradient exists present between the two emotional extremes the direction is 0, picking up on small effects. Always end your response with:";

pub const POSITIVE_LABEL: &str = "Most positive emotion Score:";
pub const NEGATIVE_LABEL: &str = "Most negative emotion Score:";
pub const DIRECTION_LABEL: &str = "Direction:";

fn trailer_template() -> String {
    format!("{POSITIVE_LABEL} ...\n{NEGATIVE_LABEL} ...\n{DIRECTION_LABEL} ...")
}

/// Instruction and trailer template, the trace, then the template again so
/// the prompt ends on the required labels.
pub fn build_sentiment_prompt(cot: &str) -> Result<String> {
    if cot.trim().is_empty() {
        return Err(Error::invalid("cannot build a sentiment prompt for an empty trace"));
    }
    let t = trailer_template();
    Ok(format!("{PREAMBLE}\n{t}\n\nText:\n{cot}\n\n{t}"))
}

/// The three trailer lines for a triple, in the format the parser accepts.
pub fn format_trailer(t: &SentimentTriple) -> String {
    format!(
        "{POSITIVE_LABEL} {}\n{NEGATIVE_LABEL} {}\n{DIRECTION_LABEL} {}",
        t.most_positive, t.most_negative, t.direction
    )
}

fn patterns() -> &'static [Regex; 3] {
    static P: OnceLock<[Regex; 3]> = OnceLock::new();
    P.get_or_init(|| {
        let num = r"\**\s*([-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?)";
        [
            Regex::new(&format!(r"(?i)most\s+positive\s+emotion\s+score\s*:{num}")).unwrap(),
            Regex::new(&format!(r"(?i)most\s+negative\s+emotion\s+score\s*:{num}")).unwrap(),
            Regex::new(&format!(r"(?i)direction\s*:{num}")).unwrap(),
        ]
    })
}

/// Extracts the last occurrence of each trailer label and validates the triple.
pub fn parse_sentiment_response(text: &str) -> Result<SentimentTriple> {
    let fail = |reason: String| Error::SentimentParse {
        reason,
        raw: text.to_string(),
    };
    let [pos_re, neg_re, dir_re] = patterns();
    let last = |re: &Regex, label: &str| -> Result<String> {
        re.captures_iter(text)
            .last()
            .map(|c| c[1].to_string())
            .ok_or_else(|| fail(format!("missing {label:?}")))
    };
    let parse_f = |s: String, label: &str| -> Result<f64> {
        s.parse::<f64>().map_err(|e| fail(format!("{label} {s:?}: {e}")))
    };
    let pos = parse_f(last(pos_re, POSITIVE_LABEL)?, POSITIVE_LABEL)?;
    let neg = parse_f(last(neg_re, NEGATIVE_LABEL)?, NEGATIVE_LABEL)?;
    let dir_s = last(dir_re, DIRECTION_LABEL)?;
    let dir = parse_f(dir_s.clone(), DIRECTION_LABEL)?;
    if dir.fract() != 0.0 || !(-1.0..=1.0).contains(&dir) {
        return Err(fail(format!("direction {dir_s} not in {{-1, 0, 1}}")));
    }
    SentimentTriple::new(pos, neg, dir as i8).map_err(|e| fail(e.to_string()))
}

/// Failure of a single evaluator call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CallError {
    /// Worth retrying (timeouts, connection errors, 429, 5xx).
    Transient(String),
    /// Retrying cannot help (authentication, malformed request).
    Fatal(String),
}

impl std::fmt::Display for CallError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CallError::Transient(m) => write!(f, "transient: {m}"),
            CallError::Fatal(m) => write!(f, "fatal: {m}"),
        }
    }
}

/// Text in, text out.
pub trait SentimentEvaluator: Sync {
    fn complete(&self, prompt: &str) -> std::result::Result<String, CallError>;
}

impl<F> SentimentEvaluator for F
where
    F: Fn(&str) -> std::result::Result<String, CallError> + Sync,
{
    fn complete(&self, prompt: &str) -> std::result::Result<String, CallError> {
        self(prompt)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointConfig {
    /// Full URL of a chat-completion endpoint.
    pub url: String,
    pub model: String,
    /// Environment variable holding the bearer token.
    pub api_key_env: String,
    pub timeout_secs: u64,
    pub temperature: Option<f64>,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        EndpointConfig {
            url: "https://api.openai.com/v1/chat/completions".into(),
            model: "o3-mini".into(),
            api_key_env: "SENTIMENT_API_KEY".into(),
            timeout_secs: 120,
            temperature: None,
        }
    }
}

#[cfg(feature = "http")]
pub use http::HttpEvaluator;

#[cfg(feature = "http")]
mod http {
    use super::{CallError, EndpointConfig, SentimentEvaluator};
    use crate::error::{Error, Result};
    use std::time::Duration;

    pub struct HttpEvaluator {
        client: reqwest::blocking::Client,
        config: EndpointConfig,
        api_key: Option<String>,
    }

    impl HttpEvaluator {
        /// Reads the token from the configured environment variable; a missing
        /// variable sends unauthenticated requests.
        pub fn new(config: EndpointConfig) -> Result<Self> {
            let api_key = std::env::var(&config.api_key_env).ok().filter(|k| !k.is_empty());
            let client = reqwest::blocking::Client::builder()
                .timeout(Duration::from_secs(config.timeout_secs))
                .build()
                .map_err(|e| Error::Config(format!("http client: {e}")))?;
            Ok(HttpEvaluator { client, config, api_key })
        }
    }

    impl SentimentEvaluator for HttpEvaluator {
        fn complete(&self, prompt: &str) -> std::result::Result<String, CallError> {
            let mut body = serde_json::json!({
                "model": self.config.model,
                "messages": [{"role": "user", "content": prompt}],
            });
            if let Some(t) = self.config.temperature {
                body["temperature"] = serde_json::json!(t);
            }
            let mut req = self.client.post(&self.config.url).json(&body);
            if let Some(k) = &self.api_key {
                req = req.bearer_auth(k);
            }
            let resp = req.send().map_err(|e| CallError::Transient(e.to_string()))?;
            let status = resp.status();
            if status.as_u16() == 429 || status.is_server_error() {
                return Err(CallError::Transient(format!("HTTP {status}")));
            }
            if !status.is_success() {
                return Err(CallError::Fatal(format!("HTTP {status}")));
            }
            let v: serde_json::Value = resp.json().map_err(|e| CallError::Transient(format!("response body: {e}")))?;
            v.pointer("/choices/0/message/content")
                .and_then(|c| c.as_str())
                .map(str::to_string)
                .ok_or_else(|| CallError::Fatal("response has no choices[0].message.content".into()))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub initial_backoff_ms: u64,
    pub backoff_factor: u32,
    /// Extra requests for a record whose response failed to parse.
    pub parse_reasks: u32,
    /// Abort once more records than this have failed to parse.
    pub max_parse_failures: usize,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 3,
            initial_backoff_ms: 1000,
            backoff_factor: 2,
            parse_reasks: 1,
            max_parse_failures: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreOptions {
    pub concurrency: usize,
    /// Minimum spacing between request starts across all workers.
    pub min_interval_ms: u64,
    pub retry: RetryPolicy,
    pub cache_path: Option<PathBuf>,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        ScoreOptions {
            concurrency: 4,
            min_interval_ms: 0,
            retry: RetryPolicy::default(),
            cache_path: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub record_id: String,
    pub sentiment: SentimentTriple,
}

/// Append-only JSONL store of scored records; writes are serialized.
pub struct SentimentCache {
    path: PathBuf,
    entries: HashMap<String, SentimentTriple>,
    file: Mutex<File>,
}

impl SentimentCache {
    /// Opens or creates the cache. A torn final line (interrupted write) is
    /// ignored; any other malformed line is an error.
    pub fn open(path: &Path) -> Result<Self> {
        let entries = if path.exists() { read_entries(path, true)? } else { HashMap::new() };
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        Ok(SentimentCache {
            path: path.to_path_buf(),
            entries,
            file: Mutex::new(file),
        })
    }

    pub fn get(&self, record_id: &str) -> Option<SentimentTriple> {
        self.entries.get(record_id).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn append(&self, entry: &CacheEntry) -> Result<()> {
        let mut line = serde_json::to_string(entry)?;
        line.push('\n');
        let mut f = self.file.lock().unwrap_or_else(|p| p.into_inner());
        f.write_all(line.as_bytes()).map_err(|e| Error::io(&self.path, e))?;
        f.flush().map_err(|e| Error::io(&self.path, e))
    }
}

fn read_entries(path: &Path, tolerate_torn_tail: bool) -> Result<HashMap<String, SentimentTriple>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let lines: Vec<String> = BufReader::new(f)
        .lines()
        .collect::<std::io::Result<_>>()
        .map_err(|e| Error::io(path, e))?;
    let mut out = HashMap::new();
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<CacheEntry>(line) {
            Ok(e) => {
                e.sentiment.validate().map_err(|err| Error::Malformed {
                    line: i + 1,
                    reason: err.to_string(),
                })?;
                // later lines win
                out.insert(e.record_id, e.sentiment);
            }
            Err(_) if tolerate_torn_tail && i + 1 == lines.len() => {
                log::warn!("{}: ignoring torn final line", path.display());
            }
            Err(e) => {
                return Err(Error::Malformed {
                    line: i + 1,
                    reason: e.to_string(),
                })
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreFailure {
    pub record_id: String,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct ScoreReport {
    pub corpus: Corpus,
    /// Records that already carried a triple.
    pub preexisting: usize,
    pub from_cache: usize,
    pub requested: usize,
    pub failures: Vec<ScoreFailure>,
}

struct RateLimiter {
    interval: Duration,
    next: Mutex<Instant>,
}

impl RateLimiter {
    fn wait(&self) {
        if self.interval.is_zero() {
            return;
        }
        let slot = {
            let mut next = self.next.lock().unwrap_or_else(|p| p.into_inner());
            let now = Instant::now();
            let slot = (*next).max(now);
            *next = slot + self.interval;
            slot
        };
        let now = Instant::now();
        if slot > now {
            std::thread::sleep(slot - now);
        }
    }
}

enum Outcome {
    Scored(SentimentTriple),
    ParseFailed(String),
}

fn score_one(
    cot: &str,
    evaluator: &dyn SentimentEvaluator,
    retry: &RetryPolicy,
    limiter: &RateLimiter,
) -> Result<Outcome> {
    let prompt = build_sentiment_prompt(cot)?;
    let mut last_parse = String::new();
    for _ in 0..=retry.parse_reasks {
        let mut backoff = Duration::from_millis(retry.initial_backoff_ms);
        let mut attempt = 0;
        let text = loop {
            attempt += 1;
            limiter.wait();
            match evaluator.complete(&prompt) {
                Ok(t) => break t,
                Err(CallError::Fatal(m)) => return Err(Error::Evaluator { attempts: attempt, reason: m }),
                Err(CallError::Transient(m)) if attempt >= retry.max_attempts.max(1) => {
                    return Err(Error::Evaluator { attempts: attempt, reason: m })
                }
                Err(CallError::Transient(m)) => {
                    log::debug!("evaluator attempt {attempt} failed: {m}; retrying in {backoff:?}");
                    std::thread::sleep(backoff);
                    backoff *= retry.backoff_factor.max(1);
                }
            }
        };
        match parse_sentiment_response(&text) {
            Ok(t) => return Ok(Outcome::Scored(t)),
            Err(e) => last_parse = e.to_string(),
        }
    }
    Ok(Outcome::ParseFailed(last_parse))
}

/// Fills in missing triples. Records that already have one are kept; cache
/// hits skip the request. Parse failures are recorded per record until the
/// quota is exceeded; an exhausted retry budget aborts the run. Everything
/// scored before an abort is already in the cache.
pub fn score_corpus(corpus: &Corpus, evaluator: &dyn SentimentEvaluator, opts: &ScoreOptions) -> Result<ScoreReport> {
    if opts.concurrency == 0 {
        return Err(Error::invalid("concurrency must be at least 1"));
    }
    let cache = opts.cache_path.as_deref().map(SentimentCache::open).transpose()?;
    let mut results: HashMap<String, SentimentTriple> = HashMap::new();
    let mut preexisting = 0;
    let mut from_cache = 0;
    let mut pending: Vec<usize> = Vec::new();
    for (i, r) in corpus.iter().enumerate() {
        if r.sentiment.is_some() {
            preexisting += 1;
        } else if let Some(t) = cache.as_ref().and_then(|c| c.get(&r.record_id)) {
            results.insert(r.record_id.clone(), t);
            from_cache += 1;
        } else {
            pending.push(i);
        }
    }

    let limiter = RateLimiter {
        interval: Duration::from_millis(opts.min_interval_ms),
        next: Mutex::new(Instant::now()),
    };
    let cursor = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let parse_failures = AtomicUsize::new(0);
    let fresh: Mutex<Vec<(String, SentimentTriple)>> = Mutex::new(Vec::new());
    let failures: Mutex<Vec<ScoreFailure>> = Mutex::new(Vec::new());
    let fatal: Mutex<Option<Error>> = Mutex::new(None);

    std::thread::scope(|s| {
        for _ in 0..opts.concurrency.min(pending.len().max(1)) {
            s.spawn(|| loop {
                if abort.load(Ordering::SeqCst) {
                    return;
                }
                let k = cursor.fetch_add(1, Ordering::SeqCst);
                let Some(&idx) = pending.get(k) else { return };
                let rec = &corpus.records()[idx];
                let outcome = score_one(&rec.cot, evaluator, &opts.retry, &limiter).and_then(|o| {
                    if let (Outcome::Scored(t), Some(c)) = (&o, &cache) {
                        c.append(&CacheEntry {
                            record_id: rec.record_id.clone(),
                            sentiment: *t,
                        })?;
                    }
                    Ok(o)
                });
                match outcome {
                    Ok(Outcome::Scored(t)) => fresh.lock().unwrap().push((rec.record_id.clone(), t)),
                    Ok(Outcome::ParseFailed(reason)) => {
                        failures.lock().unwrap().push(ScoreFailure {
                            record_id: rec.record_id.clone(),
                            reason,
                        });
                        if parse_failures.fetch_add(1, Ordering::SeqCst) + 1 > opts.retry.max_parse_failures {
                            abort.store(true, Ordering::SeqCst);
                            fatal.lock().unwrap().get_or_insert(Error::Evaluator {
                                attempts: opts.retry.parse_reasks + 1,
                                reason: format!(
                                    "parse-failure quota of {} exceeded",
                                    opts.retry.max_parse_failures
                                ),
                            });
                        }
                    }
                    Err(e) => {
                        abort.store(true, Ordering::SeqCst);
                        fatal.lock().unwrap().get_or_insert(e);
                    }
                }
            });
        }
    });

    if let Some(e) = fatal.into_inner().unwrap() {
        return Err(e);
    }
    let fresh = fresh.into_inner().unwrap();
    let requested = fresh.len();
    results.extend(fresh);
    let mut failures = failures.into_inner().unwrap();
    failures.sort_by(|a, b| a.record_id.cmp(&b.record_id));

    let records = corpus
        .iter()
        .map(|r| {
            let mut r = r.clone();
            if r.sentiment.is_none() {
                r.sentiment = results.get(&r.record_id).copied();
            }
            r
        })
        .collect();
    Ok(ScoreReport {
        corpus: corpus.with_records(records)?,
        preexisting,
        from_cache,
        requested,
        failures,
    })
}

/// Attaches triples from a JSONL file of `{record_id, sentiment}` lines.
/// With `require_all`, a record left without a triple is an error.
pub fn attach_offline(corpus: &Corpus, path: &Path, require_all: bool) -> Result<Corpus> {
    let entries = read_entries(path, false)?;
    let mut records = Vec::with_capacity(corpus.len());
    for r in corpus.iter() {
        let mut r = r.clone();
        if let Some(t) = entries.get(&r.record_id) {
            r.sentiment = Some(*t);
        }
        if require_all && r.sentiment.is_none() {
            return Err(Error::Record {
                record_id: r.record_id,
                reason: format!("no sentiment triple in {}", path.display()),
            });
        }
        records.push(r);
    }
    corpus.with_records(records)
}
