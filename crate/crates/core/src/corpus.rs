//! Graded chain-of-thought records and line-delimited JSON ingestion.

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textfeat::SentimentTriple;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grade {
    Correct,
    Incorrect,
}

impl Grade {
    pub fn is_correct(self) -> bool {
        self == Grade::Correct
    }

    pub fn from_bool(correct: bool) -> Self {
        if correct {
            Grade::Correct
        } else {
            Grade::Incorrect
        }
    }
}

/// One graded model response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CotRecord {
    pub record_id: String,
    pub benchmark: String,
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub question: Option<String>,
    pub cot: String,
    pub final_answer: String,
    pub confidence_pct: f64,
    pub grade: Grade,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grade_human: Option<Grade>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grade_auto: Option<Grade>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentiment: Option<SentimentTriple>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tier: Option<String>,
}

impl CotRecord {
    pub fn new(
        record_id: impl Into<String>,
        benchmark: impl Into<String>,
        model: impl Into<String>,
        cot: impl Into<String>,
        final_answer: impl Into<String>,
        confidence_pct: f64,
        grade: Grade,
    ) -> Self {
        CotRecord {
            record_id: record_id.into(),
            benchmark: benchmark.into(),
            model: model.into(),
            question: None,
            cot: cot.into(),
            final_answer: final_answer.into(),
            confidence_pct,
            grade,
            grade_human: None,
            grade_auto: None,
            sentiment: None,
            category: None,
            tier: None,
        }
    }

    pub fn with_sentiment(mut self, sentiment: Option<SentimentTriple>) -> Self {
        self.sentiment = sentiment;
        self
    }

    pub fn with_dual_grades(mut self, human: Grade, auto: Grade) -> Self {
        self.grade_human = Some(human);
        self.grade_auto = Some(auto);
        self
    }

    pub fn is_correct(&self) -> bool {
        self.grade.is_correct()
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| Error::Record {
            record_id: self.record_id.clone(),
            reason,
        };
        if self.record_id.is_empty() {
            return Err(fail("empty record_id".into()));
        }
        if !(0.0..=100.0).contains(&self.confidence_pct) {
            return Err(fail(format!("confidence_pct {} outside [0, 100]", self.confidence_pct)));
        }
        if self.cot.trim().is_empty() {
            return Err(fail("empty cot".into()));
        }
        if let (Some(h), Some(a)) = (self.grade_human, self.grade_auto) {
            if h == a && h != self.grade {
                return Err(fail("grade contradicts agreeing dual grades".into()));
            }
        }
        if let Some(s) = &self.sentiment {
            s.validate().map_err(|e| fail(e.to_string()))?;
        }
        Ok(())
    }

    pub fn group_key(&self, key: GroupKey) -> Option<&str> {
        match key {
            GroupKey::Category => self.category.as_deref(),
            GroupKey::Tier => self.tier.as_deref(),
            GroupKey::Benchmark => Some(self.benchmark.as_str()),
            GroupKey::Model => Some(self.model.as_str()),
        }
    }
}

/// Wire form of a record: `grade` may be omitted when dual grades agree.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    record_id: String,
    benchmark: String,
    model: String,
    #[serde(default)]
    question: Option<String>,
    cot: String,
    final_answer: String,
    confidence_pct: f64,
    #[serde(default)]
    grade: Option<Grade>,
    #[serde(default)]
    grade_human: Option<Grade>,
    #[serde(default)]
    grade_auto: Option<Grade>,
    #[serde(default)]
    sentiment: Option<SentimentTriple>,
    #[serde(default)]
    category: Option<String>,
    #[serde(default)]
    tier: Option<String>,
}

enum Resolved {
    Record(CotRecord),
    /// Dual grades disagree and no explicit grade settles it.
    Unresolved(String),
}

impl RawRecord {
    fn resolve(self) -> Result<Resolved> {
        let grade = match (self.grade, self.grade_human, self.grade_auto) {
            (Some(g), _, _) => g,
            (None, Some(h), Some(a)) if h == a => h,
            (None, Some(_), Some(_)) => return Ok(Resolved::Unresolved(self.record_id)),
            (None, _, _) => {
                return Err(Error::Record {
                    record_id: self.record_id,
                    reason: "no grade and no pair of dual grades".into(),
                })
            }
        };
        let record = CotRecord {
            record_id: self.record_id,
            benchmark: self.benchmark,
            model: self.model,
            question: self.question,
            cot: self.cot,
            final_answer: self.final_answer,
            confidence_pct: self.confidence_pct,
            grade,
            grade_human: self.grade_human,
            grade_auto: self.grade_auto,
            sentiment: self.sentiment,
            category: self.category,
            tier: self.tier,
        };
        record.validate()?;
        Ok(Resolved::Record(record))
    }
}

/// Where a corpus came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    /// Seconds since the Unix epoch at load time.
    pub loaded_at: u64,
}

/// An ordered, validated, non-empty collection of records.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    records: Vec<CotRecord>,
    pub provenance: Provenance,
}

impl Corpus {
    /// Validates the records (invariants and id uniqueness).
    pub fn from_records(records: Vec<CotRecord>, source: impl Into<String>) -> Result<Self> {
        let source = source.into();
        if records.is_empty() {
            return Err(Error::EmptyCorpus(source));
        }
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            r.validate()?;
            if !seen.insert(r.record_id.as_str()) {
                return Err(Error::DuplicateId(r.record_id.clone()));
            }
        }
        Ok(Corpus {
            records,
            provenance: Provenance {
                source,
                loaded_at: now_secs(),
            },
        })
    }

    pub fn records(&self) -> &[CotRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, CotRecord> {
        self.records.iter()
    }

    pub fn labels(&self) -> Vec<bool> {
        self.records.iter().map(CotRecord::is_correct).collect()
    }

    pub fn accuracy(&self) -> f64 {
        self.records.iter().filter(|r| r.is_correct()).count() as f64 / self.records.len() as f64
    }

    /// Records at the given positions, in the given order.
    pub fn subset(&self, indices: &[usize], source: impl Into<String>) -> Result<Corpus> {
        let records = indices.iter().map(|&i| self.records[i].clone()).collect();
        Corpus::from_records(records, source)
    }

    /// Concatenation of several corpora. Ids must stay unique.
    pub fn merge<'a>(parts: impl IntoIterator<Item = &'a Corpus>, source: impl Into<String>) -> Result<Corpus> {
        let records = parts.into_iter().flat_map(|c| c.records.iter().cloned()).collect();
        Corpus::from_records(records, source)
    }

    pub fn with_records(&self, records: Vec<CotRecord>) -> Result<Corpus> {
        Corpus::from_records(records, self.provenance.source.clone())
    }

    /// Writes one JSON object per line.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n").map_err(|e| Error::io("<writer>", e))?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(f);
        self.write_jsonl(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a CotRecord;
    type IntoIter = std::slice::Iter<'a, CotRecord>;

    fn into_iter(self) -> Self::IntoIter {
        self.records.iter()
    }
}

fn now_secs() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedLine {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct LoadReport {
    pub corpus: Corpus,
    pub loaded: usize,
    /// Malformed or invalid lines dropped in lenient mode.
    pub skipped: Vec<SkippedLine>,
    /// Records whose dual grades disagree with no explicit grade.
    pub unresolved: Vec<String>,
}

/// Parses line-delimited records from any reader.
pub fn read_corpus<R: BufRead>(reader: R, source: &str, strict: bool) -> Result<LoadReport> {
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    let mut unresolved = Vec::new();
    let mut seen = HashSet::new();

    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(source, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<RawRecord>(&line)
            .map_err(|e| e.to_string())
            .and_then(|raw| raw.resolve().map_err(|e| e.to_string()));
        match parsed {
            Ok(Resolved::Record(r)) => {
                if !seen.insert(r.record_id.clone()) {
                    return Err(Error::DuplicateId(r.record_id));
                }
                records.push(r);
            }
            Ok(Resolved::Unresolved(id)) => {
                log::warn!("{source}:{line_no}: record {id} excluded, dual grades disagree");
                if !seen.insert(id.clone()) {
                    return Err(Error::DuplicateId(id));
                }
                unresolved.push(id);
            }
            Err(reason) => {
                if strict {
                    return Err(Error::Malformed { line: line_no, reason });
                }
                log::warn!("{source}:{line_no}: skipped: {reason}");
                skipped.push(SkippedLine { line: line_no, reason });
            }
        }
    }

    let loaded = records.len();
    let corpus = Corpus::from_records(records, source)?;
    Ok(LoadReport {
        corpus,
        loaded,
        skipped,
        unresolved,
    })
}

/// Loads a corpus file. In lenient mode malformed lines are skipped and
/// reported; in strict mode the first one aborts the load.
pub fn load_corpus(path: &Path, strict: bool) -> Result<LoadReport> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus(BufReader::new(f), &path.display().to_string(), strict)
}

/// Outcome of [`filter_agreement`].
#[derive(Debug, Clone)]
pub struct AgreementFilter {
    pub corpus: Corpus,
    pub total: usize,
    pub agreed: usize,
}

impl AgreementFilter {
    pub fn agreement_rate(&self) -> f64 {
        self.agreed as f64 / self.total as f64
    }
}

/// Keeps records whose human and automatic grades match.
pub fn filter_agreement(corpus: &Corpus) -> Result<AgreementFilter> {
    let mut kept = Vec::new();
    for r in corpus {
        match (r.grade_human, r.grade_auto) {
            (Some(h), Some(a)) => {
                if h == a {
                    let mut r = r.clone();
                    r.grade = h;
                    kept.push(r);
                }
            }
            _ => {
                return Err(Error::Record {
                    record_id: r.record_id.clone(),
                    reason: "missing human or automatic grade".into(),
                })
            }
        }
    }
    let agreed = kept.len();
    let filtered = Corpus::from_records(kept, format!("{} [agreement]", corpus.provenance.source))?;
    Ok(AgreementFilter {
        corpus: filtered,
        total: corpus.len(),
        agreed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKey {
    Category,
    Tier,
    Benchmark,
    Model,
}

impl std::str::FromStr for GroupKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "category" => Ok(GroupKey::Category),
            "tier" => Ok(GroupKey::Tier),
            "benchmark" => Ok(GroupKey::Benchmark),
            "model" => Ok(GroupKey::Model),
            other => Err(Error::invalid(format!("unknown group key {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupAccuracy {
    pub group: String,
    pub accuracy: f64,
    pub count: usize,
}

/// Per-group accuracy, highest first (ties by group name).
pub fn group_accuracy(corpus: &Corpus, key: GroupKey) -> Result<Vec<GroupAccuracy>> {
    let mut groups: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for r in corpus {
        let g = r.group_key(key).ok_or_else(|| Error::Record {
            record_id: r.record_id.clone(),
            reason: format!("missing group key {key:?}"),
        })?;
        let e = groups.entry(g).or_default();
        e.0 += usize::from(r.is_correct());
        e.1 += 1;
    }
    let mut out: Vec<GroupAccuracy> = groups
        .into_iter()
        .map(|(g, (c, n))| GroupAccuracy {
            group: g.to_string(),
            accuracy: c as f64 / n as f64,
            count: n,
        })
        .collect();
    out.sort_by(|a, b| b.accuracy.total_cmp(&a.accuracy).then_with(|| a.group.cmp(&b.group)));
    Ok(out)
}
