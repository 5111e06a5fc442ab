//! Retrieval and entailment datasets: loading, validation, canonical
//! serialization and the seeded train/validation split.
//!
//! Retrieval corpus files hold one topic per line:
//!
//! ```text
//! {"qid":"q1","query_paragraphs":["..."],"candidates":[{"cid":"c1","paragraphs":["..."]}]}
//! ```
//!
//! An optional first line `{"format":"retrieval-v1","profile":"coliee2020"}` (or with an
//! explicit `"candidates_per_query":N`) declares how many candidates every topic must carry.
//! Labels live either inline (`"relevant":[...]`) or in a separate labels file with
//! `{"qid","relevant":[cid,...]}` lines. Entailment files are analogous with
//! `{"qid","fragment","paragraphs":[...]}` and 1-based `"entailing"` indices.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use rand::Rng;
use rand_pcg::Pcg32;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonl;

/// Candidates per query in the COLIEE-2020 retrieval task.
pub const COLIEE_CANDIDATES_PER_QUERY: usize = 200;
/// Profile name that pins [`COLIEE_CANDIDATES_PER_QUERY`].
pub const COLIEE_PROFILE: &str = "coliee2020";
pub const RETRIEVAL_FORMAT: &str = "retrieval-v1";
pub const ENTAILMENT_FORMAT: &str = "entailment-v1";

/// Stream constant handed to [`Pcg32::new`] by [`split_dataset`].
pub const SPLIT_STREAM: u64 = 0xa02b_dbf7_bb3c_0a7;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseDocument {
    pub id: String,
    pub paragraphs: Vec<String>,
}

impl CaseDocument {
    pub fn new(id: impl Into<String>, paragraphs: Vec<String>) -> Result<Self> {
        let doc = CaseDocument {
            id: id.into(),
            paragraphs,
        };
        doc.validate()?;
        Ok(doc)
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::Validation("document id is empty".into()));
        }
        if self.paragraphs.is_empty() {
            return Err(Error::Validation(format!("document {} has no paragraphs", self.id)));
        }
        if let Some(i) = self.paragraphs.iter().position(|p| p.trim().is_empty()) {
            return Err(Error::Validation(format!(
                "document {} paragraph {} is blank",
                self.id,
                i + 1
            )));
        }
        Ok(())
    }

    pub fn text(&self) -> String {
        self.paragraphs.join("\n")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetrievalTopic {
    pub query: CaseDocument,
    pub candidates: Vec<CaseDocument>,
    /// `None` for unlabeled (test) topics.
    pub relevant_ids: Option<BTreeSet<String>>,
}

impl RetrievalTopic {
    pub fn qid(&self) -> &str {
        &self.query.id
    }

    pub fn validate(&self) -> Result<()> {
        self.query.validate()?;
        let mut seen = HashSet::new();
        for c in &self.candidates {
            c.validate()?;
            if !seen.insert(c.id.as_str()) {
                return Err(Error::Validation(format!(
                    "topic {}: duplicate candidate id {}",
                    self.qid(),
                    c.id
                )));
            }
        }
        if let Some(rel) = &self.relevant_ids {
            if let Some(bad) = rel.iter().find(|r| !seen.contains(r.as_str())) {
                return Err(Error::Validation(format!(
                    "topic {}: relevant id {} is not a candidate",
                    self.qid(),
                    bad
                )));
            }
        }
        Ok(())
    }

    pub fn is_relevant(&self, cid: &str) -> Option<bool> {
        self.relevant_ids.as_ref().map(|r| r.contains(cid))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntailmentTopic {
    pub id: String,
    pub fragment: String,
    pub paragraphs: Vec<String>,
    /// 1-based paragraph indices; `None` when unlabeled.
    pub entailing_idx: Option<BTreeSet<usize>>,
}

impl EntailmentTopic {
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::Validation("entailment topic id is empty".into()));
        }
        if self.fragment.trim().is_empty() {
            return Err(Error::Validation(format!("topic {}: fragment is empty", self.id)));
        }
        if self.paragraphs.is_empty() {
            return Err(Error::Validation(format!("topic {}: no paragraphs", self.id)));
        }
        if let Some(i) = self.paragraphs.iter().position(|p| p.trim().is_empty()) {
            return Err(Error::Validation(format!(
                "topic {}: paragraph {} is blank",
                self.id,
                i + 1
            )));
        }
        if let Some(idx) = &self.entailing_idx {
            if let Some(bad) = idx.iter().find(|&&i| i == 0 || i > self.paragraphs.len()) {
                return Err(Error::Validation(format!(
                    "topic {}: entailing index {} outside 1..={}",
                    self.id,
                    bad,
                    self.paragraphs.len()
                )));
            }
        }
        Ok(())
    }
}

/// Optional first line of a corpus file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusHeader {
    pub format: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates_per_query: Option<usize>,
}

impl CorpusHeader {
    pub fn coliee_retrieval() -> Self {
        CorpusHeader {
            format: RETRIEVAL_FORMAT.into(),
            profile: Some(COLIEE_PROFILE.into()),
            candidates_per_query: None,
        }
    }

    /// Candidate count every topic must carry, if the header pins one.
    pub fn declared_candidates(&self) -> Result<Option<usize>> {
        let from_profile = match self.profile.as_deref() {
            Some(COLIEE_PROFILE) => Some(COLIEE_CANDIDATES_PER_QUERY),
            Some(_) | None => None,
        };
        match (from_profile, self.candidates_per_query) {
            (Some(a), Some(b)) if a != b => Err(Error::Validation(format!(
                "header profile {COLIEE_PROFILE} implies {a} candidates but declares {b}"
            ))),
            (a, b) => Ok(b.or(a)),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RetrievalCorpus {
    pub header: Option<CorpusHeader>,
    pub topics: Vec<RetrievalTopic>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EntailmentCorpus {
    pub header: Option<CorpusHeader>,
    pub topics: Vec<EntailmentTopic>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CandidateRecord {
    cid: String,
    paragraphs: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RetrievalRecord {
    qid: String,
    query_paragraphs: Vec<String>,
    candidates: Vec<CandidateRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    relevant: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntailmentRecord {
    qid: String,
    fragment: String,
    paragraphs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    entailing: Option<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RetrievalLabelRecord {
    qid: String,
    relevant: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntailmentLabelRecord {
    qid: String,
    entailing: Vec<usize>,
}

fn is_header_line(line: &str) -> bool {
    serde_json::from_str::<serde_json::Value>(line)
        .map(|v| v.get("format").is_some())
        .unwrap_or(false)
}

fn split_header(
    path: &Path,
    lines: Vec<(usize, String)>,
    expected_format: &str,
) -> Result<(Option<CorpusHeader>, Vec<(usize, String)>)> {
    let mut iter = lines.into_iter().peekable();
    let header = match iter.peek() {
        Some((n, l)) if is_header_line(l) => {
            let h: CorpusHeader = jsonl::parse_line(path, *n, l)?;
            if h.format != expected_format {
                return Err(Error::parse(
                    path,
                    *n,
                    format!("header format {:?}, expected {:?}", h.format, expected_format),
                ));
            }
            iter.next();
            Some(h)
        }
        _ => None,
    };
    Ok((header, iter.collect()))
}

/// Loads a retrieval corpus, validating every topic.
pub fn load_retrieval_corpus(path: &Path) -> Result<RetrievalCorpus> {
    let (header, body) = split_header(path, jsonl::read_lines(path)?, RETRIEVAL_FORMAT)?;
    let declared = header
        .as_ref()
        .map(CorpusHeader::declared_candidates)
        .transpose()?
        .flatten();
    let mut seen = HashSet::new();
    let mut topics = Vec::with_capacity(body.len());
    for (lineno, line) in body {
        let rec: RetrievalRecord = jsonl::parse_line(path, lineno, &line)?;
        let topic = RetrievalTopic {
            query: CaseDocument {
                id: rec.qid,
                paragraphs: rec.query_paragraphs,
            },
            candidates: rec
                .candidates
                .into_iter()
                .map(|c| CaseDocument {
                    id: c.cid,
                    paragraphs: c.paragraphs,
                })
                .collect(),
            relevant_ids: rec.relevant.map(|r| r.into_iter().collect()),
        };
        let located = |e: Error| Error::parse(path, lineno, e);
        topic.validate().map_err(located)?;
        if let Some(n) = declared {
            if topic.candidates.len() != n {
                return Err(located(Error::Validation(format!(
                    "topic {} has {} candidates, header declares {}",
                    topic.qid(),
                    topic.candidates.len(),
                    n
                ))));
            }
        }
        if !seen.insert(topic.qid().to_string()) {
            return Err(located(Error::Validation(format!(
                "duplicate topic id {}",
                topic.qid()
            ))));
        }
        topics.push(topic);
    }
    Ok(RetrievalCorpus { header, topics })
}

pub fn load_entailment_corpus(path: &Path) -> Result<EntailmentCorpus> {
    let (header, body) = split_header(path, jsonl::read_lines(path)?, ENTAILMENT_FORMAT)?;
    let mut seen = HashSet::new();
    let mut topics = Vec::with_capacity(body.len());
    for (lineno, line) in body {
        let rec: EntailmentRecord = jsonl::parse_line(path, lineno, &line)?;
        let topic = EntailmentTopic {
            id: rec.qid,
            fragment: rec.fragment,
            paragraphs: rec.paragraphs,
            entailing_idx: rec.entailing.map(|e| e.into_iter().collect()),
        };
        topic.validate().map_err(|e| Error::parse(path, lineno, e))?;
        if !seen.insert(topic.id.clone()) {
            return Err(Error::parse(
                path,
                lineno,
                Error::Validation(format!("duplicate topic id {}", topic.id)),
            ));
        }
        topics.push(topic);
    }
    Ok(EntailmentCorpus { header, topics })
}

/// Canonical text form: header first, then one compact record per topic.
pub fn retrieval_corpus_to_string(corpus: &RetrievalCorpus) -> Result<String> {
    let mut out = String::new();
    if let Some(h) = &corpus.header {
        out.push_str(&serde_json::to_string(h)?);
        out.push('\n');
    }
    let records = corpus.topics.iter().map(|t| RetrievalRecord {
        qid: t.query.id.clone(),
        query_paragraphs: t.query.paragraphs.clone(),
        candidates: t
            .candidates
            .iter()
            .map(|c| CandidateRecord {
                cid: c.id.clone(),
                paragraphs: c.paragraphs.clone(),
            })
            .collect(),
        relevant: t.relevant_ids.as_ref().map(|r| r.iter().cloned().collect()),
    });
    out.push_str(&jsonl::to_jsonl_string(records)?);
    Ok(out)
}

pub fn entailment_corpus_to_string(corpus: &EntailmentCorpus) -> Result<String> {
    let mut out = String::new();
    if let Some(h) = &corpus.header {
        out.push_str(&serde_json::to_string(h)?);
        out.push('\n');
    }
    let records = corpus.topics.iter().map(|t| EntailmentRecord {
        qid: t.id.clone(),
        fragment: t.fragment.clone(),
        paragraphs: t.paragraphs.clone(),
        entailing: t.entailing_idx.as_ref().map(|e| e.iter().copied().collect()),
    });
    out.push_str(&jsonl::to_jsonl_string(records)?);
    Ok(out)
}

pub type RetrievalLabels = BTreeMap<String, BTreeSet<String>>;
pub type EntailmentLabels = BTreeMap<String, BTreeSet<usize>>;

pub fn load_retrieval_labels(path: &Path) -> Result<RetrievalLabels> {
    let mut out = BTreeMap::new();
    for (lineno, rec) in jsonl::read_jsonl::<RetrievalLabelRecord>(path)? {
        if out
            .insert(rec.qid.clone(), rec.relevant.into_iter().collect())
            .is_some()
        {
            return Err(Error::parse(path, lineno, format!("duplicate qid {}", rec.qid)));
        }
    }
    Ok(out)
}

pub fn load_entailment_labels(path: &Path) -> Result<EntailmentLabels> {
    let mut out = BTreeMap::new();
    for (lineno, rec) in jsonl::read_jsonl::<EntailmentLabelRecord>(path)? {
        if out
            .insert(rec.qid.clone(), rec.entailing.into_iter().collect())
            .is_some()
        {
            return Err(Error::parse(path, lineno, format!("duplicate qid {}", rec.qid)));
        }
    }
    Ok(out)
}

pub fn retrieval_labels_to_string(labels: &RetrievalLabels) -> Result<String> {
    jsonl::to_jsonl_string(labels.iter().map(|(q, r)| RetrievalLabelRecord {
        qid: q.clone(),
        relevant: r.iter().cloned().collect(),
    }))
}

pub fn entailment_labels_to_string(labels: &EntailmentLabels) -> Result<String> {
    jsonl::to_jsonl_string(labels.iter().map(|(q, r)| EntailmentLabelRecord {
        qid: q.clone(),
        entailing: r.iter().copied().collect(),
    }))
}

/// Attaches labels to topics. Labels for unknown topics are an error; topics
/// without a labels entry stay unlabeled.
pub fn apply_retrieval_labels(topics: &mut [RetrievalTopic], labels: &RetrievalLabels) -> Result<()> {
    let known: HashSet<&str> = topics.iter().map(|t| t.qid()).collect();
    if let Some(q) = labels.keys().find(|q| !known.contains(q.as_str())) {
        return Err(Error::Validation(format!("labels reference unknown topic {q}")));
    }
    for t in topics.iter_mut() {
        if let Some(rel) = labels.get(t.qid()) {
            t.relevant_ids = Some(rel.clone());
            t.validate()?;
        }
    }
    Ok(())
}

pub fn apply_entailment_labels(topics: &mut [EntailmentTopic], labels: &EntailmentLabels) -> Result<()> {
    let known: HashSet<&str> = topics.iter().map(|t| t.id.as_str()).collect();
    if let Some(q) = labels.keys().find(|q| !known.contains(q.as_str())) {
        return Err(Error::Validation(format!("labels reference unknown topic {q}")));
    }
    for t in topics.iter_mut() {
        if let Some(idx) = labels.get(&t.id) {
            t.entailing_idx = Some(idx.clone());
            t.validate()?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub seed: u64,
    pub ratio: f64,
    pub train_topic_ids: BTreeSet<String>,
    pub validation_topic_ids: BTreeSet<String>,
}

impl DatasetSplit {
    pub fn is_train(&self, id: &str) -> bool {
        self.train_topic_ids.contains(id)
    }

    pub fn is_validation(&self, id: &str) -> bool {
        self.validation_topic_ids.contains(id)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&jsonl::read_to_string(path)?)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

/// Uniform index in `0..bound` from one 32-bit draw (multiply-shift).
pub fn bounded_index(rng: &mut Pcg32, bound: u32) -> u32 {
    ((rng.next_u32() as u64 * bound as u64) >> 32) as u32
}

/// Fisher–Yates shuffle driven by [`bounded_index`]: for `i` from `n-1` down
/// to 1, swap position `i` with `bounded_index(rng, i + 1)`.
pub fn shuffle<T>(items: &mut [T], rng: &mut Pcg32) {
    for i in (1..items.len()).rev() {
        let j = bounded_index(rng, (i + 1) as u32) as usize;
        items.swap(i, j);
    }
}

/// Deterministic topic-level split.
///
/// Ids are sorted lexicographically, shuffled with [`shuffle`] using
/// `Pcg32::new(seed, SPLIT_STREAM)`, and the first `round(ratio * n)` become
/// the validation set. Candidates always follow their topic.
pub fn split_dataset(topic_ids: &[String], ratio: f64, seed: u64) -> Result<DatasetSplit> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidInput(format!("split ratio {ratio} not in (0, 1)")));
    }
    if topic_ids.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "cannot split {} topic(s)",
            topic_ids.len()
        )));
    }
    let mut ids: Vec<String> = topic_ids.to_vec();
    ids.sort();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::InvalidInput(format!("duplicate topic id {}", w[0])));
    }
    let mut rng = Pcg32::new(seed, SPLIT_STREAM);
    shuffle(&mut ids, &mut rng);
    let n_val = (ratio * ids.len() as f64).round() as usize;
    let train = ids.split_off(n_val);
    Ok(DatasetSplit {
        seed,
        ratio,
        train_topic_ids: train.into_iter().collect(),
        validation_topic_ids: ids.into_iter().collect(),
    })
}
