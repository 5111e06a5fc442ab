//! Task 2 pair construction, truncation and standalone decisions.
//!
//! Budgets count whitespace-separated pieces of the raw text. The encoder
//! window is 512 tokens with 3 reserved for special tokens, leaving 509 for
//! the (fragment, paragraph) pair.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::EntailmentTopic;
use crate::error::{Error, Result};
use crate::jsonl;
use crate::pli::{check_encoding, EncoderProvider};

pub const BUDGET_TOTAL: usize = 512;
pub const BUDGET_SPECIALS: usize = 3;
pub const CONTENT_BUDGET: usize = BUDGET_TOTAL - BUDGET_SPECIALS;
/// Fragment cap in asymmetric mode.
pub const FRAGMENT_CAP: usize = 128;
pub const ENTAIL_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TruncationMode {
    Symmetric,
    Asymmetric,
}

impl std::str::FromStr for TruncationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symmetric" => Ok(TruncationMode::Symmetric),
            "asymmetric" => Ok(TruncationMode::Asymmetric),
            other => Err(Error::InvalidInput(format!("unknown truncation mode {other:?}"))),
        }
    }
}

/// Keeps both texts whole when they fit. Otherwise the fragment gets
/// ⌊509/2⌋ = 254 tokens and the paragraph the other 255; a side shorter
/// than its share passes its slack to the other. Heads are kept.
pub fn truncate_symmetric<'a, T>(frag: &'a [T], para: &'a [T]) -> (&'a [T], &'a [T]) {
    if frag.len() + para.len() <= CONTENT_BUDGET {
        return (frag, para);
    }
    let frag_share = CONTENT_BUDGET / 2;
    let para_share = CONTENT_BUDGET - frag_share;
    let f = frag.len().min(frag_share + para_share.saturating_sub(para.len()));
    let p = para.len().min(CONTENT_BUDGET - f);
    (&frag[..f], &para[..p])
}

/// Caps the fragment at 128 tokens, then the paragraph at whatever of the
/// 509 remains.
pub fn truncate_asymmetric<'a, T>(frag: &'a [T], para: &'a [T]) -> (&'a [T], &'a [T]) {
    let f = frag.len().min(FRAGMENT_CAP);
    let p = para.len().min(CONTENT_BUDGET - f);
    (&frag[..f], &para[..p])
}

pub fn truncate<'a, T>(mode: TruncationMode, frag: &'a [T], para: &'a [T]) -> (&'a [T], &'a [T]) {
    match mode {
        TruncationMode::Symmetric => truncate_symmetric(frag, para),
        TruncationMode::Asymmetric => truncate_asymmetric(frag, para),
    }
}

/// One (fragment, paragraph) pair after truncation; `para_idx` is 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairRequest {
    pub qid: String,
    pub para_idx: usize,
    pub text_a: String,
    pub text_b: String,
}

impl PairRequest {
    pub fn token_counts(&self) -> (usize, usize) {
        (self.text_a.split_whitespace().count(), self.text_b.split_whitespace().count())
    }
}

pub fn build_entail_pairs(topic: &EntailmentTopic, mode: TruncationMode) -> Vec<PairRequest> {
    let frag: Vec<&str> = topic.fragment.split_whitespace().collect();
    topic
        .paragraphs
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let para: Vec<&str> = p.split_whitespace().collect();
            let (a, b) = truncate(mode, &frag, &para);
            PairRequest {
                qid: topic.id.clone(),
                para_idx: k + 1,
                text_a: a.join(" "),
                text_b: b.join(" "),
            }
        })
        .collect()
}

/// Score-file record; probs[1] is the entailment probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntailScore {
    pub qid: String,
    pub para_idx: usize,
    pub probs: [f64; 2],
}

pub fn classify_pairs(pairs: &[PairRequest], enc: &dyn EncoderProvider) -> Result<Vec<EntailScore>> {
    pairs
        .par_iter()
        .map(|p| {
            let fail = |msg: String| Error::Encoder {
                context: format!("{} paragraph {}", p.qid, p.para_idx),
                msg,
            };
            let (v, probs) = enc.encode_pair(&p.text_a, &p.text_b).map_err(|e| fail(e.to_string()))?;
            check_encoding(enc.dim(), &v, &probs).map_err(fail)?;
            Ok(EntailScore { qid: p.qid.clone(), para_idx: p.para_idx, probs })
        })
        .collect()
}

/// Scores grouped per query, ordered by paragraph index.
pub type ScoreTable = BTreeMap<String, Vec<[f64; 2]>>;

/// Reads a score file; every query must cover paragraphs 1..=n exactly once.
pub fn load_entail_scores(path: &Path) -> Result<ScoreTable> {
    let mut grouped: BTreeMap<String, BTreeMap<usize, [f64; 2]>> = BTreeMap::new();
    for (n, s) in jsonl::read_jsonl::<EntailScore>(path)? {
        check_encoding(0, &[], &s.probs).map_err(|e| Error::parse(path, n, e))?;
        if s.para_idx == 0 {
            return Err(Error::parse(path, n, "para_idx is 1-based"));
        }
        if grouped.entry(s.qid.clone()).or_default().insert(s.para_idx, s.probs).is_some() {
            return Err(Error::parse(path, n, format!("duplicate ({}, {})", s.qid, s.para_idx)));
        }
    }
    grouped
        .into_iter()
        .map(|(q, rows)| {
            if rows.keys().copied().ne(1..=rows.len()) {
                return Err(Error::Validation(format!("{}: query {q} has gaps in para_idx", path.display())));
            }
            Ok((q, rows.into_values().collect()))
        })
        .collect()
}

pub fn scores_to_string(scores: &[EntailScore]) -> Result<String> {
    jsonl::to_jsonl_string(scores)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntailDecision {
    pub qid: String,
    pub selected_idx: BTreeSet<usize>,
    pub scores: Vec<f64>,
}

/// Paragraphs with probs[1] ≥ 0.5, or the single best one (smallest index on
/// ties) when none qualifies. Indices are 1-based.
pub fn decide_standalone(qid: &str, probs: &[[f64; 2]]) -> Result<EntailDecision> {
    if probs.is_empty() {
        return Err(Error::InvalidInput(format!("query {qid} has no paragraph scores")));
    }
    let scores: Vec<f64> = probs.iter().map(|p| p[1]).collect();
    let mut selected: BTreeSet<usize> = scores
        .iter()
        .enumerate()
        .filter(|(_, s)| **s >= ENTAIL_THRESHOLD)
        .map(|(i, _)| i + 1)
        .collect();
    if selected.is_empty() {
        let mut best = 0;
        for (i, s) in scores.iter().enumerate() {
            if *s > scores[best] {
                best = i;
            }
        }
        selected.insert(best + 1);
    }
    Ok(EntailDecision { qid: qid.to_string(), selected_idx: selected, scores })
}
