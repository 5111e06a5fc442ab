//! Micro-averaged precision, recall and F1 over run selections.
//!
//! Counts are summed over all queries before dividing, so queries with many
//! labels weigh more than in a per-query (macro) average.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{EntailmentLabels, RetrievalLabels};
use crate::error::{Error, Result};
use crate::jsonl;

/// Ground-truth ids per query (candidate ids, or 1-based paragraph indices as strings).
pub type Qrels = BTreeMap<String, BTreeSet<String>>;

pub fn qrels_from_retrieval(labels: &RetrievalLabels) -> Qrels {
    labels.clone()
}

pub fn qrels_from_entailment(labels: &EntailmentLabels) -> Qrels {
    labels
        .iter()
        .map(|(q, idx)| (q.clone(), idx.iter().map(usize::to_string).collect()))
        .collect()
}

#[derive(Deserialize)]
struct QrelsLine {
    qid: String,
    #[serde(default)]
    relevant: Option<Vec<String>>,
    #[serde(default)]
    entailing: Option<Vec<usize>>,
}

/// Reads either labels format (`relevant` cids or `entailing` indices).
pub fn load_qrels(path: &Path) -> Result<Qrels> {
    let mut out = Qrels::new();
    for (lineno, rec) in jsonl::read_jsonl::<QrelsLine>(path)? {
        let ids: BTreeSet<String> = match (rec.relevant, rec.entailing) {
            (Some(r), None) => r.into_iter().collect(),
            (None, Some(e)) => e.into_iter().map(|i| i.to_string()).collect(),
            _ => {
                return Err(Error::parse(
                    path,
                    lineno,
                    "expected exactly one of \"relevant\" or \"entailing\"",
                ))
            }
        };
        if out.insert(rec.qid.clone(), ids).is_some() {
            return Err(Error::parse(path, lineno, format!("duplicate qid {}", rec.qid)));
        }
    }
    Ok(out)
}

/// Per-query selections plus optional scored rankings.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunResult {
    /// Selected ids per query, in rank order.
    pub selections: BTreeMap<String, Vec<String>>,
    /// Full ranking per query: (id, score), best first.
    pub rankings: BTreeMap<String, Vec<(String, f64)>>,
}

impl RunResult {
    pub fn select(&mut self, qid: &str, ids: Vec<String>) -> Result<()> {
        let mut seen = HashSet::new();
        if let Some(d) = ids.iter().find(|i| !seen.insert(i.as_str())) {
            return Err(Error::Validation(format!("query {qid}: {d} selected twice")));
        }
        self.selections.insert(qid.to_string(), ids);
        Ok(())
    }

    /// Keeps only the listed queries.
    pub fn restrict(&self, qids: &BTreeSet<String>) -> RunResult {
        RunResult {
            selections: self
                .selections
                .iter()
                .filter(|(q, _)| qids.contains(*q))
                .map(|(q, v)| (q.clone(), v.clone()))
                .collect(),
            rankings: self
                .rankings
                .iter()
                .filter(|(q, _)| qids.contains(*q))
                .map(|(q, v)| (q.clone(), v.clone()))
                .collect(),
        }
    }

    /// `qid\tid` lines.
    pub fn selection_file_string(&self) -> String {
        let mut out = String::new();
        for (q, ids) in &self.selections {
            for id in ids {
                let _ = writeln!(out, "{q}\t{id}");
            }
        }
        out
    }

    /// `qid\tid\trank\tscore` lines, rank 1-based.
    pub fn ranking_file_string(&self) -> String {
        let mut out = String::new();
        for (q, rows) in &self.rankings {
            for (rank, (id, score)) in rows.iter().enumerate() {
                let _ = writeln!(out, "{q}\t{id}\t{}\t{score}", rank + 1);
            }
        }
        out
    }

    pub fn load_selection(path: &Path) -> Result<RunResult> {
        let mut run = RunResult::default();
        let mut seen: HashSet<(String, String)> = HashSet::new();
        for (lineno, line) in jsonl::read_lines(path)? {
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 2 || cols.iter().any(|c| c.is_empty()) {
                return Err(Error::parse(path, lineno, "expected \"qid<TAB>id\""));
            }
            if !seen.insert((cols[0].to_string(), cols[1].to_string())) {
                return Err(Error::parse(path, lineno, "duplicate selection"));
            }
            run.selections
                .entry(cols[0].to_string())
                .or_default()
                .push(cols[1].to_string());
        }
        Ok(run)
    }

    pub fn load_ranking(path: &Path) -> Result<RunResult> {
        let mut run = RunResult::default();
        for (lineno, line) in jsonl::read_lines(path)? {
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 4 {
                return Err(Error::parse(path, lineno, "expected \"qid<TAB>id<TAB>rank<TAB>score\""));
            }
            let rank: usize = cols[2].parse().map_err(|e| Error::parse(path, lineno, e))?;
            let score: f64 = cols[3].parse().map_err(|e| Error::parse(path, lineno, e))?;
            let rows = run.rankings.entry(cols[0].to_string()).or_default();
            if rank != rows.len() + 1 {
                return Err(Error::parse(path, lineno, format!("rank {rank} out of sequence")));
            }
            rows.push((cols[1].to_string(), score));
        }
        Ok(run)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub retrieved: usize,
    pub labeled: usize,
}

impl MetricReport {
    pub fn from_counts(tp: usize, retrieved: usize, labeled: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(tp, retrieved);
        let recall = ratio(tp, labeled);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        MetricReport {
            precision,
            recall,
            f1,
            tp,
            retrieved,
            labeled,
        }
    }
}

/// Micro P/R/F1. Every labeled query counts toward `labeled`, including
/// queries the run left out; 0/0 is taken as 0.
pub fn micro_metrics(run: &RunResult, qrels: &Qrels) -> Result<MetricReport> {
    if let Some(q) = run.selections.keys().find(|q| !qrels.contains_key(*q)) {
        return Err(Error::Validation(format!("run query {q} missing from qrels")));
    }
    let mut tp = 0;
    let mut retrieved = 0;
    for (q, ids) in &run.selections {
        let rel = &qrels[q];
        retrieved += ids.len();
        tp += ids.iter().filter(|i| rel.contains(*i)).count();
    }
    let labeled = qrels.values().map(BTreeSet::len).sum();
    Ok(MetricReport::from_counts(tp, retrieved, labeled))
}
