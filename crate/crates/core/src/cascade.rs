//! First-stage recall filter: bigram LMIR over every candidate, keep the top k.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::jsonl;
use crate::lexical::{bigram_lmir, CollectionStats, LexicalParams};
use crate::textproc::TokenizedDoc;

pub const DEFAULT_K: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeResult {
    pub qid: String,
    /// (cid, LMIR score), non-increasing.
    pub kept: Vec<(String, f64)>,
    pub k: usize,
}

impl CascadeResult {
    pub fn contains(&self, cid: &str) -> bool {
        self.kept.iter().any(|(c, _)| c == cid)
    }
}

/// Ranks candidates by bigram LMIR (ties by cid ascending) and keeps the first `k`.
pub fn cascade_topk(
    query: &TokenizedDoc,
    candidates: &[TokenizedDoc],
    stats: &CollectionStats,
    params: &LexicalParams,
    k: usize,
) -> Result<CascadeResult> {
    if k == 0 {
        return Err(Error::InvalidInput("cascade k must be >= 1".into()));
    }
    let mut scored: Vec<(String, f64)> = candidates
        .par_iter()
        .map(|c| bigram_lmir(query, c, stats, params).map(|s| (c.doc_id.clone(), s)))
        .collect::<Result<_>>()?;
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored.truncate(k);
    Ok(CascadeResult {
        qid: query.doc_id.clone(),
        kept: scored,
        k,
    })
}

/// `qid\tcid\trank\tscore` lines, rank 1-based.
pub fn cascade_file_string(results: &[CascadeResult]) -> String {
    let mut out = String::new();
    for r in results {
        for (rank, (cid, score)) in r.kept.iter().enumerate() {
            let _ = writeln!(out, "{}\t{}\t{}\t{}", r.qid, cid, rank + 1, score);
        }
    }
    out
}

/// Reads a cascade dump back; `k` is set to the number of kept rows.
pub fn load_cascade(path: &Path) -> Result<Vec<CascadeResult>> {
    let mut by_q: BTreeMap<String, Vec<(String, f64)>> = BTreeMap::new();
    let mut order = Vec::new();
    for (lineno, line) in jsonl::read_lines(path)? {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            return Err(Error::parse(path, lineno, "expected \"qid<TAB>cid<TAB>rank<TAB>score\""));
        }
        let rank: usize = cols[2].parse().map_err(|e| Error::parse(path, lineno, e))?;
        let score: f64 = cols[3].parse().map_err(|e| Error::parse(path, lineno, e))?;
        let rows = by_q.entry(cols[0].to_string()).or_insert_with(|| {
            order.push(cols[0].to_string());
            Vec::new()
        });
        if rank != rows.len() + 1 {
            return Err(Error::parse(path, lineno, format!("rank {rank} out of sequence")));
        }
        rows.push((cols[1].to_string(), score));
    }
    Ok(order
        .into_iter()
        .map(|q| {
            let kept = by_q.remove(&q).unwrap_or_default();
            CascadeResult {
                k: kept.len(),
                qid: q,
                kept,
            }
        })
        .collect())
}
