//! Corpus-level stages shared by the command-line driver and the tests:
//! feature dumps, cascades, and per-task feature assembly.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use rayon::prelude::*;

use crate::cascade::{cascade_topk, CascadeResult};
use crate::corpus::{EntailmentCorpus, EntailmentLabels, RetrievalCorpus, RetrievalLabels};
use crate::duet::TopicFeatures;
use crate::entail::ScoreTable;
use crate::error::{Error, Result};
use crate::eval::RunResult;
use crate::jsonl;
use crate::lexical::{
    bigram_lmir, bm25, build_stats, duet_features_from_views, sdr_similarity_from_views, DocViews, DuetStats,
    FeatureDumpRecord, LexicalParams, PhraseIndex, SdrSpace, TermView,
};
use crate::ltr::{
    assemble_task1, assemble_task2, predict, select_task1, select_task2, FeatureRecord, RankModel, TASK1_DIM,
    TASK2_DIM,
};
use crate::pli::{EmbeddingMaps, PliExample};
use crate::textproc::{Gazetteer, Stopwords, TokenizedDoc};

/// Every text of a retrieval corpus, for gazetteer building.
pub fn retrieval_texts(corpus: &RetrievalCorpus) -> impl Iterator<Item = &str> {
    corpus.topics.iter().flat_map(|t| {
        t.query
            .paragraphs
            .iter()
            .chain(t.candidates.iter().flat_map(|c| c.paragraphs.iter()))
            .map(String::as_str)
    })
}

#[derive(Debug, Clone)]
pub struct PreparedTopic {
    pub query: TokenizedDoc,
    pub candidates: Vec<TokenizedDoc>,
}

/// Tokenized topics plus statistics over every query and candidate.
#[derive(Debug, Clone)]
pub struct PreparedRetrieval {
    pub topics: Vec<PreparedTopic>,
    pub stats: DuetStats,
}

pub fn prepare_retrieval(corpus: &RetrievalCorpus, stopwords: &Stopwords, gazetteer: &Gazetteer) -> Result<PreparedRetrieval> {
    let topics: Vec<PreparedTopic> = corpus
        .topics
        .par_iter()
        .map(|t| PreparedTopic {
            query: TokenizedDoc::new(&t.query, stopwords, gazetteer),
            candidates: t.candidates.iter().map(|c| TokenizedDoc::new(c, stopwords, gazetteer)).collect(),
        })
        .collect();
    let all: Vec<TokenizedDoc> = topics
        .iter()
        .flat_map(|t| std::iter::once(&t.query).chain(&t.candidates))
        .cloned()
        .collect();
    let stats = DuetStats::build(&all)?;
    Ok(PreparedRetrieval { topics, stats })
}

/// Duet features, both SDR similarities and bigram LMIR for every
/// (query, candidate) pair, in corpus order.
pub fn duet_dump(prep: &PreparedRetrieval, params: &LexicalParams) -> Result<Vec<FeatureDumpRecord>> {
    params.validate()?;
    let per_topic: Vec<Vec<FeatureDumpRecord>> = prep
        .topics
        .par_iter()
        .map(|t| {
            let mut vocab = prep.stats.phrase_vocab.clone();
            vocab.extend(t.query.entity_surfaces());
            let phrases = PhraseIndex::new(&vocab);
            let qv = DocViews::with_phrases(&t.query, &phrases);
            t.candidates
                .iter()
                .map(|c| {
                    let dv = DocViews::with_phrases(c, &phrases);
                    Ok(FeatureDumpRecord {
                        qid: t.query.doc_id.clone(),
                        cid: c.doc_id.clone(),
                        duet: duet_features_from_views(&qv, &dv, &prep.stats, params)?,
                        sdr_w: sdr_similarity_from_views(&qv, &dv, &prep.stats, SdrSpace::Word),
                        sdr_e: sdr_similarity_from_views(&qv, &dv, &prep.stats, SdrSpace::Entity),
                        lmir: bigram_lmir(&t.query, c, &prep.stats.words, params)?,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(per_topic.into_iter().flatten().collect())
}

pub fn cascade_all(prep: &PreparedRetrieval, params: &LexicalParams, k: usize) -> Result<Vec<CascadeResult>> {
    params.validate()?;
    prep.topics
        .iter()
        .map(|t| cascade_topk(&t.query, &t.candidates, &prep.stats.words, params, k))
        .collect()
}

pub fn load_feature_dump(path: &Path) -> Result<Vec<FeatureDumpRecord>> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for (n, r) in jsonl::read_jsonl::<FeatureDumpRecord>(path)? {
        if !seen.insert((r.qid.clone(), r.cid.clone())) {
            return Err(Error::parse(path, n, format!("duplicate pair ({}, {})", r.qid, r.cid)));
        }
        out.push(r);
    }
    Ok(out)
}

/// Groups dump records by query (first-appearance order), keeping queries
/// accepted by `keep` and attaching labels when given.
pub fn topic_features(
    dump: &[FeatureDumpRecord],
    labels: Option<&RetrievalLabels>,
    keep: impl Fn(&str) -> bool,
) -> Vec<TopicFeatures> {
    let mut out: Vec<TopicFeatures> = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    for r in dump.iter().filter(|r| keep(&r.qid)) {
        let label = labels.and_then(|l| l.get(&r.qid)).map(|rel| rel.contains(&r.cid));
        let k = *index.entry(&r.qid).or_insert_with(|| {
            out.push(TopicFeatures { qid: r.qid.clone(), candidates: Vec::new() });
            out.len() - 1
        });
        out[k].candidates.push((r.cid.clone(), r.duet, label));
    }
    out
}

/// Max-pooled training examples for the labeled (qid, cid) maps accepted by `keep`.
pub fn pli_examples(maps: &EmbeddingMaps, labels: &RetrievalLabels, keep: impl Fn(&str) -> bool) -> Vec<PliExample> {
    maps.iter()
        .filter(|((q, _), _)| keep(q))
        .filter_map(|((q, c), m)| labels.get(q).map(|rel| PliExample::from_map(m, rel.contains(c))))
        .collect()
}

/// 17-dim rows for every cascade survivor.
pub fn task1_records(
    dump: &[FeatureDumpRecord],
    cascade: &[CascadeResult],
    pli_scores: &BTreeMap<(String, String), [f64; 2]>,
    maps: &EmbeddingMaps,
    labels: Option<&RetrievalLabels>,
) -> Result<Vec<FeatureRecord>> {
    let by_pair: HashMap<(&str, &str), &FeatureDumpRecord> =
        dump.iter().map(|r| ((r.qid.as_str(), r.cid.as_str()), r)).collect();
    let mut out = Vec::new();
    for res in cascade {
        for (cid, _) in &res.kept {
            let key = (res.qid.clone(), cid.clone());
            let missing = |what: &str| Error::Validation(format!("no {what} for ({}, {cid})", res.qid));
            let d = by_pair.get(&(res.qid.as_str(), cid.as_str())).ok_or_else(|| missing("duet features"))?;
            let pli = pli_scores.get(&key).ok_or_else(|| missing("interaction score"))?;
            let first = maps.get(&key).ok_or_else(|| missing("interaction map"))?.first_pair_probs();
            let f = assemble_task1(&d.duet, d.sdr_w, d.sdr_e, *pli, first)?;
            out.push(FeatureRecord {
                qid: res.qid.clone(),
                cid: Some(cid.clone()),
                para_idx: None,
                features: f.0.to_vec(),
                label: labels.and_then(|l| l.get(&res.qid)).map(|rel| u8::from(rel.contains(cid))),
            });
        }
    }
    debug_assert!(out.iter().all(|r| r.features.len() == TASK1_DIM));
    Ok(out)
}

/// 7-dim rows for every paragraph. BM25 uses word statistics over all
/// paragraphs of the corpus; length counts whitespace pieces.
pub fn task2_records(
    corpus: &EntailmentCorpus,
    sym: &ScoreTable,
    asym: &ScoreTable,
    stopwords: &Stopwords,
    params: &LexicalParams,
    labels: Option<&EntailmentLabels>,
) -> Result<Vec<FeatureRecord>> {
    params.validate()?;
    let none = Gazetteer::default();
    let paragraphs: Vec<Vec<TokenizedDoc>> = corpus
        .topics
        .iter()
        .map(|t| {
            t.paragraphs
                .iter()
                .enumerate()
                .map(|(k, p)| TokenizedDoc::from_paragraphs(&format!("{}#{}", t.id, k + 1), &[p], stopwords, &none))
                .collect()
        })
        .collect();
    let flat: Vec<TokenizedDoc> = paragraphs.iter().flatten().cloned().collect();
    let stats = build_stats(&flat)?;
    let mut out = Vec::new();
    for (t, docs) in corpus.topics.iter().zip(&paragraphs) {
        let (s, a) = (topic_scores(sym, &t.id, t.paragraphs.len(), "symmetric")?, topic_scores(asym, &t.id, t.paragraphs.len(), "asymmetric")?);
        let q = TermView::words(&TokenizedDoc::from_paragraphs(&t.id, &[&t.fragment], stopwords, &none));
        for (k, doc) in docs.iter().enumerate() {
            let score = bm25(&q, &TermView::words(doc), &stats, params);
            let len = t.paragraphs[k].split_whitespace().count();
            let f = assemble_task2(s[k], a[k], score, k + 1, len)?;
            out.push(FeatureRecord {
                qid: t.id.clone(),
                cid: None,
                para_idx: Some(k + 1),
                features: f.0.to_vec(),
                label: labels.and_then(|l| l.get(&t.id)).map(|e| u8::from(e.contains(&(k + 1)))),
            });
        }
    }
    debug_assert!(out.iter().all(|r| r.features.len() == TASK2_DIM));
    Ok(out)
}

fn topic_scores<'a>(table: &'a ScoreTable, qid: &str, n: usize, which: &str) -> Result<&'a [[f64; 2]]> {
    table
        .get(qid)
        .filter(|s| s.len() == n)
        .map(Vec::as_slice)
        .ok_or_else(|| Error::Validation(format!("{which} scores for {qid} missing or incomplete")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Retrieval,
    Entailment,
}

/// Scores every record and applies the task's selection rule per query.
pub fn apply_rank_model(model: &RankModel, records: &[FeatureRecord], task: Task) -> Result<RunResult> {
    let mut grouped: BTreeMap<&str, Vec<(String, f64)>> = BTreeMap::new();
    for r in records {
        grouped.entry(&r.qid).or_default().push((r.item_id(), predict(model, &r.features)?));
    }
    let mut run = RunResult::default();
    for (qid, scores) in grouped {
        let selected = match task {
            Task::Retrieval => select_task1(&scores),
            Task::Entailment => {
                let raw: Vec<f64> = scores.iter().map(|s| s.1).collect();
                select_task2(&raw).into_iter().map(|i| scores[i - 1].0.clone()).collect()
            }
        };
        let mut ranking = scores;
        ranking.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        run.select(qid, selected)?;
        run.rankings.insert(qid.to_string(), ranking);
    }
    Ok(run)
}
