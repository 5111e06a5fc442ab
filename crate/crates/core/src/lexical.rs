//! Collection statistics and the exact-matching scorers: BM25, TF-IDF, the
//! smoothed language-model family, the 11 word-entity duet features, SDR
//! cosine similarity and bigram LMIR.
//!
//! Three unit spaces are scored:
//!
//! * **words**: the stopword-filtered token stream, raw term frequencies;
//! * **entity phrases** (query entities against document words): a document is
//!   the set of known entity phrases contained in its word stream;
//! * **entity tokens** (query words against document entities): a document is
//!   the set of tokens occurring inside its extracted entities.
//!
//! Both entity spaces count presence only (tf capped at 1).

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textproc::TokenizedDoc;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LexicalParams {
    pub k1: f64,
    pub b: f64,
    /// Jelinek–Mercer weight on the document model.
    pub lambda: f64,
    /// Dirichlet prior mass.
    pub mu: f64,
    /// Document-model weight in bigram LMIR.
    pub lambda_bigram: f64,
    /// Probability floor inside every logarithm.
    pub epsilon: f64,
}

impl Default for LexicalParams {
    fn default() -> Self {
        LexicalParams {
            k1: 1.2,
            b: 0.75,
            lambda: 0.1,
            mu: 2000.0,
            lambda_bigram: 0.8,
            epsilon: 1e-10,
        }
    }
}

impl LexicalParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.k1 >= 0.0
            && (0.0..=1.0).contains(&self.b)
            && (0.0..=1.0).contains(&self.lambda)
            && self.mu > 0.0
            && self.lambda_bigram > 0.0
            && self.lambda_bigram < 1.0
            && self.epsilon >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("lexical parameters out of range: {self:?}")))
        }
    }
}

pub type Bigram = (String, String);

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CollectionStats {
    pub num_docs: usize,
    pub avg_doc_len: f64,
    pub df: HashMap<String, u64>,
    pub cf: HashMap<String, u64>,
    pub total_tokens: u64,
    pub bigram_cf: HashMap<Bigram, u64>,
    pub total_bigrams: u64,
}

impl CollectionStats {
    /// Statistics over arbitrary unit bags (no bigrams).
    pub fn from_views<'a>(views: impl IntoIterator<Item = &'a TermView>) -> Self {
        let mut s = CollectionStats::default();
        for v in views {
            s.num_docs += 1;
            s.total_tokens += v.length;
            for (u, &c) in &v.units {
                *s.df.entry(u.clone()).or_default() += 1;
                *s.cf.entry(u.clone()).or_default() += c;
            }
        }
        if s.num_docs > 0 {
            s.avg_doc_len = s.total_tokens as f64 / s.num_docs as f64;
        }
        s
    }

    pub fn df(&self, unit: &str) -> u64 {
        self.df.get(unit).copied().unwrap_or(0)
    }

    pub fn cf(&self, unit: &str) -> u64 {
        self.cf.get(unit).copied().unwrap_or(0)
    }

    /// Collection probability cf/total; 0 for an empty collection.
    pub fn collection_prob(&self, unit: &str) -> f64 {
        if self.total_tokens == 0 {
            0.0
        } else {
            self.cf(unit) as f64 / self.total_tokens as f64
        }
    }

    pub fn bigram_prob(&self, a: &str, b: &str) -> f64 {
        if self.total_bigrams == 0 {
            return 0.0;
        }
        let c = self
            .bigram_cf
            .get(&(a.to_string(), b.to_string()))
            .copied()
            .unwrap_or(0);
        c as f64 / self.total_bigrams as f64
    }
}

/// Word-space statistics including bigram counts over each flat token stream.
pub fn build_stats(docs: &[TokenizedDoc]) -> Result<CollectionStats> {
    if docs.is_empty() {
        return Err(Error::InvalidInput("cannot build statistics over an empty corpus".into()));
    }
    let views: Vec<TermView> = docs.iter().map(TermView::words).collect();
    let mut s = CollectionStats::from_views(&views);
    if s.total_tokens == 0 {
        return Err(Error::InvalidInput("corpus has zero tokens".into()));
    }
    for d in docs {
        for w in d.flat_tokens.windows(2) {
            *s.bigram_cf.entry((w[0].clone(), w[1].clone())).or_default() += 1;
            s.total_bigrams += 1;
        }
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnitKind {
    Word,
    EntityAsQuery,
    EntityAsDoc,
}

/// A document (or query) as a multiset of matchable units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermView {
    pub kind: UnitKind,
    pub units: BTreeMap<String, u64>,
    pub length: u64,
}

impl TermView {
    pub fn from_counts(kind: UnitKind, units: BTreeMap<String, u64>) -> Self {
        let length = units.values().sum();
        TermView { kind, units, length }
    }

    /// Presence-only view: every unit counted once.
    pub fn presence(kind: UnitKind, units: impl IntoIterator<Item = String>) -> Self {
        Self::from_counts(kind, units.into_iter().map(|u| (u, 1)).collect())
    }

    pub fn words(doc: &TokenizedDoc) -> Self {
        let mut units = BTreeMap::new();
        for t in &doc.flat_tokens {
            *units.entry(t.clone()).or_default() += 1;
        }
        Self::from_counts(UnitKind::Word, units)
    }

    /// The document's distinct entity surface forms.
    pub fn entity_surfaces(doc: &TokenizedDoc) -> Self {
        Self::presence(UnitKind::EntityAsQuery, doc.entity_surfaces())
    }

    /// Distinct tokens inside the document's entities.
    pub fn entity_tokens(doc: &TokenizedDoc) -> Self {
        Self::presence(UnitKind::EntityAsDoc, doc.entity_token_set())
    }

    pub fn tf(&self, unit: &str) -> u64 {
        self.units.get(unit).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }
}

/// Entity phrases indexed by first token for containment scans.
#[derive(Debug, Clone, Default)]
pub struct PhraseIndex {
    by_first: HashMap<String, Vec<Vec<String>>>,
}

impl PhraseIndex {
    pub fn new<'a>(surfaces: impl IntoIterator<Item = &'a String>) -> Self {
        let mut by_first: HashMap<String, Vec<Vec<String>>> = HashMap::new();
        for s in surfaces {
            let toks: Vec<String> = s.split(' ').map(str::to_string).collect();
            let bucket = by_first.entry(toks[0].clone()).or_default();
            if !bucket.contains(&toks) {
                bucket.push(toks);
            }
        }
        PhraseIndex { by_first }
    }

    /// Phrases occurring as contiguous subsequences of `tokens`.
    pub fn contained(&self, tokens: &[String]) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for (pos, t) in tokens.iter().enumerate() {
            if let Some(cands) = self.by_first.get(t) {
                for p in cands {
                    if tokens[pos..].starts_with(p) {
                        out.insert(p.join(" "));
                    }
                }
            }
        }
        out
    }
}

/// Statistics for the three duet unit spaces.
#[derive(Debug, Clone)]
pub struct DuetStats {
    pub words: CollectionStats,
    pub entity_phrases: CollectionStats,
    pub entity_tokens: CollectionStats,
    pub phrases: PhraseIndex,
    pub phrase_vocab: BTreeSet<String>,
}

impl DuetStats {
    pub fn build(docs: &[TokenizedDoc]) -> Result<Self> {
        let words = build_stats(docs)?;
        let phrase_vocab: BTreeSet<String> = docs.iter().flat_map(|d| d.entity_surfaces()).collect();
        let phrases = PhraseIndex::new(&phrase_vocab);
        let phrase_views: Vec<TermView> = docs
            .iter()
            .map(|d| TermView::presence(UnitKind::EntityAsQuery, phrases.contained(&d.flat_tokens)))
            .collect();
        let token_views: Vec<TermView> = docs.iter().map(TermView::entity_tokens).collect();
        Ok(DuetStats {
            words,
            entity_phrases: CollectionStats::from_views(&phrase_views),
            entity_tokens: CollectionStats::from_views(&token_views),
            phrases,
            phrase_vocab,
        })
    }
}

/// Per-document views used by the duet and SDR scorers.
#[derive(Debug, Clone)]
pub struct DocViews {
    pub words: TermView,
    /// Known entity phrases contained in the word stream.
    pub phrases: TermView,
    pub entity_tokens: TermView,
    /// The document's own entity surfaces.
    pub entity_surfaces: TermView,
}

impl DocViews {
    pub fn new(doc: &TokenizedDoc, stats: &DuetStats) -> Self {
        Self::with_phrases(doc, &stats.phrases)
    }

    pub fn with_phrases(doc: &TokenizedDoc, phrases: &PhraseIndex) -> Self {
        DocViews {
            words: TermView::words(doc),
            phrases: TermView::presence(UnitKind::EntityAsQuery, phrases.contained(&doc.flat_tokens)),
            entity_tokens: TermView::entity_tokens(doc),
            entity_surfaces: TermView::entity_surfaces(doc),
        }
    }
}

fn bm25_idf(n: usize, df: u64) -> f64 {
    let n = n as f64;
    let df = df as f64;
    (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
}

fn tfidf_idf(n: usize, df: u64) -> f64 {
    ((n as f64 + 1.0) / (df as f64 + 1.0)).ln()
}

/// Okapi BM25 summed over query units (with query multiplicity).
pub fn bm25(query: &TermView, doc: &TermView, stats: &CollectionStats, params: &LexicalParams) -> f64 {
    let mut score = 0.0;
    for (t, &qtf) in &query.units {
        let tf = doc.tf(t) as f64;
        if tf == 0.0 {
            continue;
        }
        let norm = if stats.avg_doc_len > 0.0 {
            1.0 - params.b + params.b * doc.length as f64 / stats.avg_doc_len
        } else {
            1.0
        };
        let idf = bm25_idf(stats.num_docs, stats.df(t));
        score += qtf as f64 * idf * tf * (params.k1 + 1.0) / (tf + params.k1 * norm);
    }
    score
}

pub fn tfidf(query: &TermView, doc: &TermView, stats: &CollectionStats) -> f64 {
    let mut score = 0.0;
    for (t, &qtf) in &query.units {
        let tf = doc.tf(t) as f64;
        if tf == 0.0 {
            continue;
        }
        score += qtf as f64 * tf * tfidf_idf(stats.num_docs, stats.df(t));
    }
    score
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LmMode {
    Mle,
    Jm,
    Dirichlet,
    TwoWay,
}

/// Smoothed p(t|d) before the ε floor.
pub fn term_probability(
    tf: u64,
    doc_len: u64,
    collection_prob: f64,
    mode: LmMode,
    params: &LexicalParams,
) -> f64 {
    let tf = tf as f64;
    let len = doc_len as f64;
    let dirichlet = || (tf + params.mu * collection_prob) / (len + params.mu);
    match mode {
        LmMode::Mle => tf / len,
        LmMode::Jm => params.lambda * tf / len + (1.0 - params.lambda) * collection_prob,
        LmMode::Dirichlet => dirichlet(),
        LmMode::TwoWay => params.lambda * dirichlet() + (1.0 - params.lambda) * collection_prob,
    }
}

/// Query log-likelihood Σ ln max(p(t|d), ε).
///
/// `mle` and `jm` divide by the document length and reject empty documents;
/// the Dirichlet-based modes stay defined at |d| = 0.
pub fn lm_score(
    query: &TermView,
    doc: &TermView,
    stats: &CollectionStats,
    mode: LmMode,
    params: &LexicalParams,
) -> Result<f64> {
    if doc.length == 0 && matches!(mode, LmMode::Mle | LmMode::Jm) {
        return Err(Error::InvalidInput(format!(
            "{mode:?} language model undefined for an empty document"
        )));
    }
    let mut score = 0.0;
    for (t, &qtf) in &query.units {
        let p = term_probability(doc.tf(t), doc.length, stats.collection_prob(t), mode, params);
        score += qtf as f64 * p.max(params.epsilon).ln();
    }
    Ok(score)
}

pub const DUET_DIM: usize = 11;
/// Name of the canonical duet feature order, written into model files.
pub const DUET_FEATURE_ORDER: &str = "duet-v1";

pub const DUET_FEATURE_NAMES: [&str; DUET_DIM] = [
    "qw_dw_bm25",
    "qw_dw_tfidf",
    "qw_dw_lm",
    "qw_dw_lm_jm",
    "qw_dw_lm_dirichlet",
    "qw_dw_lm_twoway",
    "qe_dw_bm25",
    "qe_dw_tfidf",
    "qe_dw_lm_dirichlet",
    "qw_de_tfidf",
    "qw_de_lm_dirichlet",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DuetFeatures(pub [f64; DUET_DIM]);

impl DuetFeatures {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// The 11 duet features from precomputed views.
pub fn duet_features_from_views(
    query: &DocViews,
    doc: &DocViews,
    stats: &DuetStats,
    params: &LexicalParams,
) -> Result<DuetFeatures> {
    if query.words.is_empty() {
        return Err(Error::InvalidInput("query has no tokens".into()));
    }
    let w = &stats.words;
    let qe = &query.entity_surfaces;
    let out = [
        bm25(&query.words, &doc.words, w, params),
        tfidf(&query.words, &doc.words, w),
        lm_score(&query.words, &doc.words, w, LmMode::Mle, params)?,
        lm_score(&query.words, &doc.words, w, LmMode::Jm, params)?,
        lm_score(&query.words, &doc.words, w, LmMode::Dirichlet, params)?,
        lm_score(&query.words, &doc.words, w, LmMode::TwoWay, params)?,
        bm25(qe, &doc.phrases, &stats.entity_phrases, params),
        tfidf(qe, &doc.phrases, &stats.entity_phrases),
        lm_score(qe, &doc.phrases, &stats.entity_phrases, LmMode::Dirichlet, params)?,
        tfidf(&query.words, &doc.entity_tokens, &stats.entity_tokens),
        lm_score(&query.words, &doc.entity_tokens, &stats.entity_tokens, LmMode::Dirichlet, params)?,
    ];
    if let Some(i) = out.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "duet feature {} is not finite",
            DUET_FEATURE_NAMES[i]
        )));
    }
    Ok(DuetFeatures(out))
}

/// The 11 duet features for one (query, document) pair.
///
/// Query entity phrases are matched against the document word stream even
/// when they are absent from the statistics vocabulary.
pub fn duet_features(
    query: &TokenizedDoc,
    doc: &TokenizedDoc,
    stats: &DuetStats,
    params: &LexicalParams,
) -> Result<DuetFeatures> {
    let mut vocab = stats.phrase_vocab.clone();
    vocab.extend(query.entity_surfaces());
    let phrases = PhraseIndex::new(&vocab);
    let qv = DocViews::with_phrases(query, &phrases);
    let dv = DocViews::with_phrases(doc, &phrases);
    duet_features_from_views(&qv, &dv, stats, params)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SdrSpace {
    Word,
    Entity,
}

fn tfidf_vector(view: &TermView, stats: &CollectionStats) -> BTreeMap<String, f64> {
    view.units
        .iter()
        .map(|(t, &tf)| (t.clone(), tf as f64 * tfidf_idf(stats.num_docs, stats.df(t))))
        .collect()
}

fn cosine(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> f64 {
    let dot: f64 = a.iter().filter_map(|(t, x)| b.get(t).map(|y| x * y)).sum();
    let na: f64 = a.values().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.values().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(0.0, 1.0)
}

/// Document-to-document tf-idf cosine (seed-driven ranking similarity).
pub fn sdr_similarity_from_views(query: &DocViews, doc: &DocViews, stats: &DuetStats, space: SdrSpace) -> f64 {
    let (a, b, s) = match space {
        SdrSpace::Word => (&query.words, &doc.words, &stats.words),
        SdrSpace::Entity => (&query.entity_surfaces, &doc.entity_surfaces, &stats.entity_phrases),
    };
    cosine(&tfidf_vector(a, s), &tfidf_vector(b, s))
}

pub fn sdr_similarity(query: &TokenizedDoc, doc: &TokenizedDoc, stats: &DuetStats, space: SdrSpace) -> f64 {
    let (a, b, s) = match space {
        SdrSpace::Word => (TermView::words(query), TermView::words(doc), &stats.words),
        SdrSpace::Entity => (
            TermView::entity_surfaces(query),
            TermView::entity_surfaces(doc),
            &stats.entity_phrases,
        ),
    };
    cosine(&tfidf_vector(&a, s), &tfidf_vector(&b, s))
}

/// Bigram language-model score with linear (Jelinek–Mercer) smoothing:
/// Σ_g ln(λ_b·tf(g,d)/max(1,|bigrams(d)|) + (1−λ_b)·P_c(g) + ε).
pub fn bigram_lmir(query: &TokenizedDoc, doc: &TokenizedDoc, stats: &CollectionStats, params: &LexicalParams) -> Result<f64> {
    if query.flat_tokens.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "query {} has fewer than 2 tokens; bigram LMIR undefined",
            query.doc_id
        )));
    }
    let mut doc_counts: HashMap<(&str, &str), u64> = HashMap::new();
    for w in doc.flat_tokens.windows(2) {
        *doc_counts.entry((&w[0], &w[1])).or_default() += 1;
    }
    let doc_bigrams = doc.flat_tokens.len().saturating_sub(1).max(1) as f64;
    let lb = params.lambda_bigram;
    let mut score = 0.0;
    for w in query.flat_tokens.windows(2) {
        let tf = doc_counts.get(&(w[0].as_str(), w[1].as_str())).copied().unwrap_or(0) as f64;
        let p = lb * tf / doc_bigrams + (1.0 - lb) * stats.bigram_prob(&w[0], &w[1]) + params.epsilon;
        score += p.ln();
    }
    Ok(score)
}

/// One line of the feature dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureDumpRecord {
    pub qid: String,
    pub cid: String,
    pub duet: DuetFeatures,
    pub sdr_w: f64,
    pub sdr_e: f64,
    pub lmir: f64,
}
