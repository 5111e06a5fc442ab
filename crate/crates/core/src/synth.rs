//! Synthetic corpora with planted relevance, for pipeline runs without the
//! licensed data.
//!
//! Each retrieval query owns a set of signature words and two named
//! entities. Relevant candidates reuse those words and quote short spans of
//! the query; irrelevant ones are background text, some of them sprinkled
//! with the query's signature words as hard negatives. Entailment topics
//! plant one or two paragraphs that restate most of the fragment.

use std::collections::{BTreeMap, BTreeSet};

use rand::{RngExt, SeedableRng};
use rand_pcg::Pcg32;
use serde::{Deserialize, Serialize};

use crate::corpus::{
    shuffle, CaseDocument, CorpusHeader, EntailmentCorpus, EntailmentLabels, EntailmentTopic, RetrievalCorpus,
    RetrievalLabels, RetrievalTopic, ENTAILMENT_FORMAT, RETRIEVAL_FORMAT,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub queries: usize,
    pub candidates: usize,
    pub relevant_min: usize,
    pub relevant_max: usize,
    pub paragraphs_min: usize,
    pub paragraphs_max: usize,
    pub paragraph_tokens: usize,
    pub vocabulary: usize,
    pub entail_topics: usize,
    pub entail_paragraphs_min: usize,
    pub entail_paragraphs_max: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            queries: 20,
            candidates: 50,
            relevant_min: 2,
            relevant_max: 6,
            paragraphs_min: 3,
            paragraphs_max: 6,
            paragraph_tokens: 40,
            vocabulary: 4000,
            entail_topics: 20,
            entail_paragraphs_min: 8,
            entail_paragraphs_max: 20,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(format!("synthetic config: {m}")));
        if self.queries < 2 || self.entail_topics < 2 {
            return bad("need at least 2 queries and 2 entailment topics");
        }
        if self.relevant_min == 0 || self.relevant_min > self.relevant_max || self.relevant_max >= self.candidates {
            return bad("need 1 <= relevant_min <= relevant_max < candidates");
        }
        if self.paragraphs_min == 0 || self.paragraphs_min > self.paragraphs_max {
            return bad("need 1 <= paragraphs_min <= paragraphs_max");
        }
        if self.entail_paragraphs_min < 2 || self.entail_paragraphs_min > self.entail_paragraphs_max {
            return bad("need 2 <= entail_paragraphs_min <= entail_paragraphs_max");
        }
        if self.paragraph_tokens < 10 || self.vocabulary < 500 {
            return bad("paragraph_tokens must be >= 10 and vocabulary >= 500");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub retrieval: RetrievalCorpus,
    pub retrieval_labels: RetrievalLabels,
    pub entailment: EntailmentCorpus,
    pub entailment_labels: EntailmentLabels,
}

const ONSETS: [&str; 13] = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v"];
const NUCLEI: [&str; 6] = ["a", "e", "i", "o", "u", "ai"];
const CODAS: [&str; 6] = ["", "n", "r", "s", "l", "m"];

/// The k-th pseudo-word: three syllables read off the mixed-radix digits of k.
fn word(mut k: usize) -> String {
    let mut out = String::new();
    for _ in 0..3 {
        out.push_str(ONSETS[k % ONSETS.len()]);
        k /= ONSETS.len();
        out.push_str(NUCLEI[k % NUCLEI.len()]);
        k /= NUCLEI.len();
        out.push_str(CODAS[k % CODAS.len()]);
        k /= CODAS.len();
    }
    out
}

fn capitalized(w: &str) -> String {
    let mut c = w.chars();
    c.next()
        .map(|f| f.to_uppercase().chain(c).collect())
        .unwrap_or_default()
}

struct Gen {
    rng: Pcg32,
    vocab: Vec<String>,
}

impl Gen {
    fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.rng.random_range(0..items.len())]
    }

    /// Background word with a skewed (roughly Zipfian) frequency profile.
    fn background(&mut self) -> String {
        let u: f64 = self.rng.random_range(0.0..1.0);
        let k = ((self.vocab.len() as f64) * u * u * u) as usize;
        self.vocab[k.min(self.vocab.len() - 1)].clone()
    }

    fn span(&mut self, tokens: &[String], min: usize, max: usize) -> Vec<String> {
        let len = self.rng.random_range(min..=max).min(tokens.len());
        let start = self.rng.random_range(0..=tokens.len() - len);
        tokens[start..start + len].to_vec()
    }

    /// Background text mixing in `topical` words at rate `rate`.
    fn text(&mut self, len: usize, topical: &[String], rate: f64) -> Vec<String> {
        (0..len)
            .map(|_| {
                if !topical.is_empty() && self.rng.random_range(0.0..1.0) < rate {
                    self.pick(topical).clone()
                } else {
                    self.background()
                }
            })
            .collect()
    }

    fn insert_at_random(&mut self, tokens: &mut Vec<String>, piece: Vec<String>) {
        let at = self.rng.random_range(0..=tokens.len());
        tokens.splice(at..at, piece);
    }
}

fn join(tokens: &[String]) -> String {
    tokens.join(" ") + "."
}

pub fn generate(cfg: &SynthConfig) -> Result<SyntheticData> {
    cfg.validate()?;
    // Signature words and entity names come from the upper part of the
    // pseudo-word list so they never collide with background words.
    let signature_size = 15;
    let reserved = cfg.queries * (signature_size + 4) + cfg.entail_topics * 10;
    let mut g = Gen {
        rng: Pcg32::seed_from_u64(cfg.seed),
        vocab: (0..cfg.vocabulary).map(word).collect(),
    };
    let mut extra = (cfg.vocabulary..cfg.vocabulary + reserved).map(word);
    let mut take = |n: usize| -> Vec<String> { extra.by_ref().take(n).collect() };

    let mut topics = Vec::with_capacity(cfg.queries);
    let mut retrieval_labels = RetrievalLabels::new();
    for q in 0..cfg.queries {
        let qid = format!("q{:03}", q + 1);
        let signature = take(signature_size);
        let names = take(4);
        let entities: Vec<String> = names.chunks(2).map(|c| format!("{} {}", capitalized(&c[0]), capitalized(&c[1]))).collect();

        let n_par = g.rng.random_range(cfg.paragraphs_min..=cfg.paragraphs_max);
        let mut query_tokens = Vec::new();
        let mut query_pars = Vec::new();
        for _ in 0..n_par {
            let mut t = g.text(cfg.paragraph_tokens, &signature, 0.3);
            if g.rng.random_range(0.0..1.0) < 0.6 {
                let e = g.pick(&entities).split(' ').map(str::to_string).collect();
                g.insert_at_random(&mut t, e);
            }
            query_tokens.extend(t.iter().cloned());
            query_pars.push(join(&t));
        }

        let n_rel = g.rng.random_range(cfg.relevant_min..=cfg.relevant_max);
        let mut docs: Vec<(Vec<String>, bool)> = Vec::with_capacity(cfg.candidates);
        for c in 0..cfg.candidates {
            let relevant = c < n_rel;
            let hard = !relevant && g.rng.random_range(0.0..1.0) < 0.3;
            let n_par = g.rng.random_range(cfg.paragraphs_min..=cfg.paragraphs_max);
            let mut pars = Vec::with_capacity(n_par);
            for p in 0..n_par {
                let on_topic = relevant && (p == 0 || g.rng.random_range(0.0..1.0) < 0.5);
                let mut t = if on_topic {
                    g.text(cfg.paragraph_tokens, &signature, 0.15)
                } else if hard {
                    g.text(cfg.paragraph_tokens, &signature, 0.04)
                } else {
                    g.text(cfg.paragraph_tokens, &[], 0.0)
                };
                if on_topic {
                    for _ in 0..g.rng.random_range(1..=3) {
                        let quote = g.span(&query_tokens, 4, 8);
                        g.insert_at_random(&mut t, quote);
                    }
                    if g.rng.random_range(0.0..1.0) < 0.5 {
                        let e = g.pick(&entities).split(' ').map(str::to_string).collect();
                        g.insert_at_random(&mut t, e);
                    }
                }
                pars.push(join(&t));
            }
            docs.push((pars, relevant));
        }
        shuffle(&mut docs, &mut g.rng);
        let mut candidates = Vec::with_capacity(docs.len());
        let mut relevant = BTreeSet::new();
        for (k, (pars, rel)) in docs.into_iter().enumerate() {
            let cid = format!("{qid}-c{:03}", k + 1);
            if rel {
                relevant.insert(cid.clone());
            }
            candidates.push(CaseDocument::new(cid, pars)?);
        }
        retrieval_labels.insert(qid.clone(), relevant);
        topics.push(RetrievalTopic {
            query: CaseDocument::new(qid, query_pars)?,
            candidates,
            relevant_ids: None,
        });
    }

    let mut entail_topics = Vec::with_capacity(cfg.entail_topics);
    let mut entailment_labels = EntailmentLabels::new();
    for t in 0..cfg.entail_topics {
        let id = format!("e{:03}", t + 1);
        let topical = take(10);
        let frag_len = g.rng.random_range(20..=60);
        let fragment = g.text(frag_len, &topical, 0.35);
        let n_par = g.rng.random_range(cfg.entail_paragraphs_min..=cfg.entail_paragraphs_max);
        let n_ent = g.rng.random_range(1..=2usize);
        let mut order: Vec<usize> = (0..n_par).collect();
        shuffle(&mut order, &mut g.rng);
        let entailing: BTreeSet<usize> = order[..n_ent].iter().map(|i| i + 1).collect();
        let mut paragraphs = Vec::with_capacity(n_par);
        for k in 1..=n_par {
            let len = g.rng.random_range(cfg.paragraph_tokens / 2..=cfg.paragraph_tokens * 3);
            let mut p = g.text(len, &topical, 0.05);
            if entailing.contains(&k) {
                let restated: Vec<String> = fragment
                    .iter()
                    .filter(|_| g.rng.random_range(0.0..1.0) < 0.7)
                    .cloned()
                    .collect();
                g.insert_at_random(&mut p, restated);
            }
            paragraphs.push(join(&p));
        }
        entailment_labels.insert(id.clone(), entailing);
        entail_topics.push(EntailmentTopic {
            id,
            fragment: join(&fragment),
            paragraphs,
            entailing_idx: None,
        });
    }

    let retrieval = RetrievalCorpus {
        header: Some(CorpusHeader {
            format: RETRIEVAL_FORMAT.into(),
            profile: None,
            candidates_per_query: Some(cfg.candidates),
        }),
        topics,
    };
    let entailment = EntailmentCorpus {
        header: Some(CorpusHeader {
            format: ENTAILMENT_FORMAT.into(),
            profile: None,
            candidates_per_query: None,
        }),
        topics: entail_topics,
    };
    for t in &retrieval.topics {
        t.validate()?;
    }
    for t in &entailment.topics {
        t.validate()?;
    }
    Ok(SyntheticData {
        retrieval,
        retrieval_labels,
        entailment,
        entailment_labels,
    })
}

/// Label counts per query, for summaries.
pub fn label_counts(labels: &RetrievalLabels) -> BTreeMap<String, usize> {
    labels.iter().map(|(q, r)| (q.clone(), r.len())).collect()
}
