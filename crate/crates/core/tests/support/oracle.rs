//! Loop-only reimplementations of the scorers and the PLI loss.
//!
//! Everything here works on plain token lists and indexes tensors element by
//! element. Nothing is shared with the library beyond the input and parameter
//! types, so agreement between the two is evidence rather than tautology.

#![allow(dead_code)]

use coliee_core::lexical::LexicalParams;
use coliee_core::pli::PliModel;
use coliee_core::textproc::TokenizedDoc;

/// A document as raw token occurrences plus its entity spans.
#[derive(Debug, Clone)]
pub struct ODoc {
    pub tokens: Vec<String>,
    pub entities: Vec<Vec<String>>,
}

impl ODoc {
    pub fn of(doc: &TokenizedDoc) -> Self {
        ODoc {
            tokens: doc.flat_tokens.clone(),
            entities: doc.entities.iter().map(|e| e.surface_tokens.clone()).collect(),
        }
    }
}

fn count(list: &[String], t: &str) -> usize {
    let mut c = 0;
    for x in list {
        if x == t {
            c += 1;
        }
    }
    c
}

fn dedup(list: &[String]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for x in list {
        if !out.contains(x) {
            out.push(x.clone());
        }
    }
    out
}

/// A collection given as one bag (occurrence list) per document.
pub struct Space {
    pub bags: Vec<Vec<String>>,
}

impl Space {
    pub fn n(&self) -> f64 {
        self.bags.len() as f64
    }

    pub fn df(&self, t: &str) -> f64 {
        let mut c = 0.0;
        for b in &self.bags {
            if count(b, t) > 0 {
                c += 1.0;
            }
        }
        c
    }

    pub fn cf(&self, t: &str) -> f64 {
        let mut c = 0.0;
        for b in &self.bags {
            c += count(b, t) as f64;
        }
        c
    }

    pub fn total(&self) -> f64 {
        let mut c = 0.0;
        for b in &self.bags {
            c += b.len() as f64;
        }
        c
    }

    pub fn avgdl(&self) -> f64 {
        self.total() / self.n()
    }

    pub fn pc(&self, t: &str) -> f64 {
        let total = self.total();
        if total == 0.0 {
            0.0
        } else {
            self.cf(t) / total
        }
    }
}

pub fn bm25(q: &[String], d: &[String], s: &Space, p: &LexicalParams) -> f64 {
    let mut score = 0.0;
    for t in q {
        let tf = count(d, t) as f64;
        if tf == 0.0 {
            continue;
        }
        let df = s.df(t);
        let idf = (1.0 + (s.n() - df + 0.5) / (df + 0.5)).ln();
        let norm = 1.0 - p.b + p.b * d.len() as f64 / s.avgdl();
        score += idf * tf * (p.k1 + 1.0) / (tf + p.k1 * norm);
    }
    score
}

pub fn tfidf(q: &[String], d: &[String], s: &Space) -> f64 {
    let mut score = 0.0;
    for t in q {
        let tf = count(d, t) as f64;
        score += tf * ((s.n() + 1.0) / (s.df(t) + 1.0)).ln();
    }
    score
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Lm {
    Mle,
    Jm,
    Dirichlet,
    TwoWay,
}

pub const LM_MODES: [Lm; 4] = [Lm::Mle, Lm::Jm, Lm::Dirichlet, Lm::TwoWay];

pub fn term_prob(t: &str, d: &[String], s: &Space, mode: Lm, p: &LexicalParams) -> f64 {
    let tf = count(d, t) as f64;
    let len = d.len() as f64;
    let pc = s.pc(t);
    let dir = (tf + p.mu * pc) / (len + p.mu);
    match mode {
        Lm::Mle => tf / len,
        Lm::Jm => p.lambda * (tf / len) + (1.0 - p.lambda) * pc,
        Lm::Dirichlet => dir,
        Lm::TwoWay => p.lambda * dir + (1.0 - p.lambda) * pc,
    }
}

pub fn lm(q: &[String], d: &[String], s: &Space, mode: Lm, p: &LexicalParams) -> f64 {
    let mut score = 0.0;
    for t in q {
        let mut pr = term_prob(t, d, s, mode, p);
        if pr < p.epsilon {
            pr = p.epsilon;
        }
        score += pr.ln();
    }
    score
}

fn contains_run(tokens: &[String], phrase: &[String]) -> bool {
    if phrase.is_empty() || phrase.len() > tokens.len() {
        return false;
    }
    for start in 0..=tokens.len() - phrase.len() {
        let mut all = true;
        for k in 0..phrase.len() {
            if tokens[start + k] != phrase[k] {
                all = false;
                break;
            }
        }
        if all {
            return true;
        }
    }
    false
}

fn surfaces(doc: &ODoc) -> Vec<String> {
    let joined: Vec<String> = doc.entities.iter().map(|e| e.join(" ")).collect();
    dedup(&joined)
}

fn entity_tokens(doc: &ODoc) -> Vec<String> {
    let mut all = Vec::new();
    for e in &doc.entities {
        all.extend(e.iter().cloned());
    }
    dedup(&all)
}

/// Distinct vocabulary phrases occurring in the document's token stream.
fn phrase_bag(doc: &ODoc, vocab: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    for v in vocab {
        let toks: Vec<String> = v.split(' ').map(str::to_string).collect();
        if contains_run(&doc.tokens, &toks) {
            out.push(v.clone());
        }
    }
    out
}

/// The eleven duet values of `q` against `d`, statistics taken over `coll`.
pub fn duet(q: &ODoc, d: &ODoc, coll: &[ODoc], p: &LexicalParams) -> [f64; 11] {
    let words = Space { bags: coll.iter().map(|c| c.tokens.clone()).collect() };
    let mut stats_vocab: Vec<String> = Vec::new();
    for c in coll {
        stats_vocab.extend(surfaces(c));
    }
    let stats_vocab = dedup(&stats_vocab);
    let mut vocab = stats_vocab.clone();
    vocab.extend(surfaces(q));
    let vocab = dedup(&vocab);
    let phrases = Space { bags: coll.iter().map(|c| phrase_bag(c, &stats_vocab)).collect() };
    let ent_tok = Space { bags: coll.iter().map(entity_tokens).collect() };

    let qw = &q.tokens;
    let qe = surfaces(q);
    let dw = &d.tokens;
    let dp = phrase_bag(d, &vocab);
    let de = entity_tokens(d);
    [
        bm25(qw, dw, &words, p),
        tfidf(qw, dw, &words),
        lm(qw, dw, &words, Lm::Mle, p),
        lm(qw, dw, &words, Lm::Jm, p),
        lm(qw, dw, &words, Lm::Dirichlet, p),
        lm(qw, dw, &words, Lm::TwoWay, p),
        bm25(&qe, &dp, &phrases, p),
        tfidf(&qe, &dp, &phrases),
        lm(&qe, &dp, &phrases, Lm::Dirichlet, p),
        tfidf(qw, &de, &ent_tok),
        lm(qw, &de, &ent_tok, Lm::Dirichlet, p),
    ]
}

fn tfidf_weights(bag: &[String], s: &Space) -> Vec<(String, f64)> {
    dedup(bag)
        .into_iter()
        .map(|t| {
            let w = count(bag, &t) as f64 * ((s.n() + 1.0) / (s.df(&t) + 1.0)).ln();
            (t, w)
        })
        .collect()
}

fn cosine(a: &[(String, f64)], b: &[(String, f64)]) -> f64 {
    let mut dot = 0.0;
    for (t, x) in a {
        for (u, y) in b {
            if t == u {
                dot += x * y;
            }
        }
    }
    let na: f64 = a.iter().map(|(_, x)| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|(_, y)| y * y).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(0.0, 1.0)
    }
}

/// Tf-idf cosine in the word space (`entity = false`) or the entity-surface space.
pub fn sdr(q: &ODoc, d: &ODoc, coll: &[ODoc], entity: bool) -> f64 {
    if entity {
        let mut vocab = Vec::new();
        for c in coll {
            vocab.extend(surfaces(c));
        }
        let vocab = dedup(&vocab);
        let s = Space { bags: coll.iter().map(|c| phrase_bag(c, &vocab)).collect() };
        cosine(&tfidf_weights(&surfaces(q), &s), &tfidf_weights(&surfaces(d), &s))
    } else {
        let s = Space { bags: coll.iter().map(|c| c.tokens.clone()).collect() };
        cosine(&tfidf_weights(&q.tokens, &s), &tfidf_weights(&d.tokens, &s))
    }
}

fn bigram_count(tokens: &[String], a: &str, b: &str) -> f64 {
    let mut c = 0.0;
    for k in 1..tokens.len() {
        if tokens[k - 1] == a && tokens[k] == b {
            c += 1.0;
        }
    }
    c
}

pub fn bigram_lmir(q: &ODoc, d: &ODoc, coll: &[ODoc], p: &LexicalParams) -> f64 {
    let mut total = 0.0;
    for c in coll {
        if c.tokens.len() > 1 {
            total += (c.tokens.len() - 1) as f64;
        }
    }
    let doc_bigrams = if d.tokens.len() > 1 { (d.tokens.len() - 1) as f64 } else { 1.0 };
    let mut score = 0.0;
    for k in 1..q.tokens.len() {
        let (a, b) = (&q.tokens[k - 1], &q.tokens[k]);
        let mut cf = 0.0;
        for c in coll {
            cf += bigram_count(&c.tokens, a, b);
        }
        let pc = if total == 0.0 { 0.0 } else { cf / total };
        let pr = p.lambda_bigram * bigram_count(&d.tokens, a, b) / doc_bigrams
            + (1.0 - p.lambda_bigram) * pc
            + p.epsilon;
        score += pr.ln();
    }
    score
}

fn sig(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// GRU (r, z, n gate rows) over `seq`, additive attention, linear head,
/// softmax cross-entropy against `label`. Returns (loss, probs).
pub fn pli_loss(m: &PliModel, seq: &[Vec<f64>], label: bool) -> (f64, [f64; 2]) {
    let h = m.w_hh.ncols();
    let d_in = m.w_ih.ncols();
    let mut prev = vec![0.0; h];
    let mut states: Vec<Vec<f64>> = Vec::new();
    for x in seq {
        let mut next = vec![0.0; h];
        for k in 0..h {
            let mut gate = [0.0f64; 6];
            for (g, slot) in gate.iter_mut().enumerate() {
                let row = (g % 3) * h + k;
                if g < 3 {
                    let mut acc = m.b_ih[row];
                    for j in 0..d_in {
                        acc += m.w_ih[[row, j]] * x[j];
                    }
                    *slot = acc;
                } else {
                    let mut acc = m.b_hh[row];
                    for j in 0..h {
                        acc += m.w_hh[[row, j]] * prev[j];
                    }
                    *slot = acc;
                }
            }
            let r = sig(gate[0] + gate[3]);
            let z = sig(gate[1] + gate[4]);
            let n = (gate[2] + r * gate[5]).tanh();
            next[k] = (1.0 - z) * n + z * prev[k];
        }
        states.push(next.clone());
        prev = next;
    }
    let a = m.w_a.nrows();
    let mut e = Vec::new();
    for s in &states {
        let mut acc = 0.0;
        for k in 0..a {
            let mut pre = m.b_a[k];
            for j in 0..h {
                pre += m.w_a[[k, j]] * s[j];
            }
            acc += m.u_w[k] * pre.tanh();
        }
        e.push(acc);
    }
    let mx = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let den: f64 = e.iter().map(|v| (v - mx).exp()).sum();
    let mut pooled = vec![0.0; h];
    for (s, ev) in states.iter().zip(&e) {
        let alpha = (ev - mx).exp() / den;
        for j in 0..h {
            pooled[j] += alpha * s[j];
        }
    }
    let mut logits = [0.0; 2];
    for (c, l) in logits.iter_mut().enumerate() {
        *l = m.head_b[c];
        for j in 0..h {
            *l += m.head_w[[c, j]] * pooled[j];
        }
    }
    let lm = logits[0].max(logits[1]);
    let lse = lm + ((logits[0] - lm).exp() + (logits[1] - lm).exp()).ln();
    let probs = [(logits[0] - lse).exp(), (logits[1] - lse).exp()];
    (lse - logits[usize::from(label)], probs)
}

/// Σ over (relevant, irrelevant) pairs of max(0, 1 − σ(w·x⁺ + b) + σ(w·x⁻ + b)).
pub fn duet_hinge(w: &[f64], b: f64, pos: &[Vec<f64>], neg: &[Vec<f64>]) -> f64 {
    let score = |x: &Vec<f64>| {
        let mut z = b;
        for k in 0..w.len() {
            z += w[k] * x[k];
        }
        sig(z)
    };
    let mut loss = 0.0;
    for p in pos {
        for n in neg {
            let m = 1.0 - score(p) + score(n);
            if m > 0.0 {
                loss += m;
            }
        }
    }
    loss
}
