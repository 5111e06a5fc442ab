//! Paragraph-level interaction aggregation for Task 1.
//!
//! Every (query paragraph, candidate paragraph) pair is encoded by a frozen
//! [`EncoderProvider`] into a d-vector. The N′×M′ grid is max-pooled over the
//! candidate axis, the resulting N′ vectors run through a one-layer forward
//! GRU, an additive attention layer pools the hidden states, and a linear
//! head with softmax gives (p_irrelevant, p_relevant).
//!
//! GRU gates follow the usual (r, z, n) layout:
//!
//! ```text
//! r = σ(W_ir x + b_ir + W_hr h + b_hr)
//! z = σ(W_iz x + b_iz + W_hz h + b_hz)
//! n = tanh(W_in x + b_in + r ⊙ (W_hn h + b_hn))
//! h' = (1 − z) ⊙ n + z ⊙ h
//! ```
//!
//! Attention: u_t = tanh(W_a h_t + b_a), α = softmax_t(u_t · u_w), d = Σ α_t h_t.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use ndarray::{s, Array1, Array2, ArrayView1, Axis};
use rand::{RngExt, SeedableRng};
use rand_pcg::Pcg32;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{shuffle, CaseDocument};
use crate::error::{Error, Result};
use crate::jsonl;

pub const N_MAX: usize = 54;
pub const M_MAX: usize = 40;
pub const HIDDEN: usize = 256;
pub const INIT_RANGE: f64 = 0.08;
pub const DECISION_THRESHOLD: f64 = 0.5;
pub const MODEL_FORMAT: &str = "pli-gru-attn-v1";
const PROB_TOL: f64 = 1e-6;

/// A frozen pair encoder: a d-vector plus a two-way softmax for (a, b).
/// Implementations must be pure.
pub trait EncoderProvider: Sync {
    fn dim(&self) -> usize;
    fn name(&self) -> String;
    fn encode_pair(&self, text_a: &str, text_b: &str) -> Result<(Vec<f64>, [f64; 2])>;
}

pub(crate) fn check_encoding(dim: usize, vec: &[f64], probs: &[f64; 2]) -> std::result::Result<(), String> {
    if vec.len() != dim {
        return Err(format!("vector has dimension {}, expected {dim}", vec.len()));
    }
    if vec.iter().any(|x| !x.is_finite()) {
        return Err("vector has a non-finite component".into());
    }
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) || (probs[0] + probs[1] - 1.0).abs() > PROB_TOL {
        return Err(format!("probs {probs:?} do not sum to 1"));
    }
    Ok(())
}

/// Deterministic stand-in encoder: hashed signed bucketing of the pair's tokens.
///
/// Each lowercased, punctuation-trimmed token of `text_a` followed by
/// `text_b` adds `±w` to bucket `hash mod dim`, with sign and weight
/// w ∈ [1, 2) also taken from the 64-bit FNV-1a hash of (seed, token). The
/// sum is L2-normalized; a text without tokens gives the zero vector. Two
/// disjoint token multisets give the same vector only if their weighted
/// bucket sums coincide, which needs an exact 53-bit weight match.
/// probs = (1 − σ(√d · mean(v)), σ(√d · mean(v))).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ToyHashEncoder {
    pub dim: usize,
    pub seed: u64,
}

pub fn toy_hash_encoder(dim: usize, seed: u64) -> Result<ToyHashEncoder> {
    if dim < 2 {
        return Err(Error::InvalidInput(format!("toy encoder dim must be >= 2, got {dim}")));
    }
    Ok(ToyHashEncoder { dim, seed })
}

fn fnv1a(seed: u64, bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in seed.to_le_bytes().iter().chain(bytes) {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn toy_tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split_whitespace()
        .map(|p| p.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .filter(|t| !t.is_empty())
}

impl ToyHashEncoder {
    pub fn encode(&self, text_a: &str, text_b: &str) -> (Vec<f64>, [f64; 2]) {
        let mut v = vec![0.0; self.dim];
        let mut any = false;
        for tok in toy_tokens(text_a).chain(toy_tokens(text_b)) {
            any = true;
            let h = fnv1a(self.seed, tok.as_bytes());
            let weight = 1.0 + (h >> 11) as f64 / (1u64 << 53) as f64;
            let sign = if h & 1 == 0 { 1.0 } else { -1.0 };
            v[((h >> 1) % self.dim as u64) as usize] += sign * weight;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        } else if any {
            v[0] = 1.0;
        }
        let mean = v.iter().sum::<f64>() / self.dim as f64;
        let p1 = crate::duet::sigmoid((self.dim as f64).sqrt() * mean);
        (v, [1.0 - p1, p1])
    }
}

impl EncoderProvider for ToyHashEncoder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn name(&self) -> String {
        format!("toy-hash-d{}-s{}", self.dim, self.seed)
    }

    fn encode_pair(&self, text_a: &str, text_b: &str) -> Result<(Vec<f64>, [f64; 2])> {
        Ok(self.encode(text_a, text_b))
    }
}

/// N′×M′ grid of encoder outputs for one (query, candidate) pair, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionMap {
    pub qid: String,
    pub cid: String,
    pub n: usize,
    pub m: usize,
    pub dim: usize,
    pub vectors: Vec<f64>,
    pub probs: Vec<[f64; 2]>,
}

impl InteractionMap {
    pub fn cell(&self, i: usize, j: usize) -> &[f64] {
        let at = (i * self.m + j) * self.dim;
        &self.vectors[at..at + self.dim]
    }

    pub fn cell_probs(&self, i: usize, j: usize) -> [f64; 2] {
        self.probs[i * self.m + j]
    }

    /// Softmax of the first query paragraph against the first candidate paragraph.
    pub fn first_pair_probs(&self) -> [f64; 2] {
        self.cell_probs(0, 0)
    }
}

/// One paragraph pair to encode; `i`, `j` are zero-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PliPairRequest {
    pub qid: String,
    pub cid: String,
    pub i: usize,
    pub j: usize,
    pub text_a: String,
    pub text_b: String,
}

fn check_limits(query: &CaseDocument, cand: &CaseDocument, n_max: usize, m_max: usize) -> Result<(usize, usize)> {
    if query.paragraphs.is_empty() || cand.paragraphs.is_empty() {
        return Err(Error::InvalidInput(format!(
            "pair ({}, {}) has a document without paragraphs",
            query.id, cand.id
        )));
    }
    if n_max == 0 || m_max == 0 {
        return Err(Error::InvalidInput("paragraph limits must be >= 1".into()));
    }
    Ok((query.paragraphs.len().min(n_max), cand.paragraphs.len().min(m_max)))
}

/// Requests for the first min(n, N_max) × min(m, M_max) paragraph pairs.
pub fn pli_pair_requests(
    query: &CaseDocument,
    cand: &CaseDocument,
    n_max: usize,
    m_max: usize,
) -> Result<Vec<PliPairRequest>> {
    let (n, m) = check_limits(query, cand, n_max, m_max)?;
    Ok((0..n)
        .flat_map(|i| {
            (0..m).map(move |j| PliPairRequest {
                qid: query.id.clone(),
                cid: cand.id.clone(),
                i,
                j,
                text_a: query.paragraphs[i].clone(),
                text_b: cand.paragraphs[j].clone(),
            })
        })
        .collect())
}

pub fn build_interaction_map(
    query: &CaseDocument,
    cand: &CaseDocument,
    enc: &dyn EncoderProvider,
    n_max: usize,
    m_max: usize,
) -> Result<InteractionMap> {
    let (n, m) = check_limits(query, cand, n_max, m_max)?;
    let dim = enc.dim();
    let cells: Vec<(Vec<f64>, [f64; 2])> = (0..n * m)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / m, k % m);
            let fail = |msg: String| Error::Encoder {
                context: format!("({}, {}) cell ({i}, {j})", query.id, cand.id),
                msg,
            };
            let (v, p) = enc
                .encode_pair(&query.paragraphs[i], &cand.paragraphs[j])
                .map_err(|e| fail(e.to_string()))?;
            check_encoding(dim, &v, &p).map_err(fail)?;
            Ok((v, p))
        })
        .collect::<Result<_>>()?;
    let mut vectors = Vec::with_capacity(n * m * dim);
    let mut probs = Vec::with_capacity(n * m);
    for (v, p) in cells {
        vectors.extend(v);
        probs.push(p);
    }
    Ok(InteractionMap {
        qid: query.id.clone(),
        cid: cand.id.clone(),
        n,
        m,
        dim,
        vectors,
        probs,
    })
}

/// Elementwise max over the candidate axis: one d-vector per query paragraph.
pub fn maxpool_rows(map: &InteractionMap) -> Array2<f64> {
    let mut out = Array2::from_elem((map.n, map.dim), f64::NEG_INFINITY);
    for i in 0..map.n {
        let mut row = out.row_mut(i);
        for j in 0..map.m {
            for (o, &x) in row.iter_mut().zip(map.cell(i, j)) {
                *o = o.max(x);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingHeader {
    pub dim: usize,
    pub encoder: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingRecord {
    pub qid: String,
    pub cid: String,
    pub i: usize,
    pub j: usize,
    pub vec: Vec<f64>,
    pub probs: [f64; 2],
}

pub fn embeddings_to_string(header: &EmbeddingHeader, maps: &[InteractionMap]) -> Result<String> {
    let mut records = Vec::new();
    for map in maps {
        if map.dim != header.dim {
            return Err(Error::Dimension { expected: header.dim, actual: map.dim });
        }
        for i in 0..map.n {
            for j in 0..map.m {
                records.push(EmbeddingRecord {
                    qid: map.qid.clone(),
                    cid: map.cid.clone(),
                    i,
                    j,
                    vec: map.cell(i, j).to_vec(),
                    probs: map.cell_probs(i, j),
                });
            }
        }
    }
    Ok(serde_json::to_string(header)? + "\n" + &jsonl::to_jsonl_string(&records)?)
}

pub type EmbeddingMaps = BTreeMap<(String, String), InteractionMap>;

/// Reads an embeddings file into complete grids keyed by (qid, cid).
pub fn load_embeddings(path: &Path) -> Result<(EmbeddingHeader, EmbeddingMaps)> {
    let mut lines = jsonl::read_lines(path)?.into_iter();
    let (n0, first) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "missing {\"dim\",\"encoder\"} header"))?;
    let header: EmbeddingHeader = jsonl::parse_line(path, n0, &first)?;
    if header.dim == 0 {
        return Err(Error::parse(path, n0, "dim must be >= 1"));
    }
    let mut cells: BTreeMap<(String, String), BTreeMap<(usize, usize), (Vec<f64>, [f64; 2])>> = BTreeMap::new();
    for (n, line) in lines {
        let r: EmbeddingRecord = jsonl::parse_line(path, n, &line)?;
        check_encoding(header.dim, &r.vec, &r.probs).map_err(|e| Error::parse(path, n, e))?;
        let grid = cells.entry((r.qid.clone(), r.cid.clone())).or_default();
        if grid.insert((r.i, r.j), (r.vec, r.probs)).is_some() {
            return Err(Error::parse(path, n, format!("duplicate cell ({}, {}, {}, {})", r.qid, r.cid, r.i, r.j)));
        }
    }
    let mut maps = EmbeddingMaps::new();
    for ((qid, cid), grid) in cells {
        let n = grid.keys().map(|k| k.0).max().unwrap_or(0) + 1;
        let m = grid.keys().map(|k| k.1).max().unwrap_or(0) + 1;
        let mut vectors = Vec::with_capacity(n * m * header.dim);
        let mut probs = Vec::with_capacity(n * m);
        for i in 0..n {
            for j in 0..m {
                let (v, p) = grid.get(&(i, j)).ok_or_else(|| {
                    Error::Validation(format!("{}: missing cell ({qid}, {cid}, {i}, {j})", path.display()))
                })?;
                vectors.extend_from_slice(v);
                probs.push(*p);
            }
        }
        maps.insert(
            (qid.clone(), cid.clone()),
            InteractionMap { qid, cid, n, m, dim: header.dim, vectors, probs },
        );
    }
    Ok((header, maps))
}

/// Downstream parameters. GRU matrices stack the (r, z, n) blocks row-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct PliModel {
    pub w_ih: Array2<f64>,
    pub w_hh: Array2<f64>,
    pub b_ih: Array1<f64>,
    pub b_hh: Array1<f64>,
    pub w_a: Array2<f64>,
    pub b_a: Array1<f64>,
    pub u_w: Array1<f64>,
    pub head_w: Array2<f64>,
    pub head_b: Array1<f64>,
}

pub const PARAM_NAMES: [&str; 9] = [
    "gru.w_ih", "gru.w_hh", "gru.b_ih", "gru.b_hh", "attn.w_a", "attn.b_a", "attn.u_w", "head.w", "head.b",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TensorJson {
    shape: Vec<usize>,
    data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelJson {
    format: String,
    input_dim: usize,
    hidden: usize,
    tensors: BTreeMap<String, TensorJson>,
}

impl PliModel {
    pub fn zeros(input_dim: usize, hidden: usize) -> Self {
        let h = hidden;
        PliModel {
            w_ih: Array2::zeros((3 * h, input_dim)),
            w_hh: Array2::zeros((3 * h, h)),
            b_ih: Array1::zeros(3 * h),
            b_hh: Array1::zeros(3 * h),
            w_a: Array2::zeros((h, h)),
            b_a: Array1::zeros(h),
            u_w: Array1::zeros(h),
            head_w: Array2::zeros((2, h)),
            head_b: Array1::zeros(2),
        }
    }

    /// Every parameter drawn from uniform(−0.08, 0.08), in `PARAM_NAMES` order.
    pub fn init(input_dim: usize, hidden: usize, seed: u64) -> Result<Self> {
        if input_dim == 0 || hidden == 0 {
            return Err(Error::InvalidInput("input dim and hidden size must be >= 1".into()));
        }
        let mut rng = Pcg32::seed_from_u64(seed);
        let mut m = Self::zeros(input_dim, hidden);
        for (_, p) in m.params_mut() {
            p.iter_mut().for_each(|x| *x = rng.random_range(-INIT_RANGE..INIT_RANGE));
        }
        Ok(m)
    }

    pub fn input_dim(&self) -> usize {
        self.w_ih.ncols()
    }

    pub fn hidden(&self) -> usize {
        self.w_hh.ncols()
    }

    fn shapes(&self) -> [Vec<usize>; 9] {
        [
            self.w_ih.shape().to_vec(),
            self.w_hh.shape().to_vec(),
            self.b_ih.shape().to_vec(),
            self.b_hh.shape().to_vec(),
            self.w_a.shape().to_vec(),
            self.b_a.shape().to_vec(),
            self.u_w.shape().to_vec(),
            self.head_w.shape().to_vec(),
            self.head_b.shape().to_vec(),
        ]
    }

    pub fn params(&self) -> [(&'static str, &[f64]); 9] {
        fn sl(a: Option<&[f64]>) -> &[f64] {
            a.expect("parameters are contiguous")
        }
        [
            (PARAM_NAMES[0], sl(self.w_ih.as_slice())),
            (PARAM_NAMES[1], sl(self.w_hh.as_slice())),
            (PARAM_NAMES[2], sl(self.b_ih.as_slice())),
            (PARAM_NAMES[3], sl(self.b_hh.as_slice())),
            (PARAM_NAMES[4], sl(self.w_a.as_slice())),
            (PARAM_NAMES[5], sl(self.b_a.as_slice())),
            (PARAM_NAMES[6], sl(self.u_w.as_slice())),
            (PARAM_NAMES[7], sl(self.head_w.as_slice())),
            (PARAM_NAMES[8], sl(self.head_b.as_slice())),
        ]
    }

    pub fn params_mut(&mut self) -> [(&'static str, &mut [f64]); 9] {
        fn sl(a: Option<&mut [f64]>) -> &mut [f64] {
            a.expect("parameters are contiguous")
        }
        [
            (PARAM_NAMES[0], sl(self.w_ih.as_slice_mut())),
            (PARAM_NAMES[1], sl(self.w_hh.as_slice_mut())),
            (PARAM_NAMES[2], sl(self.b_ih.as_slice_mut())),
            (PARAM_NAMES[3], sl(self.b_hh.as_slice_mut())),
            (PARAM_NAMES[4], sl(self.w_a.as_slice_mut())),
            (PARAM_NAMES[5], sl(self.b_a.as_slice_mut())),
            (PARAM_NAMES[6], sl(self.u_w.as_slice_mut())),
            (PARAM_NAMES[7], sl(self.head_w.as_slice_mut())),
            (PARAM_NAMES[8], sl(self.head_b.as_slice_mut())),
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.params().iter().all(|(_, p)| p.iter().all(|x| x.is_finite()))
    }

    pub fn to_json(&self) -> Result<String> {
        let tensors = self
            .params()
            .iter()
            .zip(self.shapes())
            .map(|((name, data), shape)| (name.to_string(), TensorJson { shape, data: data.to_vec() }))
            .collect();
        let doc = ModelJson {
            format: MODEL_FORMAT.into(),
            input_dim: self.input_dim(),
            hidden: self.hidden(),
            tensors,
        };
        Ok(serde_json::to_string(&doc)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut doc: ModelJson = serde_json::from_str(text)?;
        if doc.format != MODEL_FORMAT {
            return Err(Error::Validation(format!("unknown model format {:?}", doc.format)));
        }
        let mut m = Self::zeros(doc.input_dim, doc.hidden);
        let shapes = m.shapes();
        for ((name, dst), shape) in m.params_mut().into_iter().zip(shapes) {
            let t = doc
                .tensors
                .remove(name)
                .ok_or_else(|| Error::Validation(format!("model is missing tensor {name}")))?;
            if t.shape != shape || t.data.len() != dst.len() {
                return Err(Error::Validation(format!("tensor {name} has shape {:?}, expected {shape:?}", t.shape)));
            }
            dst.copy_from_slice(&t.data);
        }
        if let Some(extra) = doc.tensors.keys().next() {
            return Err(Error::Validation(format!("unexpected tensor {extra}")));
        }
        if !m.is_finite() {
            return Err(Error::Validation("model has non-finite parameters".into()));
        }
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&jsonl::read_to_string(path)?)
    }
}

fn sigmoid_arr(a: &mut Array1<f64>) {
    a.mapv_inplace(crate::duet::sigmoid);
}

fn softmax(v: ArrayView1<f64>) -> Array1<f64> {
    let mx = v.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let e = v.mapv(|x| (x - mx).exp());
    let s = e.sum();
    e / s
}

/// Intermediate values of one forward pass.
#[derive(Debug, Clone)]
pub struct Forward {
    /// (T+1)×h, row 0 is h_0 = 0.
    pub hs: Array2<f64>,
    pub r: Array2<f64>,
    pub z: Array2<f64>,
    pub n: Array2<f64>,
    /// W_hn h_{t−1} + b_hn per step.
    pub gh_n: Array2<f64>,
    pub u: Array2<f64>,
    pub alpha: Array1<f64>,
    pub d: Array1<f64>,
    pub probs: [f64; 2],
    logits: [f64; 2],
}

fn check_seq(model: &PliModel, seq: &Array2<f64>) -> Result<()> {
    if seq.nrows() == 0 {
        return Err(Error::InvalidInput("empty paragraph sequence".into()));
    }
    if seq.ncols() != model.input_dim() {
        return Err(Error::Dimension { expected: model.input_dim(), actual: seq.ncols() });
    }
    Ok(())
}

pub fn forward(model: &PliModel, seq: &Array2<f64>) -> Result<Forward> {
    check_seq(model, seq)?;
    let h = model.hidden();
    let t_len = seq.nrows();
    let gi = seq.dot(&model.w_ih.t()) + &model.b_ih;
    let mut hs = Array2::zeros((t_len + 1, h));
    let mut r_all = Array2::zeros((t_len, h));
    let mut z_all = Array2::zeros((t_len, h));
    let mut n_all = Array2::zeros((t_len, h));
    let mut ghn_all = Array2::zeros((t_len, h));
    for t in 0..t_len {
        let prev = hs.row(t).to_owned();
        let gh = model.w_hh.dot(&prev) + &model.b_hh;
        let gi_t = gi.row(t);
        let mut r = &gi_t.slice(s![0..h]) + &gh.slice(s![0..h]);
        sigmoid_arr(&mut r);
        let mut z = &gi_t.slice(s![h..2 * h]) + &gh.slice(s![h..2 * h]);
        sigmoid_arr(&mut z);
        let ghn = gh.slice(s![2 * h..]).to_owned();
        let n = (&gi_t.slice(s![2 * h..]) + &(&r * &ghn)).mapv(f64::tanh);
        let next = (1.0 - &z) * &n + &z * &prev;
        hs.row_mut(t + 1).assign(&next);
        r_all.row_mut(t).assign(&r);
        z_all.row_mut(t).assign(&z);
        n_all.row_mut(t).assign(&n);
        ghn_all.row_mut(t).assign(&ghn);
    }
    let states = hs.slice(s![1.., ..]);
    let u = (states.dot(&model.w_a.t()) + &model.b_a).mapv(f64::tanh);
    let alpha = softmax(u.dot(&model.u_w).view());
    let d = states.t().dot(&alpha);
    let lg = model.head_w.dot(&d) + &model.head_b;
    let logits = [lg[0], lg[1]];
    let p = softmax(lg.view());
    Ok(Forward {
        hs,
        r: r_all,
        z: z_all,
        n: n_all,
        gh_n: ghn_all,
        u,
        alpha,
        d,
        probs: [p[0], p[1]],
        logits,
    })
}

/// Attention-pooled representation d_qk.
pub fn gru_attend(model: &PliModel, seq: &Array2<f64>) -> Result<Array1<f64>> {
    Ok(forward(model, seq)?.d)
}

/// softmax(head · d + bias); index 1 is the relevant class.
pub fn classify(model: &PliModel, d: &Array1<f64>) -> Result<[f64; 2]> {
    if d.len() != model.hidden() {
        return Err(Error::Dimension { expected: model.hidden(), actual: d.len() });
    }
    let p = softmax((model.head_w.dot(d) + &model.head_b).view());
    Ok([p[0], p[1]])
}

pub fn predict_map(model: &PliModel, map: &InteractionMap) -> Result<[f64; 2]> {
    Ok(forward(model, &maxpool_rows(map))?.probs)
}

fn cross_entropy(logits: [f64; 2], label: bool) -> f64 {
    let mx = logits[0].max(logits[1]);
    let lse = mx + ((logits[0] - mx).exp() + (logits[1] - mx).exp()).ln();
    lse - logits[usize::from(label)]
}

/// Cross-entropy of one sequence and its gradient with respect to every parameter.
pub fn loss_and_grad(model: &PliModel, seq: &Array2<f64>, label: bool) -> Result<(f64, PliModel)> {
    let f = forward(model, seq)?;
    let h = model.hidden();
    let t_len = seq.nrows();
    let mut g = PliModel::zeros(model.input_dim(), h);
    let loss = cross_entropy(f.logits, label);

    let mut dlogits = Array1::from(vec![f.probs[0], f.probs[1]]);
    dlogits[usize::from(label)] -= 1.0;
    g.head_w = standard(outer(&dlogits, &f.d));
    g.head_b = dlogits.clone();
    let dd = model.head_w.t().dot(&dlogits);

    let states = f.hs.slice(s![1.., ..]);
    let dalpha = states.dot(&dd);
    let mean = f.alpha.dot(&dalpha);
    let ds = &f.alpha * &(dalpha - mean);
    g.u_w = f.u.t().dot(&ds);
    let du = outer(&ds, &model.u_w);
    let da = du * &f.u.mapv(|x| 1.0 - x * x);
    g.w_a = standard(da.t().dot(&states));
    g.b_a = da.sum_axis(Axis(0));
    let dh_direct = outer(&f.alpha, &dd) + da.dot(&model.w_a);

    let mut dgi = Array2::zeros((t_len, 3 * h));
    let mut dgh = Array2::zeros((t_len, 3 * h));
    let mut carry = Array1::<f64>::zeros(h);
    for t in (0..t_len).rev() {
        let dh = &dh_direct.row(t) + &carry;
        let (r, z, n) = (f.r.row(t), f.z.row(t), f.n.row(t));
        let prev = f.hs.row(t);
        let dn = &dh * &(1.0 - &z);
        let dz = &dh * &(&prev - &n);
        let dn_pre = dn * &n.mapv(|x| 1.0 - x * x);
        let dr = &dn_pre * &f.gh_n.row(t);
        let dr_pre = dr * &r.mapv(|x| x * (1.0 - x));
        let dz_pre = dz * &z.mapv(|x| x * (1.0 - x));
        let dghn = &dn_pre * &r;
        let mut gi_row = dgi.row_mut(t);
        gi_row.slice_mut(s![0..h]).assign(&dr_pre);
        gi_row.slice_mut(s![h..2 * h]).assign(&dz_pre);
        gi_row.slice_mut(s![2 * h..]).assign(&dn_pre);
        let mut gh_row = dgh.row_mut(t);
        gh_row.slice_mut(s![0..h]).assign(&dr_pre);
        gh_row.slice_mut(s![h..2 * h]).assign(&dz_pre);
        gh_row.slice_mut(s![2 * h..]).assign(&dghn);
        carry = &dh * &z + model.w_hh.t().dot(&gh_row);
    }
    g.w_ih = standard(dgi.t().dot(seq));
    g.b_ih = dgi.sum_axis(Axis(0));
    g.w_hh = standard(dgh.t().dot(&f.hs.slice(s![..t_len, ..])));
    g.b_hh = dgh.sum_axis(Axis(0));
    Ok((loss, g))
}

fn standard(a: Array2<f64>) -> Array2<f64> {
    if a.is_standard_layout() {
        a
    } else {
        a.as_standard_layout().into_owned()
    }
}

fn outer(a: &Array1<f64>, b: &Array1<f64>) -> Array2<f64> {
    let a2 = a.view().insert_axis(Axis(1));
    let b2 = b.view().insert_axis(Axis(0));
    a2.dot(&b2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PliTrainConfig {
    pub lr: f64,
    pub weight_decay: f64,
    pub max_epochs: usize,
    pub hidden: usize,
    pub seed: u64,
}

impl Default for PliTrainConfig {
    fn default() -> Self {
        PliTrainConfig {
            lr: 1e-4,
            weight_decay: 1e-6,
            max_epochs: 60,
            hidden: HIDDEN,
            seed: 0,
        }
    }
}

impl PliTrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr >= 0.0) || !self.lr.is_finite() || !(self.weight_decay >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "lr {} and weight decay {} must be finite and >= 0",
                self.lr, self.weight_decay
            )));
        }
        if self.max_epochs == 0 || self.hidden == 0 {
            return Err(Error::InvalidInput("max_epochs and hidden must be >= 1".into()));
        }
        Ok(())
    }
}

/// A max-pooled sequence with its label.
#[derive(Debug, Clone, PartialEq)]
pub struct PliExample {
    pub seq: Array2<f64>,
    pub label: bool,
}

impl PliExample {
    pub fn from_map(map: &InteractionMap, label: bool) -> Self {
        PliExample { seq: maxpool_rows(map), label }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PliEpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub validation_f1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PliTrainOutcome {
    pub model: PliModel,
    pub best_epoch: usize,
    pub history: Vec<PliEpochStats>,
}

/// Positive-class F1 at probs[1] ≥ 0.5.
pub fn classification_f1(model: &PliModel, examples: &[PliExample]) -> Result<f64> {
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for ex in examples {
        let pos = forward(model, &ex.seq)?.probs[1] >= DECISION_THRESHOLD;
        match (pos, ex.label) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            _ => {}
        }
    }
    Ok(crate::eval::MetricReport::from_counts(tp, tp + fp, tp + fn_).f1)
}

pub fn accuracy(model: &PliModel, examples: &[PliExample]) -> Result<f64> {
    if examples.is_empty() {
        return Ok(0.0);
    }
    let mut right = 0;
    for ex in examples {
        if (forward(model, &ex.seq)?.probs[1] >= DECISION_THRESHOLD) == ex.label {
            right += 1;
        }
    }
    Ok(right as f64 / examples.len() as f64)
}

/// Per-example SGD with weight decay, θ ← θ − lr·(∇ + wd·θ), over a seeded
/// shuffle each epoch. Returns the epoch with the best validation F1 (the
/// earliest on ties), or the last epoch when `validation` is empty.
pub fn train_pli(train: &[PliExample], validation: &[PliExample], cfg: &PliTrainConfig) -> Result<PliTrainOutcome> {
    cfg.validate()?;
    let first = train
        .first()
        .ok_or_else(|| Error::InvalidInput("no training examples".into()))?;
    if !(train.iter().any(|e| e.label) && train.iter().any(|e| !e.label)) {
        return Err(Error::InvalidInput("training set must contain both labels".into()));
    }
    let dim = first.seq.ncols();
    let mut model = PliModel::init(dim, cfg.hidden, cfg.seed)?;
    let mut rng = Pcg32::seed_from_u64(cfg.seed ^ 0x5eed_0f_5a4d);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut best: Option<(f64, usize, PliModel)> = None;
    let mut history = Vec::with_capacity(cfg.max_epochs);
    for epoch in 1..=cfg.max_epochs {
        shuffle(&mut order, &mut rng);
        let mut total = 0.0;
        for &k in &order {
            let (loss, g) = loss_and_grad(&model, &train[k].seq, train[k].label)?;
            total += loss;
            for ((_, p), (_, gp)) in model.params_mut().into_iter().zip(g.params()) {
                for (x, dx) in p.iter_mut().zip(gp) {
                    *x -= cfg.lr * (dx + cfg.weight_decay * *x);
                }
            }
        }
        if !model.is_finite() {
            return Err(Error::Validation(format!("training diverged in epoch {epoch}")));
        }
        let validation_f1 = if validation.is_empty() {
            None
        } else {
            Some(classification_f1(&model, validation)?)
        };
        history.push(PliEpochStats {
            epoch,
            train_loss: total / train.len() as f64,
            validation_f1,
        });
        log::debug!("pli epoch {epoch}: loss {:.6} val f1 {validation_f1:?}", total / train.len() as f64);
        if let Some(f1) = validation_f1 {
            if best.as_ref().is_none_or(|b| f1 > b.0) {
                best = Some((f1, epoch, model.clone()));
            }
        }
    }
    let (best_epoch, model) = match best {
        Some((_, e, m)) => (e, m),
        None => (cfg.max_epochs, model),
    };
    Ok(PliTrainOutcome { model, best_epoch, history })
}

/// Score-file record: softmax of the trained downstream model for one pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PliScore {
    pub qid: String,
    pub cid: String,
    pub probs: [f64; 2],
}

pub fn load_pli_scores(path: &Path) -> Result<BTreeMap<(String, String), [f64; 2]>> {
    let mut out = BTreeMap::new();
    let mut seen = HashSet::new();
    for (n, s) in jsonl::read_jsonl::<PliScore>(path)? {
        check_encoding(0, &[], &s.probs).map_err(|e| Error::parse(path, n, e))?;
        if !seen.insert((s.qid.clone(), s.cid.clone())) {
            return Err(Error::parse(path, n, format!("duplicate pair ({}, {})", s.qid, s.cid)));
        }
        out.insert((s.qid, s.cid), s.probs);
    }
    Ok(out)
}
