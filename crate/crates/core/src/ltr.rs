//! Feature combination and pairwise ranking (RankSVM) for both tasks.
//!
//! Task 1 uses 17 features per cascade survivor, Task 2 uses 7 per paragraph.
//! The ranker is a linear pairwise SVM
//!
//! ```text
//! min_w  ½‖w‖² + C · Σ_{(i,j) ∈ P} max(0, 1 − w·(x_i − x_j))
//! ```
//!
//! over within-query (relevant, irrelevant) pairs of min–max scaled features,
//! solved with averaged Pegasos subgradient steps (step 1/(λt), λ = 1/(C|P|),
//! projection onto the ball of radius 1/√λ).

use std::path::Path;

use rand::SeedableRng;
use rand_pcg::Pcg32;
use serde::{Deserialize, Serialize};

use crate::corpus::shuffle;
use crate::error::{Error, Result};
use crate::jsonl;
use crate::lexical::{DuetFeatures, DUET_DIM};

pub const TASK1_DIM: usize = 17;
pub const TASK2_DIM: usize = 7;
pub const TASK1_LAYOUT: &str = "task1-v1";
pub const TASK2_LAYOUT: &str = "task2-v1";
/// Minimum selections per query in Task 1.
pub const TASK1_MIN_SELECTED: usize = 3;

const PROB_TOL: f64 = 1e-6;

fn check_probs(name: &str, p: &[f64; 2]) -> Result<()> {
    if p.iter().any(|x| !x.is_finite() || *x < 0.0) || (p[0] + p[1] - 1.0).abs() > PROB_TOL {
        return Err(Error::Validation(format!("{name} {p:?} is not a probability pair")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Task1Features(pub [f64; TASK1_DIM]);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Task2Features(pub [f64; TASK2_DIM]);

/// Dims 1–11 duet, 12 SDR-word, 13 SDR-entity, 14–15 paragraph-interaction
/// softmax, 16–17 first-paragraph pair softmax.
pub fn assemble_task1(
    duet: &DuetFeatures,
    sdr_w: f64,
    sdr_e: f64,
    pli_probs: [f64; 2],
    firstpara_probs: [f64; 2],
) -> Result<Task1Features> {
    check_probs("interaction probs", &pli_probs)?;
    check_probs("first-paragraph probs", &firstpara_probs)?;
    let mut v = [0.0; TASK1_DIM];
    v[..DUET_DIM].copy_from_slice(&duet.0);
    v[11] = sdr_w;
    v[12] = sdr_e;
    v[13..15].copy_from_slice(&pli_probs);
    v[15..17].copy_from_slice(&firstpara_probs);
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Validation("task 1 features contain a non-finite value".into()));
    }
    Ok(Task1Features(v))
}

/// Dims 1–2 symmetric-run softmax, 3–4 asymmetric-run softmax, 5 BM25,
/// 6 1-based paragraph position, 7 paragraph length in tokens.
pub fn assemble_task2(
    sym_probs: [f64; 2],
    asym_probs: [f64; 2],
    bm25: f64,
    para_idx: usize,
    para_len: usize,
) -> Result<Task2Features> {
    check_probs("symmetric probs", &sym_probs)?;
    check_probs("asymmetric probs", &asym_probs)?;
    if para_idx == 0 || para_len == 0 {
        return Err(Error::Validation(format!(
            "paragraph position {para_idx} and length {para_len} must be positive"
        )));
    }
    if !bm25.is_finite() {
        return Err(Error::Validation("bm25 is not finite".into()));
    }
    Ok(Task2Features([
        sym_probs[0],
        sym_probs[1],
        asym_probs[0],
        asym_probs[1],
        bm25,
        para_idx as f64,
        para_len as f64,
    ]))
}

/// Per-feature min–max scaling; constant features map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MinMaxScaler(pub Vec<[f64; 2]>);

impl MinMaxScaler {
    pub fn fit<'a>(rows: impl IntoIterator<Item = &'a [f64]>) -> Result<Self> {
        let mut bounds: Option<Vec<[f64; 2]>> = None;
        for r in rows {
            let b = bounds.get_or_insert_with(|| vec![[f64::INFINITY, f64::NEG_INFINITY]; r.len()]);
            if b.len() != r.len() {
                return Err(Error::Dimension { expected: b.len(), actual: r.len() });
            }
            for (mm, &x) in b.iter_mut().zip(r) {
                mm[0] = mm[0].min(x);
                mm[1] = mm[1].max(x);
            }
        }
        bounds
            .map(MinMaxScaler)
            .ok_or_else(|| Error::InvalidInput("cannot fit a scaler on zero rows".into()))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), actual: x.len() });
        }
        Ok(x.iter()
            .zip(&self.0)
            .map(|(&v, &[lo, hi])| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankModel {
    pub w: Vec<f64>,
    #[serde(rename = "C")]
    pub c: f64,
    pub scaler: MinMaxScaler,
}

impl RankModel {
    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: RankModel = serde_json::from_str(text)?;
        if m.w.len() != m.scaler.dim() {
            return Err(Error::Dimension { expected: m.scaler.dim(), actual: m.w.len() });
        }
        if !(m.c > 0.0) || m.w.iter().any(|x| !x.is_finite()) {
            return Err(Error::Validation("rank model has invalid C or weights".into()));
        }
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&jsonl::read_to_string(path)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankSvmConfig {
    pub c: f64,
    pub iterations: usize,
    /// Pairs per step; all pairs are used when there are at most this many.
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for RankSvmConfig {
    fn default() -> Self {
        RankSvmConfig {
            c: 1.0,
            iterations: 2000,
            batch_size: 4096,
            seed: 0,
        }
    }
}

/// Labeled feature rows of one query.
#[derive(Debug, Clone, PartialEq)]
pub struct RankQuery {
    pub qid: String,
    pub rows: Vec<(Vec<f64>, bool)>,
}

/// Scaled within-query preference differences x⁺ − x⁻.
fn preference_pairs(queries: &[RankQuery], scaler: &MinMaxScaler) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    for q in queries {
        let scaled: Vec<(Vec<f64>, bool)> = q
            .rows
            .iter()
            .map(|(x, y)| scaler.transform(x).map(|s| (s, *y)))
            .collect::<Result<_>>()?;
        for (xp, _) in scaled.iter().filter(|r| r.1) {
            for (xn, _) in scaled.iter().filter(|r| !r.1) {
                out.push(xp.iter().zip(xn).map(|(a, b)| a - b).collect());
            }
        }
    }
    Ok(out)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// ½‖w‖² + C·Σ hinge over the given difference vectors.
pub fn ranksvm_objective(w: &[f64], c: f64, diffs: &[Vec<f64>]) -> f64 {
    0.5 * dot(w, w) + c * diffs.iter().map(|d| (1.0 - dot(w, d)).max(0.0)).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankSvmTrace {
    pub model: RankModel,
    /// Objective of the averaged iterate after each step.
    pub objective: Vec<f64>,
}

pub fn ranksvm_train(queries: &[RankQuery], cfg: &RankSvmConfig) -> Result<RankModel> {
    Ok(ranksvm_train_traced(queries, cfg, false)?.model)
}

/// As [`ranksvm_train`], optionally recording the averaged-iterate objective.
pub fn ranksvm_train_traced(queries: &[RankQuery], cfg: &RankSvmConfig, trace: bool) -> Result<RankSvmTrace> {
    if !(cfg.c > 0.0) || !cfg.c.is_finite() {
        return Err(Error::InvalidInput(format!("C must be > 0, got {}", cfg.c)));
    }
    if cfg.iterations == 0 || cfg.batch_size == 0 {
        return Err(Error::InvalidInput("iterations and batch_size must be >= 1".into()));
    }
    let scaler = MinMaxScaler::fit(queries.iter().flat_map(|q| q.rows.iter().map(|r| r.0.as_slice())))?;
    let diffs = preference_pairs(queries, &scaler)?;
    if diffs.is_empty() {
        return Err(Error::InvalidInput("no within-query preference pair to train on".into()));
    }
    let dim = scaler.dim();
    let m = diffs.len();
    let lambda = 1.0 / (cfg.c * m as f64);
    let radius = 1.0 / lambda.sqrt();

    let mut rng = Pcg32::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..m).collect();
    let mut w = vec![0.0; dim];
    let mut avg = vec![0.0; dim];
    let mut objective = Vec::new();
    for t in 1..=cfg.iterations {
        let batch: &[usize] = if m <= cfg.batch_size {
            &order
        } else {
            shuffle(&mut order, &mut rng);
            &order[..cfg.batch_size]
        };
        let eta = 1.0 / (lambda * t as f64);
        let mut step = vec![0.0; dim];
        for &i in batch {
            let d = &diffs[i];
            if dot(&w, d) < 1.0 {
                for (s, x) in step.iter_mut().zip(d) {
                    *s += x;
                }
            }
        }
        let shrink = 1.0 - eta * lambda;
        let scale = eta / batch.len() as f64;
        for (wk, s) in w.iter_mut().zip(&step) {
            *wk = shrink * *wk + scale * s;
        }
        let norm = dot(&w, &w).sqrt();
        if norm > radius {
            w.iter_mut().for_each(|x| *x *= radius / norm);
        }
        for (a, x) in avg.iter_mut().zip(&w) {
            *a += (x - *a) / t as f64;
        }
        if trace {
            objective.push(ranksvm_objective(&avg, cfg.c, &diffs));
        }
    }
    Ok(RankSvmTrace {
        model: RankModel { w: avg, c: cfg.c, scaler },
        objective,
    })
}

/// w · scale(x).
pub fn predict(model: &RankModel, features: &[f64]) -> Result<f64> {
    Ok(dot(&model.w, &model.scaler.transform(features)?))
}

/// Non-negative scores are relevant; fewer than three selections are padded
/// with the best remaining candidates. Output is in score order (cid
/// ascending on ties).
pub fn select_task1(scores: &[(String, f64)]) -> Vec<String> {
    let mut ranked: Vec<&(String, f64)> = scores.iter().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let non_negative = ranked.iter().take_while(|r| r.1 >= 0.0).count();
    let n = non_negative.max(TASK1_MIN_SELECTED.min(ranked.len()));
    ranked[..n].iter().map(|r| r.0.clone()).collect()
}

/// 1-based indices of non-negative scores, or the argmax alone (smallest
/// index on ties) when every score is negative.
pub fn select_task2(scores: &[f64]) -> Vec<usize> {
    let chosen: Vec<usize> = scores
        .iter()
        .enumerate()
        .filter(|(_, s)| **s >= 0.0)
        .map(|(i, _)| i + 1)
        .collect();
    if !chosen.is_empty() || scores.is_empty() {
        return chosen;
    }
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = i;
        }
    }
    vec![best + 1]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureFileHeader {
    pub layout: String,
}

/// One feature row; exactly one of `cid` (task 1) or `para_idx` (task 2) is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureRecord {
    pub qid: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cid: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub para_idx: Option<usize>,
    pub features: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<u8>,
}

impl FeatureRecord {
    /// The item id as used in run files.
    pub fn item_id(&self) -> String {
        match (&self.cid, self.para_idx) {
            (Some(c), _) => c.clone(),
            (None, Some(i)) => i.to_string(),
            (None, None) => String::new(),
        }
    }
}

pub fn layout_dim(layout: &str) -> Result<usize> {
    match layout {
        TASK1_LAYOUT => Ok(TASK1_DIM),
        TASK2_LAYOUT => Ok(TASK2_DIM),
        other => Err(Error::Validation(format!("unknown feature layout {other:?}"))),
    }
}

pub fn feature_file_string(layout: &str, records: &[FeatureRecord]) -> Result<String> {
    let dim = layout_dim(layout)?;
    if let Some(r) = records.iter().find(|r| r.features.len() != dim) {
        return Err(Error::Dimension { expected: dim, actual: r.features.len() });
    }
    let mut out = serde_json::to_string(&FeatureFileHeader { layout: layout.into() })? + "\n";
    out.push_str(&jsonl::to_jsonl_string(records)?);
    Ok(out)
}

pub fn load_feature_file(path: &Path) -> Result<(String, Vec<FeatureRecord>)> {
    let mut lines = jsonl::read_lines(path)?.into_iter();
    let (n, first) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "missing layout header"))?;
    let header: FeatureFileHeader = jsonl::parse_line(path, n, &first)?;
    let dim = layout_dim(&header.layout).map_err(|e| Error::parse(path, n, e))?;
    let task1 = header.layout == TASK1_LAYOUT;
    let mut out = Vec::new();
    for (n, line) in lines {
        let r: FeatureRecord = jsonl::parse_line(path, n, &line)?;
        if r.features.len() != dim {
            return Err(Error::parse(path, n, Error::Dimension { expected: dim, actual: r.features.len() }));
        }
        if task1 != r.cid.is_some() || task1 == r.para_idx.is_some() {
            return Err(Error::parse(path, n, "record id field does not match the layout"));
        }
        if matches!(r.label, Some(l) if l > 1) {
            return Err(Error::parse(path, n, "label must be 0 or 1"));
        }
        out.push(r);
    }
    Ok((header.layout, out))
}

/// Groups labeled records into training queries (file order preserved).
pub fn rank_queries(records: &[FeatureRecord]) -> Vec<RankQuery> {
    let mut out: Vec<RankQuery> = Vec::new();
    for r in records {
        let Some(label) = r.label else { continue };
        match out.last_mut() {
            Some(q) if q.qid == r.qid => q.rows.push((r.features.clone(), label == 1)),
            _ => out.push(RankQuery {
                qid: r.qid.clone(),
                rows: vec![(r.features.clone(), label == 1)],
            }),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::RngExt;

    #[test]
    fn task1_layout() {
        let duet = DuetFeatures(std::array::from_fn(|i| i as f64 + 1.0));
        let f = assemble_task1(&duet, 0.4, 0.2, [0.3, 0.7], [0.9, 0.1]).unwrap();
        let mut expect = [0.0; 17];
        for (i, e) in expect.iter_mut().enumerate().take(11) {
            *e = i as f64 + 1.0;
        }
        expect[11] = 0.4;
        expect[12] = 0.2;
        expect[13] = 0.3;
        expect[14] = 0.7;
        expect[15] = 0.9;
        expect[16] = 0.1;
        assert_eq!(f.0, expect);
        assert!(assemble_task1(&duet, 0.4, 0.2, [0.3, 0.6], [0.9, 0.1]).is_err());
    }

    #[test]
    fn task2_layout() {
        let f = assemble_task2([0.4, 0.6], [0.2, 0.8], 3.5, 4, 120).unwrap();
        assert_eq!(f.0, [0.4, 0.6, 0.2, 0.8, 3.5, 4.0, 120.0]);
        assert!(assemble_task2([0.4, 0.6], [0.2, 0.8], 3.5, 0, 120).is_err());
        assert!(assemble_task2([0.4, 0.6], [0.2, 0.9], 3.5, 1, 120).is_err());
    }

    #[test]
    fn select_task1_rules() {
        let s = |v: &[f64]| -> Vec<(String, f64)> { v.iter().enumerate().map(|(i, x)| (format!("c{i}"), *x)).collect() };
        assert_eq!(select_task1(&s(&[0.5, -0.1, 0.2, -0.3])), vec!["c0", "c2", "c1"]);
        assert_eq!(select_task1(&s(&[0.5, 0.1, 0.2, 0.3, 0.0])).len(), 5);
        assert_eq!(select_task1(&s(&[-0.5, -0.1])), vec!["c1", "c0"]);
        assert!(select_task1(&[]).is_empty());
    }

    #[test]
    fn select_task2_rules() {
        assert_eq!(select_task2(&[-0.4, -0.1, -0.9]), vec![2]);
        assert_eq!(select_task2(&[0.0, -1.0]), vec![1]);
        assert_eq!(select_task2(&[0.2, 0.3]), vec![1, 2]);
        assert_eq!(select_task2(&[-1.0, -1.0]), vec![1]);
    }

    #[test]
    fn predict_hand_value() {
        let model = RankModel {
            w: vec![1.0, -2.0, 0.5],
            c: 1.0,
            scaler: MinMaxScaler(vec![[0.0, 2.0], [1.0, 3.0], [-1.0, 1.0]]),
        };
        // scaled: [0.5, 0.5, 1.0] → 0.5 - 1.0 + 0.5
        assert_relative_eq!(predict(&model, &[1.0, 2.0, 1.0]).unwrap(), 0.0, epsilon = 1e-15);
        assert_relative_eq!(predict(&model, &[2.0, 1.0, 0.0]).unwrap(), 1.25, epsilon = 1e-15);
        assert_eq!(predict(&model, &[0.0, 1.0, -1.0]).unwrap(), 0.0);
        assert!(predict(&model, &[1.0]).is_err());
    }

    fn separable(seed: u64, n_q: usize) -> Vec<RankQuery> {
        let mut rng = Pcg32::seed_from_u64(seed);
        (0..n_q)
            .map(|q| RankQuery {
                qid: format!("q{q}"),
                rows: (0..10)
                    .map(|i| {
                        let rel = i < 3;
                        let f1 = if rel { rng.random_range(0.6..1.0) } else { rng.random_range(0.0..0.4) };
                        let x = vec![f1, rng.random_range(0.0..1.0), rng.random_range(-5.0..5.0)];
                        (x, rel)
                    })
                    .collect(),
            })
            .collect()
    }

    #[test]
    fn separable_pairs_ordered() {
        let data = separable(5, 6);
        let model = ranksvm_train(&data, &RankSvmConfig { c: 20.0, ..Default::default() }).unwrap();
        for q in &data {
            for (xp, _) in q.rows.iter().filter(|r| r.1) {
                for (xn, _) in q.rows.iter().filter(|r| !r.1) {
                    assert!(predict(&model, xp).unwrap() > predict(&model, xn).unwrap());
                }
            }
        }
    }

    #[test]
    fn train_errors_and_determinism() {
        let data = separable(2, 3);
        assert!(ranksvm_train(&data, &RankSvmConfig { c: 0.0, ..Default::default() }).is_err());
        let one_class = vec![RankQuery { qid: "q".into(), rows: vec![(vec![1.0], true), (vec![2.0], true)] }];
        assert!(ranksvm_train(&one_class, &RankSvmConfig::default()).is_err());
        let cfg = RankSvmConfig { c: 1.0, batch_size: 16, iterations: 300, seed: 11 };
        assert_eq!(ranksvm_train(&data, &cfg).unwrap(), ranksvm_train(&data, &cfg).unwrap());
    }

    #[test]
    fn averaged_objective_non_increasing() {
        let data = separable(9, 4);
        let cfg = RankSvmConfig { c: 1.0, iterations: 400, ..Default::default() };
        let t = ranksvm_train_traced(&data, &cfg, true).unwrap();
        for (i, w) in t.objective.windows(2).enumerate() {
            assert!(w[1] <= w[0] * (1.0 + 1e-12), "step {}: {} -> {}", i + 2, w[0], w[1]);
        }
    }

    #[test]
    fn feature_file_round_trip_bit_exact() {
        let recs = vec![
            FeatureRecord { qid: "q".into(), cid: Some("a".into()), para_idx: None, features: (0..17).map(|i| (i as f64).sqrt() * 1e-7 - 0.1).collect(), label: Some(1) },
            FeatureRecord { qid: "q".into(), cid: Some("b".into()), para_idx: None, features: vec![f64::MIN_POSITIVE; 17], label: None },
        ];
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.jsonl");
        jsonl::write_string(&p, &feature_file_string(TASK1_LAYOUT, &recs).unwrap()).unwrap();
        let (layout, back) = load_feature_file(&p).unwrap();
        assert_eq!(layout, TASK1_LAYOUT);
        for (a, b) in recs.iter().zip(&back) {
            let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(&a.features), bits(&b.features));
        }
        assert_eq!(back, recs);
        assert!(feature_file_string(TASK2_LAYOUT, &recs).is_err());
    }

    #[test]
    fn model_json_round_trip() {
        let data = separable(1, 3);
        let m = ranksvm_train(&data, &RankSvmConfig::default()).unwrap();
        assert_eq!(RankModel::from_json(&m.to_json().unwrap()).unwrap(), m);
        assert!(m.to_json().unwrap().contains("\"C\":"));
    }

    proptest! {
        #[test]
        fn ordering_invariant_under_affine_rescale(seed in 0u64..50, a in 0.1f64..10.0, b in -5.0f64..5.0) {
            let data = separable(seed, 4);
            let cfg = RankSvmConfig { c: 5.0, iterations: 300, ..Default::default() };
            let base = ranksvm_train(&data, &cfg).unwrap();
            let resc: Vec<RankQuery> = data.iter().map(|q| RankQuery {
                qid: q.qid.clone(),
                rows: q.rows.iter().map(|(x, y)| { let mut x = x.clone(); x[2] = a * x[2] + b; (x, *y) }).collect(),
            }).collect();
            let other = ranksvm_train(&resc, &cfg).unwrap();
            for (q, r) in data.iter().zip(&resc) {
                let s1: Vec<f64> = q.rows.iter().map(|x| predict(&base, &x.0).unwrap()).collect();
                let s2: Vec<f64> = r.rows.iter().map(|x| predict(&other, &x.0).unwrap()).collect();
                for i in 0..s1.len() {
                    for j in 0..s1.len() {
                        if (s1[i] - s1[j]).abs() > 1e-9 {
                            prop_assert_eq!(s1[i] > s1[j], s2[i] > s2[j]);
                        }
                    }
                }
            }
        }

        #[test]
        fn select_task1_size_bounds(scores in proptest::collection::vec(-1.0f64..1.0, 0..40)) {
            let s: Vec<(String, f64)> = scores.iter().enumerate().map(|(i, x)| (format!("c{i:02}"), *x)).collect();
            let out = select_task1(&s);
            prop_assert!(out.len() >= 3.min(s.len()) && out.len() <= s.len());
        }

        #[test]
        fn select_task2_never_empty(scores in proptest::collection::vec(-1.0f64..1.0, 1..40)) {
            prop_assert!(!select_task2(&scores).is_empty());
        }
    }
}
