//! Constructed separable fixtures for the three trainers.

#![allow(dead_code)]

use coliee_core::duet::TopicFeatures;
use coliee_core::lexical::{DuetFeatures, DUET_DIM};
use coliee_core::ltr::{RankModel, RankQuery};
use coliee_core::pli::{InteractionMap, PliExample};
use rand::{RngExt, SeedableRng};
use rand_pcg::Pcg64;

/// Feature 1 is the relevance indicator; the other ten are uniform in ±`noise`.
pub fn duet_indicator_topics(n_topics: usize, noise: f64, seed: u64) -> Vec<TopicFeatures> {
    let mut rng = Pcg64::seed_from_u64(seed);
    (0..n_topics)
        .map(|q| TopicFeatures {
            qid: format!("q{q:02}"),
            candidates: (0..12)
                .map(|c| {
                    let rel = c < 3;
                    let mut v = [0.0; DUET_DIM];
                    v[0] = if rel { 1.0 } else { 0.0 };
                    if noise > 0.0 {
                        for x in v.iter_mut().skip(1) {
                            *x = rng.random_range(-noise..noise);
                        }
                    }
                    (format!("c{c:02}"), DuetFeatures(v), Some(rel))
                })
                .collect(),
        })
        .collect()
}

/// Random interaction maps labeled by the sign of the mean over all cell components.
///
/// Each map gets a shift drawn from ±[0.15, 0.6] so that no example sits on
/// the boundary; the label is still computed from the realized cells.
pub fn pli_separable_maps(n: usize, dim: usize, seed: u64) -> Vec<(InteractionMap, bool)> {
    let mut rng = Pcg64::seed_from_u64(seed);
    (0..n)
        .map(|k| {
            let rows = rng.random_range(1..=5usize);
            let cols = rng.random_range(1..=4usize);
            let magnitude = rng.random_range(0.15..0.6);
            let shift = if rng.random_bool(0.5) { magnitude } else { -magnitude };
            let vectors: Vec<f64> = (0..rows * cols * dim)
                .map(|_| rng.random_range(-1.0..1.0) + shift)
                .collect();
            let mean = vectors.iter().sum::<f64>() / vectors.len() as f64;
            let map = InteractionMap {
                qid: format!("q{k:03}"),
                cid: "c".into(),
                n: rows,
                m: cols,
                dim,
                vectors,
                probs: vec![[0.5, 0.5]; rows * cols],
            };
            (map, mean > 0.0)
        })
        .collect()
}

pub fn pli_separable_examples(n: usize, dim: usize, seed: u64) -> Vec<PliExample> {
    pli_separable_maps(n, dim, seed)
        .iter()
        .map(|(m, y)| PliExample::from_map(m, *y))
        .collect()
}

/// Queries whose relevant rows score strictly higher under a hidden linear
/// direction, with a gap of at least 0.5 between the classes.
pub fn ranksvm_separable(n_queries: usize, dim: usize, seed: u64) -> (Vec<RankQuery>, Vec<f64>) {
    let mut rng = Pcg64::seed_from_u64(seed);
    let truth: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let norm = truth.iter().map(|x| x * x).sum::<f64>().sqrt();
    let truth: Vec<f64> = truth.iter().map(|x| x / norm).collect();
    let queries = (0..n_queries)
        .map(|q| {
            let mut rows = Vec::new();
            while rows.len() < 10 {
                let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect();
                let s: f64 = x.iter().zip(&truth).map(|(a, b)| a * b).sum();
                if s.abs() >= 0.25 {
                    rows.push((x, s > 0.0));
                }
            }
            if !rows.iter().any(|r| r.1) {
                rows[0].0 = truth.iter().map(|t| t * 2.0).collect();
                rows[0].1 = true;
            }
            if rows.iter().all(|r| r.1) {
                rows[0].0 = truth.iter().map(|t| t * -2.0).collect();
                rows[0].1 = false;
            }
            RankQuery { qid: format!("q{q:02}"), rows }
        })
        .collect();
    (queries, truth)
}

/// Kendall τ between model scores and binary labels over within-query
/// (relevant, irrelevant) pairs: (concordant − discordant) / pairs, ties discordant.
pub fn kendall_tau(model: &RankModel, queries: &[RankQuery]) -> f64 {
    let (mut conc, mut total) = (0usize, 0usize);
    for q in queries {
        let scored: Vec<(f64, bool)> = q
            .rows
            .iter()
            .map(|(x, y)| (coliee_core::ltr::predict(model, x).unwrap(), *y))
            .collect();
        for a in &scored {
            for b in &scored {
                if a.1 && !b.1 {
                    total += 1;
                    if a.0 > b.0 {
                        conc += 1;
                    }
                }
            }
        }
    }
    (2.0 * conc as f64 - total as f64) / total as f64
}

/// Summed pairwise hinge loss of `model` over every topic.
pub fn duet_total_loss(model: &coliee_core::duet::DuetModel, topics: &[TopicFeatures]) -> f64 {
    topics
        .iter()
        .map(|t| {
            let pick = |want: bool| -> Vec<DuetFeatures> {
                t.candidates.iter().filter(|c| c.2 == Some(want)).map(|c| c.1).collect()
            };
            coliee_core::duet::hinge_loss(model, &pick(true), &pick(false))
        })
        .sum()
}

/// Ten rows per query with features uniform in [0, 1); relevant iff feature 1 > 0.5.
/// Every query gets at least one row of each class.
pub fn ranksvm_threshold_fixture(n_queries: usize, dim: usize, seed: u64) -> Vec<RankQuery> {
    let mut rng = Pcg64::seed_from_u64(seed);
    (0..n_queries)
        .map(|q| {
            let mut rows: Vec<(Vec<f64>, bool)> = (0..10)
                .map(|_| {
                    let x: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..1.0)).collect();
                    let rel = x[0] > 0.5;
                    (x, rel)
                })
                .collect();
            for (k, want) in [(0, true), (1, false)] {
                if !rows.iter().any(|r| r.1 == want) {
                    rows[k].0[0] = if want { 0.75 } else { 0.25 };
                    rows[k].1 = want;
                }
            }
            RankQuery { qid: format!("q{q:02}"), rows }
        })
        .collect()
}
