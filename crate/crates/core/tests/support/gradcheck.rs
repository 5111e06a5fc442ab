//! Central finite-difference checks on random small instances.

#![allow(dead_code)]

use coliee_core::duet::{hinge_loss_and_grad, DuetModel};
use coliee_core::lexical::{DuetFeatures, DUET_DIM};
use coliee_core::pli::{loss_and_grad, PliModel};
use ndarray::Array2;
use rand::{RngExt, SeedableRng};
use rand_pcg::Pcg64;

use super::oracle;

/// Worst entry-wise |analytic − numeric| / max(|analytic|, |numeric|).
/// Entries where both sides are below `floor` are compared absolutely instead.
#[derive(Debug, Clone, Copy, Default)]
pub struct GradReport {
    pub max_rel: f64,
    pub max_abs_small: f64,
    pub checked: usize,
}

impl GradReport {
    fn add(&mut self, analytic: f64, numeric: f64, floor: f64) {
        self.checked += 1;
        let scale = analytic.abs().max(numeric.abs());
        let diff = (analytic - numeric).abs();
        if scale < floor {
            self.max_abs_small = self.max_abs_small.max(diff);
        } else {
            self.max_rel = self.max_rel.max(diff / scale);
        }
    }

    pub fn merge(&mut self, other: GradReport) {
        self.max_rel = self.max_rel.max(other.max_rel);
        self.max_abs_small = self.max_abs_small.max(other.max_abs_small);
        self.checked += other.checked;
    }
}

pub const FLOOR: f64 = 1e-7;

/// Duet hinge loss on 3 relevant and 4 irrelevant random feature vectors.
pub fn duet_instance(seed: u64) -> (DuetModel, Vec<DuetFeatures>, Vec<DuetFeatures>) {
    let mut rng = Pcg64::seed_from_u64(seed);
    let mut feats = |n: usize| -> Vec<DuetFeatures> {
        (0..n)
            .map(|_| {
                let mut v = [0.0; DUET_DIM];
                v.iter_mut().for_each(|x| *x = rng.random_range(-2.0..2.0));
                DuetFeatures(v)
            })
            .collect()
    };
    let pos = feats(3);
    let neg = feats(4);
    let mut model = DuetModel::default();
    model.w.iter_mut().for_each(|w| *w = rng.random_range(-0.5..0.5));
    model.b = rng.random_range(-0.5..0.5);
    (model, pos, neg)
}

pub fn duet_gradcheck(seed: u64, h: f64) -> GradReport {
    let (model, pos, neg) = duet_instance(seed);
    let pv: Vec<Vec<f64>> = pos.iter().map(|v| v.0.to_vec()).collect();
    let nv: Vec<Vec<f64>> = neg.iter().map(|v| v.0.to_vec()).collect();
    let (_, gw, gb) = hinge_loss_and_grad(&model, &pos, &neg);
    let mut theta: Vec<f64> = model.w.to_vec();
    theta.push(model.b);
    let analytic: Vec<f64> = gw.iter().copied().chain([gb]).collect();
    let loss = |t: &[f64]| oracle::duet_hinge(&t[..DUET_DIM], t[DUET_DIM], &pv, &nv);
    let mut rep = GradReport::default();
    for k in 0..theta.len() {
        let mut up = theta.clone();
        let mut down = theta.clone();
        up[k] += h;
        down[k] -= h;
        rep.add(analytic[k], (loss(&up) - loss(&down)) / (2.0 * h), FLOOR);
    }
    rep
}

/// Random model (d=6, h=5), sequence of 1 to 4 steps, random label.
pub fn pli_instance(seed: u64) -> (PliModel, Array2<f64>, bool) {
    let mut rng = Pcg64::seed_from_u64(seed);
    let mut model = PliModel::init(6, 5, seed).unwrap();
    for (_, p) in model.params_mut() {
        p.iter_mut().for_each(|x| *x = rng.random_range(-0.6..0.6));
    }
    let len = rng.random_range(1..=4usize);
    let seq = Array2::from_shape_fn((len, 6), |_| rng.random_range(-1.0..1.0));
    let label = rng.random_bool(0.5);
    (model, seq, label)
}

pub fn rows(seq: &Array2<f64>) -> Vec<Vec<f64>> {
    seq.rows().into_iter().map(|r| r.to_vec()).collect()
}

/// Returns the report and the largest |library loss − oracle loss|.
pub fn pli_gradcheck(seed: u64, h: f64) -> (GradReport, f64) {
    let (model, seq, label) = pli_instance(seed);
    let seq_rows = rows(&seq);
    let (loss, grad) = loss_and_grad(&model, &seq, label).unwrap();
    let loss_gap = (loss - oracle::pli_loss(&model, &seq_rows, label).0).abs();
    let mut rep = GradReport::default();
    let grads = grad.params();
    for (pi, (_, g)) in grads.iter().enumerate() {
        for k in 0..g.len() {
            let at = |delta: f64| {
                let mut m = model.clone();
                m.params_mut()[pi].1[k] += delta;
                oracle::pli_loss(&m, &seq_rows, label).0
            };
            rep.add(g[k], (at(h) - at(-h)) / (2.0 * h), FLOOR);
        }
    }
    (rep, loss_gap)
}
