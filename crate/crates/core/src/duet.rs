//! Word-entity duet ranker: a sigmoid-scored linear model over the 11 duet
//! features, trained with the pairwise hinge loss
//!
//! ```text
//! f(q, d) = sigmoid(w · v + b)
//! L(q)    = Σ_{d+} Σ_{d-} max(0, 1 - f(q, d+) + f(q, d-))
//! ```
//!
//! by plain SGD with one update per training topic.

use std::path::Path;

use rand::SeedableRng;
use rand_pcg::Pcg32;
use serde::{Deserialize, Serialize};

use crate::corpus::shuffle;
use crate::error::{Error, Result};
use crate::eval::{micro_metrics, Qrels, RunResult};
use crate::jsonl;
use crate::lexical::{DuetFeatures, DUET_DIM, DUET_FEATURE_ORDER};

/// Documents returned per query.
pub const TOP_K: usize = 5;

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuetModel {
    pub w: [f64; DUET_DIM],
    pub b: f64,
}

impl Default for DuetModel {
    fn default() -> Self {
        DuetModel {
            w: [0.0; DUET_DIM],
            b: 0.0,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    w: Vec<f64>,
    b: f64,
    feature_order: String,
}

impl DuetModel {
    /// Pre-sigmoid value w·v + b.
    pub fn linear(&self, v: &DuetFeatures) -> f64 {
        self.w.iter().zip(v.0.iter()).map(|(w, x)| w * x).sum::<f64>() + self.b
    }

    pub fn score(&self, v: &DuetFeatures) -> f64 {
        sigmoid(self.linear(v))
    }

    pub fn is_finite(&self) -> bool {
        self.b.is_finite() && self.w.iter().all(|w| w.is_finite())
    }

    pub fn to_json(&self) -> Result<String> {
        let f = ModelFile {
            w: self.w.to_vec(),
            b: self.b,
            feature_order: DUET_FEATURE_ORDER.into(),
        };
        Ok(serde_json::to_string(&f)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: ModelFile = serde_json::from_str(text)?;
        if f.feature_order != DUET_FEATURE_ORDER {
            return Err(Error::Validation(format!(
                "model feature order {:?}, expected {DUET_FEATURE_ORDER:?}",
                f.feature_order
            )));
        }
        let w: [f64; DUET_DIM] = f.w.try_into().map_err(|w: Vec<f64>| Error::Dimension {
            expected: DUET_DIM,
            actual: w.len(),
        })?;
        let m = DuetModel { w, b: f.b };
        if !m.is_finite() {
            return Err(Error::Validation("model has non-finite parameters".into()));
        }
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&jsonl::read_to_string(path)?)
    }
}

pub fn score(model: &DuetModel, v: &DuetFeatures) -> f64 {
    model.score(v)
}

/// Pairwise hinge loss summed over every (relevant, irrelevant) pair.
pub fn hinge_loss(model: &DuetModel, pos: &[DuetFeatures], neg: &[DuetFeatures]) -> f64 {
    hinge_loss_and_grad(model, pos, neg).0
}

/// Loss together with its (sub)gradient w.r.t. `w` and `b`.
pub fn hinge_loss_and_grad(
    model: &DuetModel,
    pos: &[DuetFeatures],
    neg: &[DuetFeatures],
) -> (f64, [f64; DUET_DIM], f64) {
    let pos_s: Vec<f64> = pos.iter().map(|v| model.score(v)).collect();
    let neg_s: Vec<f64> = neg.iter().map(|v| model.score(v)).collect();
    let mut loss = 0.0;
    let mut gw = [0.0; DUET_DIM];
    let mut gb = 0.0;
    for (vp, &fp) in pos.iter().zip(&pos_s) {
        for (vn, &fn_) in neg.iter().zip(&neg_s) {
            let margin = 1.0 - fp + fn_;
            if margin <= 0.0 {
                continue;
            }
            loss += margin;
            // d/dθ of (f- - f+), with dσ/dz = σ(1-σ)
            let dp = fp * (1.0 - fp);
            let dn = fn_ * (1.0 - fn_);
            for k in 0..DUET_DIM {
                gw[k] += dn * vn.0[k] - dp * vp.0[k];
            }
            gb += dn - dp;
        }
    }
    (loss, gw, gb)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub max_epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-4,
            weight_decay: 0.0,
            max_epochs: 20,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidInput("learning_rate must be > 0".into()));
        }
        if self.max_epochs == 0 {
            return Err(Error::InvalidInput("max_epochs must be >= 1".into()));
        }
        if !(self.weight_decay >= 0.0) {
            return Err(Error::InvalidInput("weight_decay must be >= 0".into()));
        }
        Ok(())
    }
}

/// Candidate features of one query; `relevant` is `None` when unlabeled.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicFeatures {
    pub qid: String,
    pub candidates: Vec<(String, DuetFeatures, Option<bool>)>,
}

impl TopicFeatures {
    fn split_labels(&self) -> (Vec<DuetFeatures>, Vec<DuetFeatures>) {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for (_, v, rel) in &self.candidates {
            match rel {
                Some(true) => pos.push(*v),
                Some(false) => neg.push(*v),
                None => {}
            }
        }
        (pos, neg)
    }

    fn qrels_entry(&self) -> Option<(String, std::collections::BTreeSet<String>)> {
        if self.candidates.iter().any(|c| c.2.is_none()) {
            return None;
        }
        Some((
            self.qid.clone(),
            self.candidates
                .iter()
                .filter(|c| c.2 == Some(true))
                .map(|c| c.0.clone())
                .collect(),
        ))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedTopic {
    pub qid: String,
    /// (cid, sigmoid score), best first.
    pub ranking: Vec<(String, f64)>,
    pub selected: Vec<String>,
}

/// Scores every candidate and selects the top `min(5, n)`.
///
/// Candidates are ordered by the pre-sigmoid value (identical order to the
/// sigmoid score, without saturation ties), then by cid ascending.
pub fn rank_top5(model: &DuetModel, topic: &TopicFeatures) -> RankedTopic {
    let mut rows: Vec<(String, f64, f64)> = topic
        .candidates
        .iter()
        .map(|(cid, v, _)| {
            let z = model.linear(v);
            (cid.clone(), z, sigmoid(z))
        })
        .collect();
    rows.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let selected = rows.iter().take(TOP_K).map(|r| r.0.clone()).collect();
    RankedTopic {
        qid: topic.qid.clone(),
        ranking: rows.into_iter().map(|(c, _, s)| (c, s)).collect(),
        selected,
    }
}

pub fn run_from_ranked(ranked: &[RankedTopic]) -> Result<RunResult> {
    let mut run = RunResult::default();
    for r in ranked {
        run.select(&r.qid, r.selected.clone())?;
        run.rankings.insert(r.qid.clone(), r.ranking.clone());
    }
    Ok(run)
}

/// Micro-F1 of [`rank_top5`] over labeled topics.
pub fn top5_f1(model: &DuetModel, topics: &[TopicFeatures]) -> Result<f64> {
    let qrels: Qrels = topics.iter().filter_map(TopicFeatures::qrels_entry).collect();
    let ranked: Vec<RankedTopic> = topics
        .iter()
        .filter(|t| qrels.contains_key(&t.qid))
        .map(|t| rank_top5(model, t))
        .collect();
    Ok(micro_metrics(&run_from_ranked(&ranked)?, &qrels)?.f1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochStats {
    pub epoch: usize,
    /// Hinge loss summed over training topics after the epoch.
    pub train_loss: f64,
    pub validation_f1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: DuetModel,
    /// 1-based epoch of the returned snapshot.
    pub best_epoch: usize,
    pub history: Vec<EpochStats>,
}

/// Trains from w = 0, b = 0. Topic order is reshuffled each epoch from
/// `cfg.seed`. The snapshot with the best validation F1 is returned (earliest
/// on ties); without validation topics the last epoch wins.
pub fn train(
    topics: &[TopicFeatures],
    cfg: &TrainConfig,
    validation: &[TopicFeatures],
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let mut batches = Vec::new();
    for t in topics {
        let (pos, neg) = t.split_labels();
        if pos.is_empty() || neg.is_empty() {
            log::warn!(
                "skipping topic {}: {} relevant / {} irrelevant labeled candidates",
                t.qid,
                pos.len(),
                neg.len()
            );
            continue;
        }
        batches.push((pos, neg));
    }
    if batches.is_empty() {
        return Err(Error::InvalidInput(
            "no training topic has both relevant and irrelevant candidates".into(),
        ));
    }
    let has_validation = validation.iter().any(|t| t.qrels_entry().is_some());

    let mut rng = Pcg32::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..batches.len()).collect();
    let mut model = DuetModel::default();
    let mut best: Option<(f64, usize, DuetModel)> = None;
    let mut history = Vec::with_capacity(cfg.max_epochs);

    for epoch in 1..=cfg.max_epochs {
        shuffle(&mut order, &mut rng);
        for &i in &order {
            let (pos, neg) = &batches[i];
            let (_, gw, gb) = hinge_loss_and_grad(&model, pos, neg);
            for k in 0..DUET_DIM {
                model.w[k] -= cfg.learning_rate * (gw[k] + cfg.weight_decay * model.w[k]);
            }
            model.b -= cfg.learning_rate * gb;
        }
        if !model.is_finite() {
            return Err(Error::InvalidInput(format!(
                "training diverged at epoch {epoch}; lower the learning rate"
            )));
        }
        let train_loss = batches.iter().map(|(p, n)| hinge_loss(&model, p, n)).sum();
        let validation_f1 = if has_validation {
            Some(top5_f1(&model, validation)?)
        } else {
            None
        };
        log::debug!("duet epoch {epoch}: loss {train_loss:.6} val_f1 {validation_f1:?}");
        history.push(EpochStats {
            epoch,
            train_loss,
            validation_f1,
        });
        let key = validation_f1.unwrap_or(0.0);
        let improves = match &best {
            None => true,
            Some((f, _, _)) => !has_validation || key > *f,
        };
        if improves {
            best = Some((key, epoch, model));
        }
    }
    let (_, best_epoch, model) = best.expect("at least one epoch ran");
    Ok(TrainOutcome {
        model,
        best_epoch,
        history,
    })
}
