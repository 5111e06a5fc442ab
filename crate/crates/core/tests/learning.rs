mod support {
    #[path = "learning.rs"]
    pub mod learning;
}

use coliee_core::duet::{self, TrainConfig};
use coliee_core::ltr::{ranksvm_train, RankSvmConfig};
use coliee_core::pli::{accuracy, train_pli, PliTrainConfig};
use support::learning::*;

#[test]
fn duet_reaches_exact_zero_loss_on_indicator_fixture() {
    let topics = duet_indicator_topics(8, 0.0, 5);
    let cfg = TrainConfig { learning_rate: 1e4, max_epochs: 20, seed: 3, ..Default::default() };
    let out = duet::train(&topics, &cfg, &[]).unwrap();
    let first_zero = out.history.iter().position(|h| h.train_loss == 0.0);
    assert!(first_zero.is_some(), "{:?}", out.history);
    assert_eq!(duet_total_loss(&out.model, &topics), 0.0);
}

#[test]
fn duet_orders_every_pair_on_noisy_fixture() {
    let topics = duet_indicator_topics(8, 0.1, 5);
    let cfg = TrainConfig { learning_rate: 1.0, seed: 3, ..Default::default() };
    let out = duet::train(&topics, &cfg, &[]).unwrap();
    for t in &topics {
        for (_, p, yp) in &t.candidates {
            for (_, n, yn) in &t.candidates {
                if *yp == Some(true) && *yn == Some(false) {
                    assert!(out.model.linear(p) > out.model.linear(n));
                }
            }
        }
    }
    assert!(duet_total_loss(&out.model, &topics) < 0.2);
}

#[test]
fn pli_fits_separable_maps() {
    let examples = pli_separable_examples(80, 8, 7);
    let cfg = PliTrainConfig { lr: 0.03, hidden: 16, max_epochs: 60, seed: 0, ..Default::default() };
    let out = train_pli(&examples, &[], &cfg).unwrap();
    let acc = accuracy(&out.model, &examples).unwrap();
    assert!(acc >= 0.95, "accuracy {acc}");
    assert_eq!(out.history.len(), 60);
}

#[test]
fn ranksvm_orders_separable_queries() {
    let (queries, _) = ranksvm_separable(12, 5, 4);
    let model = ranksvm_train(&queries, &RankSvmConfig { c: 20.0, seed: 1, ..Default::default() }).unwrap();
    assert_eq!(kendall_tau(&model, &queries), 1.0);
}

#[test]
fn ranksvm_orders_threshold_fixture() {
    for seed in 0..5 {
        let queries = ranksvm_threshold_fixture(12, 4, seed);
        let model = ranksvm_train(&queries, &RankSvmConfig { c: 20.0, seed, ..Default::default() }).unwrap();
        assert_eq!(kendall_tau(&model, &queries), 1.0, "seed {seed}: w {:?}", model.w);
    }
}
