use coliee_core::lexical::{bigram_lmir, duet_features, sdr_similarity, LexicalParams, SdrSpace};
use coliee_core::ltr::TASK1_DIM;
use coliee_core::pipeline::{cascade_all, duet_dump, prepare_retrieval, task1_records};
use coliee_core::pli::{build_interaction_map, toy_hash_encoder, EmbeddingMaps, M_MAX, N_MAX};
use coliee_core::synth::{generate, SynthConfig};
use coliee_core::textproc::{Gazetteer, Stopwords};

fn small() -> coliee_core::synth::SyntheticData {
    generate(&SynthConfig { queries: 3, candidates: 8, seed: 9, ..SynthConfig::default() }).unwrap()
}

#[test]
fn dump_equals_per_pair_scorers() {
    let data = small();
    let sw = Stopwords::english();
    let gaz = Gazetteer::auto_build(coliee_core::pipeline::retrieval_texts(&data.retrieval), &sw);
    let prep = prepare_retrieval(&data.retrieval, &sw, &gaz).unwrap();
    let p = LexicalParams::default();
    let dump = duet_dump(&prep, &p).unwrap();
    assert_eq!(dump.len(), 3 * 8);
    let mut k = 0;
    for t in &prep.topics {
        for c in &t.candidates {
            let r = &dump[k];
            k += 1;
            assert_eq!((r.qid.as_str(), r.cid.as_str()), (t.query.doc_id.as_str(), c.doc_id.as_str()));
            assert_eq!(r.duet, duet_features(&t.query, c, &prep.stats, &p).unwrap());
            assert_eq!(r.sdr_w, sdr_similarity(&t.query, c, &prep.stats, SdrSpace::Word));
            assert_eq!(r.sdr_e, sdr_similarity(&t.query, c, &prep.stats, SdrSpace::Entity));
            assert_eq!(r.lmir, bigram_lmir(&t.query, c, &prep.stats.words, &p).unwrap());
        }
    }
}

#[test]
fn task1_rows_cover_cascade_survivors() {
    let data = small();
    let sw = Stopwords::english();
    let prep = prepare_retrieval(&data.retrieval, &sw, &Gazetteer::default()).unwrap();
    let p = LexicalParams::default();
    let dump = duet_dump(&prep, &p).unwrap();
    let cascade = cascade_all(&prep, &p, 4).unwrap();
    let enc = toy_hash_encoder(6, 1).unwrap();
    let mut maps = EmbeddingMaps::new();
    let mut scores = std::collections::BTreeMap::new();
    for (topic, res) in data.retrieval.topics.iter().zip(&cascade) {
        for (cid, _) in &res.kept {
            let cand = topic.candidates.iter().find(|c| &c.id == cid).unwrap();
            let map = build_interaction_map(&topic.query, cand, &enc, N_MAX, M_MAX).unwrap();
            scores.insert((res.qid.clone(), cid.clone()), [0.3, 0.7]);
            maps.insert((res.qid.clone(), cid.clone()), map);
        }
    }
    let rows = task1_records(&dump, &cascade, &scores, &maps, Some(&data.retrieval_labels)).unwrap();
    assert_eq!(rows.len(), 3 * 4);
    assert!(rows.iter().all(|r| r.features.len() == TASK1_DIM && r.label.is_some()));

    scores.pop_first();
    assert!(task1_records(&dump, &cascade, &scores, &maps, None).is_err());
}
