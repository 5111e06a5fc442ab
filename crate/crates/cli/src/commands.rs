//! One function per subcommand. Each reads its inputs, writes its declared
//! outputs, and echoes arguments plus the resolved configuration into
//! `<primary output>.meta.json`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use coliee_core::cascade::{cascade_file_string, load_cascade};
use coliee_core::corpus::{
    apply_entailment_labels, apply_retrieval_labels, entailment_corpus_to_string, entailment_labels_to_string,
    load_entailment_corpus, load_entailment_labels, load_retrieval_corpus, load_retrieval_labels,
    retrieval_corpus_to_string, retrieval_labels_to_string, split_dataset, DatasetSplit, RetrievalCorpus,
};
use coliee_core::duet::{self, rank_top5, run_from_ranked, DuetModel};
use coliee_core::entail::{
    build_entail_pairs, classify_pairs, decide_standalone, load_entail_scores, scores_to_string, PairRequest,
    TruncationMode,
};
use coliee_core::eval::{load_qrels, micro_metrics, RunResult};
use coliee_core::jsonl;
use coliee_core::ltr::{
    feature_file_string, rank_queries, ranksvm_train, FeatureRecord, RankModel, TASK1_LAYOUT, TASK2_LAYOUT,
};
use coliee_core::pipeline::{
    apply_rank_model, cascade_all, duet_dump, load_feature_dump, pli_examples, prepare_retrieval, retrieval_texts,
    task1_records, task2_records, topic_features, Task,
};
use coliee_core::pli::{
    build_interaction_map, embeddings_to_string, load_embeddings, load_pli_scores, pli_pair_requests, predict_map,
    toy_hash_encoder, train_pli, EmbeddingHeader, EncoderProvider, PliModel, PliScore,
};
use coliee_core::synth::{generate, SynthConfig};
use coliee_core::textproc::{Gazetteer, Stopwords};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Config;
use crate::{
    CascadeArgs, CombineApplyArgs, CombineInputs, CombineTrainArgs, EntailPairsArgs, EntailScoreArgs, EvaluateArgs,
    FeaturesDuetArgs, GenSyntheticArgs, IngestArgs, ModeArg, PliPairsArgs, PliScoreArgs, PliTrainArgs,
    RankDuetArgs, SplitArgs, Subset, SubsetArgs, TaskArg, TrainDuetArgs,
};

fn write(path: &Path, contents: &str) -> Result<()> {
    jsonl::write_string(path, contents)?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn meta_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    out.with_file_name(name)
}

fn write_meta<A: Serialize>(path: &Path, command: &str, args: &A, cfg: &Config, extra: Value) -> Result<()> {
    let doc = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "args": args,
        "config": cfg,
        "result": extra,
    });
    write(path, &(serde_json::to_string_pretty(&doc)? + "\n"))
}

fn stopwords(cfg: &Config) -> Result<Stopwords> {
    Ok(match &cfg.paths.stopwords {
        Some(p) => Stopwords::from_file(p)?,
        None => Stopwords::english(),
    })
}

fn gazetteer(cfg: &Config, corpus: &RetrievalCorpus, sw: &Stopwords) -> Result<Gazetteer> {
    Ok(match &cfg.paths.gazetteer {
        Some(p) => Gazetteer::from_file(p)?,
        None => Gazetteer::auto_build(retrieval_texts(corpus), sw),
    })
}

fn subset_filter(args: &SubsetArgs) -> Result<Box<dyn Fn(&str) -> bool>> {
    match (&args.split, args.subset) {
        (_, Subset::All) => Ok(Box::new(|_| true)),
        (None, s) => bail!("--subset {s:?} needs --split"),
        (Some(p), Subset::Train) => {
            let s = DatasetSplit::load(p)?;
            Ok(Box::new(move |q| s.is_train(q)))
        }
        (Some(p), Subset::Validation) => {
            let s = DatasetSplit::load(p)?;
            Ok(Box::new(move |q| s.is_validation(q)))
        }
    }
}

fn write_run(run: &RunResult, out: &Path, ranking_out: Option<&Path>) -> Result<()> {
    write(out, &run.selection_file_string())?;
    if let Some(r) = ranking_out {
        write(r, &run.ranking_file_string())?;
    }
    Ok(())
}

pub fn ingest(a: &IngestArgs, cfg: &Config) -> Result<()> {
    let summary = match a.task {
        TaskArg::Retrieval => {
            let mut corpus = load_retrieval_corpus(&a.corpus)?;
            let labeled = match &a.labels {
                Some(p) => {
                    let labels = load_retrieval_labels(p)?;
                    apply_retrieval_labels(&mut corpus.topics, &labels)?;
                    Some(labels.values().map(BTreeSet::len).sum::<usize>())
                }
                None => None,
            };
            let sw = stopwords(cfg)?;
            let gaz = gazetteer(cfg, &corpus, &sw)?;
            if let Some(g) = &a.gazetteer_out {
                write(g, &gaz.to_file_string())?;
            }
            json!({
                "task": "retrieval",
                "topics": corpus.topics.len(),
                "candidates": corpus.topics.iter().map(|t| t.candidates.len()).sum::<usize>(),
                "query_paragraphs": corpus.topics.iter().map(|t| t.query.paragraphs.len()).sum::<usize>(),
                "candidate_paragraphs": corpus.topics.iter().flat_map(|t| &t.candidates).map(|c| c.paragraphs.len()).sum::<usize>(),
                "relevant": labeled,
                "gazetteer_entries": gaz.len(),
                "header": corpus.header,
            })
        }
        TaskArg::Entailment => {
            let mut corpus = load_entailment_corpus(&a.corpus)?;
            let labeled = match &a.labels {
                Some(p) => {
                    let labels = load_entailment_labels(p)?;
                    apply_entailment_labels(&mut corpus.topics, &labels)?;
                    Some(labels.values().map(BTreeSet::len).sum::<usize>())
                }
                None => None,
            };
            json!({
                "task": "entailment",
                "topics": corpus.topics.len(),
                "paragraphs": corpus.topics.iter().map(|t| t.paragraphs.len()).sum::<usize>(),
                "entailing": labeled,
                "header": corpus.header,
            })
        }
    };
    write(&a.out, &(serde_json::to_string_pretty(&summary)? + "\n"))?;
    write_meta(&meta_path(&a.out), "ingest", a, cfg, Value::Null)
}

pub fn split(a: &SplitArgs, cfg: &Config) -> Result<()> {
    let ids: Vec<String> = match a.task {
        TaskArg::Retrieval => load_retrieval_corpus(&a.corpus)?.topics.iter().map(|t| t.qid().to_string()).collect(),
        TaskArg::Entailment => load_entailment_corpus(&a.corpus)?.topics.into_iter().map(|t| t.id).collect(),
    };
    let s = split_dataset(&ids, a.ratio.unwrap_or(cfg.split.ratio), cfg.seed)?;
    write(&a.out, &s.to_json()?)?;
    let extra = json!({"train": s.train_topic_ids.len(), "validation": s.validation_topic_ids.len()});
    write_meta(&meta_path(&a.out), "split", a, cfg, extra)
}

pub fn features_duet(a: &FeaturesDuetArgs, cfg: &Config) -> Result<()> {
    let corpus = load_retrieval_corpus(&a.corpus)?;
    let sw = stopwords(cfg)?;
    let gaz = gazetteer(cfg, &corpus, &sw)?;
    let prep = prepare_retrieval(&corpus, &sw, &gaz)?;
    let dump = duet_dump(&prep, &cfg.lexical)?;
    write(&a.out, &jsonl::to_jsonl_string(&dump)?)?;
    let extra = json!({"pairs": dump.len(), "feature_order": coliee_core::lexical::DUET_FEATURE_ORDER});
    write_meta(&meta_path(&a.out), "features-duet", a, cfg, extra)
}

pub fn train_duet(a: &TrainDuetArgs, cfg: &Config) -> Result<()> {
    let dump = load_feature_dump(&a.features)?;
    let labels = load_retrieval_labels(&a.labels)?;
    let s = DatasetSplit::load(&a.split)?;
    let train = topic_features(&dump, Some(&labels), |q| s.is_train(q));
    let val = topic_features(&dump, Some(&labels), |q| s.is_validation(q));
    let out = duet::train(&train, &cfg.duet_train(), &val)?;
    write(&a.out, &out.model.to_json()?)?;
    let extra = json!({"best_epoch": out.best_epoch, "history": out.history});
    write_meta(&meta_path(&a.out), "train-duet", a, cfg, extra)
}

pub fn rank_duet(a: &RankDuetArgs, cfg: &Config) -> Result<()> {
    let dump = load_feature_dump(&a.features)?;
    let model = DuetModel::load(&a.model)?;
    let keep = subset_filter(&a.subset)?;
    let topics = topic_features(&dump, None, keep);
    let ranked: Vec<_> = topics.iter().map(|t| rank_top5(&model, t)).collect();
    write_run(&run_from_ranked(&ranked)?, &a.out, a.ranking_out.as_deref())?;
    write_meta(&meta_path(&a.out), "rank-duet", a, cfg, json!({"queries": ranked.len()}))
}

pub fn cascade(a: &CascadeArgs, cfg: &Config) -> Result<()> {
    let corpus = load_retrieval_corpus(&a.corpus)?;
    let sw = stopwords(cfg)?;
    let gaz = gazetteer(cfg, &corpus, &sw)?;
    let prep = prepare_retrieval(&corpus, &sw, &gaz)?;
    let k = a.k.unwrap_or(cfg.cascade.k);
    let results = cascade_all(&prep, &cfg.lexical, k)?;
    write(&a.out, &cascade_file_string(&results))?;
    write_meta(&meta_path(&a.out), "cascade", a, cfg, json!({"k": k, "queries": results.len()}))
}

pub fn pli_pairs(a: &PliPairsArgs, cfg: &Config) -> Result<()> {
    let corpus = load_retrieval_corpus(&a.corpus)?;
    let cascade = load_cascade(&a.cascade)?;
    let topics: BTreeMap<&str, _> = corpus.topics.iter().map(|t| (t.qid(), t)).collect();
    let mut pairs = Vec::new();
    for res in &cascade {
        let t = topics
            .get(res.qid.as_str())
            .with_context(|| format!("cascade query {} not in corpus", res.qid))?;
        for (cid, _) in &res.kept {
            let c = t
                .candidates
                .iter()
                .find(|c| &c.id == cid)
                .with_context(|| format!("cascade candidate {cid} not in query {}", res.qid))?;
            pairs.push((&t.query, c));
        }
    }
    let mut requests = Vec::new();
    for (q, c) in &pairs {
        requests.extend(pli_pair_requests(q, c, cfg.pli.n_max, cfg.pli.m_max)?);
    }
    write(&a.out, &jsonl::to_jsonl_string(&requests)?)?;
    if let Some(path) = &a.toy_embeddings {
        let enc = toy_hash_encoder(cfg.encoder.dim, cfg.encoder.seed)?;
        let maps = pairs
            .iter()
            .map(|(q, c)| build_interaction_map(q, c, &enc, cfg.pli.n_max, cfg.pli.m_max))
            .collect::<coliee_core::Result<Vec<_>>>()?;
        let header = EmbeddingHeader { dim: enc.dim(), encoder: enc.name() };
        write(path, &embeddings_to_string(&header, &maps)?)?;
    }
    let extra = json!({"pairs": pairs.len(), "requests": requests.len()});
    write_meta(&meta_path(&a.out), "pli-pairs", a, cfg, extra)
}

pub fn pli_train(a: &PliTrainArgs, cfg: &Config) -> Result<()> {
    let (_, maps) = load_embeddings(&a.embeddings)?;
    let labels = load_retrieval_labels(&a.labels)?;
    let s = DatasetSplit::load(&a.split)?;
    let train = pli_examples(&maps, &labels, |q| s.is_train(q));
    let val = pli_examples(&maps, &labels, |q| s.is_validation(q));
    let out = train_pli(&train, &val, &cfg.pli_train())?;
    write(&a.out, &out.model.to_json()?)?;
    let extra = json!({
        "train_examples": train.len(),
        "validation_examples": val.len(),
        "best_epoch": out.best_epoch,
        "history": out.history,
    });
    write_meta(&meta_path(&a.out), "pli-train", a, cfg, extra)
}

pub fn pli_score(a: &PliScoreArgs, cfg: &Config) -> Result<()> {
    let (_, maps) = load_embeddings(&a.embeddings)?;
    let model = PliModel::load(&a.model)?;
    let scores = maps
        .par_iter()
        .map(|((q, c), m)| {
            Ok(PliScore { qid: q.clone(), cid: c.clone(), probs: predict_map(&model, m)? })
        })
        .collect::<coliee_core::Result<Vec<_>>>()?;
    write(&a.out, &jsonl::to_jsonl_string(&scores)?)?;
    write_meta(&meta_path(&a.out), "pli-score", a, cfg, json!({"pairs": scores.len()}))
}

pub fn entail_pairs(a: &EntailPairsArgs, cfg: &Config) -> Result<()> {
    let corpus = load_entailment_corpus(&a.corpus)?;
    let mode = match a.mode {
        ModeArg::Symmetric => TruncationMode::Symmetric,
        ModeArg::Asymmetric => TruncationMode::Asymmetric,
    };
    let pairs: Vec<PairRequest> = corpus.topics.iter().flat_map(|t| build_entail_pairs(t, mode)).collect();
    write(&a.out, &jsonl::to_jsonl_string(&pairs)?)?;
    write_meta(&meta_path(&a.out), "entail-pairs", a, cfg, json!({"pairs": pairs.len()}))
}

pub fn entail_score(a: &EntailScoreArgs, cfg: &Config) -> Result<()> {
    let pairs: Vec<PairRequest> = jsonl::read_jsonl(&a.pairs)?.into_iter().map(|(_, p)| p).collect();
    let enc = toy_hash_encoder(cfg.encoder.dim, cfg.encoder.seed)?;
    let scores = classify_pairs(&pairs, &enc)?;
    write(&a.out, &scores_to_string(&scores)?)?;
    if let Some(d) = &a.decisions_out {
        let table = load_entail_scores(&a.out)?;
        let mut run = RunResult::default();
        for (qid, probs) in &table {
            let dec = decide_standalone(qid, probs)?;
            run.select(qid, dec.selected_idx.iter().map(usize::to_string).collect())?;
        }
        write(d, &run.selection_file_string())?;
    }
    write_meta(&meta_path(&a.out), "entail-score", a, cfg, json!({"encoder": enc.name(), "pairs": scores.len()}))
}

fn need<'a>(p: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    p.as_deref().with_context(|| format!("--{flag} is required for this task"))
}

/// Assembled rows, their layout name, and the task.
fn combined_records(inp: &CombineInputs, cfg: &Config, with_labels: Option<&Path>) -> Result<(Vec<FeatureRecord>, &'static str, Task)> {
    match inp.task {
        TaskArg::Retrieval => {
            let dump = load_feature_dump(need(&inp.duet_features, "duet-features")?)?;
            let cascade = load_cascade(need(&inp.cascade, "cascade")?)?;
            let pli = load_pli_scores(need(&inp.pli_scores, "pli-scores")?)?;
            let (_, maps) = load_embeddings(need(&inp.embeddings, "embeddings")?)?;
            let labels = with_labels.map(load_retrieval_labels).transpose()?;
            let recs = task1_records(&dump, &cascade, &pli, &maps, labels.as_ref())?;
            Ok((recs, TASK1_LAYOUT, Task::Retrieval))
        }
        TaskArg::Entailment => {
            let corpus = load_entailment_corpus(need(&inp.corpus, "corpus")?)?;
            let sym = load_entail_scores(need(&inp.sym_scores, "sym-scores")?)?;
            let asym = load_entail_scores(need(&inp.asym_scores, "asym-scores")?)?;
            let labels = with_labels.map(load_entailment_labels).transpose()?;
            let recs = task2_records(&corpus, &sym, &asym, &stopwords(cfg)?, &cfg.lexical, labels.as_ref())?;
            Ok((recs, TASK2_LAYOUT, Task::Entailment))
        }
    }
}

pub fn combine_train(a: &CombineTrainArgs, cfg: &Config) -> Result<()> {
    let (records, layout, task) = combined_records(&a.inputs, cfg, Some(&a.labels))?;
    if let Some(p) = &a.inputs.features_out {
        write(p, &feature_file_string(layout, &records)?)?;
    }
    let s = DatasetSplit::load(&a.split)?;
    let train: Vec<FeatureRecord> = records.into_iter().filter(|r| s.is_train(&r.qid)).collect();
    let c = match task {
        Task::Retrieval => cfg.ltr.c_task1,
        Task::Entailment => cfg.ltr.c_task2,
    };
    let model = ranksvm_train(&rank_queries(&train), &cfg.ranksvm(c))?;
    write(&a.out, &model.to_json()?)?;
    write_meta(&meta_path(&a.out), "combine-train", a, cfg, json!({"layout": layout, "train_rows": train.len()}))
}

pub fn combine_apply(a: &CombineApplyArgs, cfg: &Config) -> Result<()> {
    let (records, layout, task) = combined_records(&a.inputs, cfg, None)?;
    if let Some(p) = &a.inputs.features_out {
        write(p, &feature_file_string(layout, &records)?)?;
    }
    let model = RankModel::load(&a.model)?;
    let keep = subset_filter(&a.subset)?;
    let rows: Vec<FeatureRecord> = records.into_iter().filter(|r| keep(&r.qid)).collect();
    let run = apply_rank_model(&model, &rows, task)?;
    write_run(&run, &a.out, a.ranking_out.as_deref())?;
    write_meta(&meta_path(&a.out), "combine-apply", a, cfg, json!({"layout": layout, "queries": run.selections.len()}))
}

pub fn evaluate(a: &EvaluateArgs, cfg: &Config) -> Result<()> {
    let keep = subset_filter(&a.subset)?;
    let qrels: coliee_core::eval::Qrels = load_qrels(&a.qrels)?.into_iter().filter(|(q, _)| keep(q)).collect();
    let ids: BTreeSet<String> = qrels.keys().cloned().collect();
    let run = RunResult::load_selection(&a.run)?;
    if let Some(q) = run.selections.keys().find(|q| keep(q) && !ids.contains(*q)) {
        bail!("run query {q} has no labels");
    }
    let report = micro_metrics(&run.restrict(&ids), &qrels)?;
    let text = serde_json::to_string_pretty(&report)? + "\n";
    print!("{text}");
    if let Some(out) = &a.out {
        write(out, &text)?;
        write_meta(&meta_path(out), "evaluate", a, cfg, Value::Null)?;
    }
    Ok(())
}

pub fn gen_synthetic(a: &GenSyntheticArgs, cfg: &Config) -> Result<()> {
    let sc = SynthConfig {
        queries: a.queries,
        candidates: a.candidates,
        entail_topics: a.queries,
        seed: cfg.seed,
        ..SynthConfig::default()
    };
    let data = generate(&sc)?;
    let d = &a.out_dir;
    write(&d.join("task1_corpus.jsonl"), &retrieval_corpus_to_string(&data.retrieval)?)?;
    write(&d.join("task1_labels.jsonl"), &retrieval_labels_to_string(&data.retrieval_labels)?)?;
    write(&d.join("task2_corpus.jsonl"), &entailment_corpus_to_string(&data.entailment)?)?;
    write(&d.join("task2_labels.jsonl"), &entailment_labels_to_string(&data.entailment_labels)?)?;
    let mut desk = Config::desk_scale();
    desk.seed = cfg.seed;
    write(&d.join("config.toml"), &desk.to_toml()?)?;
    write_meta(&d.join("gen-synthetic.meta.json"), "gen-synthetic", a, cfg, json!({"synthetic": sc}))
}
