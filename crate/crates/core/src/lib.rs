//! Legal case retrieval and entailment pipeline.
//!
//! Retrieval ranks candidate cases for a query case with lexical features
//! (word-entity duet), a bigram-LMIR cascade, paragraph-interaction
//! aggregation over encoder vectors, and a pairwise RankSVM combination.
//! Entailment scores the paragraphs of a relevant case against a decision
//! fragment. Both are evaluated with micro-averaged precision, recall and F1.

pub mod cascade;
pub mod corpus;
pub mod duet;
pub mod error;
pub mod entail;
pub mod eval;
pub mod jsonl;
pub mod lexical;
pub mod pipeline;
pub mod pli;
pub mod synth;
pub mod ltr;
pub mod textproc;

pub use error::{Error, Result};
