#![allow(dead_code)]

use coliee_core::textproc::{Gazetteer, Stopwords, TokenizedDoc};

pub const FIVE_DOCS: [(&str, &str); 5] = [
    (
        "d1",
        "The Federal Court of Appeal dismissed the appeal. The appellant relied on procedural fairness and procedural delay.",
    ),
    (
        "d2",
        "Procedural fairness requires notice. The Federal Court granted judicial review on procedural fairness grounds.",
    ),
    (
        "d3",
        "The tax court considered the income tax act and found no error of law in the assessment.",
    ),
    (
        "d4",
        "Judicial review of the immigration officer decision; the Federal Court of Appeal certified a question.",
    ),
    (
        "d5",
        "Costs awarded. Appeal allowed in part because the officer ignored procedural fairness and delay.",
    ),
];

pub fn five_doc_gazetteer() -> Gazetteer {
    Gazetteer::parse(
        "federal court of appeal\nfederal court\nprocedural fairness\njudicial review\nincome tax act\nimmigration officer\n",
    )
}

/// The five documents tokenized with the English stopword list.
pub fn five_docs() -> Vec<TokenizedDoc> {
    let sw = Stopwords::english();
    let gaz = five_doc_gazetteer();
    FIVE_DOCS
        .iter()
        .map(|(id, text)| {
            let paras: Vec<&str> = text.split(". ").collect();
            TokenizedDoc::from_paragraphs(id, &paras, &sw, &gaz)
        })
        .collect()
}

/// Absolute difference scaled by max(1, |expected|).
pub fn scaled_err(actual: f64, expected: f64) -> f64 {
    (actual - expected).abs() / expected.abs().max(1.0)
}
