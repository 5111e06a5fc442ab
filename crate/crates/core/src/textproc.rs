//! Tokenization, stopword filtering, gazetteer entity matching and bigrams.

use std::collections::{BTreeSet, HashSet};
use std::path::Path;

use crate::corpus::CaseDocument;
use crate::error::Result;
use crate::jsonl;

const ENGLISH_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");
/// Version tag of the bundled list, recorded in run metadata.
pub const STOPWORDS_VERSION: &str = "en-179-v1";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    /// The bundled standard English list.
    pub fn english() -> Self {
        Self::parse(ENGLISH_STOPWORDS)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// One token per line; blank lines ignored; entries are lowercased.
    pub fn parse(text: &str) -> Self {
        Stopwords(
            text.lines()
                .map(|l| l.trim().to_lowercase())
                .filter(|l| !l.is_empty())
                .collect(),
        )
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Ok(Self::parse(&jsonl::read_to_string(path)?))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for Stopwords {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Stopwords(iter.into_iter().map(|s| s.into().to_lowercase()).collect())
    }
}

fn trim_punct(piece: &str) -> &str {
    piece.trim_matches(|c: char| !c.is_alphanumeric())
}

/// Splits on Unicode whitespace, lowercases, trims non-alphanumeric
/// characters from both ends of each piece, then drops empties and stopwords.
pub fn tokenize(text: &str, stopwords: &Stopwords) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|piece| {
            let lower = piece.to_lowercase();
            let tok = trim_punct(&lower);
            (!tok.is_empty() && !stopwords.contains(tok)).then(|| tok.to_string())
        })
        .collect()
}

/// Adjacent token pairs, in order.
pub fn bigrams<S: AsRef<str>>(tokens: &[S]) -> Vec<(&str, &str)> {
    tokens
        .windows(2)
        .map(|w| (w[0].as_ref(), w[1].as_ref()))
        .collect()
}

/// Set of token sequences recognized as entities.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Gazetteer {
    entries: HashSet<Vec<String>>,
    max_len: usize,
}

impl Gazetteer {
    pub fn new<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = Vec<S>>,
        S: Into<String>,
    {
        let mut g = Gazetteer::default();
        for e in entries {
            g.insert(e.into_iter().map(Into::into).collect());
        }
        g
    }

    pub fn insert(&mut self, entry: Vec<String>) {
        if entry.is_empty() {
            return;
        }
        self.max_len = self.max_len.max(entry.len());
        self.entries.insert(entry);
    }

    pub fn contains(&self, seq: &[String]) -> bool {
        self.entries.contains(seq)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// One space-separated token sequence per line, lowercased.
    pub fn parse(text: &str) -> Self {
        Gazetteer::new(text.lines().map(|l| {
            l.split_whitespace()
                .map(str::to_lowercase)
                .collect::<Vec<String>>()
        }))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Ok(Self::parse(&jsonl::read_to_string(path)?))
    }

    /// Sorted, one entry per line.
    pub fn to_file_string(&self) -> String {
        let sorted: BTreeSet<String> = self.entries.iter().map(|e| e.join(" ")).collect();
        let mut out = String::new();
        for line in sorted {
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    /// Builds a gazetteer from capitalized multi-word spans of raw text.
    ///
    /// A span is a maximal run of at least two whitespace-separated pieces whose
    /// first alphanumeric character is uppercase; a piece ending in punctuation
    /// closes the run. Each span is passed through [`tokenize`] and kept when
    /// at least two tokens survive.
    pub fn auto_build<'a>(texts: impl IntoIterator<Item = &'a str>, stopwords: &Stopwords) -> Self {
        let mut g = Gazetteer::default();
        for text in texts {
            let mut run: Vec<&str> = Vec::new();
            let flush = |run: &mut Vec<&str>, g: &mut Gazetteer| {
                if run.len() >= 2 {
                    let toks = tokenize(&run.join(" "), stopwords);
                    if toks.len() >= 2 {
                        g.insert(toks);
                    }
                }
                run.clear();
            };
            for piece in text.split_whitespace() {
                let core = trim_punct(piece);
                let capitalized = core.chars().next().is_some_and(char::is_uppercase);
                if !capitalized {
                    flush(&mut run, &mut g);
                    continue;
                }
                let leading_break = piece.chars().next().is_some_and(|c| !c.is_alphanumeric());
                if leading_break {
                    flush(&mut run, &mut g);
                }
                run.push(piece);
                if piece.chars().last().is_some_and(|c| !c.is_alphanumeric()) {
                    flush(&mut run, &mut g);
                }
            }
            flush(&mut run, &mut g);
        }
        g
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Entity {
    pub paragraph: usize,
    pub start: usize,
    pub surface_tokens: Vec<String>,
}

impl Entity {
    pub fn surface(&self) -> String {
        self.surface_tokens.join(" ")
    }
}

/// Leftmost-longest, non-overlapping gazetteer matches over `tokens`.
pub fn extract_entities<S: AsRef<str>>(tokens: &[S], gazetteer: &Gazetteer) -> Vec<Entity> {
    extract_entities_in(0, tokens, gazetteer)
}

fn extract_entities_in<S: AsRef<str>>(paragraph: usize, tokens: &[S], gazetteer: &Gazetteer) -> Vec<Entity> {
    let mut out = Vec::new();
    if gazetteer.is_empty() {
        return out;
    }
    let owned: Vec<String> = tokens.iter().map(|t| t.as_ref().to_string()).collect();
    let mut pos = 0;
    while pos < owned.len() {
        let longest = (1..=gazetteer.max_len.min(owned.len() - pos))
            .rev()
            .find(|&len| gazetteer.contains(&owned[pos..pos + len]));
        match longest {
            Some(len) => {
                out.push(Entity {
                    paragraph,
                    start: pos,
                    surface_tokens: owned[pos..pos + len].to_vec(),
                });
                pos += len;
            }
            None => pos += 1,
        }
    }
    out
}

/// A case document after tokenization, with entities matched per paragraph
/// on the stopword-filtered stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedDoc {
    pub doc_id: String,
    pub paragraphs_tokens: Vec<Vec<String>>,
    pub flat_tokens: Vec<String>,
    pub entities: Vec<Entity>,
}

impl TokenizedDoc {
    pub fn new(doc: &CaseDocument, stopwords: &Stopwords, gazetteer: &Gazetteer) -> Self {
        Self::from_paragraphs(&doc.id, &doc.paragraphs, stopwords, gazetteer)
    }

    pub fn from_paragraphs<S: AsRef<str>>(
        doc_id: &str,
        paragraphs: &[S],
        stopwords: &Stopwords,
        gazetteer: &Gazetteer,
    ) -> Self {
        let paragraphs_tokens: Vec<Vec<String>> = paragraphs
            .iter()
            .map(|p| tokenize(p.as_ref(), stopwords))
            .collect();
        let entities = paragraphs_tokens
            .iter()
            .enumerate()
            .flat_map(|(i, toks)| extract_entities_in(i, toks, gazetteer))
            .collect();
        TokenizedDoc {
            doc_id: doc_id.to_string(),
            flat_tokens: paragraphs_tokens.concat(),
            paragraphs_tokens,
            entities,
        }
    }

    /// Distinct entity surface forms, sorted.
    pub fn entity_surfaces(&self) -> BTreeSet<String> {
        self.entities.iter().map(Entity::surface).collect()
    }

    /// Distinct tokens appearing inside any entity, sorted.
    pub fn entity_token_set(&self) -> BTreeSet<String> {
        self.entities
            .iter()
            .flat_map(|e| e.surface_tokens.iter().cloned())
            .collect()
    }
}
