//! Keyword extraction: tag an utterance, chunk noun phrases, keep noun keywords.
//!
//! The pipeline is pure. `KeywordExtractor::extract` on the same text always
//! returns the same spans, which the replay harness depends on.

mod chunk;
mod tagger;

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use chunk::chunk_noun_phrases;
pub use tagger::{tokenize, RuleTagger, Tagger};

const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords.tsv");

/// Coarse part-of-speech tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Pos {
    Noun,
    Propn,
    Adj,
    Det,
    Pron,
    Verb,
    Adp,
    Num,
    Other,
}

impl Pos {
    pub fn is_noun(self) -> bool {
        matches!(self, Pos::Noun | Pos::Propn)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Pos::Noun => "NOUN",
            Pos::Propn => "PROPN",
            Pos::Adj => "ADJ",
            Pos::Det => "DET",
            Pos::Pron => "PRON",
            Pos::Verb => "VERB",
            Pos::Adp => "ADP",
            Pos::Num => "NUM",
            Pos::Other => "OTHER",
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pos {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Ok(match s {
            "NOUN" => Pos::Noun,
            "PROPN" => Pos::Propn,
            "ADJ" => Pos::Adj,
            "DET" => Pos::Det,
            "PRON" => Pos::Pron,
            "VERB" => Pos::Verb,
            "ADP" => Pos::Adp,
            "NUM" => Pos::Num,
            "OTHER" => Pos::Other,
            _ => return Err(()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub pos: Pos,
    pub index: usize,
}

/// A noun-headed phrase found in an utterance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordSpan {
    /// Token texts joined by single spaces, original casing.
    pub surface: String,
    /// Lowercased, single-spaced form used for matching and dedup.
    pub normalized: String,
    pub token_start: usize,
    /// Inclusive.
    pub token_end: usize,
    #[serde(skip)]
    pub(crate) all_numeric: bool,
}

impl KeywordSpan {
    /// Builds a span from `tokens[start..=end]`.
    pub fn from_tokens(tokens: &[Token], start: usize, end: usize) -> Self {
        let slice = &tokens[start..=end];
        let surface = slice
            .iter()
            .map(|t| t.text.as_str())
            .collect::<Vec<_>>()
            .join(" ");
        Self {
            normalized: normalize(&surface),
            surface,
            token_start: slice[0].index,
            token_end: slice[slice.len() - 1].index,
            all_numeric: slice.iter().all(|t| t.pos == Pos::Num),
        }
    }

    /// A span standing for a bare keyword, e.g. from an authoring table lookup.
    pub fn bare(text: &str) -> Self {
        let words = text.split_whitespace().count().max(1);
        Self {
            surface: text.split_whitespace().collect::<Vec<_>>().join(" "),
            normalized: normalize(text),
            token_start: 0,
            token_end: words - 1,
            all_numeric: false,
        }
    }
}

/// Lowercase and collapse whitespace.
pub fn normalize(text: &str) -> String {
    text.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Fixed function-word list used by [`filter_keywords`].
#[derive(Debug, Clone)]
pub struct Stopwords(HashSet<String>);

impl Default for Stopwords {
    fn default() -> Self {
        Self::from_tsv(DEFAULT_STOPWORDS).expect("bundled stopwords parse")
    }
}

impl Stopwords {
    pub fn from_tsv(src: &str) -> Result<Self, String> {
        Ok(Self(
            tagger::parse_tsv(src)?
                .into_iter()
                .map(|(w, _)| normalize(&w))
                .collect(),
        ))
    }

    pub fn contains(&self, normalized: &str) -> bool {
        self.0.contains(normalized)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Drops stopword spans and all-number spans, then dedups by normalized form
/// keeping the first occurrence.
pub fn filter_keywords(spans: Vec<KeywordSpan>, stopwords: &Stopwords) -> Vec<KeywordSpan> {
    let mut seen = HashSet::new();
    spans
        .into_iter()
        .filter(|s| !s.all_numeric && !stopwords.contains(&s.normalized))
        .filter(|s| seen.insert(s.normalized.clone()))
        .collect()
}

/// tag → chunk → filter, with a swappable tagger.
pub struct KeywordExtractor {
    tagger: Box<dyn Tagger>,
    stopwords: Stopwords,
}

impl fmt::Debug for KeywordExtractor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeywordExtractor")
            .field("stopwords", &self.stopwords.len())
            .finish_non_exhaustive()
    }
}

impl Default for KeywordExtractor {
    fn default() -> Self {
        Self::new(Box::new(RuleTagger::default()), Stopwords::default())
    }
}

impl KeywordExtractor {
    pub fn new(tagger: Box<dyn Tagger>, stopwords: Stopwords) -> Self {
        Self { tagger, stopwords }
    }

    /// Loads a lexicon and stopword list from `word<TAB>TAG` files.
    pub fn from_files(lexicon: &Path, stopwords: &Path) -> std::io::Result<Self> {
        let invalid = |e: String| std::io::Error::new(std::io::ErrorKind::InvalidData, e);
        let tagger = RuleTagger::from_tsv(&std::fs::read_to_string(lexicon)?).map_err(invalid)?;
        let stop = Stopwords::from_tsv(&std::fs::read_to_string(stopwords)?).map_err(invalid)?;
        Ok(Self::new(Box::new(tagger), stop))
    }

    pub fn tag(&self, text: &str) -> Vec<Token> {
        self.tagger.tag(text)
    }

    pub fn extract(&self, text: &str) -> Vec<KeywordSpan> {
        if text.trim().is_empty() {
            return Vec::new();
        }
        let tokens = self.tagger.tag(text);
        filter_keywords(chunk_noun_phrases(&tokens), &self.stopwords)
    }

    pub fn stopwords(&self) -> &Stopwords {
        &self.stopwords
    }
}
