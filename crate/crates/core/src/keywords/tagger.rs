use std::collections::HashMap;
use std::sync::OnceLock;

use regex::Regex;

use super::{Pos, Token};

const DEFAULT_LEXICON: &str = include_str!("../../data/lexicon.tsv");

/// Assigns coarse part-of-speech tags to utterance text.
///
/// Implementations must be deterministic: the replay harness assumes the
/// same text always yields the same tags.
pub trait Tagger: Send + Sync {
    fn tag(&self, text: &str) -> Vec<Token>;
}

fn token_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"[\p{L}\p{N}]+(?:['’\-.][\p{L}\p{N}]+)*|[^\s\p{L}\p{N}]")
            .expect("token regex")
    })
}

/// Splits text into word tokens and single-character punctuation tokens.
pub fn tokenize(text: &str) -> Vec<&str> {
    token_re().find_iter(text).map(|m| m.as_str()).collect()
}

pub(crate) fn is_punct(tok: &str) -> bool {
    tok.chars().all(|c| !c.is_alphanumeric())
}

/// Parses `word<TAB>VALUE` lines; `#` starts a comment line.
pub(crate) fn parse_tsv(src: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (n, line) in src.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (word, value) = line
            .split_once('\t')
            .ok_or_else(|| format!("line {}: expected word<TAB>TAG", n + 1))?;
        out.push((word.trim().to_lowercase(), value.trim().to_string()));
    }
    Ok(out)
}

/// Lexicon + suffix rules + capitalization heuristic.
#[derive(Debug, Clone)]
pub struct RuleTagger {
    lexicon: HashMap<String, Pos>,
}

const AUXILIARIES: &[&str] = &[
    "am", "is", "are", "was", "were", "be", "been", "being", "'m", "'re", "i'm", "we're",
    "you're", "they're", "he's", "she's", "it's",
];

const INTENSIFIERS: &[&str] = &["more", "most", "very", "so", "too", "really", "quite"];

const NOUN_SUFFIXES: &[&str] = &[
    "tion", "sion", "ness", "ment", "ity", "ance", "ence", "ship", "ism", "ist", "er", "or",
    "ure", "age", "ery", "dom", "hood", "logy", "graphy", "cy",
];
const ADJ_SUFFIXES: &[&str] = &[
    "ous", "ful", "ive", "able", "ible", "al", "ic", "less", "ish", "ary", "ant", "ent",
];
const VERB_SUFFIXES: &[&str] = &["ize", "ise", "ify"];

impl Default for RuleTagger {
    fn default() -> Self {
        Self::from_tsv(DEFAULT_LEXICON).expect("bundled lexicon parses")
    }
}

impl RuleTagger {
    pub fn from_tsv(src: &str) -> Result<Self, String> {
        let mut lexicon = HashMap::new();
        for (word, tag) in parse_tsv(src)? {
            let pos: Pos = tag.parse().map_err(|_| format!("unknown tag {tag:?} for {word:?}"))?;
            lexicon.entry(word).or_insert(pos);
        }
        Ok(Self { lexicon })
    }

    pub fn lexicon_len(&self) -> usize {
        self.lexicon.len()
    }

    fn tag_word(&self, word: &str, prev: Option<(&str, Pos)>, sentence_start: bool) -> Pos {
        let lower = word.to_lowercase();
        let has_digit = word.chars().any(|c| c.is_ascii_digit());
        let has_alpha = word.chars().any(|c| c.is_alphabetic());
        if has_digit && !has_alpha {
            return Pos::Num;
        }
        if has_digit {
            return Pos::Propn;
        }

        let capitalized = word.chars().next().is_some_and(char::is_uppercase);
        let letters: Vec<char> = word.chars().filter(|c| c.is_alphabetic()).collect();
        let all_caps = letters.len() >= 2 && letters.iter().all(|c| c.is_uppercase());

        if let Some(&pos) = self.lexicon.get(&lower) {
            let open_class = matches!(pos, Pos::Noun | Pos::Adj | Pos::Verb);
            if open_class && (all_caps || (capitalized && !sentence_start)) {
                return Pos::Propn;
            }
            return pos;
        }
        if all_caps || (capitalized && !sentence_start) {
            return Pos::Propn;
        }
        if let Some(pos) = self.suffix_rule(&lower, prev) {
            return pos;
        }
        if capitalized {
            Pos::Propn
        } else {
            Pos::Noun
        }
    }

    fn suffix_rule(&self, lower: &str, prev: Option<(&str, Pos)>) -> Option<Pos> {
        let prev_lower = prev.map(|(w, _)| w.to_lowercase());
        let prev_pos = prev.map(|(_, p)| p);
        let after_aux = prev_lower
            .as_deref()
            .is_some_and(|w| AUXILIARIES.contains(&w));
        let after_subject = matches!(prev_pos, Some(Pos::Pron | Pos::Noun | Pos::Propn));

        if lower.len() > 4 && lower.ends_with("ing") {
            let after_intensifier = prev_lower
                .as_deref()
                .is_some_and(|w| INTENSIFIERS.contains(&w));
            return Some(if after_aux {
                Pos::Verb
            } else if after_intensifier {
                Pos::Adj
            } else {
                Pos::Noun
            });
        }
        if lower.len() > 3 && lower.ends_with("ed") {
            let after_have = prev_lower
                .as_deref()
                .is_some_and(|w| matches!(w, "have" | "has" | "had"));
            return Some(if after_subject || after_aux || after_have {
                Pos::Verb
            } else {
                Pos::Adj
            });
        }
        if lower.len() > 3 && lower.ends_with("ly") {
            return Some(Pos::Other);
        }
        // third-person verbs: "sells", "watches"
        if after_subject && lower.len() > 3 && lower.ends_with('s') {
            let stems = [&lower[..lower.len() - 1], lower.strip_suffix("es").unwrap_or("")];
            if stems
                .iter()
                .any(|s| self.lexicon.get(*s) == Some(&Pos::Verb))
            {
                return Some(Pos::Verb);
            }
        }
        if lower.len() > 4 && VERB_SUFFIXES.iter().any(|s| lower.ends_with(s)) {
            return Some(Pos::Verb);
        }
        if lower.len() > 4 && NOUN_SUFFIXES.iter().any(|s| lower.ends_with(s)) {
            return Some(Pos::Noun);
        }
        if lower.len() > 4 && ADJ_SUFFIXES.iter().any(|s| lower.ends_with(s)) {
            return Some(Pos::Adj);
        }
        None
    }
}

impl Tagger for RuleTagger {
    fn tag(&self, text: &str) -> Vec<Token> {
        let mut tokens: Vec<Token> = Vec::new();
        for (index, word) in tokenize(text).into_iter().enumerate() {
            let pos = if is_punct(word) {
                Pos::Other
            } else {
                let prev = tokens.last().map(|t| (t.text.as_str(), t.pos));
                let sentence_start = tokens
                    .last()
                    .is_none_or(|t| matches!(t.text.as_str(), "." | "!" | "?"));
                self.tag_word(word, prev, sentence_start)
            };
            tokens.push(Token {
                text: word.to_string(),
                pos,
                index,
            });
        }
        tokens
    }
}
