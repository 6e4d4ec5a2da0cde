use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::keywords::{tokenize, KeywordExtractor};

/// Structured element triggered by a spoken pattern.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "template", rename_all = "snake_case")]
pub enum TemplateAction {
    ListItem { ordinal: u32, text: String },
    Profile { name: String },
}

const ORDINAL_WORDS: [&str; 10] = [
    "first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth", "tenth",
];

/// Words that may precede an utterance-opening ordinal ("and second, ...").
const LEAD_INS: &[&str] = &["and", "so", "now", "then", "next", "ok", "okay", "well", "also", "um", "uh"];

fn profile_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?i:\bmy name is)\s+(\p{L}[\p{L}'\-]*(?:\s+\p{Lu}[\p{L}'\-]*)*)")
            .expect("profile regex")
    })
}

fn numeric_ordinal_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^([0-9]{1,3})(?:st|nd|rd|th)$").expect("ordinal regex"))
}

pub fn parse_ordinal(word: &str) -> Option<u32> {
    let lower = word.to_lowercase();
    if let Some(i) = ORDINAL_WORDS.iter().position(|w| *w == lower) {
        return Some(i as u32 + 1);
    }
    numeric_ordinal_re()
        .captures(&lower)
        .and_then(|c| c[1].parse().ok())
        .filter(|n| *n > 0)
}

/// Recognizes list ordinals and self-introductions.
///
/// An ordinal only counts as the first word of the utterance, or the second
/// when the first is a lead-in like "and" or "so". The list item text is the
/// first keyword after the ordinal.
pub fn detect_template(text: &str, extractor: &KeywordExtractor) -> Option<TemplateAction> {
    if let Some(c) = profile_re().captures(text) {
        return Some(TemplateAction::Profile {
            name: c[1].to_string(),
        });
    }

    let words: Vec<&str> = tokenize(text)
        .into_iter()
        .filter(|t| t.chars().any(char::is_alphanumeric))
        .take(2)
        .collect();
    let (pos, ordinal) = match words.as_slice() {
        [first, ..] if parse_ordinal(first).is_some() => (0, parse_ordinal(first)?),
        [lead, second] if LEAD_INS.contains(&lead.to_lowercase().as_str()) => {
            (1, parse_ordinal(second)?)
        }
        _ => return None,
    };

    // byte offset just past the ordinal word
    let mut rest = text;
    for w in &words[..=pos] {
        let at = rest.find(w)? + w.len();
        rest = &rest[at..];
    }
    let keyword = extractor.extract(rest).into_iter().next()?;
    Some(TemplateAction::ListItem {
        ordinal,
        text: keyword.surface,
    })
}
