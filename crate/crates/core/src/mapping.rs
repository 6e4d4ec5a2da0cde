//! The authoring table: user keywords mapped one-to-one onto visuals.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::gesture::Side;
use crate::keywords::{normalize, KeywordSpan};

pub const DOCUMENT_VERSION: u32 = 1;
pub const DEFAULT_SUGGESTION_LIMIT: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssetKind {
    Image,
    Icon,
    Video,
    Screen,
}

/// Where a mapped visual should attach when spawned.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AnchorHint {
    Front2d,
    Marker(String),
    Hand(Side),
    Surface,
}

impl fmt::Display for AnchorHint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnchorHint::Front2d => f.write_str("front2d"),
            AnchorHint::Marker(name) => write!(f, "marker:{name}"),
            AnchorHint::Hand(side) => write!(f, "hand:{side}"),
            AnchorHint::Surface => f.write_str("surface"),
        }
    }
}

impl FromStr for AnchorHint {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "front2d" => return Ok(AnchorHint::Front2d),
            "surface" => return Ok(AnchorHint::Surface),
            _ => {}
        }
        if let Some(name) = s.strip_prefix("marker:") {
            if name.is_empty() {
                return Err("marker anchor needs a name".into());
            }
            return Ok(AnchorHint::Marker(name.to_string()));
        }
        if let Some(side) = s.strip_prefix("hand:") {
            return side.parse().map(AnchorHint::Hand);
        }
        Err(format!("unknown anchor hint {s:?}"))
    }
}

impl Serialize for AnchorHint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for AnchorHint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One authoring-table row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingEntry {
    /// Normalized keyword; the table key.
    pub keyword: String,
    pub kind: AssetKind,
    pub url: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_ms: Option<u64>,
    #[serde(default)]
    pub show_keyword: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor_hint: Option<AnchorHint>,
}

impl MappingEntry {
    pub fn new(keyword: &str, kind: AssetKind, url: &str) -> Self {
        Self {
            keyword: normalize(keyword),
            kind,
            url: url.to_string(),
            duration_ms: None,
            show_keyword: false,
            anchor_hint: None,
        }
    }

    pub fn validate(&self) -> Result<(), MappingError> {
        if self.keyword.is_empty() {
            return Err(MappingError::InvalidKeyword);
        }
        if self.url.trim().is_empty() || url::Url::parse(&self.url).is_err() {
            return Err(MappingError::InvalidUrl(self.url.clone()));
        }
        if self.duration_ms == Some(0) {
            return Err(MappingError::InvalidDuration);
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum MappingError {
    #[error("invalid url {0:?}")]
    InvalidUrl(String),
    #[error("duration_ms must be positive")]
    InvalidDuration,
    #[error("keyword must not be empty")]
    InvalidKeyword,
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("entries[{index}].{field}: {message}")]
    InvalidEntry {
        index: usize,
        field: &'static str,
        message: String,
    },
    #[error("unsupported mapping document version {0}")]
    Version(u32),
    #[error("duplicate keyword {0:?}")]
    DuplicateKeyword(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    version: u32,
    entries: Vec<MappingEntry>,
}

/// Which spans hit the table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MatchResult {
    pub matched: Vec<(KeywordSpan, MappingEntry)>,
    pub unmatched: Vec<KeywordSpan>,
}

impl MatchResult {
    pub fn len(&self) -> usize {
        self.matched.len() + self.unmatched.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MappingTable {
    entries: BTreeMap<String, MappingEntry>,
}

impl MappingTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn upsert(&mut self, mut entry: MappingEntry) -> Result<(), MappingError> {
        entry.keyword = normalize(&entry.keyword);
        entry.validate()?;
        self.entries.insert(entry.keyword.clone(), entry);
        Ok(())
    }

    pub fn delete(&mut self, keyword: &str) -> Option<MappingEntry> {
        self.entries.remove(&normalize(keyword))
    }

    pub fn get(&self, keyword: &str) -> Option<&MappingEntry> {
        self.entries.get(&normalize(keyword))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &MappingEntry> {
        self.entries.values()
    }

    /// Finds the longest table key that equals the span or occurs in it as
    /// a contiguous run of whole words.
    pub fn lookup(&self, normalized: &str) -> Option<&MappingEntry> {
        let words: Vec<&str> = normalized.split(' ').filter(|w| !w.is_empty()).collect();
        for len in (1..=words.len()).rev() {
            let mut best: Option<&MappingEntry> = None;
            for start in 0..=words.len() - len {
                let key = words[start..start + len].join(" ");
                if let Some(e) = self.entries.get(&key) {
                    // same word count: longer text wins, then lexicographic
                    let better = best.is_none_or(|b| {
                        (e.keyword.len(), std::cmp::Reverse(&e.keyword))
                            > (b.keyword.len(), std::cmp::Reverse(&b.keyword))
                    });
                    if better {
                        best = Some(e);
                    }
                }
            }
            if best.is_some() {
                return best;
            }
        }
        None
    }

    pub fn match_spans(&self, spans: &[KeywordSpan]) -> MatchResult {
        let mut result = MatchResult::default();
        for span in spans {
            match self.lookup(&span.normalized) {
                Some(entry) => result.matched.push((span.clone(), entry.clone())),
                None => result.unmatched.push(span.clone()),
            }
        }
        result
    }

    pub fn to_json(&self) -> String {
        let doc = Document {
            version: DOCUMENT_VERSION,
            entries: self.entries.values().cloned().collect(),
        };
        serde_json::to_string_pretty(&doc).expect("mapping document serializes")
    }

    pub fn from_json(src: &str) -> Result<Self, MappingError> {
        if src.trim().is_empty() {
            return Ok(Self::new());
        }
        let doc: Document = serde_json::from_str(src).map_err(|e| MappingError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if doc.version != DOCUMENT_VERSION {
            return Err(MappingError::Version(doc.version));
        }
        let mut table = Self::new();
        for (index, mut entry) in doc.entries.into_iter().enumerate() {
            entry.keyword = normalize(&entry.keyword);
            entry.validate().map_err(|e| {
                let field = match e {
                    MappingError::InvalidUrl(_) => "url",
                    MappingError::InvalidDuration => "duration_ms",
                    _ => "keyword",
                };
                MappingError::InvalidEntry {
                    index,
                    field,
                    message: e.to_string(),
                }
            })?;
            if table.entries.contains_key(&entry.keyword) {
                return Err(MappingError::DuplicateKeyword(entry.keyword));
            }
            table.entries.insert(entry.keyword.clone(), entry);
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self, MappingError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Writes to a sibling temp file and renames it over `path`.
    pub fn save(&self, path: &Path) -> Result<(), MappingError> {
        let mut tmp_name = path.file_name().unwrap_or_default().to_os_string();
        tmp_name.push(".tmp");
        let tmp = path.with_file_name(tmp_name);
        {
            let mut f = std::fs::File::create(&tmp)?;
            f.write_all(self.to_json().as_bytes())?;
            f.write_all(b"\n")?;
            f.sync_all()?;
        }
        std::fs::rename(&tmp, path)?;
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SuggestError {
    #[error("suggestion provider unavailable: {0}")]
    ProviderUnavailable(String),
}

/// Source of candidate visual URLs for a keyword.
pub trait SuggestionProvider: Send + Sync {
    fn suggest(&self, keyword: &str, limit: usize) -> Result<Vec<String>, SuggestError>;
}

/// Offline keyword → URL list map.
#[derive(Debug, Clone, Default)]
pub struct FixtureProvider {
    urls: HashMap<String, Vec<String>>,
}

const DEFAULT_SUGGESTIONS: &str = include_str!("../data/suggestions.json");

impl FixtureProvider {
    /// The bundled fixture set.
    pub fn bundled() -> Self {
        Self::from_json(DEFAULT_SUGGESTIONS).expect("bundled suggestions parse")
    }

    /// `{ "keyword": ["url", ...], ... }`
    pub fn from_json(src: &str) -> Result<Self, serde_json::Error> {
        let raw: HashMap<String, Vec<String>> = serde_json::from_str(src)?;
        Ok(Self {
            urls: raw.into_iter().map(|(k, v)| (normalize(&k), v)).collect(),
        })
    }
}

impl SuggestionProvider for FixtureProvider {
    fn suggest(&self, keyword: &str, limit: usize) -> Result<Vec<String>, SuggestError> {
        Ok(self
            .urls
            .get(&normalize(keyword))
            .map(|v| v.iter().take(limit).cloned().collect())
            .unwrap_or_default())
    }
}

/// Queries `GET {endpoint}?q=<keyword>&n=<limit>`, expecting a JSON array
/// of URL strings.
#[derive(Debug, Clone)]
pub struct HttpProvider {
    endpoint: url::Url,
    timeout: Duration,
}

impl HttpProvider {
    pub fn new(endpoint: &str, timeout: Duration) -> Result<Self, url::ParseError> {
        Ok(Self {
            endpoint: url::Url::parse(endpoint)?,
            timeout,
        })
    }
}

impl SuggestionProvider for HttpProvider {
    fn suggest(&self, keyword: &str, limit: usize) -> Result<Vec<String>, SuggestError> {
        let unavailable = |e: reqwest::Error| SuggestError::ProviderUnavailable(e.to_string());
        let mut url = self.endpoint.clone();
        url.query_pairs_mut()
            .append_pair("q", keyword)
            .append_pair("n", &limit.to_string());
        let client = reqwest::blocking::Client::builder()
            .timeout(self.timeout)
            .build()
            .map_err(unavailable)?;
        let urls: Vec<String> = client
            .get(url)
            .send()
            .and_then(|r| r.error_for_status())
            .and_then(|r| r.json())
            .map_err(unavailable)?;
        Ok(urls.into_iter().take(limit).collect())
    }
}

/// At most `limit` candidates for `keyword`.
pub fn suggest_visuals(
    keyword: &str,
    provider: &dyn SuggestionProvider,
    limit: usize,
) -> Result<Vec<String>, SuggestError> {
    let mut urls = provider.suggest(keyword, limit)?;
    urls.truncate(limit);
    Ok(urls)
}
