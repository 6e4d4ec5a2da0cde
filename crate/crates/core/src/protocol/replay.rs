//! Deterministic replay of recorded sessions under a virtual clock.
//!
//! Trace: JSON lines; the first is the header
//! `{"seed": 7, "config": {...flat config...}, "started_at": "...", "mapping": {...}}`,
//! the rest are inbound wire messages carrying `t_ms`, sorted by `t_ms`.
//!
//! Timeline: a header line `{"format":"livecue-timeline/1","seed":7}`
//! followed by every SceneUpdate as one JSON line.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::session::{Outbound, Session};
use super::wire::WireMessage;
use crate::config::Config;
use crate::mapping::MappingTable;

pub const TIMELINE_FORMAT: &str = "livecue-timeline/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceHeader {
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub started_at: Option<String>,
    /// A mapping document, as in a mapping file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mapping: Option<Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionTrace {
    pub header: TraceHeader,
    pub events: Vec<WireMessage>,
}

#[derive(Debug, Error)]
pub enum TraceParseError {
    #[error("trace is empty; the header line is required")]
    MissingHeader,
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("line {line}: t_ms {t_ms} is earlier than the previous event's {prev}")]
    Unsorted { line: usize, t_ms: u64, prev: u64 },
    #[error("trace config: {0}")]
    Config(#[from] crate::config::ConfigError),
    #[error("trace mapping: {0}")]
    Mapping(#[from] crate::mapping::MappingError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SessionTrace {
    pub fn parse(src: &str) -> Result<Self, TraceParseError> {
        Self::read(src.as_bytes())
    }

    pub fn read(reader: impl BufRead) -> Result<Self, TraceParseError> {
        let mut header = None;
        let mut events = Vec::new();
        let mut prev = 0;
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |message: String| TraceParseError::Line {
                line: line_no,
                message,
            };
            if header.is_none() {
                header = Some(serde_json::from_str::<TraceHeader>(&line).map_err(|e| bad(e.to_string()))?);
                continue;
            }
            let msg = WireMessage::parse(&line).map_err(|e| bad(e.to_string()))?;
            let t_ms = msg.t_ms.ok_or_else(|| bad("event has no t_ms".into()))?;
            if t_ms < prev {
                return Err(TraceParseError::Unsorted {
                    line: line_no,
                    t_ms,
                    prev,
                });
            }
            prev = t_ms;
            events.push(msg);
        }
        Ok(Self {
            header: header.ok_or(TraceParseError::MissingHeader)?,
            events,
        })
    }

    pub fn load(path: &Path) -> Result<Self, TraceParseError> {
        Self::read(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&self.header).expect("header serializes");
        out.push('\n');
        for e in &self.events {
            out.push_str(&e.to_json());
            out.push('\n');
        }
        out
    }
}

#[derive(Serialize)]
struct TimelineHeader<'a> {
    format: &'a str,
    seed: u64,
}

/// Runs the trace and returns the timeline text. Sessions are created on
/// first sight of their id; all share the header seed and config.
pub fn replay(trace: &SessionTrace) -> Result<String, TraceParseError> {
    let cfg = match &trace.header.config {
        Some(v) => Config::from_value(v.clone())?,
        None => Config::default(),
    };
    let mapping = match &trace.header.mapping {
        Some(v) => MappingTable::from_json(&v.to_string())?,
        None => MappingTable::new(),
    };
    let seed = trace.header.seed;

    let mut out = serde_json::to_string(&TimelineHeader {
        format: TIMELINE_FORMAT,
        seed,
    })
    .expect("header serializes");
    out.push('\n');

    let mut sessions: BTreeMap<String, Session> = BTreeMap::new();
    let emit = |out: &mut String, produced: Vec<Outbound>| {
        for o in produced {
            match o {
                Outbound::Broadcast(m) if m.kind == super::wire::MessageType::SceneUpdate => {
                    out.push_str(&m.to_json());
                    out.push('\n');
                }
                Outbound::Error(e) => log::debug!("replay: {} {}", e.code, e.message),
                _ => {}
            }
        }
    };
    for msg in &trace.events {
        let session = sessions
            .entry(msg.session_id.clone())
            .or_insert_with(|| Session::standalone(&msg.session_id, cfg.clone(), mapping.clone(), seed));
        let produced = session.handle(msg, msg.t_ms.unwrap_or_default());
        emit(&mut out, produced);
    }
    // pending expiries, session by session
    for session in sessions.values_mut() {
        let produced = session.drain();
        emit(&mut out, produced);
    }
    Ok(out)
}

pub fn replay_file(trace_path: &Path, out_path: &Path) -> Result<(), TraceParseError> {
    let trace = SessionTrace::load(trace_path)?;
    let timeline = replay(&trace)?;
    let mut f = std::fs::File::create(out_path)?;
    f.write_all(timeline.as_bytes())?;
    f.sync_all()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_only_trace() {
        let t = SessionTrace::parse("{\"seed\": 3}\n").unwrap();
        assert_eq!(replay(&t).unwrap(), "{\"format\":\"livecue-timeline/1\",\"seed\":3}\n");
    }

    #[test]
    fn missing_header_and_unsorted() {
        assert!(matches!(SessionTrace::parse(""), Err(TraceParseError::MissingHeader)));
        let src = "{\"seed\":1}\n\
            {\"type\":\"TranscriptMsg\",\"session_id\":\"s\",\"seq\":1,\"t_ms\":50,\"payload\":{\"text\":\"a\",\"is_final\":true}}\n\
            {\"type\":\"TranscriptMsg\",\"session_id\":\"s\",\"seq\":2,\"t_ms\":40,\"payload\":{\"text\":\"b\",\"is_final\":true}}\n";
        assert!(matches!(SessionTrace::parse(src), Err(TraceParseError::Unsorted { line: 3, .. })));
        let src = "{\"seed\":1}\n{\"type\":\"TranscriptMsg\",\"session_id\":\"s\",\"seq\":1}\n";
        assert!(matches!(SessionTrace::parse(src), Err(TraceParseError::Line { line: 2, .. })));
        assert!(matches!(SessionTrace::parse("{\"sed\":1}\n"), Err(TraceParseError::Line { line: 1, .. })));
    }

    #[test]
    fn single_keyword_lives_four_seconds() {
        let src = "{\"seed\":1}\n\
            {\"type\":\"TranscriptMsg\",\"session_id\":\"s\",\"seq\":1,\"t_ms\":1000,\"payload\":{\"text\":\"programming\",\"is_final\":true}}\n";
        let timeline = replay(&SessionTrace::parse(src).unwrap()).unwrap();
        let lines: Vec<WireMessage> = timeline.lines().skip(1).map(|l| WireMessage::parse(l).unwrap()).collect();
        assert_eq!(lines.len(), 2);
        let born = lines[0].snapshot().unwrap();
        assert_eq!(born.t_ms, 1_000);
        assert_eq!(born.elements[0].content, "programming");
        assert_eq!(lines[1].t_ms, Some(5_000));
        assert!(lines[1].snapshot().unwrap().elements.is_empty());
    }

    #[test]
    fn round_trip_trace_text() {
        let src = "{\"seed\":1,\"started_at\":\"2024-01-01T00:00:00Z\"}\n\
            {\"type\":\"TranscriptMsg\",\"session_id\":\"s\",\"seq\":1,\"t_ms\":1000,\"payload\":{\"text\":\"x\",\"is_final\":true}}\n";
        assert_eq!(SessionTrace::parse(src).unwrap().to_jsonl(), src);
    }
}
