//! JSON envelope and per-type payloads. Every message is one text frame:
//!
//! ```json
//! {"type":"TranscriptMsg","session_id":"demo","seq":3,"t_ms":1200,
//!  "payload":{"text":"the camera","is_final":true}}
//! ```

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::gesture::{GestureEvent, Side};
use crate::mapping::MappingEntry;
use crate::scene::SceneSnapshot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MessageType {
    ClientHello,
    TranscriptMsg,
    HandFrameMsg,
    FrameMsg,
    MappingUpdate,
    PointHint,
    SceneUpdate,
    GestureDebug,
    Error,
}

impl MessageType {
    /// Whether clients may send this type.
    pub fn is_inbound(self) -> bool {
        matches!(
            self,
            MessageType::ClientHello
                | MessageType::TranscriptMsg
                | MessageType::HandFrameMsg
                | MessageType::FrameMsg
                | MessageType::MappingUpdate
                | MessageType::PointHint
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireMessage {
    #[serde(rename = "type")]
    pub kind: MessageType,
    pub session_id: String,
    pub seq: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_ms: Option<u64>,
    #[serde(default)]
    pub payload: Value,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    #[default]
    Presenter,
    Viewer,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClientHello {
    #[serde(default)]
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranscriptPayload {
    pub text: String,
    pub is_final: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HandFramePayload {
    pub side: Side,
    /// 21 `[x, y, z]` landmarks, x/y normalized to the frame.
    pub landmarks: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FramePayload {
    pub width: u32,
    pub height: u32,
    /// Base64 of row-major RGB8 pixels.
    pub rgb_b64: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointHintPayload {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MappingOp {
    Upsert(MappingEntry),
    Delete { keyword: String },
    Suggest { keyword: String, limit: Option<usize> },
}

impl MappingOp {
    pub fn to_payload(&self) -> Value {
        match self {
            MappingOp::Upsert(entry) => {
                let mut v = serde_json::to_value(entry).expect("entry serializes");
                if let Value::Object(m) = &mut v {
                    m.insert("op".into(), "upsert".into());
                }
                v
            }
            MappingOp::Delete { keyword } => serde_json::json!({"op": "delete", "keyword": keyword}),
            MappingOp::Suggest { keyword, limit } => {
                let mut v = serde_json::json!({"op": "suggest", "keyword": keyword});
                if let Some(n) = limit {
                    v["limit"] = (*n).into();
                }
                v
            }
        }
    }

    pub fn from_payload(payload: &Value) -> Result<Self, String> {
        let Value::Object(fields) = payload else {
            return Err("payload must be an object".into());
        };
        let mut fields: Map<String, Value> = fields.clone();
        let op = match fields.remove("op") {
            Some(Value::String(op)) => op,
            _ => return Err("missing string field `op`".into()),
        };
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct KeywordOnly {
            keyword: String,
            #[serde(default)]
            limit: Option<usize>,
        }
        let keyword_only = |fields: Map<String, Value>| {
            serde_json::from_value::<KeywordOnly>(Value::Object(fields)).map_err(|e| e.to_string())
        };
        match op.as_str() {
            "upsert" => serde_json::from_value(Value::Object(fields))
                .map(MappingOp::Upsert)
                .map_err(|e| e.to_string()),
            "delete" => {
                let k = keyword_only(fields)?;
                Ok(MappingOp::Delete { keyword: k.keyword })
            }
            "suggest" => {
                let k = keyword_only(fields)?;
                Ok(MappingOp::Suggest {
                    keyword: k.keyword,
                    limit: k.limit,
                })
            }
            other => Err(format!("unknown op {other:?}; expected upsert, delete or suggest")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorPayload {
    pub code: String,
    pub message: String,
    /// Seq of the offending inbound message, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ref_seq: Option<u64>,
}

impl ErrorPayload {
    pub fn new(code: &str, message: impl Into<String>, ref_seq: Option<u64>) -> Self {
        Self {
            code: code.into(),
            message: message.into(),
            ref_seq,
        }
    }
}

/// A decoded inbound message.
#[derive(Debug, Clone, PartialEq)]
pub enum Inbound {
    ClientHello(ClientHello),
    Transcript(TranscriptPayload),
    HandFrame(HandFramePayload),
    Frame(FramePayload),
    Mapping(MappingOp),
    PointHint(PointHintPayload),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WireError {
    #[error("malformed message: {0}")]
    Parse(String),
    #[error("bad {kind:?} payload: {message}")]
    Payload { kind: MessageType, message: String },
    #[error("{0:?} is a server-to-client message")]
    Direction(MessageType),
}

impl WireError {
    /// Stable code carried in the Error reply.
    pub fn code(&self) -> &'static str {
        match self {
            WireError::Parse(_) => "parse",
            WireError::Payload { .. } => "payload",
            WireError::Direction(_) => "direction",
        }
    }
}

fn payload<T: for<'de> Deserialize<'de>>(kind: MessageType, v: &Value) -> Result<T, WireError> {
    // an absent payload is an empty object
    let v = if v.is_null() { Value::Object(Map::new()) } else { v.clone() };
    serde_json::from_value(v).map_err(|e| WireError::Payload {
        kind,
        message: e.to_string(),
    })
}

impl WireMessage {
    pub fn new(kind: MessageType, session_id: &str, seq: u64, t_ms: Option<u64>, payload: Value) -> Self {
        Self {
            kind,
            session_id: session_id.to_string(),
            seq,
            t_ms,
            payload,
        }
    }

    pub fn parse(text: &str) -> Result<Self, WireError> {
        serde_json::from_str(text).map_err(|e| WireError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("wire messages serialize")
    }

    pub fn decode(&self) -> Result<Inbound, WireError> {
        let k = self.kind;
        Ok(match k {
            MessageType::ClientHello => Inbound::ClientHello(payload(k, &self.payload)?),
            MessageType::TranscriptMsg => Inbound::Transcript(payload(k, &self.payload)?),
            MessageType::HandFrameMsg => Inbound::HandFrame(payload(k, &self.payload)?),
            MessageType::FrameMsg => Inbound::Frame(payload(k, &self.payload)?),
            MessageType::PointHint => Inbound::PointHint(payload(k, &self.payload)?),
            MessageType::MappingUpdate => Inbound::Mapping(
                MappingOp::from_payload(&self.payload)
                    .map_err(|message| WireError::Payload { kind: k, message })?,
            ),
            other => return Err(WireError::Direction(other)),
        })
    }

    pub fn scene_update(session_id: &str, seq: u64, snapshot: &SceneSnapshot) -> Self {
        Self::new(
            MessageType::SceneUpdate,
            session_id,
            seq,
            Some(snapshot.t_ms),
            serde_json::to_value(snapshot).expect("snapshot serializes"),
        )
    }

    pub fn gesture_debug(session_id: &str, seq: u64, event: &GestureEvent) -> Self {
        Self::new(
            MessageType::GestureDebug,
            session_id,
            seq,
            Some(event.t_ms),
            serde_json::to_value(event).expect("gesture serializes"),
        )
    }

    pub fn error(session_id: &str, seq: u64, err: &ErrorPayload) -> Self {
        Self::new(
            MessageType::Error,
            session_id,
            seq,
            None,
            serde_json::to_value(err).expect("error serializes"),
        )
    }

    /// The snapshot carried by a SceneUpdate.
    pub fn snapshot(&self) -> Option<SceneSnapshot> {
        match self.kind {
            MessageType::SceneUpdate => serde_json::from_value(self.payload.clone()).ok(),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::AssetKind;

    #[test]
    fn transcript_round_trip() {
        let src = r#"{"type":"TranscriptMsg","session_id":"s","seq":3,"t_ms":1200,"payload":{"text":"the camera","is_final":true}}"#;
        let msg = WireMessage::parse(src).unwrap();
        assert_eq!(msg.to_json(), src);
        assert_eq!(
            msg.decode().unwrap(),
            Inbound::Transcript(TranscriptPayload {
                text: "the camera".into(),
                is_final: true
            })
        );
    }

    #[test]
    fn hello_without_payload() {
        let msg = WireMessage::parse(r#"{"type":"ClientHello","session_id":"s","seq":0}"#).unwrap();
        assert_eq!(msg.decode().unwrap(), Inbound::ClientHello(ClientHello::default()));
    }

    #[test]
    fn malformed_and_misdirected() {
        assert_eq!(WireMessage::parse("{nope").unwrap_err().code(), "parse");
        assert_eq!(
            WireMessage::parse(r#"{"type":"Bogus","session_id":"s","seq":1}"#).unwrap_err().code(),
            "parse"
        );
        let m = WireMessage::parse(r#"{"type":"SceneUpdate","session_id":"s","seq":1}"#).unwrap();
        assert_eq!(m.decode().unwrap_err().code(), "direction");
        let m = WireMessage::parse(r#"{"type":"TranscriptMsg","session_id":"s","seq":1,"payload":{"text":1}}"#)
            .unwrap();
        assert_eq!(m.decode().unwrap_err().code(), "payload");
    }

    #[test]
    fn mapping_ops() {
        let mut entry = MappingEntry::new("hiv virus", AssetKind::Image, "https://example.com/hiv.png");
        entry.show_keyword = true;
        for op in [
            MappingOp::Upsert(entry),
            MappingOp::Delete {
                keyword: "camera".into(),
            },
            MappingOp::Suggest {
                keyword: "camera".into(),
                limit: Some(3),
            },
        ] {
            assert_eq!(MappingOp::from_payload(&op.to_payload()).unwrap(), op);
        }
        assert!(MappingOp::from_payload(&serde_json::json!({"op": "rename", "keyword": "x"})).is_err());
        assert!(MappingOp::from_payload(&serde_json::json!({"keyword": "x"})).is_err());
        assert!(MappingOp::from_payload(&serde_json::json!({"op": "delete", "keyword": "x", "url": "y"})).is_err());
    }
}
