//! One session's serialized pipeline, independent of transport. The server
//! drives it from a per-session thread; replay drives it from a trace.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use base64::Engine as _;
use serde::Serialize;
use serde_json::json;

use super::wire::{
    ErrorPayload, FramePayload, HandFramePayload, Inbound, MappingOp, MessageType, WireMessage,
};
use crate::config::Config;
use crate::geom::Point;
use crate::gesture::{GestureClassifier, HandFrame};
use crate::keywords::KeywordExtractor;
use crate::mapping::{suggest_visuals, MappingTable, SuggestionProvider};
use crate::marker::{detect, FrameBuffer};
use crate::scene::{detect_template, SceneEngine};
use crate::transcript::{TranscriptEvent, TranscriptIngest};

/// Where a produced message goes.
#[derive(Debug, Clone, PartialEq)]
pub enum Outbound {
    /// To every client of the session.
    Broadcast(WireMessage),
    /// To the client that sent the message being handled.
    Reply(WireMessage),
    /// To the sender; the transport assigns the per-connection seq.
    Error(ErrorPayload),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct LatencyStats {
    pub count: usize,
    pub p50_us: u64,
    pub p95_us: u64,
    pub max_us: u64,
}

/// Nearest-rank percentile of an unsorted sample.
pub fn percentile(samples: &[u64], p: f64) -> u64 {
    if samples.is_empty() {
        return 0;
    }
    let mut v = samples.to_vec();
    v.sort_unstable();
    let rank = ((p / 100.0) * v.len() as f64).ceil() as usize;
    v[rank.clamp(1, v.len()) - 1]
}

/// Session seed derived from the server seed and the session id (FNV-1a).
pub fn session_seed(base: u64, session_id: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in session_id.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    base ^ h
}

pub struct Session {
    id: String,
    cfg: Arc<Config>,
    extractor: Arc<KeywordExtractor>,
    provider: Arc<dyn SuggestionProvider>,
    mapping: MappingTable,
    mapping_path: Option<PathBuf>,
    ingest: TranscriptIngest,
    classifier: GestureClassifier,
    engine: SceneEngine,
    debug_gestures: bool,
    last_inbound_seq: Option<u64>,
    scene_seq: u64,
    mapping_seq: u64,
    debug_seq: u64,
    now_ms: u64,
    latencies_us: Vec<u64>,
}

impl std::fmt::Debug for Session {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Session")
            .field("id", &self.id)
            .field("scene_seq", &self.scene_seq)
            .field("now_ms", &self.now_ms)
            .finish_non_exhaustive()
    }
}

impl Session {
    pub fn new(
        id: &str,
        cfg: Arc<Config>,
        extractor: Arc<KeywordExtractor>,
        provider: Arc<dyn SuggestionProvider>,
        mapping: MappingTable,
        seed: u64,
    ) -> Self {
        Self {
            id: id.to_string(),
            engine: SceneEngine::new(cfg.engine.clone(), cfg.marker_names(), seed),
            classifier: GestureClassifier::new(cfg.gesture.clone()),
            cfg,
            extractor,
            provider,
            mapping,
            mapping_path: None,
            ingest: TranscriptIngest::new(),
            debug_gestures: false,
            last_inbound_seq: None,
            scene_seq: 0,
            mapping_seq: 0,
            debug_seq: 0,
            now_ms: 0,
            latencies_us: Vec::new(),
        }
    }

    /// A session with default extractor and the configured provider.
    pub fn standalone(id: &str, cfg: Config, mapping: MappingTable, seed: u64) -> Self {
        let provider: Arc<dyn SuggestionProvider> = Arc::from(cfg.suggestion_provider());
        Self::new(
            id,
            Arc::new(cfg),
            Arc::new(KeywordExtractor::default()),
            provider,
            mapping,
            seed,
        )
    }

    pub fn with_debug_gestures(mut self, on: bool) -> Self {
        self.debug_gestures = on;
        self
    }

    /// Persist the table here after every mapping change.
    pub fn with_mapping_path(mut self, path: Option<PathBuf>) -> Self {
        self.mapping_path = path;
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn engine(&self) -> &SceneEngine {
        &self.engine
    }

    pub fn mapping(&self) -> &MappingTable {
        &self.mapping
    }

    pub fn now_ms(&self) -> u64 {
        self.now_ms
    }

    pub fn scene_seq(&self) -> u64 {
        self.scene_seq
    }

    pub fn latency(&self) -> LatencyStats {
        let s = &self.latencies_us;
        LatencyStats {
            count: s.len(),
            p50_us: percentile(s, 50.0),
            p95_us: percentile(s, 95.0),
            max_us: s.iter().copied().max().unwrap_or(0),
        }
    }

    pub fn latency_samples_us(&self) -> &[u64] {
        &self.latencies_us
    }

    /// The current scene, stamped with the latest SceneUpdate seq (0 before
    /// any mutation). Sent to a joining client.
    pub fn current_scene(&self) -> WireMessage {
        WireMessage::scene_update(&self.id, self.scene_seq, &self.engine.snapshot(self.now_ms))
    }

    fn scene_update(&mut self, t_ms: u64) -> Outbound {
        self.scene_seq += 1;
        Outbound::Broadcast(WireMessage::scene_update(
            &self.id,
            self.scene_seq,
            &self.engine.snapshot(t_ms),
        ))
    }

    /// Expires elements up to `now_ms`, one SceneUpdate per distinct expiry
    /// instant, stamped with that instant.
    pub fn advance_to(&mut self, now_ms: u64) -> Vec<Outbound> {
        let mut out = Vec::new();
        while let Some(t) = self.engine.next_expiry().filter(|t| *t <= now_ms) {
            let t = t.max(self.now_ms);
            self.now_ms = t;
            if !self.engine.tick(t).is_empty() {
                out.push(self.scene_update(t));
            }
        }
        self.now_ms = self.now_ms.max(now_ms);
        out
    }

    /// Runs every pending expiry, however far in the future.
    pub fn drain(&mut self) -> Vec<Outbound> {
        let mut out = Vec::new();
        while let Some(t) = self.engine.next_expiry() {
            out.extend(self.advance_to(t));
        }
        out
    }

    /// Handles one inbound message at session time `now_ms`.
    pub fn handle(&mut self, msg: &WireMessage, now_ms: u64) -> Vec<Outbound> {
        let started = Instant::now();
        let err = |code: &str, message: String| {
            vec![Outbound::Error(ErrorPayload::new(code, message, Some(msg.seq)))]
        };
        if msg.session_id != self.id {
            return err(
                "session",
                format!("message for session {:?} sent to {:?}", msg.session_id, self.id),
            );
        }
        let inbound = match msg.decode() {
            Ok(i) => i,
            Err(e) => return err(e.code(), e.to_string()),
        };
        if let Inbound::ClientHello(_) = inbound {
            return vec![Outbound::Reply(self.current_scene())];
        }
        if let Some(last) = self.last_inbound_seq {
            if msg.seq <= last {
                return err(
                    "out_of_order",
                    format!("seq {} is not after last accepted seq {last}", msg.seq),
                );
            }
        }
        self.last_inbound_seq = Some(msg.seq);

        let mut out = self.advance_to(now_ms);
        let now = self.now_ms;
        let changed = match inbound {
            Inbound::ClientHello(_) => unreachable!("handled above"),
            Inbound::Transcript(p) => {
                let event = TranscriptEvent {
                    session_id: self.id.clone(),
                    seq: msg.seq,
                    text: p.text,
                    is_final: p.is_final,
                    t_ms: now,
                };
                match self.on_transcript(&event) {
                    Ok(changed) => {
                        if changed {
                            self.latencies_us.push(started.elapsed().as_micros() as u64);
                        }
                        changed
                    }
                    Err(e) => {
                        out.push(Outbound::Error(ErrorPayload::new("transcript", e, Some(msg.seq))));
                        false
                    }
                }
            }
            Inbound::HandFrame(p) => {
                let frame_t = msg.t_ms.unwrap_or(now);
                match self.on_hand_frame(&p, frame_t, now, &mut out) {
                    Ok(changed) => changed,
                    Err(e) => {
                        out.push(Outbound::Error(ErrorPayload::new("gesture", e, Some(msg.seq))));
                        false
                    }
                }
            }
            Inbound::Frame(p) => match self.on_frame(&p, now) {
                Ok(changed) => changed,
                Err(e) => {
                    out.push(Outbound::Error(ErrorPayload::new("frame", e, Some(msg.seq))));
                    false
                }
            },
            Inbound::PointHint(p) => {
                self.engine.set_pending_point(Point::new(p.x, p.y), now);
                false
            }
            Inbound::Mapping(op) => {
                out.extend(self.on_mapping(op, msg.seq));
                false
            }
        };
        if changed {
            out.push(self.scene_update(now));
        }
        out
    }

    fn on_transcript(&mut self, event: &TranscriptEvent) -> Result<bool, String> {
        let utterances = self.ingest.ingest(event).map_err(|e| e.to_string())?;
        let now = event.t_ms;
        let mut changed = false;
        for utt in utterances {
            if let Some(action) = detect_template(&utt.text, &self.extractor) {
                self.engine.apply_template(&action, now);
                changed = true;
                continue;
            }
            let spans = self.extractor.extract(&utt.text);
            let result = self.mapping.match_spans(&spans);
            changed |= !self.engine.process_utterance(&utt, &result, now).is_empty();
        }
        Ok(changed)
    }

    fn on_hand_frame(
        &mut self,
        p: &HandFramePayload,
        frame_t: u64,
        now: u64,
        out: &mut Vec<Outbound>,
    ) -> Result<bool, String> {
        let frame = HandFrame::new(p.side, frame_t, &p.landmarks).map_err(|e| e.to_string())?;
        let events = self.classifier.classify(&frame).map_err(|e| e.to_string())?;
        let mut changed = self.engine.update_hand(p.side, frame.palm(), now);
        for g in &events {
            if self.debug_gestures {
                self.debug_seq += 1;
                out.push(Outbound::Broadcast(WireMessage::gesture_debug(
                    &self.id,
                    self.debug_seq,
                    g,
                )));
            }
            changed |= self.engine.apply_gesture(g, now);
        }
        Ok(changed)
    }

    fn on_frame(&mut self, p: &FramePayload, now: u64) -> Result<bool, String> {
        let pixels = base64::engine::general_purpose::STANDARD
            .decode(&p.rgb_b64)
            .map_err(|e| format!("rgb_b64: {e}"))?;
        let frame = FrameBuffer::new(p.width, p.height, pixels).map_err(|e| e.to_string())?;
        let detections = detect(&frame, &self.cfg.markers.specs).map_err(|e| e.to_string())?;
        let mut changed = false;
        for d in detections {
            changed |= self
                .engine
                .update_marker(&d.name, d.centroid, now)
                .map_err(|e| e.to_string())?;
        }
        Ok(changed)
    }

    fn on_mapping(&mut self, op: MappingOp, seq: u64) -> Vec<Outbound> {
        let err = |code: &str, message: String| vec![Outbound::Error(ErrorPayload::new(code, message, Some(seq)))];
        let echo = match op {
            MappingOp::Suggest { keyword, limit } => {
                let limit = limit.unwrap_or(self.cfg.server.suggest_limit);
                return match suggest_visuals(&keyword, self.provider.as_ref(), limit) {
                    Ok(urls) => {
                        let mut payload = MappingOp::Suggest {
                            keyword,
                            limit: Some(limit),
                        }
                        .to_payload();
                        payload["suggestions"] = json!(urls);
                        vec![Outbound::Reply(WireMessage::new(
                            MessageType::MappingUpdate,
                            &self.id,
                            seq,
                            None,
                            payload,
                        ))]
                    }
                    Err(e) => err("suggest", e.to_string()),
                };
            }
            MappingOp::Upsert(entry) => {
                if let Err(e) = self.mapping.upsert(entry.clone()) {
                    return err("mapping", e.to_string());
                }
                let stored = self.mapping.get(&entry.keyword).cloned().expect("just upserted");
                MappingOp::Upsert(stored)
            }
            MappingOp::Delete { keyword } => match self.mapping.delete(&keyword) {
                Some(old) => MappingOp::Delete { keyword: old.keyword },
                None => return err("mapping", format!("no mapping for {keyword:?}")),
            },
        };
        let mut out = Vec::new();
        if let Some(path) = &self.mapping_path {
            if let Err(e) = self.mapping.save(path) {
                log::warn!("saving mapping to {}: {e}", path.display());
                out.extend(err("mapping_io", e.to_string()));
            }
        }
        self.mapping_seq += 1;
        out.push(Outbound::Broadcast(WireMessage::new(
            MessageType::MappingUpdate,
            &self.id,
            self.mapping_seq,
            None,
            echo.to_payload(),
        )));
        out
    }
}
