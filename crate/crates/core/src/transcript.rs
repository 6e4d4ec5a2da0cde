//! Turns the recognizer's interim/final results into finalized utterances.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEvent {
    pub session_id: String,
    pub seq: u64,
    pub text: String,
    pub is_final: bool,
    pub t_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinalizedUtterance {
    pub utterance_id: u64,
    pub text: String,
    pub t_start_ms: u64,
    pub t_end_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IngestError {
    #[error("event seq {got} is not after last seen seq {last}")]
    OutOfOrderEvent { last: u64, got: u64 },
}

/// Counters for events that produced no utterance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct IngestStats {
    pub empty_finals: u64,
    pub out_of_order: u64,
}

#[derive(Debug, Default)]
struct SessionState {
    last_seq: Option<u64>,
    last_t_ms: u64,
    /// t_ms of the first interim event of the segment in progress.
    segment_start: Option<u64>,
    pending_text: String,
    next_utterance_id: u64,
    stats: IngestStats,
}

/// Per-session ingest state. Events of one session must be fed serially.
#[derive(Debug, Default)]
pub struct TranscriptIngest {
    sessions: HashMap<String, SessionState>,
}

impl TranscriptIngest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn ingest(
        &mut self,
        event: &TranscriptEvent,
    ) -> Result<Vec<FinalizedUtterance>, IngestError> {
        let state = self.sessions.entry(event.session_id.clone()).or_default();
        if let Some(last) = state.last_seq {
            if event.seq <= last {
                state.stats.out_of_order += 1;
                return Err(IngestError::OutOfOrderEvent {
                    last,
                    got: event.seq,
                });
            }
        }
        state.last_seq = Some(event.seq);
        // t_ms is non-decreasing per session; a regressed stamp is pinned to the last one
        let t_ms = event.t_ms.max(state.last_t_ms);
        state.last_t_ms = t_ms;

        if !event.is_final {
            state.segment_start.get_or_insert(t_ms);
            state.pending_text.clone_from(&event.text);
            return Ok(Vec::new());
        }

        let t_start_ms = state.segment_start.take().unwrap_or(t_ms);
        state.pending_text.clear();
        let text = event.text.trim();
        if text.is_empty() {
            state.stats.empty_finals += 1;
            return Ok(Vec::new());
        }
        let utterance_id = state.next_utterance_id;
        state.next_utterance_id += 1;
        Ok(vec![FinalizedUtterance {
            utterance_id,
            text: text.to_string(),
            t_start_ms,
            t_end_ms: t_ms,
        }])
    }

    /// Clears all state for `session_id`; unknown sessions are a no-op.
    pub fn reset(&mut self, session_id: &str) {
        self.sessions.remove(session_id);
    }

    pub fn stats(&self, session_id: &str) -> IngestStats {
        self.sessions
            .get(session_id)
            .map(|s| s.stats)
            .unwrap_or_default()
    }

    /// Latest interim text for the session, if a segment is in progress.
    pub fn pending_text(&self, session_id: &str) -> Option<&str> {
        self.sessions
            .get(session_id)
            .filter(|s| s.segment_start.is_some())
            .map(|s| s.pending_text.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(seq: u64, text: &str, is_final: bool, t_ms: u64) -> TranscriptEvent {
        TranscriptEvent {
            session_id: "s".into(),
            seq,
            text: text.into(),
            is_final,
            t_ms,
        }
    }

    #[test]
    fn empty_final_is_counted() {
        let mut ing = TranscriptIngest::new();
        assert!(ing.ingest(&ev(1, "", true, 0)).unwrap().is_empty());
        assert!(ing.ingest(&ev(2, "   ", true, 0)).unwrap().is_empty());
        assert_eq!(ing.stats("s").empty_finals, 2);
    }

    #[test]
    fn interim_superseded_by_final() {
        let mut ing = TranscriptIngest::new();
        assert!(ing.ingest(&ev(1, "hello wor", false, 100)).unwrap().is_empty());
        assert_eq!(ing.pending_text("s"), Some("hello wor"));
        let out = ing.ingest(&ev(2, " hello world ", true, 900)).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].text, "hello world");
        assert_eq!((out[0].t_start_ms, out[0].t_end_ms), (100, 900));
        assert_eq!(ing.pending_text("s"), None);
    }

    #[test]
    fn final_without_interim_starts_at_final() {
        let mut ing = TranscriptIngest::new();
        let out = ing.ingest(&ev(1, "camera", true, 500)).unwrap();
        assert_eq!((out[0].t_start_ms, out[0].t_end_ms), (500, 500));
    }

    #[test]
    fn out_of_order_rejected() {
        let mut ing = TranscriptIngest::new();
        ing.ingest(&ev(2, "a", false, 0)).unwrap();
        assert_eq!(
            ing.ingest(&ev(1, "b", false, 0)),
            Err(IngestError::OutOfOrderEvent { last: 2, got: 1 })
        );
        assert!(ing.ingest(&ev(2, "b", false, 0)).is_err());
        assert_eq!(ing.stats("s").out_of_order, 2);
    }

    #[test]
    fn reset_clears_seq() {
        let mut ing = TranscriptIngest::new();
        ing.reset("s");
        ing.ingest(&ev(1, "x", true, 0)).unwrap();
        ing.ingest(&ev(5, "y", true, 0)).unwrap();
        ing.reset("s");
        assert!(ing.ingest(&ev(1, "z", true, 0)).is_ok());
        ing.reset("never-seen");
    }

    #[test]
    fn sessions_are_independent() {
        let mut ing = TranscriptIngest::new();
        ing.ingest(&ev(5, "x", true, 0)).unwrap();
        let mut other = ev(1, "y", true, 0);
        other.session_id = "t".into();
        assert!(ing.ingest(&other).is_ok());
    }

    proptest! {
        #[test]
        fn interim_never_leaks(events in prop::collection::vec(("[a-z ]{0,8}", any::<bool>()), 0..40)) {
            let mut ing = TranscriptIngest::new();
            let mut emitted = String::new();
            let mut count = 0usize;
            let mut expected = String::new();
            let mut expected_count = 0usize;
            for (i, (text, is_final)) in events.iter().enumerate() {
                let out = ing.ingest(&ev(i as u64 + 1, text, *is_final, i as u64 * 10)).unwrap();
                for u in &out {
                    prop_assert!(!u.text.trim().is_empty());
                    prop_assert!(u.t_start_ms <= u.t_end_ms);
                    emitted.push_str(&u.text);
                }
                count += out.len();
                if *is_final && !text.trim().is_empty() {
                    expected.push_str(text.trim());
                    expected_count += 1;
                }
            }
            prop_assert_eq!(emitted, expected);
            prop_assert_eq!(count, expected_count);
        }
    }
}
