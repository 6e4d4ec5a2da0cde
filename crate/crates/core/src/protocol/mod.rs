//! Wire protocol, per-session pipeline, WebSocket server and replay.

pub mod replay;
pub mod server;
pub mod session;
pub mod wire;

pub use replay::{replay, replay_file, SessionTrace, TraceHeader, TraceParseError, TIMELINE_FORMAT};
pub use server::{serve, Server, ServerError, ServerOptions};
pub use session::{percentile, session_seed, LatencyStats, Outbound, Session};
pub use wire::{
    ClientHello, ErrorPayload, FramePayload, HandFramePayload, Inbound, MappingOp, MessageType,
    PointHintPayload, Role, TranscriptPayload, WireError, WireMessage,
};
