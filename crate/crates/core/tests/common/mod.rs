#![allow(dead_code)]

use std::net::SocketAddr;
use std::path::PathBuf;
use std::time::Duration;

use futures::{SinkExt, StreamExt};
use serde_json::{json, Value};
use tokio::net::TcpStream;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{connect_async, MaybeTlsStream, WebSocketStream};

use livecue::config::Config;
use livecue::mapping::MappingTable;
use livecue::protocol::{Server, ServerOptions};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub async fn start_server(mapping: MappingTable) -> SocketAddr {
    let mut cfg = Config::default();
    cfg.server.port = 0;
    let server = Server::bind(cfg, mapping, ServerOptions::default()).await.expect("bind");
    let addr = server.local_addr().expect("addr");
    tokio::spawn(server.run());
    addr
}

pub struct Client {
    ws: WebSocketStream<MaybeTlsStream<TcpStream>>,
    pub session: String,
    seq: u64,
}

impl Client {
    pub async fn connect(addr: SocketAddr, session: &str) -> Self {
        let (ws, _) = connect_async(format!("ws://{addr}")).await.expect("connect");
        Self {
            ws,
            session: session.into(),
            seq: 0,
        }
    }

    pub async fn send_raw(&mut self, text: &str) {
        self.ws.send(Message::Text(text.into())).await.expect("send");
    }

    pub async fn send_binary(&mut self, bytes: Vec<u8>) {
        self.ws.send(Message::Binary(bytes)).await.expect("send");
    }

    pub async fn send_with_seq(&mut self, kind: &str, seq: u64, payload: Value) {
        let msg = json!({"type": kind, "session_id": self.session, "seq": seq, "payload": payload});
        self.send_raw(&msg.to_string()).await;
    }

    pub async fn send(&mut self, kind: &str, payload: Value) {
        self.seq += 1;
        self.send_with_seq(kind, self.seq, payload).await;
    }

    /// Sends with an explicit `t_ms` (hand frames carry capture time).
    pub async fn send_at(&mut self, kind: &str, t_ms: u64, payload: Value) {
        self.seq += 1;
        let msg = json!({"type": kind, "session_id": self.session, "seq": self.seq, "t_ms": t_ms, "payload": payload});
        self.send_raw(&msg.to_string()).await;
    }

    pub async fn hello(&mut self, role: &str) -> Value {
        self.send_with_seq("ClientHello", 0, json!({"role": role})).await;
        self.recv().await
    }

    pub async fn say(&mut self, text: &str) {
        self.send("TranscriptMsg", json!({"text": text, "is_final": true})).await;
    }

    /// Next text message, failing after 5 s.
    pub async fn recv(&mut self) -> Value {
        self.try_recv(Duration::from_secs(5)).await.expect("message before timeout")
    }

    pub async fn try_recv(&mut self, wait: Duration) -> Option<Value> {
        loop {
            let frame = tokio::time::timeout(wait, self.ws.next()).await.ok()??;
            match frame.expect("ws frame") {
                Message::Text(t) => return Some(serde_json::from_str(&t).expect("server sends JSON")),
                Message::Close(_) => return None,
                _ => continue,
            }
        }
    }

    /// Skips messages until one of type `kind` arrives.
    pub async fn recv_type(&mut self, kind: &str) -> Value {
        loop {
            let m = self.recv().await;
            if m["type"] == kind {
                return m;
            }
        }
    }
}
