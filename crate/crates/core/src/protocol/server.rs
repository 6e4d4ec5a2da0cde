//! WebSocket service. Each session runs on its own thread, which owns the
//! [`Session`] and serializes everything sent to it; connections only parse
//! frames and forward them.

use std::collections::{BTreeMap, HashMap};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{mpsc, Arc, Mutex};
use std::time::{Duration, Instant};

use futures::{SinkExt, StreamExt};
use thiserror::Error;
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::mpsc::{unbounded_channel, UnboundedSender};
use tokio_tungstenite::tungstenite::Message;

use super::session::{session_seed, Outbound, Session};
use super::wire::{ClientHello, ErrorPayload, MessageType, Role, WireMessage};
use crate::config::{Config, ConfigError};
use crate::keywords::KeywordExtractor;
use crate::mapping::{MappingTable, SuggestionProvider};

#[derive(Debug, Error)]
pub enum ServerError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Default)]
pub struct ServerOptions {
    /// Broadcast GestureDebug messages.
    pub debug_gestures: bool,
    /// Mapping file; loaded for each new session and rewritten on change.
    pub mapping_path: Option<PathBuf>,
}

type ConnId = u64;

struct Client {
    tx: UnboundedSender<String>,
    role: Role,
    error_seq: Arc<AtomicU64>,
}

enum Cmd {
    Join {
        conn: ConnId,
        client: Client,
        hello: WireMessage,
    },
    Message {
        conn: ConnId,
        msg: WireMessage,
    },
    Leave {
        conn: ConnId,
    },
}

struct Shared {
    cfg: Arc<Config>,
    extractor: Arc<KeywordExtractor>,
    provider: Arc<dyn SuggestionProvider>,
    mapping: MappingTable,
    opts: ServerOptions,
    sessions: Mutex<HashMap<String, mpsc::Sender<Cmd>>>,
    next_conn: AtomicU64,
}

fn send_error(tx: &UnboundedSender<String>, seq: &AtomicU64, session_id: &str, err: &ErrorPayload) {
    let n = seq.fetch_add(1, Ordering::Relaxed) + 1;
    let _ = tx.send(WireMessage::error(session_id, n, err).to_json());
}

impl Shared {
    fn session(self: &Arc<Self>, id: &str) -> mpsc::Sender<Cmd> {
        let mut sessions = self.sessions.lock().expect("session map poisoned");
        if let Some(tx) = sessions.get(id) {
            return tx.clone();
        }
        let mapping = match &self.opts.mapping_path {
            Some(p) if p.exists() => MappingTable::load(p).unwrap_or_else(|e| {
                log::warn!("reloading mapping {}: {e}; using the startup table", p.display());
                self.mapping.clone()
            }),
            _ => self.mapping.clone(),
        };
        let session = Session::new(
            id,
            Arc::clone(&self.cfg),
            Arc::clone(&self.extractor),
            Arc::clone(&self.provider),
            mapping,
            session_seed(self.cfg.server.seed, id),
        )
        .with_debug_gestures(self.opts.debug_gestures)
        .with_mapping_path(self.opts.mapping_path.clone());
        let (tx, rx) = mpsc::channel();
        let tick = Duration::from_millis(self.cfg.server.tick_ms);
        std::thread::Builder::new()
            .name(format!("session-{id}"))
            .spawn(move || session_loop(session, rx, tick))
            .expect("spawn session thread");
        log::info!("session {id:?} opened");
        sessions.insert(id.to_string(), tx.clone());
        tx
    }
}

fn route(session: &Session, clients: &BTreeMap<ConnId, Client>, from: Option<ConnId>, out: Vec<Outbound>) {
    for o in out {
        match o {
            Outbound::Broadcast(m) => {
                let text = m.to_json();
                for c in clients.values() {
                    let _ = c.tx.send(text.clone());
                }
            }
            Outbound::Reply(m) => {
                if let Some(c) = from.and_then(|id| clients.get(&id)) {
                    let _ = c.tx.send(m.to_json());
                }
            }
            Outbound::Error(e) => {
                if let Some(c) = from.and_then(|id| clients.get(&id)) {
                    send_error(&c.tx, &c.error_seq, session.id(), &e);
                }
            }
        }
    }
}

fn session_loop(mut session: Session, rx: mpsc::Receiver<Cmd>, tick: Duration) {
    let start = Instant::now();
    let mut clients: BTreeMap<ConnId, Client> = BTreeMap::new();
    loop {
        let cmd = match rx.recv_timeout(tick) {
            Ok(cmd) => Some(cmd),
            Err(mpsc::RecvTimeoutError::Timeout) => None,
            Err(mpsc::RecvTimeoutError::Disconnected) => break,
        };
        let now = start.elapsed().as_millis() as u64;
        match cmd {
            Some(Cmd::Join { conn, client, hello }) => {
                clients.insert(conn, client);
                let out = session.handle(&hello, now);
                route(&session, &clients, Some(conn), out);
            }
            Some(Cmd::Message { conn, msg }) => {
                let out = match clients.get(&conn) {
                    Some(c) if c.role == Role::Viewer => vec![Outbound::Error(ErrorPayload::new(
                        "read_only",
                        "viewers may only send ClientHello",
                        Some(msg.seq),
                    ))],
                    _ => session.handle(&msg, now),
                };
                route(&session, &clients, Some(conn), out);
            }
            Some(Cmd::Leave { conn }) => {
                clients.remove(&conn);
                if clients.is_empty() {
                    let l = session.latency();
                    log::info!(
                        "session {:?} idle; transcript->scene latency n={} p50={}us p95={}us max={}us",
                        session.id(),
                        l.count,
                        l.p50_us,
                        l.p95_us,
                        l.max_us
                    );
                }
            }
            None => {}
        }
        let out = session.advance_to(now);
        route(&session, &clients, None, out);
    }
}

pub struct Server {
    listener: TcpListener,
    shared: Arc<Shared>,
}

impl Server {
    /// Binds `server.host:server.port` from the config (port 0 picks a free one).
    pub async fn bind(cfg: Config, mapping: MappingTable, opts: ServerOptions) -> Result<Self, ServerError> {
        cfg.validate()?;
        let addr = format!("{}:{}", cfg.server.host, cfg.server.port);
        let listener = TcpListener::bind(&addr)
            .await
            .map_err(|source| ServerError::Bind { addr, source })?;
        let provider: Arc<dyn SuggestionProvider> = Arc::from(cfg.suggestion_provider());
        Ok(Self {
            listener,
            shared: Arc::new(Shared {
                cfg: Arc::new(cfg),
                extractor: Arc::new(KeywordExtractor::default()),
                provider,
                mapping,
                opts,
                sessions: Mutex::new(HashMap::new()),
                next_conn: AtomicU64::new(1),
            }),
        })
    }

    pub fn local_addr(&self) -> std::io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Accepts connections until the task is dropped.
    pub async fn run(self) {
        loop {
            match self.listener.accept().await {
                Ok((stream, peer)) => {
                    let shared = Arc::clone(&self.shared);
                    let conn = shared.next_conn.fetch_add(1, Ordering::Relaxed);
                    tokio::spawn(async move {
                        if let Err(e) = connection(stream, shared, conn).await {
                            log::debug!("connection {conn} from {peer}: {e}");
                        }
                    });
                }
                Err(e) => log::warn!("accept: {e}"),
            }
        }
    }
}

async fn connection(
    stream: TcpStream,
    shared: Arc<Shared>,
    conn: ConnId,
) -> Result<(), tokio_tungstenite::tungstenite::Error> {
    let ws = tokio_tungstenite::accept_async(stream).await?;
    let (mut sink, mut source) = ws.split();
    let (tx, mut rx) = unbounded_channel::<String>();
    let writer = tokio::spawn(async move {
        while let Some(text) = rx.recv().await {
            if sink.send(Message::Text(text)).await.is_err() {
                break;
            }
        }
        let _ = sink.close().await;
    });

    let error_seq = Arc::new(AtomicU64::new(0));
    let mut joined: Option<(String, mpsc::Sender<Cmd>)> = None;
    let fail = |sid: &str, code: &str, message: String, ref_seq: Option<u64>| {
        send_error(&tx, &error_seq, sid, &ErrorPayload::new(code, message, ref_seq));
    };

    while let Some(frame) = source.next().await {
        let text = match frame {
            Ok(Message::Text(t)) => t,
            Ok(Message::Binary(_)) => {
                let sid = joined.as_ref().map_or("", |(s, _)| s.as_str());
                fail(sid, "parse", "binary frames are not supported; send JSON text".into(), None);
                continue;
            }
            Ok(Message::Close(_)) | Err(_) => break,
            Ok(_) => continue,
        };
        let sid = joined.as_ref().map_or(String::new(), |(s, _)| s.clone());
        let msg = match WireMessage::parse(&text) {
            Ok(m) => m,
            Err(e) => {
                fail(&sid, e.code(), e.to_string(), None);
                continue;
            }
        };
        if msg.kind == MessageType::ClientHello {
            let hello: ClientHello = match msg.decode() {
                Ok(super::wire::Inbound::ClientHello(h)) => h,
                Ok(_) => unreachable!("type checked"),
                Err(e) => {
                    fail(&msg.session_id, e.code(), e.to_string(), Some(msg.seq));
                    continue;
                }
            };
            if let Some((_, old)) = joined.take() {
                let _ = old.send(Cmd::Leave { conn });
            }
            let session = shared.session(&msg.session_id);
            let client = Client {
                tx: tx.clone(),
                role: hello.role,
                error_seq: Arc::clone(&error_seq),
            };
            let id = msg.session_id.clone();
            if session.send(Cmd::Join { conn, client, hello: msg }).is_ok() {
                joined = Some((id, session));
            }
            continue;
        }
        match &joined {
            None => fail(
                &msg.session_id,
                "no_session",
                "send ClientHello before other messages".into(),
                Some(msg.seq),
            ),
            Some((id, _)) if *id != msg.session_id => fail(
                id,
                "session",
                format!("connection is joined to {id:?}, not {:?}", msg.session_id),
                Some(msg.seq),
            ),
            Some((_, session)) => {
                let _ = session.send(Cmd::Message { conn, msg });
            }
        }
    }

    if let Some((_, session)) = joined {
        let _ = session.send(Cmd::Leave { conn });
    }
    drop(tx);
    let _ = writer.await;
    Ok(())
}

/// Binds and serves until the process ends.
pub async fn serve(cfg: Config, mapping: MappingTable, opts: ServerOptions) -> Result<(), ServerError> {
    let server = Server::bind(cfg, mapping, opts).await?;
    if let Ok(addr) = server.local_addr() {
        log::info!("listening on ws://{addr}");
    }
    server.run().await;
    Ok(())
}
