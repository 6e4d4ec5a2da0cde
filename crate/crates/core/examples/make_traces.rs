//! Regenerates the golden session traces under tests/fixtures/traces and
//! their frozen timelines.
//!
//! cargo run -p livecue-core --example make_traces

use std::path::Path;

use base64::Engine as _;
use serde_json::{json, Value};

use livecue::geom::Point;
use livecue::gesture::synth::{hand, pinching_hand, Pose};
use livecue::gesture::{HandFrame, Side};
use livecue::marker::FrameBuffer;
use livecue::protocol::{replay, MessageType, SessionTrace, TraceHeader, WireMessage};

struct Builder {
    session: String,
    seq: u64,
    events: Vec<WireMessage>,
}

impl Builder {
    fn new(session: &str) -> Self {
        Self {
            session: session.into(),
            seq: 0,
            events: Vec::new(),
        }
    }

    fn push(&mut self, kind: MessageType, t: u64, payload: Value) {
        let seq = if kind == MessageType::ClientHello {
            0
        } else {
            self.seq += 1;
            self.seq
        };
        self.events.push(WireMessage::new(kind, &self.session, seq, Some(t), payload));
    }

    fn hello(&mut self, t: u64) {
        self.push(MessageType::ClientHello, t, json!({"role": "presenter"}));
    }

    fn say(&mut self, t: u64, text: &str) {
        self.push(MessageType::TranscriptMsg, t, json!({"text": text, "is_final": true}));
    }

    fn interim(&mut self, t: u64, text: &str) {
        self.push(MessageType::TranscriptMsg, t, json!({"text": text, "is_final": false}));
    }

    fn hand(&mut self, f: &HandFrame) {
        let pts: Vec<[f64; 3]> = f.landmarks().iter().map(|l| [l.x, l.y, l.z]).collect();
        self.push(MessageType::HandFrameMsg, f.t_ms, json!({"side": f.side, "landmarks": pts}));
    }

    fn frame(&mut self, t: u64, fb: &FrameBuffer) {
        let b64 = base64::engine::general_purpose::STANDARD.encode(&fb.pixels);
        self.push(
            MessageType::FrameMsg,
            t,
            json!({"width": fb.width, "height": fb.height, "rgb_b64": b64}),
        );
    }

    fn finish(mut self, header: TraceHeader) -> SessionTrace {
        self.events.sort_by_key(|e| e.t_ms);
        SessionTrace {
            header,
            events: self.events,
        }
    }
}

fn entry(keyword: &str, kind: &str, url: &str) -> Value {
    json!({"keyword": keyword, "kind": kind, "url": url})
}

fn lecture() -> SessionTrace {
    let mut b = Builder::new("lecture");
    b.hello(0);
    b.interim(500, "today we will talk");
    b.say(1_000, "Today we will talk about white blood cells.");
    b.say(3_000, "Neural networks learn patterns.");
    b.say(6_000, "These killer T cells attack the HIV virus.");
    b.say(7_000, "The HIV virus spreads.");
    b.say(20_000, "First, durability.");
    b.say(21_000, "Second, lightweight design.");
    b.say(22_000, "And third the price.");
    b.say(23_000, "My name is John.");
    b.say(40_000, "programming");
    b.say(41_000, "programming");
    let mapping = json!({"version": 1, "entries": [
        entry("white blood cells", "image", "https://example.com/img/white-blood-cells.png"),
        entry("hiv virus", "image", "https://example.com/img/hiv.png"),
    ]});
    b.finish(TraceHeader {
        seed: 11,
        config: None,
        started_at: Some("2024-05-02T10:00:00Z".into()),
        mapping: Some(mapping),
    })
}

fn gestures() -> SessionTrace {
    let mut b = Builder::new("gestures");
    b.hello(0);
    b.say(100, "the camera");

    // point with the right hand, then speak: element lands at the fingertip
    for t in (1_000..=1_300).step_by(50) {
        b.hand(&hand(Side::Right, t, Point::new(0.5, 0.75), Pose::Pointing, None));
    }
    b.say(1_400, "water bottle");

    // drag the camera image from its slot to (0.2, 0.75)
    let from = Point::new(0.28, 0.30);
    let to = Point::new(0.2, 0.75);
    for k in 0..=6u64 {
        let s = k as f64 / 6.0;
        let p = Point::new(from.x + (to.x - from.x) * s, from.y + (to.y - from.y) * s);
        b.hand(&pinching_hand(Side::Left, 2_000 + k * 50, p, 0.02));
    }
    b.hand(&pinching_hand(Side::Left, 2_400, to, 0.12));

    // scale the spoken keyword 2x and rotate it 30 degrees
    let tip = hand(Side::Right, 0, Point::new(0.5, 0.75), Pose::Pointing, None).point(livecue::gesture::INDEX_TIP);
    let l0 = Point::new(tip.x - 0.05, tip.y);
    let r0 = Point::new(tip.x + 0.05, tip.y);
    b.hand(&pinching_hand(Side::Left, 3_000, l0, 0.02));
    b.hand(&pinching_hand(Side::Right, 3_010, r0, 0.02));
    b.hand(&pinching_hand(Side::Right, 3_020, Point::new(tip.x + 0.15, tip.y), 0.02));
    let a = 30f64.to_radians();
    b.hand(&pinching_hand(Side::Right, 3_030, Point::new(l0.x + 0.2 * a.cos(), l0.y + 0.2 * a.sin()), 0.02));
    b.hand(&pinching_hand(Side::Left, 3_040, l0, 0.12));
    b.hand(&hand(Side::Right, 3_050, Point::new(0.9, 0.9), Pose::Fist, None));

    // swipe the dragged image away: right to left at 0.05 per 20 ms from mid-frame
    let probe = hand(Side::Right, 0, Point::new(0.5, 0.5), Pose::Open, None);
    let off = probe.centroid() - Point::new(0.5, 0.5);
    for k in 0..10u64 {
        let c = Point::new(to.x + (6.0 - k as f64) * 0.05, to.y);
        let wrist = Point::new(c.x - off.x, c.y - off.y);
        b.hand(&hand(Side::Right, 5_000 + k * 20, wrist, Pose::Open, None));
    }
    let mapping = json!({"version": 1, "entries": [
        entry("camera", "image", "https://example.com/img/camera.png"),
    ]});
    b.finish(TraceHeader {
        seed: 5,
        config: None,
        started_at: Some("2024-05-02T11:00:00Z".into()),
        mapping: Some(mapping),
    })
}

fn markers() -> SessionTrace {
    let mut b = Builder::new("markers");
    b.hello(0);
    let (w, h) = (80u32, 60u32);
    let yellow = [250, 220, 40];
    let scene = |col: u32| {
        let mut fb = FrameBuffer::filled(w, h, [30, 30, 30]);
        fb.fill_rect(col, 30, 8, 8, yellow);
        // small decoy of the same color
        fb.fill_rect(70, 5, 3, 3, yellow);
        fb
    };
    b.frame(0, &scene(10));
    b.say(100, "Our water bottle keeps drinks cold.");
    b.frame(200, &scene(10));
    b.frame(300, &scene(26));
    b.frame(400, &scene(42));
    // marker hidden for 1.5 s; bound elements hold
    for t in [600, 1_100, 1_900] {
        b.frame(t, &FrameBuffer::filled(w, h, [30, 30, 30]));
    }
    b.frame(2_000, &scene(50));
    let mapping = json!({"version": 1, "entries": [
        {"keyword": "water bottle", "kind": "image", "url": "https://example.com/img/bottle.png",
         "show_keyword": true, "anchor_hint": "marker:yellow"},
    ]});
    let config = json!({"markers.specs": [
        {"name": "yellow", "rgb_min": [200, 180, 0], "rgb_max": [255, 255, 110], "min_area_px": 16}
    ]});
    b.finish(TraceHeader {
        seed: 9,
        config: Some(config),
        started_at: Some("2024-05-02T12:00:00Z".into()),
        mapping: Some(mapping),
    })
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/traces");
    std::fs::create_dir_all(&dir).expect("create traces dir");
    for (name, trace) in [("lecture", lecture()), ("gestures", gestures()), ("markers", markers())] {
        let text = trace.to_jsonl();
        // replay what was written, so the timeline matches the file exactly
        let timeline = replay(&SessionTrace::parse(&text).expect("trace reparses")).expect("trace replays");
        std::fs::write(dir.join(format!("{name}.trace.jsonl")), text).expect("write trace");
        std::fs::write(dir.join(format!("{name}.timeline.jsonl")), timeline).expect("write timeline");
        println!("{name}: {} events", trace.events.len());
    }
}
