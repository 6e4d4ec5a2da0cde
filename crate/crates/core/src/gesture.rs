//! Hand-landmark gesture recognition.
//!
//! Per-hand frames of 21 landmarks are reduced to finger curl states and a
//! hysteretic pinch state, then a small per-session state machine turns the
//! stream into discrete events: debounced pointing, single-hand pinch drags,
//! two-hand scale/rotate episodes, and swipes.
//!
//! All distances use x/y only; z is ignored.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{signed_angle_deg, Point};

pub const LANDMARK_COUNT: usize = 21;

pub const WRIST: usize = 0;
pub const THUMB_IP: usize = 3;
pub const THUMB_TIP: usize = 4;
pub const INDEX_PIP: usize = 6;
pub const INDEX_TIP: usize = 8;
pub const MIDDLE_MCP: usize = 9;
pub const MIDDLE_PIP: usize = 10;
pub const MIDDLE_TIP: usize = 12;
pub const RING_PIP: usize = 14;
pub const RING_TIP: usize = 16;
pub const PINKY_PIP: usize = 18;
pub const PINKY_TIP: usize = 20;

/// (tip, reference joint) per finger, thumb first.
const FINGERS: [(usize, usize); 5] = [
    (THUMB_TIP, THUMB_IP),
    (INDEX_TIP, INDEX_PIP),
    (MIDDLE_TIP, MIDDLE_PIP),
    (RING_TIP, RING_PIP),
    (PINKY_TIP, PINKY_PIP),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn index(self) -> usize {
        match self {
            Side::Left => 0,
            Side::Right => 1,
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

impl FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            _ => Err(format!("unknown hand side {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Landmark {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Landmark {
    pub fn xy(self) -> Point {
        Point::new(self.x, self.y)
    }
}

/// One hand at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct HandFrame {
    pub side: Side,
    pub t_ms: u64,
    landmarks: [Landmark; LANDMARK_COUNT],
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GestureError {
    #[error("hand frame needs {LANDMARK_COUNT} landmarks, got {0}")]
    LandmarkCount(usize),
    #[error("stale {side} hand frame at {t_ms} ms (last {last_ms} ms)")]
    StaleFrame { side: Side, t_ms: u64, last_ms: u64 },
}

impl HandFrame {
    /// Builds a frame from `[x, y, z]` triples; x and y are clamped to [0, 1].
    pub fn new(side: Side, t_ms: u64, points: &[[f64; 3]]) -> Result<Self, GestureError> {
        if points.len() != LANDMARK_COUNT {
            return Err(GestureError::LandmarkCount(points.len()));
        }
        let mut landmarks = [Landmark::default(); LANDMARK_COUNT];
        for (lm, p) in landmarks.iter_mut().zip(points) {
            let xy = Point::new(p[0], p[1]).clamped();
            *lm = Landmark {
                x: xy.x,
                y: xy.y,
                z: if p[2].is_finite() { p[2] } else { 0.0 },
            };
        }
        Ok(Self {
            side,
            t_ms,
            landmarks,
        })
    }

    pub fn landmarks(&self) -> &[Landmark; LANDMARK_COUNT] {
        &self.landmarks
    }

    pub fn point(&self, i: usize) -> Point {
        self.landmarks[i].xy()
    }

    /// Midpoint of thumb and index tips.
    pub fn pinch_point(&self) -> Point {
        self.point(THUMB_TIP).midpoint(self.point(INDEX_TIP))
    }

    pub fn pinch_distance(&self) -> f64 {
        self.point(THUMB_TIP).distance(self.point(INDEX_TIP))
    }

    /// Middle-finger knuckle; used as the hand's anchor position.
    pub fn palm(&self) -> Point {
        self.point(MIDDLE_MCP)
    }

    pub fn centroid(&self) -> Point {
        let n = LANDMARK_COUNT as f64;
        let (sx, sy) = self
            .landmarks
            .iter()
            .fold((0.0, 0.0), |(sx, sy), l| (sx + l.x, sy + l.y));
        Point::new(sx / n, sy / n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GestureConfig {
    pub pinch_on: f64,
    pub pinch_off: f64,
    pub curl_factor: f64,
    pub point_debounce_ms: u64,
    pub swipe_speed: f64,
    pub swipe_sustain_ms: u64,
    /// The other hand counts as present for two-hand gestures only if its
    /// last frame is at most this old.
    pub hand_timeout_ms: u64,
}

impl Default for GestureConfig {
    fn default() -> Self {
        Self {
            pinch_on: 0.06,
            pinch_off: 0.09,
            curl_factor: 1.1,
            point_debounce_ms: 250,
            swipe_speed: 1.5,
            swipe_sustain_ms: 120,
            hand_timeout_ms: 300,
        }
    }
}

impl GestureConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.pinch_on > 0.0 && self.pinch_on < self.pinch_off) {
            return Err("gesture.pinch_on must be positive and below gesture.pinch_off".into());
        }
        if self.curl_factor.is_nan() || self.curl_factor <= 0.0 {
            return Err("gesture.curl_factor must be positive".into());
        }
        if self.swipe_speed.is_nan() || self.swipe_speed <= 0.0 {
            return Err("gesture.swipe_speed must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FingerState {
    Upward,
    Inward,
}

/// Thumb, index, middle, ring, pinky. A finger is Inward when its tip is no
/// farther from the wrist than `curl_factor` times its PIP joint (IP joint
/// for the thumb).
pub fn finger_states(frame: &HandFrame, curl_factor: f64) -> [FingerState; 5] {
    let wrist = frame.point(WRIST);
    FINGERS.map(|(tip, joint)| {
        let tip_d = wrist.distance(frame.point(tip));
        let joint_d = wrist.distance(frame.point(joint));
        if tip_d <= joint_d * curl_factor {
            FingerState::Inward
        } else {
            FingerState::Upward
        }
    })
}

/// Hysteretic pinch: engages below `pinch_on`, releases above `pinch_off`.
pub fn pinch_state(frame: &HandFrame, was_pinching: bool, cfg: &GestureConfig) -> bool {
    let d = frame.pinch_distance();
    if was_pinching {
        d <= cfg.pinch_off
    } else {
        d < cfg.pinch_on
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum GestureKind {
    Point {
        side: Side,
        position: Point,
    },
    PinchStart {
        side: Side,
        position: Point,
    },
    PinchMove {
        side: Side,
        position: Point,
    },
    PinchEnd {
        side: Side,
        position: Point,
    },
    TwoHandStart {
        left: Point,
        right: Point,
        scale_ratio: f64,
        rotation_deg: f64,
    },
    TwoHandUpdate {
        left: Point,
        right: Point,
        scale_ratio: f64,
        rotation_deg: f64,
    },
    TwoHandEnd {
        left: Point,
        right: Point,
    },
    Swipe {
        side: Side,
        position: Point,
        velocity: Point,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GestureEvent {
    pub t_ms: u64,
    #[serde(flatten)]
    pub kind: GestureKind,
}

#[derive(Debug, Clone, Default)]
struct HandTrack {
    last_t: Option<u64>,
    pinching: bool,
    pinch_pos: Point,
    /// Single-hand pinch episode open.
    pinch_active: bool,
    /// Still pinching after a two-hand episode; ignored until released.
    suppressed: bool,
    point_since: Option<u64>,
    point_emitted: bool,
    swipe_since: Option<(u64, Point)>,
    swipe_emitted: bool,
    last_centroid: Option<(u64, Point)>,
}

const MIN_SCALE_RATIO: f64 = 1e-6;

#[derive(Debug, Clone)]
struct TwoHandEpisode {
    start_vec: Point,
    pos: [Point; 2],
}

impl TwoHandEpisode {
    fn current(&self) -> (f64, f64) {
        let now = self.pos[1] - self.pos[0];
        let start_len = self.start_vec.norm();
        let ratio = if start_len > 0.0 {
            (now.norm() / start_len).max(MIN_SCALE_RATIO)
        } else {
            1.0
        };
        (ratio, signed_angle_deg(self.start_vec, now))
    }
}

/// Per-session gesture state machine.
#[derive(Debug, Clone, Default)]
pub struct GestureClassifier {
    cfg: GestureConfig,
    hands: [HandTrack; 2],
    two_hand: Option<TwoHandEpisode>,
}

impl GestureClassifier {
    pub fn new(cfg: GestureConfig) -> Self {
        Self {
            cfg,
            ..Self::default()
        }
    }

    pub fn config(&self) -> &GestureConfig {
        &self.cfg
    }

    pub fn is_pinching(&self, side: Side) -> bool {
        self.hands[side.index()].pinching
    }

    fn other_present(&self, side: Side, t_ms: u64) -> bool {
        let other = &self.hands[side.other().index()];
        other
            .last_t
            .is_some_and(|ot| t_ms.abs_diff(ot) <= self.cfg.hand_timeout_ms)
    }

    /// Feeds one frame; frames of one side must not go back in time.
    pub fn classify(&mut self, frame: &HandFrame) -> Result<Vec<GestureEvent>, GestureError> {
        let side = frame.side;
        let i = side.index();
        let t = frame.t_ms;
        if let Some(last) = self.hands[i].last_t {
            if t < last {
                return Err(GestureError::StaleFrame {
                    side,
                    t_ms: t,
                    last_ms: last,
                });
            }
        }

        let mut events = Vec::new();
        let mut emit = |kind| events.push(GestureEvent { t_ms: t, kind });

        let states = finger_states(frame, self.cfg.curl_factor);
        let pinching = pinch_state(frame, self.hands[i].pinching, &self.cfg);
        let pinch_pos = frame.pinch_point();
        let other_present = self.other_present(side, t);
        let other_pinching = other_present && self.hands[1 - i].pinching;

        if let Some(ep) = self.two_hand.as_mut() {
            if pinching && other_pinching {
                ep.pos[i] = pinch_pos;
                let (scale_ratio, rotation_deg) = ep.current();
                emit(GestureKind::TwoHandUpdate {
                    left: ep.pos[0],
                    right: ep.pos[1],
                    scale_ratio,
                    rotation_deg,
                });
            } else {
                if pinching {
                    ep.pos[i] = pinch_pos;
                }
                emit(GestureKind::TwoHandEnd {
                    left: ep.pos[0],
                    right: ep.pos[1],
                });
                self.two_hand = None;
                self.hands[i].suppressed = pinching;
                let o = &mut self.hands[1 - i];
                o.suppressed = o.pinching;
            }
        } else if pinching
            && other_pinching
            && !self.hands[i].suppressed
            && !self.hands[1 - i].suppressed
        {
            for h in 0..2 {
                if self.hands[h].pinch_active {
                    self.hands[h].pinch_active = false;
                    let pos = if h == i { pinch_pos } else { self.hands[h].pinch_pos };
                    let side = if h == 0 { Side::Left } else { Side::Right };
                    emit(GestureKind::PinchEnd {
                        side,
                        position: pos.clamped(),
                    });
                }
            }
            let mut pos = [self.hands[0].pinch_pos, self.hands[1].pinch_pos];
            pos[i] = pinch_pos;
            self.two_hand = Some(TwoHandEpisode {
                start_vec: pos[1] - pos[0],
                pos,
            });
            emit(GestureKind::TwoHandStart {
                left: pos[0],
                right: pos[1],
                scale_ratio: 1.0,
                rotation_deg: 0.0,
            });
        } else {
            let h = &mut self.hands[i];
            if pinching && !h.suppressed {
                let position = pinch_pos.clamped();
                if h.pinch_active {
                    emit(GestureKind::PinchMove { side, position });
                } else {
                    h.pinch_active = true;
                    emit(GestureKind::PinchStart { side, position });
                }
            } else if !pinching && h.pinch_active {
                h.pinch_active = false;
                emit(GestureKind::PinchEnd {
                    side,
                    position: pinch_pos.clamped(),
                });
            }
        }

        let h = &mut self.hands[i];
        if !pinching {
            h.suppressed = false;
        }
        h.pinching = pinching;
        h.pinch_pos = pinch_pos;

        let pointing = !pinching
            && states[1] == FingerState::Upward
            && [0, 2, 3, 4].iter().all(|&f| states[f] == FingerState::Inward);
        if pointing {
            let since = *h.point_since.get_or_insert(t);
            if !h.point_emitted && t - since >= self.cfg.point_debounce_ms {
                h.point_emitted = true;
                emit(GestureKind::Point {
                    side,
                    position: frame.point(INDEX_TIP),
                });
            }
        } else {
            h.point_since = None;
            h.point_emitted = false;
        }

        let centroid = frame.centroid();
        let open = !pinching && states[1..].iter().all(|s| *s == FingerState::Upward);
        let fast = h.last_centroid.is_some_and(|(lt, lc)| {
            t > lt && centroid.distance(lc) / ((t - lt) as f64 / 1000.0) > self.cfg.swipe_speed
        });
        if open && fast {
            let (since_t, since_c) = *h
                .swipe_since
                .get_or_insert(h.last_centroid.expect("fast implies a previous frame"));
            if !h.swipe_emitted && t - since_t >= self.cfg.swipe_sustain_ms {
                h.swipe_emitted = true;
                let secs = (t - since_t) as f64 / 1000.0;
                let d = centroid - since_c;
                emit(GestureKind::Swipe {
                    side,
                    position: centroid,
                    velocity: Point::new(d.x / secs, d.y / secs),
                });
            }
        } else {
            h.swipe_since = None;
            h.swipe_emitted = false;
        }
        h.last_centroid = Some((t, centroid));
        h.last_t = Some(t);

        Ok(events)
    }
}

/// Synthetic hand poses built from explicit geometry, for tests and demos.
pub mod synth {
    use super::*;

    /// Finger pose for [`hand`].
    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub enum Pose {
        Open,
        Fist,
        Pointing,
    }

    /// A hand with its wrist at `wrist`, fingers along -y (up the image).
    /// Extended tips sit at 2x their PIP radius from the wrist, curled tips
    /// at 0.5x. The thumb tip is placed `pinch_gap` left of the index tip
    /// when `pinch_gap` is given.
    pub fn hand(side: Side, t_ms: u64, wrist: Point, pose: Pose, pinch_gap: Option<f64>) -> HandFrame {
        let mut pts = [[wrist.x, wrist.y, 0.0]; LANDMARK_COUNT];
        // finger columns (dx) and PIP radius
        let fingers = [
            (THUMB_IP, THUMB_TIP, -0.06, 0.05),
            (INDEX_PIP, INDEX_TIP, -0.03, 0.10),
            (MIDDLE_PIP, MIDDLE_TIP, 0.0, 0.11),
            (RING_PIP, RING_TIP, 0.03, 0.10),
            (PINKY_PIP, PINKY_TIP, 0.06, 0.08),
        ];
        for (n, (pip, tip, dx, r)) in fingers.into_iter().enumerate() {
            let extended = match pose {
                Pose::Open => true,
                Pose::Fist => false,
                Pose::Pointing => n == 1,
            };
            let dir = Point::new(dx, -r);
            let pip_p = Point::new(wrist.x + dir.x, wrist.y + dir.y);
            let k = if extended { 2.0 } else { 0.5 };
            let tip_p = Point::new(wrist.x + dir.x * k, wrist.y + dir.y * k);
            pts[pip] = [pip_p.x, pip_p.y, 0.0];
            pts[tip] = [tip_p.x, tip_p.y, 0.0];
            // MCP and DIP joints between wrist/PIP and PIP/tip
            pts[pip - 1] = [wrist.x + dir.x * 0.6, wrist.y + dir.y * 0.6, 0.0];
            if tip - 1 != pip {
                pts[tip - 1] = [(pip_p.x + tip_p.x) / 2.0, (pip_p.y + tip_p.y) / 2.0, 0.0];
            }
        }
        if let Some(gap) = pinch_gap {
            let idx = pts[INDEX_TIP];
            pts[THUMB_TIP] = [idx[0] - gap, idx[1], 0.0];
        }
        HandFrame::new(side, t_ms, &pts).expect("21 landmarks")
    }

    /// A hand whose thumb/index pinch midpoint lands at `at`.
    pub fn pinching_hand(side: Side, t_ms: u64, at: Point, gap: f64) -> HandFrame {
        let probe = hand(side, t_ms, Point::new(0.5, 0.5), Pose::Fist, Some(gap));
        let off = at - probe.pinch_point();
        hand(side, t_ms, Point::new(0.5 + off.x, 0.5 + off.y), Pose::Fist, Some(gap))
    }
}

#[cfg(test)]
mod tests {
    use super::synth::{hand, pinching_hand, Pose};
    use super::*;
    use proptest::prelude::*;

    fn cfg() -> GestureConfig {
        GestureConfig::default()
    }

    #[test]
    fn extended_index_is_upward() {
        let f = hand(Side::Right, 0, Point::new(0.5, 0.8), Pose::Pointing, None);
        let s = finger_states(&f, 1.1);
        assert_eq!(s[1], FingerState::Upward);
        assert!([0, 2, 3, 4].iter().all(|&i| s[i] == FingerState::Inward));
    }

    #[test]
    fn fist_is_all_inward() {
        let f = hand(Side::Left, 0, Point::new(0.5, 0.8), Pose::Fist, None);
        assert_eq!(finger_states(&f, 1.1), [FingerState::Inward; 5]);
    }

    #[test]
    fn degenerate_frame_is_all_inward() {
        let f = HandFrame::new(Side::Left, 0, &[[0.3, 0.3, 0.0]; 21]).unwrap();
        assert_eq!(finger_states(&f, 1.1), [FingerState::Inward; 5]);
    }

    #[test]
    fn landmark_count_checked() {
        assert_eq!(
            HandFrame::new(Side::Left, 0, &[[0.0; 3]; 20]),
            Err(GestureError::LandmarkCount(20))
        );
        let f = HandFrame::new(Side::Left, 0, &[[1.5, -0.2, 0.0]; 21]).unwrap();
        assert_eq!(f.point(0), Point::new(1.0, 0.0));
    }

    fn gap_frame(gap: f64) -> HandFrame {
        pinching_hand(Side::Right, 0, Point::new(0.5, 0.5), gap)
    }

    #[test]
    fn pinch_thresholds() {
        let c = cfg();
        assert!((gap_frame(0.05).pinch_distance() - 0.05).abs() < 1e-12);
        assert!(pinch_state(&gap_frame(0.05), false, &c));
        assert!(pinch_state(&gap_frame(0.07), true, &c));
        assert!(!pinch_state(&gap_frame(0.07), false, &c));
        assert!(!pinch_state(&gap_frame(0.10), true, &c));
    }

    #[test]
    fn single_pointing_frame_does_not_point() {
        let mut g = GestureClassifier::new(cfg());
        let f = hand(Side::Right, 0, Point::new(0.5, 0.8), Pose::Pointing, None);
        assert!(g.classify(&f).unwrap().is_empty());
    }

    #[test]
    fn pointing_held_emits_once() {
        let mut g = GestureClassifier::new(cfg());
        let mut points = Vec::new();
        for t in (0..=600).step_by(50) {
            let f = hand(Side::Right, t, Point::new(0.5, 0.8), Pose::Pointing, None);
            for e in g.classify(&f).unwrap() {
                points.push(e);
            }
        }
        assert_eq!(points.len(), 1);
        assert_eq!(points[0].t_ms, 250);
        let tip = hand(Side::Right, 0, Point::new(0.5, 0.8), Pose::Pointing, None).point(INDEX_TIP);
        assert_eq!(
            points[0].kind,
            GestureKind::Point {
                side: Side::Right,
                position: tip
            }
        );
    }

    #[test]
    fn stale_frame_dropped() {
        let mut g = GestureClassifier::new(cfg());
        g.classify(&hand(Side::Left, 100, Point::new(0.5, 0.8), Pose::Open, None)).unwrap();
        assert!(matches!(
            g.classify(&hand(Side::Left, 99, Point::new(0.5, 0.8), Pose::Open, None)),
            Err(GestureError::StaleFrame { .. })
        ));
        // other side has its own clock
        assert!(g.classify(&hand(Side::Right, 0, Point::new(0.5, 0.8), Pose::Open, None)).is_ok());
    }

    #[test]
    fn pinch_drag_bracketed() {
        let mut g = GestureClassifier::new(cfg());
        let mut kinds = Vec::new();
        for (t, gap) in [(0, 0.2), (30, 0.03), (60, 0.03), (90, 0.08), (120, 0.12)] {
            let f = pinching_hand(Side::Left, t, Point::new(0.3 + t as f64 / 1000.0, 0.5), gap);
            kinds.extend(g.classify(&f).unwrap().into_iter().map(|e| e.kind));
        }
        assert!(matches!(kinds[0], GestureKind::PinchStart { .. }));
        assert!(matches!(kinds[1], GestureKind::PinchMove { .. }));
        assert!(matches!(kinds[2], GestureKind::PinchMove { .. }));
        assert!(matches!(kinds[3], GestureKind::PinchEnd { .. }));
        assert_eq!(kinds.len(), 4);
    }

    #[test]
    fn two_hand_scale_and_rotation() {
        let mut g = GestureClassifier::new(cfg());
        let l0 = Point::new(0.4, 0.5);
        let r0 = Point::new(0.6, 0.5);
        g.classify(&pinching_hand(Side::Left, 0, l0, 0.02)).unwrap();
        let start = g.classify(&pinching_hand(Side::Right, 10, r0, 0.02)).unwrap();
        let GestureKind::TwoHandStart { scale_ratio, rotation_deg, .. } = start.last().unwrap().kind else {
            panic!("{start:?}");
        };
        assert_eq!((scale_ratio, rotation_deg), (1.0, 0.0));
        let r1 = Point::new(0.8, 0.5);
        let ev = g.classify(&pinching_hand(Side::Right, 20, r1, 0.02)).unwrap();
        let GestureKind::TwoHandUpdate { scale_ratio, rotation_deg, .. } = ev[0].kind else {
            panic!("{ev:?}");
        };
        assert!((scale_ratio - 2.0).abs() < 1e-9);
        assert!(rotation_deg.abs() < 1e-9);

        let a = 30f64.to_radians();
        let r2 = Point::new(0.4 + 0.2 * a.cos(), 0.5 + 0.2 * a.sin());
        let ev = g.classify(&pinching_hand(Side::Right, 30, r2, 0.02)).unwrap();
        let GestureKind::TwoHandUpdate { scale_ratio, rotation_deg, .. } = ev[0].kind else {
            panic!("{ev:?}");
        };
        assert!((scale_ratio - 1.0).abs() < 1e-9);
        assert!((rotation_deg - 30.0).abs() < 1e-6);

        let end = g.classify(&pinching_hand(Side::Left, 40, l0, 0.2)).unwrap();
        assert!(matches!(end[0].kind, GestureKind::TwoHandEnd { .. }));
        // right hand still pinching but suppressed until it lets go
        assert!(g.classify(&pinching_hand(Side::Right, 50, r2, 0.02)).unwrap().is_empty());
    }

    #[test]
    fn swipe_needs_sustained_speed() {
        let mut g = GestureClassifier::new(cfg());
        let mut out = Vec::new();
        // 0.05 per 20 ms = 2.5 units/s
        for k in 0..10u64 {
            let f = hand(Side::Right, k * 20, Point::new(0.2 + 0.05 * k as f64, 0.8), Pose::Open, None);
            out.extend(g.classify(&f).unwrap());
        }
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].t_ms, 120);
        let GestureKind::Swipe { velocity, .. } = out[0].kind else { panic!() };
        assert!((velocity.x - 2.5).abs() < 1e-9 && velocity.y.abs() < 1e-9);
    }

    #[test]
    fn slow_motion_is_not_a_swipe() {
        let mut g = GestureClassifier::new(cfg());
        for k in 0..20u64 {
            let f = hand(Side::Right, k * 20, Point::new(0.2 + 0.01 * k as f64, 0.8), Pose::Open, None);
            assert!(g.classify(&f).unwrap().is_empty());
        }
    }

    proptest! {
        #[test]
        fn no_toggle_inside_band(gaps in prop::collection::vec(0.0601f64..0.0899, 1..200), start in any::<bool>()) {
            let c = cfg();
            let mut state = start;
            for gap in gaps {
                let next = pinch_state(&gap_frame(gap), state, &c);
                prop_assert_eq!(next, state);
                state = next;
            }
        }

        #[test]
        fn events_well_bracketed(steps in prop::collection::vec((0usize..2, 0.0f64..0.15, 0.1f64..0.9, 0.1f64..0.9, 1u64..40), 1..120)) {
            let mut g = GestureClassifier::new(cfg());
            let mut t = [0u64; 2];
            let mut pinch_open = [false; 2];
            let mut two_open = false;
            for (s, gap, x, y, dt) in steps {
                t[s] += dt;
                let side = if s == 0 { Side::Left } else { Side::Right };
                let f = pinching_hand(side, t[s], Point::new(x, y), gap);
                for e in g.classify(&f).unwrap() {
                    match e.kind {
                        GestureKind::PinchStart { side, .. } => { prop_assert!(!pinch_open[side.index()]); pinch_open[side.index()] = true; }
                        GestureKind::PinchMove { side, .. } => prop_assert!(pinch_open[side.index()]),
                        GestureKind::PinchEnd { side, .. } => { prop_assert!(pinch_open[side.index()]); pinch_open[side.index()] = false; }
                        GestureKind::TwoHandStart { scale_ratio, rotation_deg, .. } => {
                            prop_assert!(!two_open && !pinch_open[0] && !pinch_open[1]);
                            prop_assert_eq!((scale_ratio, rotation_deg), (1.0, 0.0));
                            two_open = true;
                        }
                        GestureKind::TwoHandUpdate { scale_ratio, .. } => { prop_assert!(two_open); prop_assert!(scale_ratio > 0.0); }
                        GestureKind::TwoHandEnd { .. } => { prop_assert!(two_open); two_open = false; }
                        _ => {}
                    }
                }
            }
        }
    }
}
