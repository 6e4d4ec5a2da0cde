//! The authoritative scene: element spawning, placement, expiry, and the
//! gesture/marker transforms applied to live elements.

mod template;

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Point;
use crate::gesture::{GestureEvent, GestureKind, Side};
use crate::keywords::KeywordSpan;
use crate::mapping::{AnchorHint, AssetKind, MappingEntry, MatchResult};
use crate::transcript::FinalizedUtterance;

pub use template::{detect_template, parse_ordinal, TemplateAction};

pub type ElementId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    KeywordText,
    List,
    Profile,
    Image,
    Icon,
    Video,
    Screen,
    Label,
}

impl ElementKind {
    fn is_visual(self) -> bool {
        matches!(
            self,
            ElementKind::Image | ElementKind::Icon | ElementKind::Video | ElementKind::Screen
        )
    }
}

impl From<AssetKind> for ElementKind {
    fn from(kind: AssetKind) -> Self {
        match kind {
            AssetKind::Image => ElementKind::Image,
            AssetKind::Icon => ElementKind::Icon,
            AssetKind::Video => ElementKind::Video,
            AssetKind::Screen => ElementKind::Screen,
        }
    }
}

/// Coordinate frame an element is bound to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Anchor {
    Screen2d { x: f64, y: f64 },
    Hand { side: Side },
    Marker { name: String },
    Surface { u: f64, v: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Style {
    pub text_rgb: [u8; 3],
    pub bg_rgb: [u8; 3],
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneElement {
    pub id: ElementId,
    pub kind: ElementKind,
    /// Text for textual kinds, URL for visuals.
    pub content: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub items: Vec<String>,
    /// Normalized keyword (or mapping key) that spawned the element; used for dedup.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keyword: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utterance_id: Option<u64>,
    pub anchor: Anchor,
    /// Resolved center in normalized screen coordinates.
    pub position: Point,
    pub scale: f64,
    pub rotation_deg: f64,
    pub created_ms: u64,
    pub expires_ms: u64,
    pub show_keyword: bool,
    pub style: Style,
    #[serde(default)]
    pub grabbed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSnapshot {
    pub t_ms: u64,
    pub elements: Vec<SceneElement>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub keyword_duration_ms: u64,
    pub matched_duration_ms: u64,
    pub list_duration_ms: u64,
    pub profile_duration_ms: u64,
    pub left_x: f64,
    pub right_x: f64,
    pub y_start: f64,
    pub y_step: f64,
    pub y_max: f64,
    /// Auto-placement never uses x inside this band (keeps the face clear).
    pub center_band_min: f64,
    pub center_band_max: f64,
    pub visual_alpha: f64,
    pub screen_alpha: f64,
    pub text_alpha: f64,
    pub point_validity_ms: u64,
    pub release_min_lifetime_ms: u64,
    pub marker_offset_y: f64,
    pub marker_hold_ms: u64,
    pub hand_offset_y: f64,
    pub list_position: Point,
    pub profile_position: Point,
    /// Half width/height at scale 1.0, for hit testing.
    pub text_half_extent: Point,
    pub visual_half_extent: Point,
    pub card_half_extent: Point,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            keyword_duration_ms: 4_000,
            matched_duration_ms: 10_000,
            list_duration_ms: 10_000,
            profile_duration_ms: 10_000,
            left_x: 0.28,
            right_x: 0.72,
            y_start: 0.30,
            y_step: 0.12,
            y_max: 0.78,
            center_band_min: 0.38,
            center_band_max: 0.62,
            visual_alpha: 0.75,
            screen_alpha: 1.0,
            text_alpha: 1.0,
            point_validity_ms: 3_000,
            release_min_lifetime_ms: 5_000,
            marker_offset_y: 0.10,
            marker_hold_ms: 1_000,
            hand_offset_y: 0.12,
            list_position: Point::new(0.84, 0.30),
            profile_position: Point::new(0.16, 0.18),
            text_half_extent: Point::new(0.08, 0.04),
            visual_half_extent: Point::new(0.10, 0.10),
            card_half_extent: Point::new(0.12, 0.15),
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), String> {
        let durations = [
            ("engine.keyword_duration_ms", self.keyword_duration_ms),
            ("engine.matched_duration_ms", self.matched_duration_ms),
            ("engine.list_duration_ms", self.list_duration_ms),
            ("engine.profile_duration_ms", self.profile_duration_ms),
        ];
        for (key, v) in durations {
            if v == 0 {
                return Err(format!("{key} must be positive"));
            }
        }
        let in_band = |x: f64| x >= self.center_band_min && x <= self.center_band_max;
        for (key, x) in [
            ("engine.left_x", self.left_x),
            ("engine.right_x", self.right_x),
            ("engine.list_position", self.list_position.x),
            ("engine.profile_position", self.profile_position.x),
        ] {
            if !(0.0..=1.0).contains(&x) || in_band(x) {
                return Err(format!("{key} must be in [0,1] and outside the center band"));
            }
        }
        if self.left_x == self.right_x {
            return Err("engine.left_x and engine.right_x must differ".into());
        }
        if !(self.y_step > 0.0 && self.y_start >= 0.0 && self.y_start <= self.y_max && self.y_max <= 1.0) {
            return Err("engine.y_start/y_step/y_max must describe a non-empty column in [0,1]".into());
        }
        for (key, a) in [
            ("engine.visual_alpha", self.visual_alpha),
            ("engine.screen_alpha", self.screen_alpha),
            ("engine.text_alpha", self.text_alpha),
        ] {
            if !(0.0..=1.0).contains(&a) {
                return Err(format!("{key} must be in [0,1]"));
            }
        }
        Ok(())
    }

    /// Number of auto-placement rows per side.
    fn rows(&self) -> u32 {
        ((self.y_max - self.y_start) / self.y_step + 1e-9).floor() as u32 + 1
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SceneError {
    #[error("unknown marker {0:?}")]
    UnknownMarker(String),
    #[error("unknown element {0}")]
    UnknownElement(ElementId),
}

#[derive(Debug, Clone, Copy)]
struct MarkerState {
    centroid: Point,
    last_seen_ms: u64,
}

#[derive(Debug, Clone, Copy)]
struct TwoHandGrab {
    id: ElementId,
    scale_at_grab: f64,
    rotation_at_grab: f64,
}

/// One presentation's scene. Owned by a single session loop.
#[derive(Debug, Clone)]
pub struct SceneEngine {
    cfg: EngineConfig,
    marker_names: BTreeSet<String>,
    elements: Vec<SceneElement>,
    next_id: ElementId,
    rng: ChaCha8Rng,
    pending_point: Option<(Point, u64)>,
    next_side: Side,
    row: [u32; 2],
    /// Grabbed element and its center minus the pinch point at grab time.
    pinch_grab: [Option<(ElementId, Point)>; 2],
    two_hand_grab: Option<TwoHandGrab>,
    markers: BTreeMap<String, MarkerState>,
    hands: [Option<Point>; 2],
    last_now: u64,
}

impl SceneEngine {
    pub fn new(cfg: EngineConfig, marker_names: impl IntoIterator<Item = String>, seed: u64) -> Self {
        Self {
            cfg,
            marker_names: marker_names.into_iter().collect(),
            elements: Vec::new(),
            next_id: 1,
            rng: ChaCha8Rng::seed_from_u64(seed),
            pending_point: None,
            next_side: Side::Left,
            row: [0; 2],
            pinch_grab: [None; 2],
            two_hand_grab: None,
            markers: BTreeMap::new(),
            hands: [None; 2],
            last_now: 0,
        }
    }

    pub fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    pub fn elements(&self) -> &[SceneElement] {
        &self.elements
    }

    pub fn get(&self, id: ElementId) -> Option<&SceneElement> {
        self.elements.iter().find(|e| e.id == id)
    }

    fn get_mut(&mut self, id: ElementId) -> Option<&mut SceneElement> {
        self.elements.iter_mut().find(|e| e.id == id)
    }

    fn clock(&mut self, now_ms: u64) -> u64 {
        self.last_now = self.last_now.max(now_ms);
        self.last_now
    }

    pub fn snapshot(&self, now_ms: u64) -> SceneSnapshot {
        SceneSnapshot {
            t_ms: now_ms,
            elements: self.elements.clone(),
        }
    }

    pub fn set_pending_point(&mut self, p: Point, now_ms: u64) {
        let now = self.clock(now_ms);
        self.pending_point = Some((p.clamped(), now));
    }

    pub fn pending_point(&self, now_ms: u64) -> Option<Point> {
        self.pending_point
            .filter(|(_, at)| now_ms.saturating_sub(*at) <= self.cfg.point_validity_ms)
            .map(|(p, _)| p)
    }

    fn take_pending_point(&mut self, now_ms: u64) -> Option<Point> {
        let p = self.pending_point(now_ms);
        self.pending_point = None;
        p
    }

    /// Next left/right slot beside the center band.
    fn next_auto_slot(&mut self) -> Point {
        let side = self.next_side;
        let i = side.index();
        let x = match side {
            Side::Left => self.cfg.left_x,
            Side::Right => self.cfg.right_x,
        };
        let y = self.cfg.y_start + f64::from(self.row[i]) * self.cfg.y_step;
        self.row[i] = (self.row[i] + 1) % self.cfg.rows();
        self.next_side = side.other();
        Point::new(x, y)
    }

    fn placement(&mut self, now_ms: u64) -> Point {
        match self.take_pending_point(now_ms) {
            Some(p) => p,
            None => self.next_auto_slot(),
        }
    }

    fn random_style(&mut self, kind: ElementKind) -> Style {
        let text_rgb = [self.rng.gen(), self.rng.gen(), self.rng.gen()];
        let bg_rgb = [self.rng.gen(), self.rng.gen(), self.rng.gen()];
        let alpha = match kind {
            ElementKind::Screen => self.cfg.screen_alpha,
            k if k.is_visual() => self.cfg.visual_alpha,
            _ => self.cfg.text_alpha,
        };
        Style {
            text_rgb,
            bg_rgb,
            alpha,
        }
    }

    fn resolve_position(&self, anchor: &Anchor, fallback: Point) -> Point {
        match anchor {
            Anchor::Screen2d { x, y } => Point::new(*x, *y),
            Anchor::Surface { u, v } => Point::new(*u, *v),
            Anchor::Marker { name } => self
                .markers
                .get(name)
                .map(|m| self.marker_point(m.centroid))
                .unwrap_or(fallback),
            Anchor::Hand { side } => self.hands[side.index()]
                .map(|p| self.hand_point(p))
                .unwrap_or(fallback),
        }
    }

    fn marker_point(&self, centroid: Point) -> Point {
        Point::new(centroid.x, centroid.y - self.cfg.marker_offset_y).clamped()
    }

    fn hand_point(&self, palm: Point) -> Point {
        Point::new(palm.x, palm.y - self.cfg.hand_offset_y).clamped()
    }

    #[allow(clippy::too_many_arguments)]
    fn spawn(
        &mut self,
        kind: ElementKind,
        content: String,
        keyword: Option<String>,
        utterance_id: Option<u64>,
        anchor: Anchor,
        position: Point,
        now: u64,
        duration_ms: u64,
        show_keyword: bool,
    ) -> ElementId {
        let id = self.next_id;
        self.next_id += 1;
        let style = self.random_style(kind);
        self.elements.push(SceneElement {
            id,
            kind,
            content,
            items: Vec::new(),
            keyword,
            utterance_id,
            anchor,
            position: position.clamped(),
            scale: 1.0,
            rotation_deg: 0.0,
            created_ms: now,
            expires_ms: now + duration_ms.max(1),
            show_keyword,
            style,
            grabbed: false,
        });
        id
    }

    fn is_live_keyword(&self, normalized: &str) -> bool {
        self.elements
            .iter()
            .any(|e| e.keyword.as_deref() == Some(normalized))
    }

    /// Anchor and position for a new element, consuming the pending point
    /// when the element lands on the screen plane.
    fn place(&mut self, hint: Option<&AnchorHint>, now: u64) -> (Anchor, Point) {
        match hint {
            Some(AnchorHint::Marker(name)) if self.marker_names.contains(name) => {
                let anchor = Anchor::Marker { name: name.clone() };
                let fallback = self.placement(now);
                let pos = self.resolve_position(&anchor, fallback);
                (anchor, pos)
            }
            Some(AnchorHint::Hand(side)) => {
                let anchor = Anchor::Hand { side: *side };
                let fallback = self.placement(now);
                let pos = self.resolve_position(&anchor, fallback);
                (anchor, pos)
            }
            Some(AnchorHint::Surface) => {
                let p = self.placement(now);
                (Anchor::Surface { u: p.x, v: p.y }, p)
            }
            _ => {
                let p = self.placement(now);
                (Anchor::Screen2d { x: p.x, y: p.y }, p)
            }
        }
    }

    fn spawn_matched(
        &mut self,
        span: &KeywordSpan,
        entry: &MappingEntry,
        utterance_id: u64,
        now: u64,
    ) -> Vec<ElementId> {
        let duration = entry.duration_ms.unwrap_or(self.cfg.matched_duration_ms);
        let key = entry.keyword.clone();
        let (anchor, pos) = self.place(entry.anchor_hint.as_ref(), now);
        let mut ids = vec![self.spawn(
            entry.kind.into(),
            entry.url.clone(),
            Some(key.clone()),
            Some(utterance_id),
            anchor.clone(),
            pos,
            now,
            duration,
            entry.show_keyword,
        )];
        if entry.show_keyword {
            let (kind, anchor, pos) = match anchor {
                Anchor::Screen2d { .. } => {
                    let p = self.placement(now);
                    (ElementKind::KeywordText, Anchor::Screen2d { x: p.x, y: p.y }, p)
                }
                other => (ElementKind::Label, other, pos),
            };
            ids.push(self.spawn(
                kind,
                span.surface.clone(),
                Some(key),
                Some(utterance_id),
                anchor,
                pos,
                now,
                duration,
                true,
            ));
        }
        ids
    }

    /// Spawns elements for one utterance's keywords, in utterance order.
    ///
    /// A keyword equal to a live element's keyword spawns nothing.
    pub fn process_utterance(
        &mut self,
        utterance: &FinalizedUtterance,
        result: &MatchResult,
        now_ms: u64,
    ) -> Vec<ElementId> {
        let now = self.clock(now_ms);
        let mut ordered: Vec<(&KeywordSpan, Option<&MappingEntry>)> = result
            .matched
            .iter()
            .map(|(s, e)| (s, Some(e)))
            .chain(result.unmatched.iter().map(|s| (s, None)))
            .collect();
        ordered.sort_by_key(|(s, _)| s.token_start);

        let mut created = Vec::new();
        for (span, entry) in ordered {
            // a mapped keyword dedups on its table key, whatever phrase carried it
            let key = entry.map_or(span.normalized.as_str(), |e| e.keyword.as_str());
            if self.is_live_keyword(key) {
                continue;
            }
            match entry {
                Some(entry) => {
                    created.extend(self.spawn_matched(span, entry, utterance.utterance_id, now))
                }
                None => {
                    let (anchor, pos) = self.place(None, now);
                    created.push(self.spawn(
                        ElementKind::KeywordText,
                        span.surface.clone(),
                        Some(span.normalized.clone()),
                        Some(utterance.utterance_id),
                        anchor,
                        pos,
                        now,
                        self.cfg.keyword_duration_ms,
                        true,
                    ));
                }
            }
        }
        created
    }

    fn find_kind(&self, kind: ElementKind) -> Option<usize> {
        self.elements.iter().position(|e| e.kind == kind)
    }

    fn remove_at(&mut self, idx: usize) -> ElementId {
        let el = self.elements.remove(idx);
        for g in &mut self.pinch_grab {
            if g.is_some_and(|(id, _)| id == el.id) {
                *g = None;
            }
        }
        if self.two_hand_grab.is_some_and(|g| g.id == el.id) {
            self.two_hand_grab = None;
        }
        el.id
    }

    /// Applies a list/profile template. Returns the affected element.
    pub fn apply_template(&mut self, action: &TemplateAction, now_ms: u64) -> ElementId {
        let now = self.clock(now_ms);
        match action {
            TemplateAction::ListItem { ordinal, text } => {
                let active = self.find_kind(ElementKind::List);
                if let (Some(idx), false) = (active, *ordinal == 1) {
                    let expires = now + self.cfg.list_duration_ms;
                    let el = &mut self.elements[idx];
                    el.items.push(text.clone());
                    el.expires_ms = el.expires_ms.max(expires);
                    return el.id;
                }
                if let Some(idx) = active {
                    self.remove_at(idx);
                }
                let pos = self.take_pending_point(now).unwrap_or(self.cfg.list_position);
                let id = self.spawn(
                    ElementKind::List,
                    String::new(),
                    None,
                    None,
                    Anchor::Screen2d { x: pos.x, y: pos.y },
                    pos,
                    now,
                    self.cfg.list_duration_ms,
                    false,
                );
                self.get_mut(id).expect("just spawned").items.push(text.clone());
                id
            }
            TemplateAction::Profile { name } => {
                if let Some(idx) = self.find_kind(ElementKind::Profile) {
                    self.remove_at(idx);
                }
                let pos = self.take_pending_point(now).unwrap_or(self.cfg.profile_position);
                self.spawn(
                    ElementKind::Profile,
                    name.clone(),
                    None,
                    None,
                    Anchor::Screen2d { x: pos.x, y: pos.y },
                    pos,
                    now,
                    self.cfg.profile_duration_ms,
                    false,
                )
            }
        }
    }

    /// Earliest expiry among elements not held by a gesture.
    pub fn next_expiry(&self) -> Option<u64> {
        self.elements
            .iter()
            .filter(|e| !e.grabbed)
            .map(|e| e.expires_ms)
            .min()
    }

    /// Removes every element with `expires_ms <= now_ms` that is not grabbed.
    pub fn tick(&mut self, now_ms: u64) -> Vec<ElementId> {
        let now = self.clock(now_ms);
        let mut removed = Vec::new();
        let mut i = 0;
        while i < self.elements.len() {
            let e = &self.elements[i];
            if e.expires_ms <= now && !e.grabbed {
                removed.push(self.remove_at(i));
            } else {
                i += 1;
            }
        }
        removed
    }

    fn half_extent(&self, e: &SceneElement) -> Point {
        let base = match e.kind {
            ElementKind::KeywordText | ElementKind::Label => self.cfg.text_half_extent,
            ElementKind::List | ElementKind::Profile => self.cfg.card_half_extent,
            _ => self.cfg.visual_half_extent,
        };
        Point::new(base.x * e.scale, base.y * e.scale)
    }

    /// Topmost element whose bounds contain `p`.
    pub fn hit_test(&self, p: Point) -> Option<ElementId> {
        self.elements
            .iter()
            .rev()
            .find(|e| {
                let h = self.half_extent(e);
                (p.x - e.position.x).abs() <= h.x && (p.y - e.position.y).abs() <= h.y
            })
            .map(|e| e.id)
    }

    fn refresh_grabbed(&mut self, id: ElementId) {
        let held = self.pinch_grab.iter().flatten().any(|(g, _)| *g == id)
            || self.two_hand_grab.is_some_and(|g| g.id == id);
        if let Some(e) = self.get_mut(id) {
            e.grabbed = held;
        }
    }

    fn release(&mut self, id: ElementId, now: u64) {
        let min_expiry = now + self.cfg.release_min_lifetime_ms;
        self.refresh_grabbed(id);
        if let Some(e) = self.get_mut(id) {
            e.expires_ms = e.expires_ms.max(min_expiry);
        }
    }

    fn move_to(&mut self, id: ElementId, p: Point) -> bool {
        let Some(e) = self.get_mut(id) else {
            return false;
        };
        let p = p.clamped();
        e.anchor = Anchor::Screen2d { x: p.x, y: p.y };
        e.position = p;
        true
    }

    /// Applies a classified gesture. Returns whether the scene changed.
    pub fn apply_gesture(&mut self, g: &GestureEvent, now_ms: u64) -> bool {
        let now = self.clock(now_ms);
        match &g.kind {
            GestureKind::Point { position, .. } => {
                self.pending_point = Some((position.clamped(), now));
                false
            }
            GestureKind::PinchStart { side, position } => {
                let Some(id) = self.hit_test(*position) else {
                    return false;
                };
                let center = self.get(id).expect("hit element is live").position;
                self.pinch_grab[side.index()] = Some((id, center - *position));
                self.refresh_grabbed(id);
                true
            }
            GestureKind::PinchMove { side, position } => match self.pinch_grab[side.index()] {
                Some((id, offset)) => self.move_to(id, *position + offset),
                None => false,
            },
            GestureKind::PinchEnd { side, position } => {
                let Some((id, offset)) = self.pinch_grab[side.index()].take() else {
                    return false;
                };
                self.move_to(id, *position + offset);
                self.release(id, now);
                true
            }
            GestureKind::TwoHandStart { left, right, .. } => {
                let target = [*left, *right, left.midpoint(*right)]
                    .into_iter()
                    .filter_map(|p| self.hit_test(p))
                    .max_by_key(|id| self.elements.iter().position(|e| e.id == *id));
                let Some(id) = target else {
                    return false;
                };
                let e = self.get(id).expect("hit element is live");
                self.two_hand_grab = Some(TwoHandGrab {
                    id,
                    scale_at_grab: e.scale,
                    rotation_at_grab: e.rotation_deg,
                });
                self.refresh_grabbed(id);
                true
            }
            GestureKind::TwoHandUpdate {
                scale_ratio,
                rotation_deg,
                ..
            } => {
                let Some(grab) = self.two_hand_grab else {
                    return false;
                };
                let Some(e) = self.get_mut(grab.id) else {
                    return false;
                };
                e.scale = grab.scale_at_grab * scale_ratio;
                e.rotation_deg = grab.rotation_at_grab + rotation_deg;
                true
            }
            GestureKind::TwoHandEnd { .. } => {
                let Some(grab) = self.two_hand_grab.take() else {
                    return false;
                };
                self.release(grab.id, now);
                true
            }
            GestureKind::Swipe { position, .. } => {
                let Some(id) = self.hit_test(*position) else {
                    return false;
                };
                let idx = self.elements.iter().position(|e| e.id == id).expect("live");
                self.remove_at(idx);
                true
            }
        }
    }

    pub fn bind_marker(&mut self, id: ElementId, marker: &str) -> Result<(), SceneError> {
        if !self.marker_names.contains(marker) {
            return Err(SceneError::UnknownMarker(marker.to_string()));
        }
        let anchor = Anchor::Marker {
            name: marker.to_string(),
        };
        let current = self.get(id).ok_or(SceneError::UnknownElement(id))?.position;
        let pos = self.resolve_position(&anchor, current);
        let e = self.get_mut(id).expect("checked above");
        e.anchor = anchor;
        e.position = pos;
        Ok(())
    }

    /// Records a marker sighting and moves elements bound to it. Returns
    /// whether any element moved.
    pub fn update_marker(&mut self, marker: &str, centroid: Point, now_ms: u64) -> Result<bool, SceneError> {
        if !self.marker_names.contains(marker) {
            return Err(SceneError::UnknownMarker(marker.to_string()));
        }
        let now = self.clock(now_ms);
        self.markers.insert(
            marker.to_string(),
            MarkerState {
                centroid,
                last_seen_ms: now,
            },
        );
        let target = self.marker_point(centroid);
        let mut changed = false;
        for e in &mut self.elements {
            if e.grabbed {
                continue;
            }
            if matches!(&e.anchor, Anchor::Marker { name } if name == marker) && e.position != target {
                e.position = target;
                changed = true;
            }
        }
        Ok(changed)
    }

    /// Whether the marker was seen within the hold window. Elements bound
    /// to an unseen marker stay at their last position.
    pub fn marker_visible(&self, marker: &str, now_ms: u64) -> bool {
        self.markers
            .get(marker)
            .is_some_and(|m| now_ms.saturating_sub(m.last_seen_ms) <= self.cfg.marker_hold_ms)
    }

    /// Moves hand-anchored elements with the hand.
    pub fn update_hand(&mut self, side: Side, palm: Point, now_ms: u64) -> bool {
        self.clock(now_ms);
        self.hands[side.index()] = Some(palm);
        let target = self.hand_point(palm);
        let mut changed = false;
        for e in &mut self.elements {
            if !e.grabbed && matches!(e.anchor, Anchor::Hand { side: s } if s == side) && e.position != target {
                e.position = target;
                changed = true;
            }
        }
        changed
    }

    /// Checks the scene invariants at `now_ms`.
    pub fn check_invariants(&self, now_ms: u64) -> Result<(), String> {
        let mut ids = BTreeSet::new();
        let mut texts = BTreeSet::new();
        let (mut lists, mut profiles) = (0, 0);
        for e in &self.elements {
            if !ids.insert(e.id) {
                return Err(format!("duplicate id {}", e.id));
            }
            if e.expires_ms <= e.created_ms || e.scale <= 0.0 || e.created_ms > now_ms {
                return Err(format!("bad lifetime/scale on {}", e.id));
            }
            if e.expires_ms <= now_ms && !e.grabbed {
                return Err(format!("element {} outlived its expiry", e.id));
            }
            if let Anchor::Screen2d { x, y } = e.anchor {
                if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
                    return Err(format!("element {} off screen", e.id));
                }
            }
            if e.kind == ElementKind::KeywordText {
                if let Some(k) = &e.keyword {
                    if !texts.insert(k.clone()) {
                        return Err(format!("duplicate keyword text {k:?}"));
                    }
                }
            }
            lists += usize::from(e.kind == ElementKind::List);
            profiles += usize::from(e.kind == ElementKind::Profile);
        }
        if lists > 1 || profiles > 1 {
            return Err("more than one list or profile".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests;
