use super::*;
use crate::gesture::Side;
use crate::keywords::KeywordExtractor;
use crate::mapping::MappingTable;

fn engine() -> SceneEngine {
    SceneEngine::new(
        EngineConfig::default(),
        ["lightblue".to_string(), "yellow".to_string()],
        7,
    )
}

fn utter(id: u64, text: &str, t: u64) -> FinalizedUtterance {
    FinalizedUtterance {
        utterance_id: id,
        text: text.into(),
        t_start_ms: t,
        t_end_ms: t,
    }
}

fn say(e: &mut SceneEngine, table: &MappingTable, id: u64, text: &str, t: u64) -> Vec<ElementId> {
    let spans = KeywordExtractor::default().extract(text);
    let result = table.match_spans(&spans);
    e.process_utterance(&utter(id, text, t), &result, t)
}

fn camera_table() -> MappingTable {
    let mut t = MappingTable::new();
    t.upsert(MappingEntry::new("camera", AssetKind::Image, "https://example.com/camera.png"))
        .unwrap();
    t
}

fn ev(t_ms: u64, kind: GestureKind) -> GestureEvent {
    GestureEvent { t_ms, kind }
}

#[test]
fn unmatched_keyword_lives_4000ms() {
    let mut e = engine();
    let ids = say(&mut e, &MappingTable::new(), 1, "Neural networks", 1_000);
    assert_eq!(ids.len(), 1);
    let el = e.get(ids[0]).unwrap();
    assert_eq!(el.kind, ElementKind::KeywordText);
    assert_eq!(el.expires_ms, 5_000);
    assert!(e.tick(4_999).is_empty());
    assert_eq!(e.tick(5_000), ids);
    assert!(e.elements().is_empty());
}

#[test]
fn matched_keyword_lives_10000ms_and_custom_duration_wins() {
    let mut table = camera_table();
    let mut e = engine();
    let ids = say(&mut e, &table, 1, "this camera", 0);
    let el = e.get(ids[0]).unwrap();
    assert_eq!(el.kind, ElementKind::Image);
    assert_eq!(el.expires_ms, 10_000);
    assert!((el.style.alpha - 0.75).abs() < 1e-12);

    let mut entry = MappingEntry::new("lens", AssetKind::Screen, "https://example.com/l");
    entry.duration_ms = Some(2_500);
    table.upsert(entry).unwrap();
    let ids = say(&mut e, &table, 2, "the lens", 100);
    let el = e.get(ids[0]).unwrap();
    assert_eq!(el.expires_ms, 2_600);
    assert!((el.style.alpha - 1.0).abs() < 1e-12);
}

#[test]
fn repeated_keyword_is_not_duplicated_while_live() {
    let mut e = engine();
    let t = MappingTable::new();
    assert_eq!(say(&mut e, &t, 1, "neural networks", 0).len(), 1);
    assert!(say(&mut e, &t, 2, "Neural networks again", 1_000).len() <= 1);
    let texts: Vec<_> = e.elements().iter().filter_map(|x| x.keyword.clone()).collect();
    assert_eq!(texts.iter().filter(|k| *k == "neural networks").count(), 1);
    e.tick(4_000);
    assert_eq!(say(&mut e, &t, 3, "neural networks", 4_000).len(), 1);
}

#[test]
fn show_keyword_pairs_a_text_element() {
    let mut table = MappingTable::new();
    let mut entry = MappingEntry::new("camera", AssetKind::Image, "https://example.com/c.png");
    entry.show_keyword = true;
    table.upsert(entry).unwrap();
    let mut e = engine();
    let ids = say(&mut e, &table, 1, "camera", 0);
    assert_eq!(ids.len(), 2);
    let text = e.get(ids[1]).unwrap();
    assert_eq!(text.kind, ElementKind::KeywordText);
    assert_eq!(text.content, "camera");
    assert_eq!(text.expires_ms, 10_000);
}

#[test]
fn auto_placement_avoids_center_band() {
    let mut e = engine();
    let t = MappingTable::new();
    for (i, w) in ["apples", "bananas", "cherries", "dates", "figs", "grapes", "kiwis", "lemons", "mangos", "olives", "pears", "plums"]
        .iter()
        .enumerate()
    {
        say(&mut e, &t, i as u64, w, 0);
    }
    assert_eq!(e.elements().len(), 12);
    for el in e.elements() {
        assert!(el.position.x < 0.38 || el.position.x > 0.62, "{:?}", el.position);
        assert!((0.0..=1.0).contains(&el.position.y));
    }
    assert!(e.elements()[0].position.x < 0.5);
    assert!(e.elements()[1].position.x > 0.5);
    e.check_invariants(0).unwrap();
}

#[test]
fn point_then_keyword_places_at_point() {
    let mut e = engine();
    let p = Point::new(0.5, 0.4);
    e.apply_gesture(&ev(1_000, GestureKind::Point { side: Side::Right, position: p }), 1_000);
    let ids = say(&mut e, &MappingTable::new(), 1, "water bottle", 2_000);
    assert_eq!(e.get(ids[0]).unwrap().position, p);
    // consumed
    let ids = say(&mut e, &MappingTable::new(), 2, "free gift", 2_100);
    assert_ne!(e.get(ids[0]).unwrap().position, p);
}

#[test]
fn stale_point_is_ignored() {
    let mut e = engine();
    let p = Point::new(0.5, 0.4);
    e.set_pending_point(p, 0);
    let ids = say(&mut e, &MappingTable::new(), 1, "water bottle", 3_001);
    assert_ne!(e.get(ids[0]).unwrap().position, p);
}

#[test]
fn pinch_drag_moves_and_extends_life() {
    let mut e = engine();
    let ids = say(&mut e, &camera_table(), 1, "camera", 0);
    let id = ids[0];
    let start = e.get(id).unwrap().position;
    assert!(e.apply_gesture(&ev(100, GestureKind::PinchStart { side: Side::Right, position: start }), 100));
    assert!(e.get(id).unwrap().grabbed);
    let to = Point::new(0.6, 0.6);
    assert!(e.apply_gesture(&ev(200, GestureKind::PinchMove { side: Side::Right, position: to }), 200));
    assert_eq!(e.get(id).unwrap().position, to);
    // held past expiry
    assert!(e.tick(20_000).is_empty());
    e.apply_gesture(&ev(20_000, GestureKind::PinchEnd { side: Side::Right, position: to }), 20_000);
    let el = e.get(id).unwrap();
    assert!(!el.grabbed);
    assert_eq!(el.expires_ms, 25_000);
    assert_eq!(el.anchor, Anchor::Screen2d { x: 0.6, y: 0.6 });
}

#[test]
fn pinch_on_empty_space_does_nothing() {
    let mut e = engine();
    assert!(!e.apply_gesture(
        &ev(0, GestureKind::PinchStart { side: Side::Left, position: Point::new(0.5, 0.5) }),
        0
    ));
}

#[test]
fn two_hand_scale_and_rotation() {
    let mut e = engine();
    let id = say(&mut e, &camera_table(), 1, "camera", 0)[0];
    let c = e.get(id).unwrap().position;
    let l = Point::new(c.x - 0.05, c.y);
    let r = Point::new(c.x + 0.05, c.y);
    let start = GestureKind::TwoHandStart { left: l, right: r, scale_ratio: 1.0, rotation_deg: 0.0 };
    assert!(e.apply_gesture(&ev(10, start), 10));
    let upd = GestureKind::TwoHandUpdate { left: l, right: r, scale_ratio: 2.0, rotation_deg: 30.0 };
    e.apply_gesture(&ev(20, upd), 20);
    let el = e.get(id).unwrap();
    assert!((el.scale - 2.0).abs() < 1e-12);
    assert!((el.rotation_deg - 30.0).abs() < 1e-12);
    e.apply_gesture(&ev(30, GestureKind::TwoHandEnd { left: l, right: r }), 30);
    // second episode composes on the new baseline
    let start = GestureKind::TwoHandStart { left: l, right: r, scale_ratio: 1.0, rotation_deg: 0.0 };
    e.apply_gesture(&ev(40, start), 40);
    let upd = GestureKind::TwoHandUpdate { left: l, right: r, scale_ratio: 0.5, rotation_deg: -10.0 };
    e.apply_gesture(&ev(50, upd), 50);
    let el = e.get(id).unwrap();
    assert!((el.scale - 1.0).abs() < 1e-12);
    assert!((el.rotation_deg - 20.0).abs() < 1e-12);
}

#[test]
fn swipe_removes_hit_element_and_ignores_empty_space() {
    let mut e = engine();
    let id = say(&mut e, &camera_table(), 1, "camera", 0)[0];
    let v = Point::new(2.0, 0.0);
    assert!(!e.apply_gesture(
        &ev(5, GestureKind::Swipe { side: Side::Right, position: Point::new(0.5, 0.95), velocity: v }),
        5
    ));
    assert_eq!(e.elements().len(), 1);
    let p = e.get(id).unwrap().position;
    assert!(e.apply_gesture(&ev(6, GestureKind::Swipe { side: Side::Right, position: p, velocity: v }), 6));
    assert!(e.elements().is_empty());
}

#[test]
fn marker_binding_follows_centroid() {
    let mut e = engine();
    let id = say(&mut e, &camera_table(), 1, "camera", 0)[0];
    assert_eq!(e.bind_marker(id, "purple"), Err(SceneError::UnknownMarker("purple".into())));
    assert_eq!(e.bind_marker(999, "yellow"), Err(SceneError::UnknownElement(999)));
    e.bind_marker(id, "yellow").unwrap();
    assert!(e.update_marker("yellow", Point::new(0.3, 0.5), 10).unwrap());
    let a = e.get(id).unwrap().position;
    e.update_marker("yellow", Point::new(0.5, 0.5), 20).unwrap();
    let b = e.get(id).unwrap().position;
    assert!((b.x - a.x - 0.2).abs() < 1e-12);
    assert!((b.y - 0.4).abs() < 1e-12);
    assert!(e.marker_visible("yellow", 1_020));
    assert!(!e.marker_visible("yellow", 1_021));
    assert!(e.update_marker("purple", Point::new(0.1, 0.1), 30).is_err());
}

#[test]
fn marker_anchor_hint_on_mapping() {
    let mut table = MappingTable::new();
    let mut entry = MappingEntry::new("water bottle", AssetKind::Image, "https://example.com/b.png");
    entry.anchor_hint = Some(AnchorHint::Marker("lightblue".into()));
    entry.show_keyword = true;
    table.upsert(entry).unwrap();
    let mut e = engine();
    e.update_marker("lightblue", Point::new(0.2, 0.6), 0).unwrap();
    let ids = say(&mut e, &table, 1, "the water bottle", 10);
    let img = e.get(ids[0]).unwrap();
    assert_eq!(img.anchor, Anchor::Marker { name: "lightblue".into() });
    assert!((img.position.y - 0.5).abs() < 1e-12);
    let label = e.get(ids[1]).unwrap();
    assert_eq!(label.kind, ElementKind::Label);
    assert_eq!(label.anchor, img.anchor);
}

#[test]
fn hand_anchor_follows_palm() {
    let mut table = MappingTable::new();
    let mut entry = MappingEntry::new("hiv virus", AssetKind::Icon, "https://example.com/v.png");
    entry.anchor_hint = Some(AnchorHint::Hand(Side::Left));
    table.upsert(entry).unwrap();
    let mut e = engine();
    let id = say(&mut e, &table, 1, "the HIV virus", 0)[0];
    assert!(e.update_hand(Side::Left, Point::new(0.2, 0.7), 10));
    let p = e.get(id).unwrap().position;
    assert!((p.x - 0.2).abs() < 1e-12 && (p.y - 0.58).abs() < 1e-12);
    assert!(!e.update_hand(Side::Right, Point::new(0.9, 0.9), 20));
}

#[test]
fn list_template_appends_and_restarts() {
    let mut e = engine();
    let a = e.apply_template(&TemplateAction::ListItem { ordinal: 1, text: "durability".into() }, 0);
    let b = e.apply_template(&TemplateAction::ListItem { ordinal: 2, text: "price".into() }, 3_000);
    assert_eq!(a, b);
    let list = e.get(a).unwrap();
    assert_eq!(list.items, vec!["durability", "price"]);
    assert_eq!(list.expires_ms, 13_000);
    let c = e.apply_template(&TemplateAction::ListItem { ordinal: 1, text: "colors".into() }, 4_000);
    assert_ne!(a, c);
    assert_eq!(e.elements().len(), 1);
    assert_eq!(e.get(c).unwrap().items, vec!["colors"]);
}

#[test]
fn profile_template_replaces_previous() {
    let mut e = engine();
    let a = e.apply_template(&TemplateAction::Profile { name: "John".into() }, 0);
    let b = e.apply_template(&TemplateAction::Profile { name: "Ada".into() }, 10);
    assert_ne!(a, b);
    assert_eq!(e.elements().len(), 1);
    assert_eq!(e.get(b).unwrap().content, "Ada");
    assert_eq!(e.get(b).unwrap().expires_ms, 10_010);
    e.check_invariants(10).unwrap();
}

#[test]
fn next_expiry_skips_grabbed() {
    let mut e = engine();
    let id = say(&mut e, &camera_table(), 1, "camera", 0)[0];
    say(&mut e, &MappingTable::new(), 2, "neural networks", 0);
    assert_eq!(e.next_expiry(), Some(4_000));
    e.tick(4_000);
    let p = e.get(id).unwrap().position;
    e.apply_gesture(&ev(5, GestureKind::PinchStart { side: Side::Left, position: p }), 5_000);
    assert_eq!(e.next_expiry(), None);
}

#[test]
fn same_seed_same_scene() {
    let run = |seed| {
        let mut e = SceneEngine::new(EngineConfig::default(), Vec::<String>::new(), seed);
        say(&mut e, &camera_table(), 1, "the camera and neural networks", 0);
        serde_json::to_string(&e.snapshot(0)).unwrap()
    };
    assert_eq!(run(3), run(3));
    assert_ne!(run(3), run(4));
}

#[test]
fn config_validation() {
    assert!(EngineConfig::default().validate().is_ok());
    let bad = EngineConfig {
        left_x: 0.5,
        ..EngineConfig::default()
    };
    assert!(bad.validate().is_err());
    let bad = EngineConfig {
        keyword_duration_ms: 0,
        ..EngineConfig::default()
    };
    assert!(bad.validate().is_err());
}
