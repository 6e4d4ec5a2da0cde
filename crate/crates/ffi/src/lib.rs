//! C ABI over the livecue engine.
//!
//! Conventions: every fallible call returns an [`LcStatus`]; on failure
//! [`lc_last_error_message`] describes it. Strings returned through `out`
//! parameters are owned by the caller and released with [`lc_string_free`].
//! Sessions are opaque and released with [`lc_session_free`]. A session is
//! not thread-safe; serialize calls on one handle.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use serde_json::{json, Value};

use livecue::config::Config;
use livecue::keywords::KeywordExtractor;
use livecue::mapping::MappingTable;
use livecue::marker::{default_specs, detect, ColorMarkerSpec, FrameBuffer};
use livecue::protocol::{Outbound, Session, WireMessage};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    ConfigError = 4,
    InvalidArgument = 5,
    Internal = 6,
}

/// Opaque session handle.
pub struct LcSession {
    inner: Session,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("nul bytes removed"));
}

struct Fail(LcStatus, String);

impl Fail {
    fn new(status: LcStatus, msg: impl Into<String>) -> Self {
        Self(status, msg.into())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> LcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            LcStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            LcStatus::Internal
        }
    }
}

/// # Safety
/// `p` is null or a valid NUL-terminated string.
unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::new(LcStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::new(LcStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

/// # Safety
/// As [`str_arg`], but null yields `None`.
unsafe fn opt_str_arg<'a>(p: *const c_char, name: &str) -> Result<Option<&'a str>, Fail> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, name).map(Some)
    }
}

/// # Safety
/// `out` is null or valid for writes.
unsafe fn write_out(out: *mut *mut c_char, value: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::new(LcStatus::NullPointer, "out is null"));
    }
    let s = CString::new(value).map_err(|_| Fail::new(LcStatus::Internal, "output contains NUL"))?;
    *out = s.into_raw();
    Ok(())
}

fn outbound_json(out: Vec<Outbound>) -> String {
    let items: Vec<Value> = out
        .into_iter()
        .map(|o| match o {
            Outbound::Broadcast(m) => json!({"route": "broadcast", "message": m}),
            Outbound::Reply(m) => json!({"route": "reply", "message": m}),
            Outbound::Error(e) => json!({"route": "error", "error": e}),
        })
        .collect();
    Value::Array(items).to_string()
}

/// Creates a session. `config_json` (flat config document) and
/// `mapping_json` (mapping file document) may be null for defaults.
///
/// # Safety
/// String arguments are null or NUL-terminated; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lc_session_new(
    session_id: *const c_char,
    config_json: *const c_char,
    mapping_json: *const c_char,
    seed: u64,
    out: *mut *mut LcSession,
) -> LcStatus {
    guard(|| {
        if out.is_null() {
            return Err(Fail::new(LcStatus::NullPointer, "out is null"));
        }
        let id = str_arg(session_id, "session_id")?;
        let cfg = match opt_str_arg(config_json, "config_json")? {
            Some(src) => Config::from_json(src).map_err(|e| Fail::new(LcStatus::ConfigError, e.to_string()))?,
            None => Config::default(),
        };
        let mapping = match opt_str_arg(mapping_json, "mapping_json")? {
            Some(src) => {
                MappingTable::from_json(src).map_err(|e| Fail::new(LcStatus::ParseError, e.to_string()))?
            }
            None => MappingTable::new(),
        };
        let session = Session::standalone(id, cfg, mapping, seed);
        *out = Box::into_raw(Box::new(LcSession { inner: session }));
        Ok(())
    })
}

/// # Safety
/// `session` is null or came from [`lc_session_new`] and is not used after.
#[no_mangle]
pub unsafe extern "C" fn lc_session_free(session: *mut LcSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// Handles one inbound wire message at session time `now_ms`. Writes a JSON
/// array of `{"route": "broadcast"|"reply", "message": {...}}` and
/// `{"route": "error", "error": {...}}` items to `out`.
///
/// # Safety
/// `session` came from [`lc_session_new`]; `message_json` is NUL-terminated;
/// `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lc_session_handle_message(
    session: *mut LcSession,
    message_json: *const c_char,
    now_ms: u64,
    out: *mut *mut c_char,
) -> LcStatus {
    guard(|| {
        let s = session
            .as_mut()
            .ok_or_else(|| Fail::new(LcStatus::NullPointer, "session is null"))?;
        let msg = WireMessage::parse(str_arg(message_json, "message_json")?)
            .map_err(|e| Fail::new(LcStatus::ParseError, e.to_string()))?;
        let produced = s.inner.handle(&msg, now_ms);
        write_out(out, outbound_json(produced))
    })
}

/// Runs expiries up to `now_ms`; output as for [`lc_session_handle_message`].
///
/// # Safety
/// `session` came from [`lc_session_new`]; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lc_session_advance(session: *mut LcSession, now_ms: u64, out: *mut *mut c_char) -> LcStatus {
    guard(|| {
        let s = session
            .as_mut()
            .ok_or_else(|| Fail::new(LcStatus::NullPointer, "session is null"))?;
        let produced = s.inner.advance_to(now_ms);
        write_out(out, outbound_json(produced))
    })
}

/// The current scene as a SceneUpdate message.
///
/// # Safety
/// `session` came from [`lc_session_new`]; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lc_session_snapshot(session: *const LcSession, out: *mut *mut c_char) -> LcStatus {
    guard(|| {
        let s = session
            .as_ref()
            .ok_or_else(|| Fail::new(LcStatus::NullPointer, "session is null"))?;
        write_out(out, s.inner.current_scene().to_json())
    })
}

/// Keywords of `text` as a JSON array of normalized strings.
///
/// # Safety
/// `text` is NUL-terminated; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lc_extract_keywords(text: *const c_char, out: *mut *mut c_char) -> LcStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let keywords: Vec<String> = KeywordExtractor::default()
            .extract(text)
            .into_iter()
            .map(|k| k.normalized)
            .collect();
        write_out(out, json!(keywords).to_string())
    })
}

/// Detects color markers in a row-major RGB8 frame. `specs_json` is a JSON
/// array of marker specs, or null for the defaults. Writes a JSON array of
/// `{"name", "centroid": {"x","y"}, "area_px"}`.
///
/// # Safety
/// `pixels` points to `len` readable bytes; `specs_json` is null or
/// NUL-terminated; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lc_detect_markers(
    width: u32,
    height: u32,
    pixels: *const u8,
    len: usize,
    specs_json: *const c_char,
    out: *mut *mut c_char,
) -> LcStatus {
    guard(|| {
        if pixels.is_null() {
            return Err(Fail::new(LcStatus::NullPointer, "pixels is null"));
        }
        let specs: Vec<ColorMarkerSpec> = match opt_str_arg(specs_json, "specs_json")? {
            Some(src) => serde_json::from_str(src).map_err(|e| Fail::new(LcStatus::ParseError, e.to_string()))?,
            None => default_specs(),
        };
        let data = std::slice::from_raw_parts(pixels, len).to_vec();
        let frame =
            FrameBuffer::new(width, height, data).map_err(|e| Fail::new(LcStatus::InvalidArgument, e.to_string()))?;
        let found = detect(&frame, &specs).map_err(|e| Fail::new(LcStatus::InvalidArgument, e.to_string()))?;
        write_out(out, serde_json::to_string(&found).expect("detections serialize"))
    })
}

/// # Safety
/// `s` is null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread; empty after success.
/// Valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn lc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, static.
#[no_mangle]
pub extern "C" fn lc_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}
