#ifndef LIVECUE_H
#define LIVECUE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LcStatus {
  LC_STATUS_OK = 0,
  LC_STATUS_NULL_POINTER = 1,
  LC_STATUS_INVALID_UTF8 = 2,
  LC_STATUS_PARSE_ERROR = 3,
  LC_STATUS_CONFIG_ERROR = 4,
  LC_STATUS_INVALID_ARGUMENT = 5,
  LC_STATUS_INTERNAL = 6,
} LcStatus;

/**
 * Opaque session handle.
 */
typedef struct LcSession LcSession;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a session. `config_json` (flat config document) and
 * `mapping_json` (mapping file document) may be null for defaults.
 *
 * # Safety
 * String arguments are null or NUL-terminated; `out` is valid for writes.
 */
enum LcStatus lc_session_new(const char *session_id,
                             const char *config_json,
                             const char *mapping_json,
                             uint64_t seed,
                             struct LcSession **out);

/**
 * # Safety
 * `session` is null or came from [`lc_session_new`] and is not used after.
 */
void lc_session_free(struct LcSession *session);

/**
 * Handles one inbound wire message at session time `now_ms`. Writes a JSON
 * array of `{"route": "broadcast"|"reply", "message": {...}}` and
 * `{"route": "error", "error": {...}}` items to `out`.
 *
 * # Safety
 * `session` came from [`lc_session_new`]; `message_json` is NUL-terminated;
 * `out` is valid for writes.
 */
enum LcStatus lc_session_handle_message(struct LcSession *session,
                                        const char *message_json,
                                        uint64_t now_ms,
                                        char **out);

/**
 * Runs expiries up to `now_ms`; output as for [`lc_session_handle_message`].
 *
 * # Safety
 * `session` came from [`lc_session_new`]; `out` is valid for writes.
 */
enum LcStatus lc_session_advance(struct LcSession *session, uint64_t now_ms, char **out);

/**
 * The current scene as a SceneUpdate message.
 *
 * # Safety
 * `session` came from [`lc_session_new`]; `out` is valid for writes.
 */
enum LcStatus lc_session_snapshot(const struct LcSession *session, char **out);

/**
 * Keywords of `text` as a JSON array of normalized strings.
 *
 * # Safety
 * `text` is NUL-terminated; `out` is valid for writes.
 */
enum LcStatus lc_extract_keywords(const char *text, char **out);

/**
 * Detects color markers in a row-major RGB8 frame. `specs_json` is a JSON
 * array of marker specs, or null for the defaults. Writes a JSON array of
 * `{"name", "centroid": {"x","y"}, "area_px"}`.
 *
 * # Safety
 * `pixels` points to `len` readable bytes; `specs_json` is null or
 * NUL-terminated; `out` is valid for writes.
 */
enum LcStatus lc_detect_markers(uint32_t width,
                                uint32_t height,
                                const uint8_t *pixels,
                                size_t len,
                                const char *specs_json,
                                char **out);

/**
 * # Safety
 * `s` is null or a string returned by this library, not yet freed.
 */
void lc_string_free(char *s);

/**
 * Message for the last failed call on this thread; empty after success.
 * Valid until the next call on this thread.
 */
const char *lc_last_error_message(void);

/**
 * Library version, static.
 */
const char *lc_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LIVECUE_H */
