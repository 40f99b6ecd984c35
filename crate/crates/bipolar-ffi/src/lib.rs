//! C ABI for the bipolar crate: opaque handles for walks and maps, error
//! codes, and UTF-8 JSON/text exchange. Every returned object must be
//! released with the matching `bp_*_free` function.

use bipolar::distance::{self, Mode};
use bipolar::map::OrientedMap;
use bipolar::walk::Walk;
use bipolar::{io, kmsw, sampler};
use libc::{c_char, c_int};
use std::ffi::{CStr, CString};

/// Status codes returned by fallible functions.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum BpStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    NotBipolar = 4,
    Unreachable = 5,
    BudgetExhausted = 6,
    InvalidArgument = 7,
    InternalError = 8,
}

fn status_of(err: &bipolar::Error) -> BpStatus {
    use bipolar::Error as E;
    match err {
        E::Parse { .. } | E::Version { .. } | E::Json(_) => BpStatus::ParseError,
        E::NotBipolar(_) | E::InvalidMap(_) | E::CycleDetected(_) => BpStatus::NotBipolar,
        E::Unreachable { .. } => BpStatus::Unreachable,
        E::BudgetExhausted(_) | E::NotStabilized { .. } => BpStatus::BudgetExhausted,
        E::Precondition(_) | E::NoSuchVertex(_) | E::NoSuchEdge(_) => BpStatus::InvalidArgument,
        _ => BpStatus::InternalError,
    }
}

/// Opaque walk handle.
pub struct BpWalk {
    inner: Walk,
}

/// Opaque map handle.
pub struct BpMap {
    inner: OrientedMap,
}

unsafe fn opt_str<'a>(ptr: *const c_char) -> Option<&'a str> {
    if ptr.is_null() {
        return None;
    }
    CStr::from_ptr(ptr).to_str().ok()
}

fn export_string(s: String) -> *mut c_char {
    CString::new(s).map_or(std::ptr::null_mut(), CString::into_raw)
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn bp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Samples the uniform-step walk. Never fails; `n_steps` may be 0.
#[no_mangle]
pub extern "C" fn bp_walk_sample_uniform(n_steps: usize, seed: u64) -> *mut BpWalk {
    Box::into_raw(Box::new(BpWalk { inner: bipolar::walk::sample_uibot_walk(n_steps, seed) }))
}

/// Samples the walk conditioned to keep its first coordinate non-negative.
#[no_mangle]
pub extern "C" fn bp_walk_sample_conditioned(n_steps: usize, seed: u64) -> *mut BpWalk {
    Box::into_raw(Box::new(BpWalk {
        inner: bipolar::walk::sample_conditioned_walk(n_steps, 0, seed),
    }))
}

/// Parses the walk text format. Returns null and sets `status` on failure.
///
/// # Safety
/// `text` must be a valid NUL-terminated string or null; `status` may be
/// null.
#[no_mangle]
pub unsafe extern "C" fn bp_walk_from_text(
    text: *const c_char,
    status: *mut c_int,
) -> *mut BpWalk {
    let set = |code: BpStatus| {
        if !status.is_null() {
            *status = code as c_int;
        }
    };
    let Some(text) = opt_str(text) else {
        set(BpStatus::NullArgument);
        return std::ptr::null_mut();
    };
    match io::walk_from_text(text) {
        Ok(walk) => {
            set(BpStatus::Ok);
            Box::into_raw(Box::new(BpWalk { inner: walk }))
        }
        Err(e) => {
            set(status_of(&e));
            std::ptr::null_mut()
        }
    }
}

/// Renders the walk text format; free with `bp_string_free`.
///
/// # Safety
/// `walk` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn bp_walk_to_text(walk: *const BpWalk) -> *mut c_char {
    if walk.is_null() {
        return std::ptr::null_mut();
    }
    export_string(io::walk_to_text(&(*walk).inner))
}

/// Number of steps.
///
/// # Safety
/// `walk` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn bp_walk_len(walk: *const BpWalk) -> usize {
    if walk.is_null() {
        0
    } else {
        (*walk).inner.len()
    }
}

/// # Safety
/// `walk` must come from this library and not already be freed.
#[no_mangle]
pub unsafe extern "C" fn bp_walk_free(walk: *mut BpWalk) {
    if !walk.is_null() {
        drop(Box::from_raw(walk));
    }
}

/// Builds the triangulation of a walk.
///
/// # Safety
/// `walk` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn bp_map_build(walk: *const BpWalk) -> *mut BpMap {
    if walk.is_null() {
        return std::ptr::null_mut();
    }
    Box::into_raw(Box::new(BpMap { inner: kmsw::build(&(*walk).inner) }))
}

/// Recovers the encoding walk of a bipolar map with no missing edges.
///
/// # Safety
/// `map` must be a live handle; `status` may be null.
#[no_mangle]
pub unsafe extern "C" fn bp_map_invert(map: *const BpMap, status: *mut c_int) -> *mut BpWalk {
    let set = |code: BpStatus| {
        if !status.is_null() {
            *status = code as c_int;
        }
    };
    if map.is_null() {
        set(BpStatus::NullArgument);
        return std::ptr::null_mut();
    }
    match kmsw::invert(&(*map).inner) {
        Ok(walk) => {
            set(BpStatus::Ok);
            Box::into_raw(Box::new(BpWalk { inner: walk }))
        }
        Err(e) => {
            set(status_of(&e));
            std::ptr::null_mut()
        }
    }
}

/// Parses the versioned map JSON.
///
/// # Safety
/// `text` must be a valid NUL-terminated string or null; `status` may be
/// null.
#[no_mangle]
pub unsafe extern "C" fn bp_map_from_json(
    text: *const c_char,
    status: *mut c_int,
) -> *mut BpMap {
    let set = |code: BpStatus| {
        if !status.is_null() {
            *status = code as c_int;
        }
    };
    let Some(text) = opt_str(text) else {
        set(BpStatus::NullArgument);
        return std::ptr::null_mut();
    };
    match io::map_from_json(text) {
        Ok(map) => {
            set(BpStatus::Ok);
            Box::into_raw(Box::new(BpMap { inner: map }))
        }
        Err(e) => {
            set(status_of(&e));
            std::ptr::null_mut()
        }
    }
}

/// Renders the map JSON; free with `bp_string_free`.
///
/// # Safety
/// `map` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn bp_map_to_json(map: *const BpMap) -> *mut c_char {
    if map.is_null() {
        return std::ptr::null_mut();
    }
    export_string(io::map_to_json(&(*map).inner))
}

/// # Safety
/// `map` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn bp_map_vertex_count(map: *const BpMap) -> usize {
    if map.is_null() {
        0
    } else {
        (*map).inner.vertex_count()
    }
}

/// # Safety
/// `map` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn bp_map_edge_count(map: *const BpMap) -> usize {
    if map.is_null() {
        0
    } else {
        (*map).inner.edge_count()
    }
}

/// Whether the map passes all structural invariants.
///
/// # Safety
/// `map` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn bp_map_is_valid(map: *const BpMap) -> bool {
    !map.is_null() && (*map).inner.validate().is_valid()
}

/// Optimal directed-path length: mode 0 = longest, 1 = shortest. Writes
/// the length to `out_value` and returns a status; `Unreachable` when no
/// directed path exists.
///
/// # Safety
/// `map` must be a live handle; `out_value` must point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn bp_map_xdp(
    map: *const BpMap,
    mode: c_int,
    src: usize,
    dst: usize,
    out_value: *mut i64,
) -> c_int {
    if map.is_null() || out_value.is_null() {
        return BpStatus::NullArgument as c_int;
    }
    let mode = match mode {
        0 => Mode::Ldp,
        1 => Mode::Sdp,
        _ => return BpStatus::InvalidArgument as c_int,
    };
    match distance::xdp(&(*map).inner, mode, src, dst) {
        Ok(Some(v)) => {
            *out_value = i64::from(v);
            BpStatus::Ok as c_int
        }
        Ok(None) => BpStatus::Unreachable as c_int,
        Err(e) => status_of(&e) as c_int,
    }
}

/// Samples a Boltzmann triangulation with right boundary length `r` by
/// rejection; null when the attempt budget is exhausted.
#[no_mangle]
pub extern "C" fn bp_map_sample_boltzmann(
    r: usize,
    seed: u64,
    max_attempts: usize,
) -> *mut BpMap {
    match sampler::sample_boltzmann_right(r, seed, max_attempts) {
        Ok(map) => Box::into_raw(Box::new(BpMap { inner: map })),
        Err(_) => std::ptr::null_mut(),
    }
}

/// # Safety
/// `map` must come from this library and not already be freed.
#[no_mangle]
pub unsafe extern "C" fn bp_map_free(map: *mut BpMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Frees strings returned by this library.
///
/// # Safety
/// `s` must be a pointer previously returned by one of the `*_to_text` or
/// `*_to_json` functions, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_through_the_c_surface() {
        unsafe {
            let walk = bp_walk_sample_uniform(40, 7);
            assert_eq!(bp_walk_len(walk), 40);
            let map = bp_map_build(walk);
            assert!(bp_map_is_valid(map));
            let json = bp_map_to_json(map);
            let mut status = -1;
            let map2 = bp_map_from_json(json, &mut status);
            assert_eq!(status, BpStatus::Ok as c_int);
            assert_eq!(bp_map_edge_count(map), bp_map_edge_count(map2));
            let mut v = 0i64;
            let rc = bp_map_xdp(map, 0, 0, 1, &mut v);
            assert_eq!(rc, BpStatus::Ok as c_int);
            assert!(v >= 1);
            bp_string_free(json);
            bp_walk_free(walk);
            bp_map_free(map);
            bp_map_free(map2);
        }
    }

    #[test]
    fn invert_reports_not_bipolar() {
        unsafe {
            // A map that keeps missing edges cannot be inverted.
            let mut status = -1;
            let text = CString::new("start 0 0\nb\n").unwrap();
            let walk = bp_walk_from_text(text.as_ptr(), &mut status);
            assert_eq!(status, BpStatus::Ok as c_int);
            let map = bp_map_build(walk);
            let back = bp_map_invert(map, &mut status);
            assert!(back.is_null());
            assert_eq!(status, BpStatus::NotBipolar as c_int);
            bp_walk_free(walk);
            bp_map_free(map);
        }
    }
}
