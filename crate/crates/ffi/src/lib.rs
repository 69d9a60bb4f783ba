//! C interface to covkg.
//!
//! Handles are opaque boxes owned by the caller and released with the matching `_free`.
//! Every fallible call returns an `i32` status (0 on success, negative otherwise); the
//! message for the latest failure on the calling thread is available from
//! `covkg_last_error`.
//!
//! # Safety
//!
//! All pointer arguments must be null or valid for the access described on the function.
//! Handles must come from this library and must not be used after their `_free`. String
//! arguments are NUL-terminated UTF-8. Strings returned as `*mut c_char` are owned by the
//! caller and go back through `covkg_string_free`. Handles are not synchronized; do not
//! share one between threads without external locking.
#![allow(clippy::missing_safety_doc)]

use covkg::bump::Bump;
use covkg::cli::{self, RunConfig, Suite};
use covkg::geometry::{Spacetime, Theory};
use covkg::report::Report;
use covkg::solver::{e_causal, pair_volume, TestFunction};
use covkg::Grid;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

pub const COVKG_OK: i32 = 0;
pub const COVKG_ERR_NULL: i32 = -1;
pub const COVKG_ERR_UTF8: i32 = -2;
pub const COVKG_ERR_CONFIG: i32 = -3;
pub const COVKG_ERR_COMPUTE: i32 = -4;
pub const COVKG_ERR_RANGE: i32 = -5;
pub const COVKG_ERR_PANIC: i32 = -6;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(code: i32, msg: &str) -> i32 {
    set_error(msg);
    code
}

fn guard(f: impl FnOnce() -> i32) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(c) => c,
        Err(_) => fail(COVKG_ERR_PANIC, "panic inside covkg"),
    }
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, i32> {
    if p.is_null() {
        return Err(fail(COVKG_ERR_NULL, "null string"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(COVKG_ERR_UTF8, "string is not UTF-8"))
}

fn code_of(e: &covkg::Error) -> i32 {
    match e {
        covkg::Error::Config(_) => COVKG_ERR_CONFIG,
        _ => COVKG_ERR_COMPUTE,
    }
}

/// Run configuration.
pub struct CovkgConfig(RunConfig);
/// Result of a verification run.
pub struct CovkgReport(Report);
/// Flat cylinder with a fixed grid and mass.
pub struct CovkgSpacetime(Arc<Spacetime>);

/// Message of the latest failure on this thread, empty if none. Valid until the next
/// failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn covkg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Built-in defaults (256 x 512, m = 1, L = 2 pi).
#[no_mangle]
pub extern "C" fn covkg_config_default() -> *mut CovkgConfig {
    Box::into_raw(Box::new(CovkgConfig(RunConfig::default())))
}

/// Defaults overlaid with `key = value` text.
#[no_mangle]
pub unsafe extern "C" fn covkg_config_parse(text_: *const c_char, out: *mut *mut CovkgConfig) -> i32 {
    guard(|| {
        if out.is_null() {
            return fail(COVKG_ERR_NULL, "null out pointer");
        }
        let t = match text(text_) {
            Ok(t) => t,
            Err(c) => return c,
        };
        match RunConfig::parse(t) {
            Ok(c) => {
                *out = Box::into_raw(Box::new(CovkgConfig(c)));
                COVKG_OK
            }
            Err(e) => fail(code_of(&e), &e.to_string()),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn covkg_config_free(cfg: *mut CovkgConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Run suites (comma separated names, or null for the configured list).
#[no_mangle]
pub unsafe extern "C" fn covkg_verify(cfg: *const CovkgConfig, suites: *const c_char, out: *mut *mut CovkgReport) -> i32 {
    guard(|| {
        if cfg.is_null() || out.is_null() {
            return fail(COVKG_ERR_NULL, "null argument");
        }
        let cfg = &(*cfg).0;
        let list: Vec<Suite> = if suites.is_null() {
            cfg.suites.clone()
        } else {
            let t = match text(suites) {
                Ok(t) => t,
                Err(c) => return c,
            };
            match t.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::parse).collect() {
                Ok(l) => l,
                Err(e) => return fail(COVKG_ERR_CONFIG, &e.to_string()),
            }
        };
        *out = Box::into_raw(Box::new(CovkgReport(cli::verify(cfg, &list, None))));
        COVKG_OK
    })
}

/// 1 if every record passed, 0 otherwise, negative on a null handle.
#[no_mangle]
pub unsafe extern "C" fn covkg_report_pass(r: *const CovkgReport) -> i32 {
    if r.is_null() {
        return fail(COVKG_ERR_NULL, "null report");
    }
    (*r).0.pass as i32
}

/// Number of records; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn covkg_report_len(r: *const CovkgReport) -> usize {
    if r.is_null() {
        return 0;
    }
    let rep = &(*r).0;
    rep.records.len()
}

/// Measured value, tolerance and verdict of record `i`. Any out pointer may be null.
#[no_mangle]
pub unsafe extern "C" fn covkg_report_record(
    r: *const CovkgReport,
    i: usize,
    measured: *mut f64,
    tolerance: *mut f64,
    pass: *mut i32,
) -> i32 {
    if r.is_null() {
        return fail(COVKG_ERR_NULL, "null report");
    }
    let rep = &(*r).0;
    let Some(rec) = rep.records.get(i) else {
        return fail(COVKG_ERR_RANGE, &format!("record {i} out of range"));
    };
    if !measured.is_null() {
        *measured = rec.measured;
    }
    if !tolerance.is_null() {
        *tolerance = rec.tolerance;
    }
    if !pass.is_null() {
        *pass = rec.pass as i32;
    }
    COVKG_OK
}

/// Name of record `i`, caller frees. Null on error.
#[no_mangle]
pub unsafe extern "C" fn covkg_report_record_name(r: *const CovkgReport, i: usize) -> *mut c_char {
    if r.is_null() {
        set_error("null report");
        return ptr::null_mut();
    }
    let rep = &(*r).0;
    match rep.records.get(i) {
        Some(rec) => CString::new(rec.name.as_str()).map_or(ptr::null_mut(), CString::into_raw),
        None => {
            set_error(&format!("record {i} out of range"));
            ptr::null_mut()
        }
    }
}

/// Whole report as pretty JSON, caller frees. Null on error.
#[no_mangle]
pub unsafe extern "C" fn covkg_report_json(r: *const CovkgReport) -> *mut c_char {
    if r.is_null() {
        set_error("null report");
        return ptr::null_mut();
    }
    match serde_json::to_string_pretty(&(*r).0) {
        Ok(s) => CString::new(s).map_or(ptr::null_mut(), CString::into_raw),
        Err(e) => {
            set_error(&e.to_string());
            ptr::null_mut()
        }
    }
}

#[no_mangle]
pub unsafe extern "C" fn covkg_report_free(r: *mut CovkgReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

#[no_mangle]
pub unsafe extern "C" fn covkg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Flat cylinder of circumference `length` with `n_x` sites, `n_t` levels from t = 0
/// and time step `courant * dx`.
#[no_mangle]
pub unsafe extern "C" fn covkg_spacetime_flat(
    n_x: usize,
    n_t: usize,
    length: f64,
    courant: f64,
    mass: f64,
    out: *mut *mut CovkgSpacetime,
) -> i32 {
    guard(|| {
        if out.is_null() {
            return fail(COVKG_ERR_NULL, "null out pointer");
        }
        let st = Grid::with_courant(n_t, n_x, 0.0, length, courant)
            .and_then(|g| Ok((g, Theory::new(mass, 0.0)?)))
            .and_then(|(g, th)| Spacetime::flat(th, g));
        match st {
            Ok(st) => {
                *out = Box::into_raw(Box::new(CovkgSpacetime(st)));
                COVKG_OK
            }
            Err(e) => fail(code_of(&e), &e.to_string()),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn covkg_spacetime_free(st: *mut CovkgSpacetime) {
    if !st.is_null() {
        drop(Box::from_raw(st));
    }
}

/// E(f, g) for two bumps given as `{t_center, x_center, t_radius, x_radius}`: the
/// volume pairing of f with the causal propagator applied to g.
#[no_mangle]
pub unsafe extern "C" fn covkg_causal_pairing(
    st: *const CovkgSpacetime,
    f: *const f64,
    g: *const f64,
    out: *mut f64,
) -> i32 {
    guard(|| {
        if st.is_null() || f.is_null() || g.is_null() || out.is_null() {
            return fail(COVKG_ERR_NULL, "null argument");
        }
        let st = &(*st).0;
        let bump = |p: *const f64| {
            let p = std::slice::from_raw_parts(p, 4);
            TestFunction::bump(st.grid, Bump::new(p[0], p[1], p[2], p[3]), 1.0)
        };
        let v = bump(f).and_then(|f| Ok((f, bump(g)?))).and_then(|(f, g)| pair_volume(st, &f, &e_causal(st, &g)?));
        match v {
            Ok(v) => {
                *out = v;
                COVKG_OK
            }
            Err(e) => fail(code_of(&e), &e.to_string()),
        }
    })
}
