//! C interface to the univoque analysis.
//!
//! Every entry point returns a [`UvStatus`]; on failure a message is kept
//! per thread and can be read with [`uv_last_error_message`]. Analyses are
//! opaque [`UvAnalysis`] handles released with [`uv_analysis_free`];
//! strings returned to the caller are released with [`uv_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use univoque::builtin::{builtin_config, verify_builtin};
use univoque::config::parse_config;
use univoque::dimension::Verdict;
use univoque::report::{emit_report, run_analysis_with, Analysis, Format, RunOptions};
use univoque::Error;

/// Status codes; 2, 3 and 4 match the command-line exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UvStatus {
    Ok = 0,
    Internal = 1,
    Config = 2,
    InvariantBox = 3,
    Budget = 4,
    NullPointer = 5,
    InvalidUtf8 = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UvVerdict {
    EqualityCertified = 0,
    BracketOnly = 1,
    Inconclusive = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UvFormat {
    Json = 0,
    Markdown = 1,
    CsvCounts = 2,
}

/// Headline numbers of an analysis. `has_*` flags mark optional fields.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct UvDimensions {
    pub similarity_dim: f64,
    /// Best available value of `s`: exact when `has_s_exact`, else truncated.
    pub s_best: f64,
    pub has_s_exact: bool,
    pub dv_upper: f64,
    pub has_dv_upper: bool,
    pub spectral_lower: f64,
    pub spectral_upper: f64,
    pub has_spectral: bool,
    pub automaton_closed: bool,
    pub partial: bool,
}

/// Opaque analysis handle.
pub struct UvAnalysis {
    inner: Analysis,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: UvStatus, msg: impl Into<String>) -> UvStatus {
    set_error(msg);
    status
}

fn from_error(e: &Error) -> UvStatus {
    let status = match e.exit_code() {
        2 => UvStatus::Config,
        3 => UvStatus::InvariantBox,
        4 => UvStatus::Budget,
        _ => UvStatus::Internal,
    };
    fail(status, e.to_string())
}

fn guarded(f: impl FnOnce() -> UvStatus) -> UvStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(UvStatus::Panic, "internal panic"))
}

/// # Safety
/// `s` must be null or a valid NUL-terminated string.
unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, UvStatus> {
    if s.is_null() {
        return Err(fail(UvStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(s).to_str().map_err(|_| fail(UvStatus::InvalidUtf8, "argument is not UTF-8"))
}

fn store(cfg: univoque::Result<univoque::config::AnalysisConfig>, out: *mut *mut UvAnalysis) -> UvStatus {
    if out.is_null() {
        return fail(UvStatus::NullPointer, "null output handle");
    }
    let result = cfg.and_then(|c| run_analysis_with(&c, &RunOptions::default()));
    match result {
        Ok(inner) => {
            // SAFETY: checked non-null above; caller provides writable storage.
            unsafe { *out = Box::into_raw(Box::new(UvAnalysis { inner })) };
            UvStatus::Ok
        }
        Err(e) => from_error(&e),
    }
}

/// Runs an analysis of a JSON configuration document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn uv_analysis_from_json(json: *const c_char, out: *mut *mut UvAnalysis) -> UvStatus {
    guarded(|| match read_str(json) {
        Ok(text) => store(parse_config(text), out),
        Err(s) => s,
    })
}

/// Runs one of the built-in systems: `ex1`, `ex2`, `ex4` or `cantor`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn uv_analysis_from_builtin(name: *const c_char, out: *mut *mut UvAnalysis) -> UvStatus {
    guarded(|| match read_str(name) {
        Ok(n) => store(builtin_config(n), out),
        Err(s) => s,
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `a` must be null or a handle from this library that was not freed yet.
#[no_mangle]
pub unsafe extern "C" fn uv_analysis_free(a: *mut UvAnalysis) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

/// Renders the report; the string must be released with [`uv_string_free`].
///
/// # Safety
/// `a` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn uv_analysis_render(a: *const UvAnalysis, format: UvFormat, out: *mut *mut c_char) -> UvStatus {
    guarded(|| {
        if a.is_null() || out.is_null() {
            return fail(UvStatus::NullPointer, "null argument");
        }
        let format = match format {
            UvFormat::Json => Format::Json,
            UvFormat::Markdown => Format::Markdown,
            UvFormat::CsvCounts => Format::CsvCounts,
        };
        let text = emit_report(&(*a).inner.report, format);
        match CString::new(text) {
            Ok(s) => {
                *out = s.into_raw();
                UvStatus::Ok
            }
            Err(_) => fail(UvStatus::Internal, "report contains a NUL byte"),
        }
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library that was not freed yet.
#[no_mangle]
pub unsafe extern "C" fn uv_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `a` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn uv_analysis_verdict(a: *const UvAnalysis, out: *mut UvVerdict) -> UvStatus {
    guarded(|| {
        if a.is_null() || out.is_null() {
            return fail(UvStatus::NullPointer, "null argument");
        }
        *out = match (*a).inner.report.dimension.verdict {
            Verdict::EqualityCertified => UvVerdict::EqualityCertified,
            Verdict::BracketOnly => UvVerdict::BracketOnly,
            Verdict::Inconclusive => UvVerdict::Inconclusive,
        };
        UvStatus::Ok
    })
}

/// # Safety
/// `a` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn uv_analysis_dimensions(a: *const UvAnalysis, out: *mut UvDimensions) -> UvStatus {
    guarded(|| {
        if a.is_null() || out.is_null() {
            return fail(UvStatus::NullPointer, "null argument");
        }
        let r = &(*a).inner.report;
        let d = &r.dimension;
        let sp = r.spectral_radius;
        *out = UvDimensions {
            similarity_dim: d.similarity_dim,
            s_best: d.s_best,
            has_s_exact: d.s_exact.is_some(),
            dv_upper: d.dv_upper.unwrap_or(f64::NAN),
            has_dv_upper: d.dv_upper.is_some(),
            spectral_lower: sp.map_or(f64::NAN, |b| b.lower),
            spectral_upper: sp.map_or(f64::NAN, |b| b.upper),
            has_spectral: sp.is_some(),
            automaton_closed: r.automaton.as_ref().is_some_and(|x| x.closed),
            partial: r.status == univoque::report::Status::Partial,
        };
        UvStatus::Ok
    })
}

/// Number of enumerated levels, or 0 for a null handle.
///
/// # Safety
/// `a` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn uv_analysis_depth(a: *const UvAnalysis) -> usize {
    if a.is_null() {
        0
    } else {
        (*a).inner.report.levels.len()
    }
}

/// Copies `|S_k|`, `|T_k|` and pruned counts for `k = 1..=len` into the
/// arrays (any may be null). Writes at most `uv_analysis_depth` entries and
/// stores the number written in `written`.
///
/// # Safety
/// Non-null arrays must have room for `len` values; `a` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn uv_analysis_level_counts(
    a: *const UvAnalysis,
    s: *mut u64,
    t: *mut u64,
    pruned: *mut u64,
    len: usize,
    written: *mut usize,
) -> UvStatus {
    guarded(|| {
        if a.is_null() {
            return fail(UvStatus::NullPointer, "null handle");
        }
        let levels = &(*a).inner.report.levels;
        let n = len.min(levels.len());
        for (i, l) in levels.iter().take(n).enumerate() {
            if !s.is_null() {
                *s.add(i) = l.s as u64;
            }
            if !t.is_null() {
                *t.add(i) = l.t as u64;
            }
            if !pruned.is_null() {
                *pruned.add(i) = l.pruned as u64;
            }
        }
        if !written.is_null() {
            *written = n;
        }
        UvStatus::Ok
    })
}

/// Runs the self-check of a built-in system and reports passed/total checks.
///
/// # Safety
/// `name` must be a NUL-terminated string; `passed` and `total` writable or null.
#[no_mangle]
pub unsafe extern "C" fn uv_verify_builtin(name: *const c_char, passed: *mut u32, total: *mut u32) -> UvStatus {
    guarded(|| {
        let n = match read_str(name) {
            Ok(n) => n,
            Err(s) => return s,
        };
        match verify_builtin(n) {
            Ok(checks) => {
                if !passed.is_null() {
                    *passed = checks.iter().filter(|c| c.pass).count() as u32;
                }
                if !total.is_null() {
                    *total = checks.len() as u32;
                }
                UvStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// Message of the last failure on this thread, or null. Valid until the
/// next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn uv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn uv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
