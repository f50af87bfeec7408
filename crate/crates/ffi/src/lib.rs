//! C ABI over the engine.
//!
//! Handles are opaque pointers created by `li_*_parse`/`li_*_load`/`li_*_run`
//! and released with the matching `li_*_free`. Every fallible call returns an
//! [`LiStatus`]; on failure `li_last_error` describes the cause. Strings are
//! copied into caller buffers: `needed` receives the length including the
//! terminating NUL, and `LI_BUFFER_TOO_SMALL` is returned when `len` is short.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use logical_induction::harness::io::{write_certificates, write_trace};
use logical_induction::harness::{
    evaluate_experiment, format_report, load_scenario, parse_scenario, HarnessError, Scenario,
};
use logical_induction::inductor::MarketTrace;
use logical_induction::logic::{parse_sentence, Sentence};
use logical_induction::rational::format_rational;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiStatus {
    LiOk = 0,
    LiNullArgument = 1,
    LiInvalidUtf8 = 2,
    LiParseError = 3,
    LiConfigError = 4,
    LiRunError = 5,
    LiIoError = 6,
    LiOutOfRange = 7,
    LiBufferTooSmall = 8,
    LiPanic = 9,
}

pub struct LiScenario(Scenario);
pub struct LiTrace {
    trace: MarketTrace,
    members: Vec<String>,
}
pub struct LiSentence(Sentence);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
}

fn fail(status: LiStatus, message: impl Into<String>) -> LiStatus {
    set_error(message);
    status
}

fn harness_status(e: &HarnessError) -> LiStatus {
    match e {
        HarnessError::Io { .. } | HarnessError::Stream(_) => LiStatus::LiIoError,
        HarnessError::Inductor(_) => LiStatus::LiRunError,
        _ => LiStatus::LiConfigError,
    }
}

fn guard(f: impl FnOnce() -> LiStatus) -> LiStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(LiStatus::LiPanic, "internal panic"))
}

unsafe fn c_str<'a>(p: *const c_char) -> Result<&'a str, LiStatus> {
    if p.is_null() {
        return Err(fail(LiStatus::LiNullArgument, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(LiStatus::LiInvalidUtf8, "argument is not valid UTF-8"))
}

unsafe fn copy_out(s: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> LiStatus {
    let bytes = s.as_bytes();
    if !needed.is_null() {
        *needed = bytes.len() + 1;
    }
    if buf.is_null() || len < bytes.len() + 1 {
        return fail(
            LiStatus::LiBufferTooSmall,
            format!("buffer needs {} bytes", bytes.len() + 1),
        );
    }
    ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), bytes.len());
    *buf.add(bytes.len()) = 0;
    LiStatus::LiOk
}

macro_rules! try_ffi {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

/// Message for the last failed call on this thread. Valid until the next
/// call on the same thread.
#[no_mangle]
pub extern "C" fn li_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn li_sentence_parse(text: *const c_char, out: *mut *mut LiSentence) -> LiStatus {
    guard(|| {
        if out.is_null() {
            return fail(LiStatus::LiNullArgument, "null output pointer");
        }
        let t = try_ffi!(c_str(text));
        match parse_sentence(t) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(LiSentence(s)));
                LiStatus::LiOk
            }
            Err(e) => fail(LiStatus::LiParseError, e.to_string()),
        }
    })
}

/// Canonical rendering of a sentence.
///
/// # Safety
/// `sentence` must come from `li_sentence_parse`; `buf` must hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn li_sentence_render(
    sentence: *const LiSentence,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> LiStatus {
    guard(|| {
        let Some(s) = sentence.as_ref() else {
            return fail(LiStatus::LiNullArgument, "null sentence");
        };
        copy_out(s.0.render(), buf, len, needed)
    })
}

/// # Safety
/// `sentence` must come from `li_sentence_parse` or be null.
#[no_mangle]
pub unsafe extern "C" fn li_sentence_free(sentence: *mut LiSentence) {
    if !sentence.is_null() {
        drop(Box::from_raw(sentence));
    }
}

/// Parses scenario text; relative paths resolve against the working directory.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn li_scenario_parse(text: *const c_char, out: *mut *mut LiScenario) -> LiStatus {
    guard(|| {
        if out.is_null() {
            return fail(LiStatus::LiNullArgument, "null output pointer");
        }
        let t = try_ffi!(c_str(text));
        match parse_scenario(t, Path::new(".")) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(LiScenario(s)));
                LiStatus::LiOk
            }
            Err(e) => fail(harness_status(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn li_scenario_load(path: *const c_char, out: *mut *mut LiScenario) -> LiStatus {
    guard(|| {
        if out.is_null() {
            return fail(LiStatus::LiNullArgument, "null output pointer");
        }
        let p = try_ffi!(c_str(path));
        match load_scenario(Path::new(p)) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(LiScenario(s)));
                LiStatus::LiOk
            }
            Err(e) => fail(harness_status(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `scenario` must come from `li_scenario_parse`/`li_scenario_load` or be null.
#[no_mangle]
pub unsafe extern "C" fn li_scenario_free(scenario: *mut LiScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Overrides the number of days to run.
///
/// # Safety
/// `scenario` must be a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn li_scenario_set_horizon(scenario: *mut LiScenario, horizon: u64) -> LiStatus {
    guard(|| {
        let Some(s) = scenario.as_mut() else {
            return fail(LiStatus::LiNullArgument, "null scenario");
        };
        if horizon == 0 {
            return fail(LiStatus::LiOutOfRange, "horizon must be at least 1");
        }
        s.0.horizon = horizon;
        LiStatus::LiOk
    })
}

/// Runs the market for the scenario's horizon.
///
/// # Safety
/// `scenario` must be a live scenario handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn li_scenario_run(scenario: *const LiScenario, out: *mut *mut LiTrace) -> LiStatus {
    guard(|| {
        let Some(s) = scenario.as_ref() else {
            return fail(LiStatus::LiNullArgument, "null scenario");
        };
        if out.is_null() {
            return fail(LiStatus::LiNullArgument, "null output pointer");
        }
        match s.0.run() {
            Ok(trace) => {
                *out = Box::into_raw(Box::new(LiTrace {
                    trace,
                    members: s.0.member_names(),
                }));
                LiStatus::LiOk
            }
            Err(e) => fail(harness_status(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `trace` must come from `li_scenario_run` or be null.
#[no_mangle]
pub unsafe extern "C" fn li_trace_free(trace: *mut LiTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// # Safety
/// `trace` must be a live trace handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn li_trace_horizon(trace: *const LiTrace, out: *mut u64) -> LiStatus {
    guard(|| match (trace.as_ref(), out.is_null()) {
        (Some(t), false) => {
            *out = t.trace.horizon();
            LiStatus::LiOk
        }
        _ => fail(LiStatus::LiNullArgument, "null argument"),
    })
}

/// Day-`day` price of `sentence` as exact `num/den` text.
///
/// # Safety
/// `trace` must be a live trace handle, `sentence` a NUL-terminated string
/// and `buf` must hold `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn li_trace_price(
    trace: *const LiTrace,
    day: u64,
    sentence: *const c_char,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> LiStatus {
    guard(|| {
        let Some(t) = trace.as_ref() else {
            return fail(LiStatus::LiNullArgument, "null trace");
        };
        if day == 0 || day > t.trace.horizon() {
            return fail(
                LiStatus::LiOutOfRange,
                format!("day {day} outside 1..={}", t.trace.horizon()),
            );
        }
        let s = match parse_sentence(try_ffi!(c_str(sentence))) {
            Ok(s) => s,
            Err(e) => return fail(LiStatus::LiParseError, e.to_string()),
        };
        copy_out(&format_rational(&t.trace.price(day, &s)), buf, len, needed)
    })
}

/// Writes the trace CSV and, when `certificates_path` is non-null, the
/// certificate file.
///
/// # Safety
/// `trace` must be a live trace handle; paths must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn li_trace_write(
    trace: *const LiTrace,
    trace_path: *const c_char,
    certificates_path: *const c_char,
) -> LiStatus {
    guard(|| {
        let Some(t) = trace.as_ref() else {
            return fail(LiStatus::LiNullArgument, "null trace");
        };
        let path = try_ffi!(c_str(trace_path));
        let create = |p: &str| std::fs::File::create(p).map_err(|e| fail(LiStatus::LiIoError, format!("{p}: {e}")));
        let file = try_ffi!(create(path));
        if let Err(e) = write_trace(std::io::BufWriter::new(file), &t.trace.pricings) {
            return fail(harness_status(&e), e.to_string());
        }
        if !certificates_path.is_null() {
            let cp = try_ffi!(c_str(certificates_path));
            let file = try_ffi!(create(cp));
            if let Err(e) = write_certificates(std::io::BufWriter::new(file), &t.trace.certificates, &t.members) {
                return fail(harness_status(&e), e.to_string());
            }
        }
        LiStatus::LiOk
    })
}

/// Evaluates a named experiment on a trace of `scenario`. `passed` receives
/// 1 or 0; the report text is copied into `buf` when it is non-null.
///
/// # Safety
/// Handles must be live, `name` NUL-terminated, `passed` valid, and `buf`
/// null or holding `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn li_experiment_evaluate(
    scenario: *const LiScenario,
    trace: *const LiTrace,
    name: *const c_char,
    passed: *mut i32,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> LiStatus {
    guard(|| {
        let (Some(s), Some(t)) = (scenario.as_ref(), trace.as_ref()) else {
            return fail(LiStatus::LiNullArgument, "null handle");
        };
        if passed.is_null() {
            return fail(LiStatus::LiNullArgument, "null output pointer");
        }
        let n = try_ffi!(c_str(name));
        match evaluate_experiment(n, &s.0, &t.trace) {
            Ok(report) => {
                *passed = i32::from(report.passed());
                if buf.is_null() && needed.is_null() {
                    LiStatus::LiOk
                } else {
                    copy_out(&format_report(&report), buf, len, needed)
                }
            }
            Err(e) => fail(harness_status(&e), e.to_string()),
        }
    })
}
