//! C ABI over the tausat engines: opaque system handles in, JSON reports
//! out, mirroring the CLI's document and report formats exactly.
//!
//! Conventions:
//! - every returned `char*` is owned by the caller and must be released with
//!   [`tausat_string_free`];
//! - `options_json` parameters accept `NULL` (defaults) or a JSON object
//!   like `{"mode":"policy","epsilon":"1e-12","delta":"1e-9","cap":64}`;
//! - `out_code` receives the command's verdict code (0 positive,
//!   1 negative, 2 unknown), matching the CLI exit codes;
//! - on any status other than `OK`, `out_error` (when non-null) receives a
//!   diagnostic string.

use std::ffi::{c_char, c_int, CStr, CString};
use std::ptr;

use tausat::cli::document::{parse_system, system_to_value, to_dot, ParsedSystem};
use tausat::cli::{
    run_check_partition, run_compare, run_minimize, run_saturate, run_strong_bisim, run_validate,
    run_weak_bisim, Outcome, RunOptions,
};
use tausat::Error;

/// Result of a C API call. Anything other than `OK` leaves the out
/// parameters untouched except for the error string.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TausatStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The document, options or partition JSON failed to parse or validate.
    ParseError = 3,
    /// The engines rejected the request (shape mismatch, non-exact verdict
    /// where exactness is required, ...).
    EvalError = 4,
}

/// An opaque parsed system (weighted or convex), created by
/// [`tausat_system_parse_json`] and released by [`tausat_system_free`].
pub struct TausatSystem {
    inner: ParsedSystem,
}

fn classify(e: &Error) -> TausatStatus {
    match e {
        Error::Document { .. }
        | Error::Json(_)
        | Error::WeightSyntax(_)
        | Error::InvalidWeight { .. }
        | Error::UnknownLabel(_)
        | Error::UnknownState(_)
        | Error::DuplicateLabel(_)
        | Error::DuplicateState(_)
        | Error::ReservedLabel
        | Error::InvalidPartition(_)
        | Error::InvalidConfig(_) => TausatStatus::ParseError,
        _ => TausatStatus::EvalError,
    }
}

unsafe fn write_error(out_error: *mut *mut c_char, message: &str) {
    if out_error.is_null() {
        return;
    }
    let c = CString::new(message.replace('\0', " "))
        .unwrap_or_else(|_| CString::new("error").unwrap());
    *out_error = c.into_raw();
}

unsafe fn write_string(out: *mut *mut c_char, s: &str) {
    let c = CString::new(s.replace('\0', " ")).unwrap_or_else(|_| CString::new("").unwrap());
    *out = c.into_raw();
}

unsafe fn read_str<'a>(
    ptr_: *const c_char,
    out_error: *mut *mut c_char,
) -> Result<&'a str, TausatStatus> {
    if ptr_.is_null() {
        write_error(out_error, "null string argument");
        return Err(TausatStatus::NullArgument);
    }
    CStr::from_ptr(ptr_).to_str().map_err(|_| {
        write_error(out_error, "argument is not valid UTF-8");
        TausatStatus::InvalidUtf8
    })
}

unsafe fn read_options(
    options_json: *const c_char,
    out_error: *mut *mut c_char,
) -> Result<RunOptions, TausatStatus> {
    if options_json.is_null() {
        return Ok(RunOptions::default());
    }
    let text = read_str(options_json, out_error)?;
    serde_json::from_str(text).map_err(|e| {
        write_error(out_error, &format!("options: {e}"));
        TausatStatus::ParseError
    })
}

unsafe fn deliver(
    result: tausat::Result<Outcome>,
    out_report: *mut *mut c_char,
    out_code: *mut c_int,
    out_error: *mut *mut c_char,
) -> TausatStatus {
    match result {
        Ok(outcome) => {
            if !out_code.is_null() {
                *out_code = outcome.code;
            }
            if !out_report.is_null() {
                write_string(out_report, &outcome.report.to_pretty_json());
            }
            TausatStatus::Ok
        }
        Err(e) => {
            write_error(out_error, &e.to_string());
            classify(&e)
        }
    }
}

/// The crate version as a static NUL-terminated string; do not free.
#[no_mangle]
pub extern "C" fn tausat_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Releases a string returned by any of the other calls.
///
/// # Safety
/// `s` must be a pointer previously returned by this library in an out
/// parameter, not yet freed; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn tausat_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a system document (the CLI's JSON format) into a handle.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out_system` must be a valid
/// location to store the handle; `out_error` may be null.
#[no_mangle]
pub unsafe extern "C" fn tausat_system_parse_json(
    json: *const c_char,
    out_system: *mut *mut TausatSystem,
    out_error: *mut *mut c_char,
) -> TausatStatus {
    if out_system.is_null() {
        write_error(out_error, "out_system is null");
        return TausatStatus::NullArgument;
    }
    let text = match read_str(json, out_error) {
        Ok(t) => t,
        Err(s) => return s,
    };
    let value: serde_json::Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(e) => {
            write_error(out_error, &format!("JSON syntax error: {e}"));
            return TausatStatus::ParseError;
        }
    };
    match parse_system(&value) {
        Ok(inner) => {
            *out_system = Box::into_raw(Box::new(TausatSystem { inner }));
            TausatStatus::Ok
        }
        Err(e) => {
            write_error(out_error, &e.to_string());
            classify(&e)
        }
    }
}

/// Releases a system handle.
///
/// # Safety
/// `sys` must come from [`tausat_system_parse_json`] or
/// [`tausat_system_clone`] and not be used afterwards; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn tausat_system_free(sys: *mut TausatSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Deep-copies a system handle.
///
/// # Safety
/// `sys` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn tausat_system_clone(sys: *const TausatSystem) -> *mut TausatSystem {
    if sys.is_null() {
        return ptr::null_mut();
    }
    Box::into_raw(Box::new(TausatSystem {
        inner: (*sys).inner.clone(),
    }))
}

/// Number of states of the system.
///
/// # Safety
/// `sys` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn tausat_system_state_count(sys: *const TausatSystem) -> usize {
    if sys.is_null() {
        return 0;
    }
    (*sys).inner.states().len()
}

/// Serializes the system back to its JSON document form.
///
/// # Safety
/// `sys` must be a live handle; `out_json` a valid out location.
#[no_mangle]
pub unsafe extern "C" fn tausat_system_to_json(
    sys: *const TausatSystem,
    out_json: *mut *mut c_char,
) -> TausatStatus {
    if sys.is_null() || out_json.is_null() {
        return TausatStatus::NullArgument;
    }
    let value = system_to_value(&(*sys).inner);
    write_string(out_json, &serde_json::to_string_pretty(&value).unwrap());
    TausatStatus::Ok
}

/// Renders the system as a DOT digraph (τ edges dashed).
///
/// # Safety
/// `sys` must be a live handle; `out_dot` a valid out location.
#[no_mangle]
pub unsafe extern "C" fn tausat_system_to_dot(
    sys: *const TausatSystem,
    out_dot: *mut *mut c_char,
) -> TausatStatus {
    if sys.is_null() || out_dot.is_null() {
        return TausatStatus::NullArgument;
    }
    write_string(out_dot, &to_dot(&(*sys).inner));
    TausatStatus::Ok
}

unsafe fn one_system_op(
    sys: *const TausatSystem,
    options_json: *const c_char,
    out_report: *mut *mut c_char,
    out_code: *mut c_int,
    out_error: *mut *mut c_char,
    run: fn(&ParsedSystem, &RunOptions) -> tausat::Result<Outcome>,
) -> TausatStatus {
    if sys.is_null() {
        write_error(out_error, "sys is null");
        return TausatStatus::NullArgument;
    }
    let ro = match read_options(options_json, out_error) {
        Ok(ro) => ro,
        Err(s) => return s,
    };
    deliver(run(&(*sys).inner, &ro), out_report, out_code, out_error)
}

/// Greatest weak bisimulation; the report carries the partition.
///
/// # Safety
/// `sys` must be a live handle; `options_json` may be null; the out
/// pointers may be null when the caller does not need them.
#[no_mangle]
pub unsafe extern "C" fn tausat_weak_bisim(
    sys: *const TausatSystem,
    options_json: *const c_char,
    out_report: *mut *mut c_char,
    out_code: *mut c_int,
    out_error: *mut *mut c_char,
) -> TausatStatus {
    one_system_op(sys, options_json, out_report, out_code, out_error, run_weak_bisim)
}

/// Greatest strong bisimulation (no saturation).
///
/// # Safety
/// As for [`tausat_weak_bisim`].
#[no_mangle]
pub unsafe extern "C" fn tausat_strong_bisim(
    sys: *const TausatSystem,
    options_json: *const c_char,
    out_report: *mut *mut c_char,
    out_code: *mut c_int,
    out_error: *mut *mut c_char,
) -> TausatStatus {
    one_system_op(sys, options_json, out_report, out_code, out_error, run_strong_bisim)
}

/// Quotient by the greatest weak bisimulation; refuses non-exact verdicts
/// with `EVAL_ERROR`.
///
/// # Safety
/// As for [`tausat_weak_bisim`].
#[no_mangle]
pub unsafe extern "C" fn tausat_minimize(
    sys: *const TausatSystem,
    options_json: *const c_char,
    out_report: *mut *mut c_char,
    out_code: *mut c_int,
    out_error: *mut *mut c_char,
) -> TausatStatus {
    one_system_op(sys, options_json, out_report, out_code, out_error, run_minimize)
}

fn run_saturate_report(parsed: &ParsedSystem, ro: &RunOptions) -> tausat::Result<Outcome> {
    run_saturate(parsed, ro).map(|(outcome, _)| outcome)
}

/// τ-saturation; the report embeds the saturated system document.
///
/// # Safety
/// As for [`tausat_weak_bisim`].
#[no_mangle]
pub unsafe extern "C" fn tausat_saturate(
    sys: *const TausatSystem,
    options_json: *const c_char,
    out_report: *mut *mut c_char,
    out_code: *mut c_int,
    out_error: *mut *mut c_char,
) -> TausatStatus {
    one_system_op(
        sys,
        options_json,
        out_report,
        out_code,
        out_error,
        run_saturate_report,
    )
}

/// Compares the initial states of two systems on their disjoint union.
/// `out_code`: 0 bisimilar, 1 not, 2 unknown.
///
/// # Safety
/// `left` and `right` must be live handles; `options_json` may be null; the
/// out pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn tausat_compare(
    left: *const TausatSystem,
    right: *const TausatSystem,
    options_json: *const c_char,
    out_report: *mut *mut c_char,
    out_code: *mut c_int,
    out_error: *mut *mut c_char,
) -> TausatStatus {
    if left.is_null() || right.is_null() {
        write_error(out_error, "system handle is null");
        return TausatStatus::NullArgument;
    }
    let ro = match read_options(options_json, out_error) {
        Ok(ro) => ro,
        Err(s) => return s,
    };
    deliver(
        run_compare(&(*left).inner, &(*right).inner, &ro),
        out_report,
        out_code,
        out_error,
    )
}

/// Checks a partition document (JSON blocks of state names) against the
/// system. `out_code`: 0 accepted, 1 rejected.
///
/// # Safety
/// `sys` must be a live handle; `partition_json` must be NUL-terminated;
/// `options_json` may be null; the out pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn tausat_check_partition(
    sys: *const TausatSystem,
    partition_json: *const c_char,
    options_json: *const c_char,
    out_report: *mut *mut c_char,
    out_code: *mut c_int,
    out_error: *mut *mut c_char,
) -> TausatStatus {
    if sys.is_null() {
        write_error(out_error, "sys is null");
        return TausatStatus::NullArgument;
    }
    let ptext = match read_str(partition_json, out_error) {
        Ok(t) => t,
        Err(s) => return s,
    };
    let pvalue: serde_json::Value = match serde_json::from_str(ptext) {
        Ok(v) => v,
        Err(e) => {
            write_error(out_error, &format!("partition: {e}"));
            return TausatStatus::ParseError;
        }
    };
    let ro = match read_options(options_json, out_error) {
        Ok(ro) => ro,
        Err(s) => return s,
    };
    deliver(
        run_check_partition(&(*sys).inner, &pvalue, &ro),
        out_report,
        out_code,
        out_error,
    )
}

/// Runs the semiring and label-algebra law reports for a raw document.
/// Unlike the other entry points this takes JSON directly, because a
/// document whose algebra fails its laws cannot become a system handle.
/// `out_code`: 0 all laws pass, 2 otherwise.
///
/// # Safety
/// `doc_json` must be NUL-terminated; the out pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn tausat_validate_json(
    doc_json: *const c_char,
    out_report: *mut *mut c_char,
    out_code: *mut c_int,
    out_error: *mut *mut c_char,
) -> TausatStatus {
    let text = match read_str(doc_json, out_error) {
        Ok(t) => t,
        Err(s) => return s,
    };
    let value: serde_json::Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(e) => {
            write_error(out_error, &format!("JSON syntax error: {e}"));
            return TausatStatus::ParseError;
        }
    };
    deliver(run_validate(&value), out_report, out_code, out_error)
}
