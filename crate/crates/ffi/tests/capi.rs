//! Exercises the C surface from Rust: handle lifecycle, error codes, and
//! report payloads.

use std::ffi::{CStr, CString};
use std::os::raw::{c_char, c_int};
use std::ptr;

use tausat_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take_string(p: *mut c_char) -> String {
    assert!(!p.is_null());
    let s = CStr::from_ptr(p).to_str().unwrap().to_string();
    tausat_string_free(p);
    s
}

const BH: &str = r#"{
    "semiring": "arith",
    "states": ["x", "y", "z"],
    "initial": "x",
    "transitions": [
        {"from": "x", "label": "tau", "to": "x", "weight": "1/4"},
        {"from": "x", "label": "tau", "to": "z", "weight": "3/4"},
        {"from": "y", "label": "tau", "to": "y", "weight": "3/4"},
        {"from": "y", "label": "tau", "to": "z", "weight": "1/4"}
    ]
}"#;

unsafe fn parse(doc: &str) -> *mut TausatSystem {
    let json = cstr(doc);
    let mut sys: *mut TausatSystem = ptr::null_mut();
    let mut err: *mut c_char = ptr::null_mut();
    let status = tausat_system_parse_json(json.as_ptr(), &mut sys, &mut err);
    assert_eq!(status, TausatStatus::Ok, "{:?}", take_string(err));
    sys
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(tausat_version()) };
    assert!(!v.to_str().unwrap().is_empty());
}

#[test]
fn parse_weak_bisim_and_free() {
    unsafe {
        let sys = parse(BH);
        assert_eq!(tausat_system_state_count(sys), 3);

        let opts = cstr(r#"{"mode": "policy"}"#);
        let mut report: *mut c_char = ptr::null_mut();
        let mut code: c_int = -1;
        let mut err: *mut c_char = ptr::null_mut();
        let status = tausat_weak_bisim(sys, opts.as_ptr(), &mut report, &mut code, &mut err);
        assert_eq!(status, TausatStatus::Ok);
        assert_eq!(code, 0);
        let report: serde_json::Value = serde_json::from_str(&take_string(report)).unwrap();
        assert_eq!(report["status"], "exact");
        assert_eq!(report["partition"], serde_json::json!([["x", "y"], ["z"]]));

        tausat_system_free(sys);
    }
}

#[test]
fn clone_and_compare_self_is_bisimilar() {
    unsafe {
        let a = parse(BH);
        let b = tausat_system_clone(a);
        let mut code: c_int = -1;
        let status = tausat_compare(
            a,
            b,
            ptr::null(),
            ptr::null_mut(),
            &mut code,
            ptr::null_mut(),
        );
        assert_eq!(status, TausatStatus::Ok);
        assert_eq!(code, 0);
        tausat_system_free(a);
        tausat_system_free(b);
    }
}

#[test]
fn saturate_report_embeds_system() {
    unsafe {
        let sys = parse(BH);
        let opts = cstr(r#"{"mode": "policy"}"#);
        let mut report: *mut c_char = ptr::null_mut();
        let status =
            tausat_saturate(sys, opts.as_ptr(), &mut report, ptr::null_mut(), ptr::null_mut());
        assert_eq!(status, TausatStatus::Ok);
        let report: serde_json::Value = serde_json::from_str(&take_string(report)).unwrap();
        assert!(report["system"]["transitions"].is_array());
        tausat_system_free(sys);
    }
}

#[test]
fn check_partition_codes() {
    unsafe {
        let sys = parse(BH);
        let good = cstr(r#"[["x","y"],["z"]]"#);
        let bad = cstr(r#"[["x","z"],["y"]]"#);
        let opts = cstr(r#"{"mode": "policy"}"#);
        let mut code: c_int = -1;
        let status = tausat_check_partition(
            sys,
            good.as_ptr(),
            opts.as_ptr(),
            ptr::null_mut(),
            &mut code,
            ptr::null_mut(),
        );
        assert_eq!(status, TausatStatus::Ok);
        assert_eq!(code, 0);
        let status = tausat_check_partition(
            sys,
            bad.as_ptr(),
            opts.as_ptr(),
            ptr::null_mut(),
            &mut code,
            ptr::null_mut(),
        );
        assert_eq!(status, TausatStatus::Ok);
        assert_eq!(code, 1);
        tausat_system_free(sys);
    }
}

#[test]
fn error_paths() {
    unsafe {
        // null arguments
        let mut sys: *mut TausatSystem = ptr::null_mut();
        assert_eq!(
            tausat_system_parse_json(ptr::null(), &mut sys, ptr::null_mut()),
            TausatStatus::NullArgument
        );

        // malformed document
        let bad = cstr(r#"{"semiring": "arith", "states": ["x"], "transitions": [
            {"from": "x", "label": "tau", "to": "nowhere", "weight": "1"}]}"#);
        let mut err: *mut c_char = ptr::null_mut();
        let status = tausat_system_parse_json(bad.as_ptr(), &mut sys, &mut err);
        assert_eq!(status, TausatStatus::ParseError);
        let msg = take_string(err);
        assert!(msg.contains("nowhere"), "{msg}");

        // bad options JSON
        let sys = parse(BH);
        let opts = cstr(r#"{"mode": "policy", "bogus": 1}"#);
        let status = tausat_weak_bisim(
            sys,
            opts.as_ptr(),
            ptr::null_mut(),
            ptr::null_mut(),
            &mut err,
        );
        assert_eq!(status, TausatStatus::ParseError);
        tausat_string_free(err);
        tausat_system_free(sys);

        // minimize refuses a capped convex verdict with an eval error
        let seg = parse(
            r#"{"semiring": "segala", "states": ["x", "z"], "transitions": [
                {"from": "x", "choices": [[
                    {"label": "tau", "to": "z", "weight": "1/2"},
                    {"label": "tau", "to": "x", "weight": "1/2"}]]}]}"#,
        );
        let mut err: *mut c_char = ptr::null_mut();
        let status = tausat_minimize(seg, ptr::null(), ptr::null_mut(), ptr::null_mut(), &mut err);
        assert_eq!(status, TausatStatus::EvalError);
        tausat_string_free(err);
        tausat_system_free(seg);
    }
}

#[test]
fn validate_groupoidal_reports_rejection() {
    unsafe {
        let doc = cstr(
            r#"{"semiring": "boolean", "labels": ["a", "a^-1", "c"],
                "algebra": "groupoidal", "states": ["s"], "transitions": []}"#,
        );
        let mut report: *mut c_char = ptr::null_mut();
        let mut code: c_int = -1;
        let status =
            tausat_validate_json(doc.as_ptr(), &mut report, &mut code, ptr::null_mut());
        assert_eq!(status, TausatStatus::Ok);
        assert_eq!(code, 2);
        let report: serde_json::Value = serde_json::from_str(&take_string(report)).unwrap();
        assert_eq!(report["verdict"], "rejected");
    }
}

#[test]
fn dot_and_json_round_trip() {
    unsafe {
        let sys = parse(BH);
        let mut json: *mut c_char = ptr::null_mut();
        assert_eq!(tausat_system_to_json(sys, &mut json), TausatStatus::Ok);
        let text = take_string(json);
        let again = parse(&text);
        assert_eq!(tausat_system_state_count(again), 3);
        let mut dot: *mut c_char = ptr::null_mut();
        assert_eq!(tausat_system_to_dot(sys, &mut dot), TausatStatus::Ok);
        assert!(take_string(dot).contains("digraph"));
        tausat_system_free(sys);
        tausat_system_free(again);
    }
}

#[test]
fn generated_header_exists_with_opaque_handle() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("include")
        .join("tausat.h");
    let text = std::fs::read_to_string(header).expect("cbindgen header must be generated");
    assert!(text.contains("TausatStatus"));
    assert!(text.contains("TausatSystem"));
    assert!(text.contains("tausat_weak_bisim"));
}
