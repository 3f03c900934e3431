use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use padic_ffi::*;

fn parse(text: &str) -> *mut PadicInstance {
    let src = CString::new(text).unwrap();
    let mut inst = ptr::null_mut();
    assert_eq!(unsafe { padic_instance_parse(src.as_ptr(), &mut inst) }, PadicError::Ok);
    assert!(!inst.is_null());
    inst
}

fn take_string(s: *mut std::ffi::c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { padic_string_free(s) };
    out
}

fn last_error() -> String {
    let p = padic_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

#[test]
fn solve_sat_and_check_witness() {
    let inst = parse("vars x y\neq x + y = 1\nval 3 : v(x) >= 2\n");
    assert_eq!(unsafe { padic_instance_num_vars(inst) }, 2);
    let mut v = ptr::null_mut();
    assert_eq!(unsafe { padic_solve(inst, 1, &mut v) }, PadicError::Ok);
    assert_eq!(unsafe { padic_verdict_status(v) }, PadicStatus::Sat);

    let json: serde_json::Value = serde_json::from_str(&take_string(unsafe { padic_verdict_json(inst, v, true) })).unwrap();
    assert_eq!(json["status"], "sat");
    assert!(json["witness"].is_object());

    let wit = take_string(unsafe { padic_verdict_witness(v) });
    let wit = CString::new(wit).unwrap();
    let mut valid = -1;
    assert_eq!(unsafe { padic_check_witness(inst, wit.as_ptr(), 64, &mut valid) }, PadicError::Ok);
    assert_eq!(valid, 1);

    let bad = CString::new("wit x 1\nwit y 0\n").unwrap();
    assert_eq!(unsafe { padic_check_witness(inst, bad.as_ptr(), 64, &mut valid) }, PadicError::Ok);
    assert_eq!(valid, 0);
    assert!(last_error().contains('x'));

    unsafe {
        padic_verdict_free(v);
        padic_instance_free(inst);
    }
}

#[test]
fn solve_unsat() {
    let inst = parse("vars x\neq x = 1\nval 2 : v(x) <= -1\n");
    let mut v = ptr::null_mut();
    assert_eq!(unsafe { padic_solve(inst, 0, &mut v) }, PadicError::Ok);
    assert_eq!(unsafe { padic_verdict_status(v) }, PadicStatus::Unsat);
    assert!(unsafe { padic_verdict_witness(v) }.is_null());
    assert!(!padic_last_error().is_null());
    unsafe {
        padic_verdict_free(v);
        padic_instance_free(inst);
    }
}

#[test]
fn errors_are_reported() {
    let src = CString::new("vars x\nval 4 : v(x) >= 0\n").unwrap();
    let mut inst = ptr::null_mut();
    assert_eq!(unsafe { padic_instance_parse(src.as_ptr(), &mut inst) }, PadicError::Parse);
    assert!(inst.is_null());
    assert!(last_error().contains("not a prime"));

    assert_eq!(unsafe { padic_instance_parse(ptr::null(), &mut inst) }, PadicError::NullPointer);
    let mut v = ptr::null_mut();
    assert_eq!(unsafe { padic_solve(ptr::null(), 1, &mut v) }, PadicError::NullPointer);
    assert_eq!(unsafe { padic_verdict_status(ptr::null()) }, PadicStatus::Unknown);

    let bytes = [0xffu8, 0xfe, 0];
    assert_eq!(
        unsafe { padic_instance_parse(bytes.as_ptr().cast(), &mut inst) },
        PadicError::InvalidUtf8
    );

    unsafe {
        padic_instance_free(ptr::null_mut());
        padic_verdict_free(ptr::null_mut());
        padic_string_free(ptr::null_mut());
    }
}

#[test]
fn successful_call_clears_error() {
    let src = CString::new("vars\n").unwrap();
    let mut inst = ptr::null_mut();
    unsafe { padic_instance_parse(ptr::null(), &mut inst) };
    assert!(!padic_last_error().is_null());
    assert_eq!(unsafe { padic_instance_parse(src.as_ptr(), &mut inst) }, PadicError::Ok);
    assert!(padic_last_error().is_null());
    unsafe { padic_instance_free(inst) };
}

#[test]
fn header_compiles_as_c() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/padic.h")).unwrap();
    for name in [
        "padic_instance_parse",
        "padic_instance_free",
        "padic_solve",
        "padic_verdict_status",
        "padic_verdict_json",
        "padic_verdict_witness",
        "padic_verdict_free",
        "padic_check_witness",
        "padic_string_free",
        "padic_last_error",
        "typedef struct PadicInstance PadicInstance",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
    let Ok(status) = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(dir.join("include"))
        .arg(dir.join("tests/smoke.c"))
        .status()
    else {
        eprintln!("no C compiler, skipping syntax check");
        return;
    };
    assert!(status.success());
}
