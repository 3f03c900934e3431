//! C ABI over `padic-core`.
//!
//! Instances and verdicts are opaque heap handles released with their
//! `_free` function. Every fallible call returns a [`PadicError`] code; the
//! message of the most recent failure on the calling thread is available
//! from [`padic_last_error`]. Strings returned by the library are owned by
//! the caller and released with [`padic_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use padic_core::cli::{parse_instance, parse_witness, render_witness, verdict_json};
use padic_core::testkit::verify_witness_with_guard;
use padic_core::{Error, Instance, SolveOptions, Status, Verdict};

/// Result code of every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PadicError {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidInput = 4,
    GuardExceeded = 5,
    Internal = 6,
    Panic = 7,
}

/// Outcome of a solve.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PadicStatus {
    Sat = 0,
    Unsat = 1,
    Unknown = 2,
}

/// Opaque parsed instance.
pub struct PadicInstance {
    inner: Instance,
}

/// Opaque solver verdict.
pub struct PadicVerdict {
    inner: Verdict,
    time_ms: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn code_for(e: &Error) -> PadicError {
    match e {
        Error::Parse { .. } | Error::NotPrime(_) => PadicError::Parse,
        Error::GuardExceeded { .. } => PadicError::GuardExceeded,
        Error::Invariant(_) => PadicError::Internal,
        _ => PadicError::InvalidInput,
    }
}

fn guarded(f: impl FnOnce() -> Result<(), (PadicError, String)>) -> PadicError {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PadicError::Ok,
        Ok(Err((code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("panic inside padic library");
            PadicError::Panic
        }
    }
}

fn core_err(e: Error) -> (PadicError, String) {
    (code_for(&e), e.to_string())
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, (PadicError, String)> {
    if s.is_null() {
        return Err((PadicError::NullPointer, "null string argument".into()));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| (PadicError::InvalidUtf8, e.to_string()))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn padic_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses an instance in the text format accepted by the `padic` binary.
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn padic_instance_parse(text: *const c_char, out: *mut *mut PadicInstance) -> PadicError {
    guarded(|| {
        if out.is_null() {
            return Err((PadicError::NullPointer, "null output pointer".into()));
        }
        *out = ptr::null_mut();
        let inst = parse_instance(read_str(text)?).map_err(core_err)?;
        inst.validate().map_err(core_err)?;
        *out = Box::into_raw(Box::new(PadicInstance { inner: inst }));
        Ok(())
    })
}

/// Number of variables of an instance, 0 for null.
///
/// # Safety
/// `inst` must be null or a live handle from [`padic_instance_parse`].
#[no_mangle]
pub unsafe extern "C" fn padic_instance_num_vars(inst: *const PadicInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.inner.num_vars())
}

/// Releases an instance. Null is ignored.
///
/// # Safety
/// `inst` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn padic_instance_free(inst: *mut PadicInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Decides an instance. `threads` of 0 means 1.
///
/// # Safety
/// `inst` must be a live instance handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn padic_solve(
    inst: *const PadicInstance,
    threads: usize,
    out: *mut *mut PadicVerdict,
) -> PadicError {
    guarded(|| {
        if out.is_null() {
            return Err((PadicError::NullPointer, "null output pointer".into()));
        }
        *out = ptr::null_mut();
        let inst = inst
            .as_ref()
            .ok_or((PadicError::NullPointer, "null instance".to_string()))?;
        let opts = SolveOptions {
            threads: threads.max(1),
            ..SolveOptions::default()
        };
        let start = std::time::Instant::now();
        let v = padic_core::solve(&inst.inner, &opts).map_err(core_err)?;
        let time_ms = start.elapsed().as_secs_f64() * 1e3;
        *out = Box::into_raw(Box::new(PadicVerdict { inner: v, time_ms }));
        Ok(())
    })
}

/// Status of a verdict; null reads as unknown.
///
/// # Safety
/// `v` must be null or a live verdict handle.
#[no_mangle]
pub unsafe extern "C" fn padic_verdict_status(v: *const PadicVerdict) -> PadicStatus {
    match v.as_ref().map(|v| v.inner.status) {
        Some(Status::Sat) => PadicStatus::Sat,
        Some(Status::Unsat) => PadicStatus::Unsat,
        _ => PadicStatus::Unknown,
    }
}

/// JSON rendering of a verdict, the same document `padic --json solve`
/// prints. Returns null on failure.
///
/// # Safety
/// `inst` must be the instance the verdict was computed for; both handles live.
#[no_mangle]
pub unsafe extern "C" fn padic_verdict_json(
    inst: *const PadicInstance,
    v: *const PadicVerdict,
    with_witness: bool,
) -> *mut c_char {
    let mut res = ptr::null_mut();
    guarded(|| {
        let (Some(inst), Some(v)) = (inst.as_ref(), v.as_ref()) else {
            return Err((PadicError::NullPointer, "null handle".into()));
        };
        res = into_c_string(verdict_json(&inst.inner, &v.inner, with_witness, v.time_ms).to_string());
        Ok(())
    });
    res
}

/// Witness lines (`wit ...`) of a satisfiable verdict, or null when there is
/// no explicit witness.
///
/// # Safety
/// `v` must be a live verdict handle.
#[no_mangle]
pub unsafe extern "C" fn padic_verdict_witness(v: *const PadicVerdict) -> *mut c_char {
    let mut res = ptr::null_mut();
    guarded(|| {
        let v = v.as_ref().ok_or((PadicError::NullPointer, "null verdict".to_string()))?;
        match &v.inner.witness {
            Some(w) => res = into_c_string(render_witness(w)),
            None => return Err((PadicError::InvalidInput, "verdict carries no witness".into())),
        }
        Ok(())
    });
    res
}

/// Releases a verdict. Null is ignored.
///
/// # Safety
/// `v` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn padic_verdict_free(v: *mut PadicVerdict) {
    if !v.is_null() {
        drop(Box::from_raw(v));
    }
}

/// Checks witness lines against an instance. On success `*valid` is 1 when
/// every constraint holds and 0 otherwise; the violation is then available
/// from [`padic_last_error`].
///
/// # Safety
/// `inst` must be live, `witness` NUL-terminated and `valid` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn padic_check_witness(
    inst: *const PadicInstance,
    witness: *const c_char,
    guard: u64,
    valid: *mut i32,
) -> PadicError {
    let mut violation = None;
    let code = guarded(|| {
        let inst = inst
            .as_ref()
            .ok_or((PadicError::NullPointer, "null instance".to_string()))?;
        if valid.is_null() {
            return Err((PadicError::NullPointer, "null output pointer".into()));
        }
        let w = parse_witness(read_str(witness)?).map_err(core_err)?;
        let ok = match verify_witness_with_guard(&inst.inner, &w, guard) {
            Ok(()) => true,
            Err(e) => {
                violation = Some(e.to_string());
                false
            }
        };
        *valid = i32::from(ok);
        Ok(())
    });
    if let Some(msg) = violation {
        set_error(msg);
    }
    code
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string obtained from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn padic_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
