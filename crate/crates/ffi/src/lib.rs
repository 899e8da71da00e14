//! C ABI for minicminor.
//!
//! Programs are opaque `MccProgram` handles created by `mcc_program_parse`
//! and released with `mcc_program_free`. Every fallible call returns an
//! `MccStatus`; on failure `mcc_last_error` describes the most recent error
//! on the calling thread. Strings handed out by the library are
//! NUL-terminated UTF-8 and must be released with `mcc_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use minicminor::cli::{diff_report, run_report, Semantics};
use minicminor::difftest::{fuzz_pass_with, oracle_set, FuzzOptions, GenConfig};
use minicminor::oracle::OracleMode;
use minicminor::syntax::{parse_program, Program};
use minicminor::transform::{run_pipeline, Pass};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MccStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Program text failed to parse or validate.
    ParseError = 3,
    /// Unknown pass, bad oracle spec or other invalid argument.
    InvalidArgument = 4,
    /// A scripted oracle ran out of answers.
    OracleExhausted = 5,
    /// A preservation check ran and failed. Output is still produced.
    Violation = 6,
    /// The library panicked; this is a bug.
    Internal = 7,
}

/// Which interpreter `mcc_run_json` uses.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MccSemantics {
    Small = 0,
    Big = 1,
}

/// Opaque program handle.
pub struct MccProgram {
    program: Program,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

type FfiResult = Result<MccStatus, (MccStatus, String)>;

fn guarded(f: impl FnOnce() -> FfiResult) -> MccStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => {
            if status == MccStatus::Ok {
                set_error("");
            }
            status
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal error");
            MccStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (MccStatus, String)> {
    if p.is_null() {
        return Err((MccStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| (MccStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn program_arg<'a>(p: *const MccProgram, what: &str) -> Result<&'a Program, (MccStatus, String)> {
    p.as_ref()
        .map(|h| &h.program)
        .ok_or_else(|| (MccStatus::NullArgument, format!("{what} is null")))
}

unsafe fn out_arg<T>(p: *mut *mut T, what: &str) -> Result<(), (MccStatus, String)> {
    if p.is_null() {
        return Err((MccStatus::NullArgument, format!("{what} is null")));
    }
    *p = ptr::null_mut();
    Ok(())
}

fn to_c(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("interior NULs removed").into_raw()
}

fn oracle_arg(spec: &str) -> Result<OracleMode, (MccStatus, String)> {
    OracleMode::parse_spec(spec).map_err(|e| (MccStatus::InvalidArgument, e.to_string()))
}

fn passes_arg(list: &str, max_unroll: u32) -> Result<Vec<Pass>, (MccStatus, String)> {
    match Pass::parse_list(list, max_unroll) {
        Ok(ps) if !ps.is_empty() => Ok(ps),
        Ok(_) => Err((MccStatus::InvalidArgument, "empty pass list".into())),
        Err(e) => Err((MccStatus::InvalidArgument, e)),
    }
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn mcc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn mcc_status_str(status: MccStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        MccStatus::Ok => b"ok\0",
        MccStatus::NullArgument => b"null argument\0",
        MccStatus::InvalidUtf8 => b"invalid UTF-8\0",
        MccStatus::ParseError => b"parse error\0",
        MccStatus::InvalidArgument => b"invalid argument\0",
        MccStatus::OracleExhausted => b"oracle exhausted\0",
        MccStatus::Violation => b"preservation violated\0",
        MccStatus::Internal => b"internal error\0",
    };
    s.as_ptr().cast()
}

/// Parses and validates program text.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mcc_program_parse(text: *const c_char, out: *mut *mut MccProgram) -> MccStatus {
    guarded(|| {
        out_arg(out, "out")?;
        let text = str_arg(text, "text")?;
        let program = parse_program(text).map_err(|e| (MccStatus::ParseError, e.to_string()))?;
        *out = Box::into_raw(Box::new(MccProgram { program }));
        Ok(MccStatus::Ok)
    })
}

/// Releases a program. Null is ignored.
///
/// # Safety
/// `p` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mcc_program_free(p: *mut MccProgram) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Pretty-printed program text.
///
/// # Safety
/// `p` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mcc_program_to_string(p: *const MccProgram, out: *mut *mut c_char) -> MccStatus {
    guarded(|| {
        out_arg(out, "out")?;
        *out = to_c(program_arg(p, "program")?.to_string());
        Ok(MccStatus::Ok)
    })
}

/// Runs a program and writes the same JSON record as `minicminor run --json`.
///
/// # Safety
/// `p` must be a live handle, `oracle` a NUL-terminated spec such as
/// `const:0`, and `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn mcc_run_json(
    p: *const MccProgram,
    semantics: MccSemantics,
    fuel: u64,
    oracle: *const c_char,
    out_json: *mut *mut c_char,
) -> MccStatus {
    guarded(|| {
        out_arg(out_json, "out_json")?;
        let program = program_arg(p, "program")?;
        let mode = oracle_arg(str_arg(oracle, "oracle")?)?;
        let sem = match semantics {
            MccSemantics::Small => Semantics::Small,
            MccSemantics::Big => Semantics::Big,
        };
        let v = run_report(program, sem, &mode, fuel).map_err(|e| (MccStatus::OracleExhausted, e.to_string()))?;
        *out_json = to_c(v.to_string());
        Ok(MccStatus::Ok)
    })
}

/// Applies a comma-separated pass list and returns a new program handle.
///
/// # Safety
/// `p` must be a live handle, `passes` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mcc_transform(
    p: *const MccProgram,
    passes: *const c_char,
    max_unroll: u32,
    out: *mut *mut MccProgram,
) -> MccStatus {
    guarded(|| {
        out_arg(out, "out")?;
        let program = program_arg(p, "program")?;
        let ps = passes_arg(str_arg(passes, "passes")?, max_unroll)?;
        let run = run_pipeline(&ps, program);
        *out = Box::into_raw(Box::new(MccProgram { program: run.program }));
        Ok(MccStatus::Ok)
    })
}

/// Forward, backward and equivalence verdicts for a pass list, as JSON.
/// Returns `Violation` (with the JSON still written) when forward or
/// backward preservation fails.
///
/// # Safety
/// `p` must be a live handle, `passes` NUL-terminated, `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn mcc_diff_json(
    p: *const MccProgram,
    passes: *const c_char,
    max_unroll: u32,
    fuel: u64,
    oracles: usize,
    seed: u64,
    out_json: *mut *mut c_char,
) -> MccStatus {
    guarded(|| {
        out_arg(out_json, "out_json")?;
        let program = program_arg(p, "program")?;
        let ps = passes_arg(str_arg(passes, "passes")?, max_unroll)?;
        if oracles == 0 {
            return Err((MccStatus::InvalidArgument, "need at least one oracle".into()));
        }
        let (v, ok) = diff_report(program, &ps, &oracle_set(seed, oracles), fuel);
        *out_json = to_c(v.to_string());
        Ok(if ok { MccStatus::Ok } else { MccStatus::Violation })
    })
}

/// Differential-tests one pass on `count` generated programs and writes the
/// report as JSON. Returns `Violation` when any case failed.
///
/// # Safety
/// `pass` must be NUL-terminated and `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn mcc_fuzz_json(
    pass: *const c_char,
    count: usize,
    seed: u64,
    fuel: u64,
    oracles: usize,
    max_unroll: u32,
    out_json: *mut *mut c_char,
) -> MccStatus {
    guarded(|| {
        out_arg(out_json, "out_json")?;
        let name = str_arg(pass, "pass")?;
        let pass = Pass::by_name(name, max_unroll)
            .ok_or_else(|| (MccStatus::InvalidArgument, format!("unknown pass `{name}`")))?;
        if oracles == 0 {
            return Err((MccStatus::InvalidArgument, "need at least one oracle".into()));
        }
        let opts = FuzzOptions {
            max_unroll,
            ..FuzzOptions::new(oracles, fuel)
        };
        let cfg = GenConfig {
            seed,
            ..GenConfig::default()
        };
        let r = fuzz_pass_with(&pass, &cfg, count, &opts);
        *out_json = to_c(r.to_json().to_string());
        Ok(if r.cases_failed == 0 { MccStatus::Ok } else { MccStatus::Violation })
    })
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mcc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
