//! C ABI for `semifin`.
//!
//! Handles are opaque and owned by the caller once returned; free them with
//! the matching `*_free` function. Strings returned by this library are
//! released with [`semifin_string_free`]. Functions returning `int32_t` use
//! the CLI exit codes (`SEMIFIN_OK` through `SEMIFIN_ERR_INTERNAL`) or one of
//! the negative ABI error codes. After a failure, [`semifin_last_error`]
//! describes it.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use semifin::certificate::VerdictDoc;
use semifin::job::{self, Command, JobReport, LimitOverrides, RunOptions};

pub const SEMIFIN_OK: i32 = 0;
pub const SEMIFIN_ERR_INPUT: i32 = 1;
pub const SEMIFIN_WITNESS: i32 = 2;
pub const SEMIFIN_INCONCLUSIVE: i32 = 3;
pub const SEMIFIN_INVALID_CERTIFICATE: i32 = 4;
pub const SEMIFIN_ERR_INTERNAL: i32 = 5;
pub const SEMIFIN_ERR_NULL: i32 = -1;
pub const SEMIFIN_ERR_UTF8: i32 = -2;
pub const SEMIFIN_ERR_COMMAND: i32 = -3;
pub const SEMIFIN_ERR_PANIC: i32 = -4;

pub const SEMIFIN_VERDICT_NONE: i32 = -1;
pub const SEMIFIN_VERDICT_FINITE: i32 = 0;
pub const SEMIFIN_VERDICT_WITNESS: i32 = 1;
pub const SEMIFIN_VERDICT_INCONCLUSIVE: i32 = 2;

/// A parsed job document with optional limit overrides.
pub struct SemifinJob {
    text: String,
    overrides: LimitOverrides,
}

/// The report of one command run.
pub struct SemifinReport {
    report: JobReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(CString::new(msg).expect("no interior nul")));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// # Safety
/// `s` must be null or a valid nul-terminated string.
unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, i32> {
    if s.is_null() {
        set_error(format!("{what} is null"));
        return Err(SEMIFIN_ERR_NULL);
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error(format!("{what} is not UTF-8"));
        SEMIFIN_ERR_UTF8
    })
}

fn guard<T>(fallback: T, f: impl FnOnce() -> T) -> T {
    clear_error();
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| {
        set_error("panic inside semifin");
        fallback
    })
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("no interior nul").into_raw()
}

fn execute(command: Command, text: &str, overrides: LimitOverrides) -> Result<JobReport, i32> {
    let opts = RunOptions {
        overrides,
        cache: None,
    };
    match job::run(command, text, &opts) {
        Ok(o) => Ok(o.report),
        Err(e) => {
            set_error(e.to_string());
            Err(e.exit_code())
        }
    }
}

/// Parse and validate a job document. Returns null on failure.
///
/// # Safety
/// `json` must be null or a valid nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn semifin_job_parse(json: *const c_char) -> *mut SemifinJob {
    guard(ptr::null_mut(), || {
        let Ok(text) = read_str(json, "json") else { return ptr::null_mut() };
        match job::parse_input(text).and_then(|i| job::prepare(&i)) {
            Ok(_) => Box::into_raw(Box::new(SemifinJob {
                text: text.to_owned(),
                overrides: LimitOverrides::default(),
            })),
            Err(e) => {
                set_error(e.to_string());
                ptr::null_mut()
            }
        }
    })
}

/// Override limits for later runs of `job`; zero keeps the current value.
///
/// # Safety
/// `job` must be null or a handle from [`semifin_job_parse`].
#[no_mangle]
pub unsafe extern "C" fn semifin_job_set_limits(
    job: *mut SemifinJob,
    max_elements: u64,
    max_steps: u64,
    cap_powers: u64,
) -> i32 {
    guard(SEMIFIN_ERR_PANIC, || {
        let Some(job) = job.as_mut() else {
            set_error("job is null");
            return SEMIFIN_ERR_NULL;
        };
        let nz = |v: u64| (v != 0).then_some(v);
        job.overrides = LimitOverrides {
            max_elements: nz(max_elements).map(|v| v as usize).or(job.overrides.max_elements),
            max_steps: nz(max_steps).or(job.overrides.max_steps),
            cap_powers: nz(cap_powers).or(job.overrides.cap_powers),
        };
        SEMIFIN_OK
    })
}

/// # Safety
/// `job` must be null or a handle from [`semifin_job_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn semifin_job_free(job: *mut SemifinJob) {
    if !job.is_null() {
        drop(Box::from_raw(job));
    }
}

/// Run `command` ("check", "closure", "triangularize", "kernelcat",
/// "kleene") on a job. On success `*out` receives a report handle and the
/// report's exit code is returned.
///
/// # Safety
/// `job` must be a live job handle, `command` a nul-terminated string and
/// `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn semifin_run(
    job: *const SemifinJob,
    command: *const c_char,
    out: *mut *mut SemifinReport,
) -> i32 {
    guard(SEMIFIN_ERR_PANIC, || {
        if out.is_null() {
            set_error("out is null");
            return SEMIFIN_ERR_NULL;
        }
        *out = ptr::null_mut();
        let Some(job) = job.as_ref() else {
            set_error("job is null");
            return SEMIFIN_ERR_NULL;
        };
        let name = match read_str(command, "command") {
            Ok(s) => s,
            Err(code) => return code,
        };
        let Some(cmd) = Command::from_name(name).filter(|&c| c != Command::Verify) else {
            set_error(format!("unknown command {name:?}"));
            return SEMIFIN_ERR_COMMAND;
        };
        match execute(cmd, &job.text, job.overrides) {
            Ok(report) => {
                let code = report.exit_code;
                *out = Box::into_raw(Box::new(SemifinReport { report }));
                code
            }
            Err(code) => code,
        }
    })
}

/// Shorthand for [`semifin_run`] with "check".
///
/// # Safety
/// As for [`semifin_run`].
#[no_mangle]
pub unsafe extern "C" fn semifin_check(job: *const SemifinJob, out: *mut *mut SemifinReport) -> i32 {
    semifin_run(job, c"check".as_ptr(), out)
}

/// Exit code recorded in the report.
///
/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn semifin_report_status(report: *const SemifinReport) -> i32 {
    match report.as_ref() {
        Some(r) => r.report.exit_code,
        None => SEMIFIN_ERR_NULL,
    }
}

/// One of the `SEMIFIN_VERDICT_*` codes.
///
/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn semifin_report_verdict(report: *const SemifinReport) -> i32 {
    match report.as_ref().and_then(|r| job::report_verdict(&r.report)) {
        Some(VerdictDoc::Finite { .. }) => SEMIFIN_VERDICT_FINITE,
        Some(VerdictDoc::NonPeriodicWitness { .. }) => SEMIFIN_VERDICT_WITNESS,
        Some(VerdictDoc::Inconclusive { .. }) => SEMIFIN_VERDICT_INCONCLUSIVE,
        None => SEMIFIN_VERDICT_NONE,
    }
}

/// Order of the monoid for a finite verdict or a completed closure, else 0.
///
/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn semifin_report_order(report: *const SemifinReport) -> u64 {
    let Some(r) = report.as_ref() else { return 0 };
    match job::report_verdict(&r.report) {
        Some(VerdictDoc::Finite { order }) => order as u64,
        Some(_) => 0,
        None => r.report.payload.get("order").and_then(|v| v.as_u64()).unwrap_or(0),
    }
}

/// The report as JSON; free with [`semifin_string_free`].
///
/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn semifin_report_json(report: *const SemifinReport) -> *mut c_char {
    match report.as_ref() {
        Some(r) => into_c_string(r.report.to_json()),
        None => {
            set_error("report is null");
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `report` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn semifin_report_free(report: *mut SemifinReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Re-check a certificate, or a check report containing one. Returns
/// `SEMIFIN_OK` when every assertion holds, `SEMIFIN_INVALID_CERTIFICATE`
/// otherwise.
///
/// # Safety
/// `json` must be null or a valid nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn semifin_verify_certificate(json: *const c_char) -> i32 {
    guard(SEMIFIN_ERR_PANIC, || {
        let text = match read_str(json, "json") {
            Ok(s) => s,
            Err(code) => return code,
        };
        match execute(Command::Verify, text, LimitOverrides::default()) {
            Ok(report) => {
                if let Some(f) = report.payload.get("failures").and_then(|f| f.as_array()).and_then(|f| f.first()) {
                    set_error(f.as_str().unwrap_or_default());
                }
                report.exit_code
            }
            Err(code) => code,
        }
    })
}

/// Run any command on a job document in one call. `*out` receives the report
/// JSON (free with [`semifin_string_free`]) or null on error.
///
/// # Safety
/// `command` and `input` must be nul-terminated strings, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn semifin_run_json(command: *const c_char, input: *const c_char, out: *mut *mut c_char) -> i32 {
    guard(SEMIFIN_ERR_PANIC, || {
        if out.is_null() {
            set_error("out is null");
            return SEMIFIN_ERR_NULL;
        }
        *out = ptr::null_mut();
        let (name, text) = match (read_str(command, "command"), read_str(input, "input")) {
            (Ok(c), Ok(i)) => (c, i),
            (Err(code), _) | (_, Err(code)) => return code,
        };
        let Some(cmd) = Command::from_name(name) else {
            set_error(format!("unknown command {name:?}"));
            return SEMIFIN_ERR_COMMAND;
        };
        match execute(cmd, text, LimitOverrides::default()) {
            Ok(report) => {
                *out = into_c_string(report.to_json());
                report.exit_code
            }
            Err(code) => code,
        }
    })
}

/// Message for the most recent failure on this thread, or null. Valid until
/// the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn semifin_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn semifin_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
