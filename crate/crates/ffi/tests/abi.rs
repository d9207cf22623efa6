use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use semifin_ffi::*;

const S3: &str = r#"{"field": {"kind": "rationals"}, "n": 3, "generators": [
    [["0","1","0"],["1","0","0"],["0","0","1"]],
    [["0","0","1"],["1","0","0"],["0","1","0"]]]}"#;
const UNIPOTENT: &str = r#"{"field": {"kind": "rationals"}, "n": 2, "generators": [[["1","1"],["0","1"]]]}"#;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> Option<String> {
    let p = semifin_last_error();
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
}

unsafe fn take_string(p: *mut std::ffi::c_char) -> String {
    let s = CStr::from_ptr(p).to_str().unwrap().to_owned();
    semifin_string_free(p);
    s
}

#[test]
fn check_finite_group() {
    unsafe {
        let job = semifin_job_parse(c(S3).as_ptr());
        assert!(!job.is_null());
        let mut report = ptr::null_mut();
        assert_eq!(semifin_check(job, &mut report), SEMIFIN_OK);
        assert_eq!(semifin_report_status(report), SEMIFIN_OK);
        assert_eq!(semifin_report_verdict(report), SEMIFIN_VERDICT_FINITE);
        assert_eq!(semifin_report_order(report), 6);

        let json = take_string(semifin_report_json(report));
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let cert = serde_json::to_string(&v["payload"]["certificate"]).unwrap();
        assert_eq!(semifin_verify_certificate(c(&cert).as_ptr()), SEMIFIN_OK);

        let tampered = cert.replacen("\"order\":6", "\"order\":7", 1);
        assert_ne!(tampered, cert);
        assert_eq!(semifin_verify_certificate(c(&tampered).as_ptr()), SEMIFIN_INVALID_CERTIFICATE);
        assert!(last_error().is_some());

        semifin_report_free(report);
        semifin_job_free(job);
    }
}

#[test]
fn witness_and_limits() {
    unsafe {
        let job = semifin_job_parse(c(UNIPOTENT).as_ptr());
        let mut report = ptr::null_mut();
        assert_eq!(semifin_run(job, c("check").as_ptr(), &mut report), SEMIFIN_WITNESS);
        assert_eq!(semifin_report_verdict(report), SEMIFIN_VERDICT_WITNESS);
        assert_eq!(semifin_report_order(report), 0);
        semifin_report_free(report);

        assert_eq!(semifin_job_set_limits(job, 5, 0, 0), SEMIFIN_OK);
        assert_eq!(semifin_run(job, c("closure").as_ptr(), &mut report), SEMIFIN_INCONCLUSIVE);
        semifin_report_free(report);
        semifin_job_free(job);
    }
}

#[test]
fn closure_order_through_report() {
    unsafe {
        let job = semifin_job_parse(c(S3).as_ptr());
        let mut report = ptr::null_mut();
        assert_eq!(semifin_run(job, c("closure").as_ptr(), &mut report), SEMIFIN_OK);
        assert_eq!(semifin_report_verdict(report), SEMIFIN_VERDICT_NONE);
        assert_eq!(semifin_report_order(report), 6);
        semifin_report_free(report);
        semifin_job_free(job);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        assert!(semifin_job_parse(ptr::null()).is_null());
        assert!(last_error().unwrap().contains("null"));

        assert!(semifin_job_parse(c(r#"{"field": {"kind": "rationals"}, "n": 2, "generators": [[["1"#).as_ptr()).is_null());
        assert!(last_error().unwrap().contains("line 1"));

        let bad = [0x7b_u8, 0xff, 0];
        assert!(semifin_job_parse(bad.as_ptr().cast()).is_null());
        assert!(last_error().unwrap().contains("UTF-8"));

        let job = semifin_job_parse(c(S3).as_ptr());
        let mut report = ptr::null_mut();
        assert_eq!(semifin_run(job, c("frobnicate").as_ptr(), &mut report), SEMIFIN_ERR_COMMAND);
        assert!(report.is_null());
        assert_eq!(semifin_run(job, c("verify").as_ptr(), &mut report), SEMIFIN_ERR_COMMAND);
        assert_eq!(semifin_run(job, c("check").as_ptr(), ptr::null_mut()), SEMIFIN_ERR_NULL);
        assert_eq!(semifin_run(ptr::null(), c("check").as_ptr(), &mut report), SEMIFIN_ERR_NULL);
        assert_eq!(semifin_job_set_limits(ptr::null_mut(), 1, 1, 1), SEMIFIN_ERR_NULL);
        semifin_job_free(job);

        assert_eq!(semifin_report_status(ptr::null()), SEMIFIN_ERR_NULL);
        assert_eq!(semifin_report_verdict(ptr::null()), SEMIFIN_VERDICT_NONE);
        assert!(semifin_report_json(ptr::null()).is_null());
        semifin_report_free(ptr::null_mut());
        semifin_job_free(ptr::null_mut());
        semifin_string_free(ptr::null_mut());
    }
}

#[test]
fn run_json_one_shot() {
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(semifin_run_json(c("triangularize").as_ptr(), c(S3).as_ptr(), &mut out), SEMIFIN_OK);
        let v: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
        assert_eq!(v["payload"]["block_sizes"], serde_json::json!([1, 2]));

        assert_eq!(semifin_run_json(c("check").as_ptr(), c("{}").as_ptr(), &mut out), SEMIFIN_ERR_INPUT);
        assert!(out.is_null());
        assert!(last_error().is_some());
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/semifin.h")).unwrap();
    for name in [
        "semifin_job_parse",
        "semifin_job_set_limits",
        "semifin_job_free",
        "semifin_run",
        "semifin_check",
        "semifin_report_status",
        "semifin_report_verdict",
        "semifin_report_order",
        "semifin_report_json",
        "semifin_report_free",
        "semifin_verify_certificate",
        "semifin_run_json",
        "semifin_last_error",
        "semifin_string_free",
    ] {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
}

/// Compiles `tests/smoke.c` against the static library when a C compiler is
/// around.
#[test]
fn c_smoke() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile_dir.join("libsemifin_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no cc or {} not built", lib.display());
        return;
    }
    let out = std::env::temp_dir().join(format!("semifin_smoke_{}", std::process::id()));
    let status = Command::new("cc")
        .arg(manifest.join("tests/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success(), "cc failed");
    let run = Command::new(&out).output().unwrap();
    let _ = std::fs::remove_file(&out);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "order 6");
}
