use std::ffi::{c_char, CStr, CString};
use std::ptr;

use univoque_ffi::*;

fn last_error() -> String {
    let p = uv_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn builtin(name: &str) -> *mut UvAnalysis {
    let name = CString::new(name).unwrap();
    let mut a = ptr::null_mut();
    assert_eq!(unsafe { uv_analysis_from_builtin(name.as_ptr(), &mut a) }, UvStatus::Ok);
    assert!(!a.is_null());
    a
}

fn render(a: *const UvAnalysis, format: UvFormat) -> String {
    let mut out: *mut c_char = ptr::null_mut();
    assert_eq!(unsafe { uv_analysis_render(a, format, &mut out) }, UvStatus::Ok);
    let text = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_string();
    unsafe { uv_string_free(out) };
    text
}

#[test]
fn ex4_through_the_c_interface() {
    let a = builtin("ex4");
    let mut dims = UvDimensions::default();
    assert_eq!(unsafe { uv_analysis_dimensions(a, &mut dims) }, UvStatus::Ok);
    assert!(dims.has_s_exact && dims.automaton_closed && !dims.partial);
    assert!((dims.s_best - 0.73003).abs() < 1e-5);
    assert!(dims.has_spectral && dims.spectral_lower <= 2.2775 && dims.spectral_upper >= 2.2774);
    assert!(dims.has_dv_upper && dims.dv_upper < dims.s_best);

    let mut verdict = UvVerdict::Inconclusive;
    assert_eq!(unsafe { uv_analysis_verdict(a, &mut verdict) }, UvStatus::Ok);
    assert_eq!(verdict, UvVerdict::EqualityCertified);

    let depth = unsafe { uv_analysis_depth(a) };
    assert_eq!(depth, 12);
    let mut s = vec![0u64; 16];
    let mut t = vec![0u64; 16];
    let mut written = 0usize;
    let status =
        unsafe { uv_analysis_level_counts(a, s.as_mut_ptr(), t.as_mut_ptr(), ptr::null_mut(), s.len(), &mut written) };
    assert_eq!(status, UvStatus::Ok);
    assert_eq!(written, 12);
    assert_eq!(&s[..6], &[1, 1, 2, 4, 9, 21]);
    assert_eq!(&t[..3], &[2, 5, 11]);

    let json = render(a, UvFormat::Json);
    assert!(json.contains("\"spectral_radius\""));
    assert!(render(a, UvFormat::CsvCounts).starts_with("k,S,T,N\n1,1,"));
    assert!(render(a, UvFormat::Markdown).contains("0.73003"));
    unsafe { uv_analysis_free(a) };
}

#[test]
fn json_config_round_trip() {
    let cfg = CString::new(
        r#"{"dimension":1,"maps":[{"ratio":"1/3","translation":["0"]},{"ratio":"1/3","translation":["2/3"]}]}"#,
    )
    .unwrap();
    let mut a = ptr::null_mut();
    assert_eq!(unsafe { uv_analysis_from_json(cfg.as_ptr(), &mut a) }, UvStatus::Ok);
    let mut dims = UvDimensions::default();
    assert_eq!(unsafe { uv_analysis_dimensions(a, &mut dims) }, UvStatus::Ok);
    assert!((dims.s_best - 2f64.ln() / 3f64.ln()).abs() < 1e-6);
    unsafe { uv_analysis_free(a) };
}

#[test]
fn error_statuses() {
    let mut a = ptr::null_mut();
    let bad = CString::new("{\"dimension\":1,\"maps\":[]").unwrap();
    assert_eq!(unsafe { uv_analysis_from_json(bad.as_ptr(), &mut a) }, UvStatus::Config);
    assert!(a.is_null());
    assert!(!last_error().is_empty());

    let not_invariant = CString::new(
        r#"{"dimension":1,"maps":[{"ratio":"1/3","translation":["0"]},{"ratio":"1/3","translation":["2/3"]}],
            "invariant_box":{"lo":["0"],"hi":["1/2"]}}"#,
    )
    .unwrap();
    assert_eq!(unsafe { uv_analysis_from_json(not_invariant.as_ptr(), &mut a) }, UvStatus::InvariantBox);

    let unknown = CString::new("ex9").unwrap();
    assert_eq!(unsafe { uv_analysis_from_builtin(unknown.as_ptr(), &mut a) }, UvStatus::Config);
    assert!(last_error().contains("ex9"));

    assert_eq!(unsafe { uv_analysis_from_builtin(ptr::null(), &mut a) }, UvStatus::NullPointer);
    let name = CString::new("ex1").unwrap();
    assert_eq!(unsafe { uv_analysis_from_builtin(name.as_ptr(), ptr::null_mut()) }, UvStatus::NullPointer);
    let mut dims = UvDimensions::default();
    assert_eq!(unsafe { uv_analysis_dimensions(ptr::null(), &mut dims) }, UvStatus::NullPointer);
    assert_eq!(unsafe { uv_analysis_depth(ptr::null()) }, 0);

    let invalid = [0xffu8, 0xfe, 0];
    assert_eq!(unsafe { uv_analysis_from_builtin(invalid.as_ptr().cast(), &mut a) }, UvStatus::InvalidUtf8);

    // a successful call clears the message
    unsafe { uv_analysis_free(builtin("cantor")) };
    assert!(uv_last_error_message().is_null());
    unsafe { uv_analysis_free(ptr::null_mut()) };
    unsafe { uv_string_free(ptr::null_mut()) };
}

#[test]
fn verify_builtin_counts_checks() {
    let name = CString::new("ex4").unwrap();
    let (mut passed, mut total) = (0u32, 0u32);
    assert_eq!(unsafe { uv_verify_builtin(name.as_ptr(), &mut passed, &mut total) }, UvStatus::Ok);
    assert!(total > 0);
    assert_eq!(passed, total);
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(uv_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

/// Compiles a C program against the generated header and the static library.
#[test]
fn c_program_links_and_runs() {
    let Some(cc) =
        ["cc", "gcc", "clang"].into_iter().find(|c| std::process::Command::new(c).arg("--version").output().is_ok())
    else {
        eprintln!("no C compiler; skipped");
        return;
    };
    let manifest = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<test binary>
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libunivoque_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipped", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let out = std::process::Command::new(cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = std::process::Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}: {}", run.status.code(), String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("s=0.73003 levels=12"));
}
