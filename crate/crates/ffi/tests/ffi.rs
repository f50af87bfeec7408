use std::ffi::{CStr, CString};
use std::ptr;

use logical_induction_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(li_last_error()).to_string_lossy().into_owned() }
}

const SCENARIO: &str = "horizon = 10\n[[deduction.stream]]\nfamily = \"t_{n}\"\ndelay = \"2*n\"\n\
                        [[trader]]\nkind = \"theorem_buyer\"\nfamily = \"t_{n}\"\n\
                        [experiment.provability]\nwindow = [8, 10]\n";

#[test]
fn sentence_round_trip() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(li_sentence_parse(c("a -> b -> c").as_ptr(), &mut s), LiStatus::LiOk);
        let mut needed = 0;
        assert_eq!(
            li_sentence_render(s, ptr::null_mut(), 0, &mut needed),
            LiStatus::LiBufferTooSmall
        );
        let mut buf = vec![0 as std::ffi::c_char; needed];
        assert_eq!(
            li_sentence_render(s, buf.as_mut_ptr(), buf.len(), &mut needed),
            LiStatus::LiOk
        );
        assert_eq!(CStr::from_ptr(buf.as_ptr()).to_str().unwrap(), "(a -> (b -> c))");
        li_sentence_free(s);

        assert_eq!(li_sentence_parse(c("a & | b").as_ptr(), &mut s), LiStatus::LiParseError);
        assert!(last_error().contains('|'));
        assert_eq!(li_sentence_parse(ptr::null(), &mut s), LiStatus::LiNullArgument);
    }
}

#[test]
fn run_price_and_evaluate() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(li_scenario_parse(c(SCENARIO).as_ptr(), &mut s), LiStatus::LiOk);
        let mut t = ptr::null_mut();
        assert_eq!(li_scenario_run(s, &mut t), LiStatus::LiOk);
        let mut h = 0;
        assert_eq!(li_trace_horizon(t, &mut h), LiStatus::LiOk);
        assert_eq!(h, 10);

        let mut buf = [0 as std::ffi::c_char; 32];
        let mut needed = 0;
        assert_eq!(
            li_trace_price(t, 10, c("t_10").as_ptr(), buf.as_mut_ptr(), buf.len(), &mut needed),
            LiStatus::LiOk
        );
        assert_eq!(CStr::from_ptr(buf.as_ptr()).to_str().unwrap(), "63/64");
        assert_eq!(
            li_trace_price(t, 11, c("t_10").as_ptr(), buf.as_mut_ptr(), buf.len(), &mut needed),
            LiStatus::LiOutOfRange
        );

        let mut passed = -1;
        assert_eq!(
            li_experiment_evaluate(
                s,
                t,
                c("provability").as_ptr(),
                &mut passed,
                ptr::null_mut(),
                0,
                ptr::null_mut()
            ),
            LiStatus::LiOk
        );
        assert_eq!(passed, 1);
        assert_eq!(
            li_experiment_evaluate(
                s,
                t,
                c("nonsense").as_ptr(),
                &mut passed,
                ptr::null_mut(),
                0,
                ptr::null_mut()
            ),
            LiStatus::LiConfigError
        );

        let dir = tempfile::tempdir().unwrap();
        let trace_path = c(dir.path().join("t.csv").to_str().unwrap());
        let cert_path = c(dir.path().join("c.csv").to_str().unwrap());
        assert_eq!(
            li_trace_write(t, trace_path.as_ptr(), cert_path.as_ptr()),
            LiStatus::LiOk
        );
        let csv = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
        assert!(csv.starts_with("day,sentence,price_num,price_den\n"));

        li_trace_free(t);
        li_scenario_free(s);
    }
}

#[test]
fn bad_scenarios_report_config_errors() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(
            li_scenario_parse(c("horizon = 0").as_ptr(), &mut s),
            LiStatus::LiConfigError
        );
        assert!(last_error().contains("horizon"));
        assert_eq!(
            li_scenario_load(c("/nonexistent.toml").as_ptr(), &mut s),
            LiStatus::LiIoError
        );
        li_scenario_free(ptr::null_mut());
        li_trace_free(ptr::null_mut());
    }
}

/// Compiles `tests/smoke.c` against the generated header and static library.
#[test]
fn c_program_links_and_runs() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    let manifest = std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<test> -> target/<profile>
    let profile_dir = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf();
    let lib = profile_dir.join("liblogical_induction_ffi.a");
    if !lib.exists() {
        eprintln!("static library not built at {}; skipping", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = std::process::Command::new(cc)
        .arg(manifest.join("tests/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = std::process::Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "smoke exited with {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "63/64");
}

fn which_cc() -> Result<&'static str, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if std::process::Command::new(cc).arg("--version").output().is_ok() {
            return Ok(cc);
        }
    }
    Err(())
}
