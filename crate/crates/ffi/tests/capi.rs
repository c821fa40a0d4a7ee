use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;

use shbsim_ffi::*;

fn params(f_low: f64) -> ShbTwoTypeParams {
    ShbTwoTypeParams {
        eta: 0.5,
        w_low: 1.0,
        w_high: 2.0,
        z: 8.0,
        c: 0.1,
        z_new: 8.0,
        c_disclose: 1.0,
        c_withhold: 0.4,
        f_low,
    }
}

fn last_error() -> String {
    let p = shb_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn two_type_switches_at_threshold() {
    let p = params(0.0);
    let (mut t, mut degenerate) = (0.0, true);
    assert_eq!(unsafe { shb_threshold(&p, &mut t, &mut degenerate) }, ShbStatus::Ok);
    assert!(!degenerate && t > 0.0 && t < 1.0);
    let mut out = ShbWageSchedule {
        w_nondisclose: 0.0,
        w_disclose_low: 0.0,
        w_disclose_high: 0.0,
        label: ShbScheduleLabel::HireNone,
        expected_profit: 0.0,
    };
    assert_eq!(unsafe { shb_two_type_solve(&params(t - 0.01), &mut out) }, ShbStatus::Ok);
    assert_eq!(out.label, ShbScheduleLabel::Pooling);
    assert_eq!(unsafe { shb_two_type_solve(&params(t + 0.01), &mut out) }, ShbStatus::Ok);
    assert_eq!(out.label, ShbScheduleLabel::Separating);
    assert!(shb_last_error_message().is_null());
}

#[test]
fn bad_inputs_report_status_and_message() {
    let mut out = std::mem::MaybeUninit::<ShbWageSchedule>::uninit();
    let bad = ShbTwoTypeParams { w_high: 0.5, ..params(0.5) };
    assert_eq!(unsafe { shb_two_type_solve(&bad, out.as_mut_ptr()) }, ShbStatus::InvalidParams);
    assert!(last_error().contains("w_low"), "{}", last_error());
    assert_eq!(unsafe { shb_two_type_solve(std::ptr::null(), out.as_mut_ptr()) }, ShbStatus::NullPointer);
    let name = unsafe { CStr::from_ptr(shb_status_name(ShbStatus::NullPointer)) };
    assert_eq!(name.to_str().unwrap(), "null pointer");
}

#[test]
fn population_handle_lifecycle() {
    let pop = shb_population_new();
    assert!(!pop.is_null());
    let field = CString::new("female_premium").unwrap();
    let (mut v, mut defined) = (0.0, false);
    unsafe {
        assert_eq!(shb_population_metric(pop, ShbStage::Pre, field.as_ptr(), &mut v, &mut defined), ShbStatus::NotReady);
        assert_eq!(shb_population_set_size(pop, 2000, 7), ShbStatus::Ok);
        assert_eq!(shb_population_set_f_low(pop, 0.45, 0.1), ShbStatus::Ok);
        assert_eq!(shb_population_run(pop), ShbStatus::Ok);
        assert_eq!(shb_population_metric(pop, ShbStage::Delta, field.as_ptr(), &mut v, &mut defined), ShbStatus::Ok);
        assert!(defined && v.is_finite());
        let mut obs = [false; 6];
        assert_eq!(shb_population_observations(pop, obs.as_mut_ptr()), ShbStatus::Ok);
        assert!(obs[1], "asked workers disclose more");
        let nope = CString::new("nope").unwrap();
        assert_eq!(shb_population_metric(pop, ShbStage::Pre, nope.as_ptr(), &mut v, &mut defined), ShbStatus::UnknownField);
        assert_eq!(shb_population_set_f_low(pop, 1.5, 0.1), ShbStatus::Ok);
        assert_eq!(shb_population_run(pop), ShbStatus::InvalidParams);
        shb_population_free(pop);
        shb_population_free(std::ptr::null_mut());
    }
}

#[test]
fn run_config_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "mode = \"two-type\"\n[two_type]\nf_low = 0.9\n").unwrap();
    let out = dir.path().join("out");
    let c = |p: &Path| CString::new(p.to_str().unwrap()).unwrap();
    let mut failed = true;
    let status = unsafe { shb_run_config(c(&cfg).as_ptr(), c(&out).as_ptr(), &mut failed) };
    assert_eq!(status, ShbStatus::Ok, "{}", last_error());
    assert!(!failed);
    assert!(out.join("two_type.json").exists() && out.join("manifest.json").exists());

    std::fs::write(&cfg, "mode = \"two-type\"\nbogus = 1\n").unwrap();
    let status = unsafe { shb_run_config(c(&cfg).as_ptr(), c(&out).as_ptr(), &mut failed) };
    assert_eq!(status, ShbStatus::Config);
    assert!(last_error().contains(":2:"), "{}", last_error());
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/shbsim.h")
}

#[test]
fn header_declares_every_export() {
    let h = std::fs::read_to_string(header()).unwrap();
    for name in [
        "shb_last_error_message",
        "shb_status_name",
        "shb_two_type_solve",
        "shb_threshold",
        "shb_population_new",
        "shb_population_free",
        "shb_population_set_f_low",
        "shb_population_set_size",
        "shb_population_run",
        "shb_population_metric",
        "shb_population_observations",
        "shb_run_config",
        "typedef struct ShbPopulation ShbPopulation;",
    ] {
        assert!(h.contains(name), "missing {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(out) = Command::new("cc").args(["-fsyntax-only", "-std=c11", "-Wall", "-Werror", "-x", "c"]).arg(header()).output()
    else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
