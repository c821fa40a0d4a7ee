//! C interface to the shbsim simulator.
//!
//! Every function returns a [`ShbStatus`]; on failure the message is
//! available from [`shb_last_error_message`] on the same thread. Populations
//! are opaque handles created by [`shb_population_new`] and released with
//! [`shb_population_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use shbsim::config::RunConfig;
use shbsim::econ::{solve_with_prior, threshold_f, MatchEnv, Preferences, ScheduleLabel};
use shbsim::harness::{run, HarnessError};
use shbsim::metrics::{ByGender, CellMetrics, MetricField};
use shbsim::population::{run_scenario_pair, PopulationSpec};
use shbsim::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParams = 2,
    Domain = 3,
    NotDominated = 4,
    Grid = 5,
    Mismatch = 6,
    Config = 7,
    Io = 8,
    /// A metric or result is requested before it exists.
    NotReady = 9,
    UnknownField = 10,
    Panic = 99,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShbScheduleLabel {
    Pooling = 0,
    Separating = 1,
    HireHighOnly = 2,
    HireLowOnly = 3,
    HireNone = 4,
}

impl From<ScheduleLabel> for ShbScheduleLabel {
    fn from(l: ScheduleLabel) -> Self {
        match l {
            ScheduleLabel::Pooling => ShbScheduleLabel::Pooling,
            ScheduleLabel::Separating => ShbScheduleLabel::Separating,
            ScheduleLabel::HireHighOnly => ShbScheduleLabel::HireHighOnly,
            ScheduleLabel::HireLowOnly => ShbScheduleLabel::HireLowOnly,
            ScheduleLabel::HireNone => ShbScheduleLabel::HireNone,
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShbStage {
    Pre = 0,
    Post = 1,
    Delta = 2,
}

/// A single two-type match.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct ShbTwoTypeParams {
    pub eta: f64,
    pub w_low: f64,
    pub w_high: f64,
    pub z: f64,
    pub c: f64,
    pub z_new: f64,
    /// Cost of disclosing.
    pub c_disclose: f64,
    /// Cost of withholding under the enquiry status of interest.
    pub c_withhold: f64,
    /// Firm's probability of facing a low earner.
    pub f_low: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct ShbWageSchedule {
    pub w_nondisclose: f64,
    pub w_disclose_low: f64,
    pub w_disclose_high: f64,
    pub label: ShbScheduleLabel,
    pub expected_profit: f64,
}

/// Opaque population handle.
pub struct ShbPopulation {
    spec: PopulationSpec,
    metrics: Option<CellMetrics>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: ShbStatus, msg: impl Into<String>) -> ShbStatus {
    set_error(msg.into());
    status
}

fn model_error(e: &Error) -> ShbStatus {
    let status = match e {
        Error::Domain(_) => ShbStatus::Domain,
        Error::InvalidParams(_) => ShbStatus::InvalidParams,
        Error::NotDominated(_) => ShbStatus::NotDominated,
        Error::Grid(_) => ShbStatus::Grid,
        Error::Mismatch(_) => ShbStatus::Mismatch,
    };
    fail(status, e.to_string())
}

fn guarded(f: impl FnOnce() -> ShbStatus) -> ShbStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            fail(ShbStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn shb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static, NUL-terminated name of a status code.
#[no_mangle]
pub extern "C" fn shb_status_name(status: ShbStatus) -> *const c_char {
    let s: &'static CStr = match status {
        ShbStatus::Ok => c"ok",
        ShbStatus::NullPointer => c"null pointer",
        ShbStatus::InvalidParams => c"invalid parameters",
        ShbStatus::Domain => c"domain error",
        ShbStatus::NotDominated => c"costs not ordered by stochastic dominance",
        ShbStatus::Grid => c"grid error",
        ShbStatus::Mismatch => c"scenario mismatch",
        ShbStatus::Config => c"configuration error",
        ShbStatus::Io => c"i/o error",
        ShbStatus::NotReady => c"not ready",
        ShbStatus::UnknownField => c"unknown field",
        ShbStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

fn two_type_parts(p: &ShbTwoTypeParams) -> Result<(Preferences, MatchEnv), ShbStatus> {
    let prefs = Preferences::new(p.eta).map_err(|e| model_error(&e))?;
    let env = MatchEnv::new(p.z, p.c, p.z_new, p.w_low, p.w_high).map_err(|e| model_error(&e))?;
    Ok((prefs, env))
}

/// Profit-maximizing schedule of the two-type game.
///
/// # Safety
/// `params` must point to a readable `ShbTwoTypeParams` and `out` to a
/// writable `ShbWageSchedule`.
#[no_mangle]
pub unsafe extern "C" fn shb_two_type_solve(params: *const ShbTwoTypeParams, out: *mut ShbWageSchedule) -> ShbStatus {
    guarded(|| {
        if params.is_null() || out.is_null() {
            return fail(ShbStatus::NullPointer, "params and out must be non-null");
        }
        // SAFETY: non-null and valid per the caller contract
        let p = unsafe { &*params };
        let (prefs, env) = match two_type_parts(p) {
            Ok(x) => x,
            Err(s) => return s,
        };
        match solve_with_prior(&prefs, &env, p.f_low, p.c_disclose, p.c_withhold) {
            Ok(m) => {
                let s = m.schedule;
                // SAFETY: as above
                unsafe {
                    *out = ShbWageSchedule {
                        w_nondisclose: s.w_nondisclose,
                        w_disclose_low: s.w_disclose_low,
                        w_disclose_high: s.w_disclose_high,
                        label: s.label.into(),
                        expected_profit: m.profit,
                    };
                }
                ShbStatus::Ok
            }
            Err(e) => model_error(&e),
        }
    })
}

/// Low-earner share above which separating beats pooling. `f_low` is
/// ignored. `degenerate` is set when the two menus never differ.
///
/// # Safety
/// `params` must be readable; `threshold` and `degenerate` writable.
#[no_mangle]
pub unsafe extern "C" fn shb_threshold(
    params: *const ShbTwoTypeParams,
    threshold: *mut f64,
    degenerate: *mut bool,
) -> ShbStatus {
    guarded(|| {
        if params.is_null() || threshold.is_null() || degenerate.is_null() {
            return fail(ShbStatus::NullPointer, "arguments must be non-null");
        }
        // SAFETY: caller contract
        let p = unsafe { &*params };
        let (prefs, env) = match two_type_parts(p) {
            Ok(x) => x,
            Err(s) => return s,
        };
        match threshold_f(&prefs, &env, p.c_disclose, p.c_withhold) {
            Ok(t) => {
                // SAFETY: caller contract
                unsafe {
                    *threshold = t.value;
                    *degenerate = t.degenerate;
                }
                ShbStatus::Ok
            }
            Err(e) => model_error(&e),
        }
    })
}

/// New population with default parameters. Returns NULL only on panic.
#[no_mangle]
pub extern "C" fn shb_population_new() -> *mut ShbPopulation {
    catch_unwind(|| Box::into_raw(Box::new(ShbPopulation { spec: PopulationSpec::default(), metrics: None })))
        .unwrap_or(ptr::null_mut())
}

/// # Safety
/// `pop` must come from [`shb_population_new`] and not be used afterwards.
/// NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn shb_population_free(pop: *mut ShbPopulation) {
    if !pop.is_null() {
        // SAFETY: allocated by shb_population_new, freed once
        drop(unsafe { Box::from_raw(pop) });
    }
}

/// Callers are `unsafe` entry points whose contract makes `pop` a live handle.
fn with_pop(pop: *mut ShbPopulation, f: impl FnOnce(&mut ShbPopulation) -> ShbStatus) -> ShbStatus {
    guarded(|| {
        if pop.is_null() {
            return fail(ShbStatus::NullPointer, "population handle is null");
        }
        // SAFETY: live handle per the caller contract
        f(unsafe { &mut *pop })
    })
}

/// Sets the low-earner shares; clears any previous result.
///
/// # Safety
/// `pop` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn shb_population_set_f_low(pop: *mut ShbPopulation, female: f64, male: f64) -> ShbStatus {
    with_pop(pop, |p| {
        p.spec.f_low = ByGender::new(female, male);
        p.metrics = None;
        ShbStatus::Ok
    })
}

/// # Safety
/// `pop` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn shb_population_set_size(pop: *mut ShbPopulation, n_per_gender: usize, seed: u64) -> ShbStatus {
    with_pop(pop, |p| {
        p.spec.n_per_gender = n_per_gender;
        p.spec.seed = seed;
        p.metrics = None;
        ShbStatus::Ok
    })
}

/// Simulates both scenarios and keeps their metrics on the handle.
///
/// # Safety
/// `pop` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn shb_population_run(pop: *mut ShbPopulation) -> ShbStatus {
    with_pop(pop, |p| {
        if let Err(e) = p.spec.validate() {
            return model_error(&e);
        }
        match run_scenario_pair(&p.spec).and_then(|pair| pair.metrics()) {
            Ok(m) => {
                p.metrics = Some(m);
                ShbStatus::Ok
            }
            Err(e) => model_error(&e),
        }
    })
}

/// Reads one metric, by CSV column name without the stage prefix (for
/// example `"female_premium"`). `defined` is false for undefined metrics.
///
/// # Safety
/// `pop` must be a live handle, `field` a NUL-terminated string, and
/// `value` and `defined` writable.
#[no_mangle]
pub unsafe extern "C" fn shb_population_metric(
    pop: *mut ShbPopulation,
    stage: ShbStage,
    field: *const c_char,
    value: *mut f64,
    defined: *mut bool,
) -> ShbStatus {
    with_pop(pop, |p| {
        if field.is_null() || value.is_null() || defined.is_null() {
            return fail(ShbStatus::NullPointer, "field, value and defined must be non-null");
        }
        // SAFETY: caller contract
        let name = unsafe { CStr::from_ptr(field) }.to_string_lossy();
        let Some(f) = MetricField::from_name(&name) else {
            return fail(ShbStatus::UnknownField, format!("unknown metric `{name}`"));
        };
        let Some(m) = &p.metrics else {
            return fail(ShbStatus::NotReady, "call shb_population_run first");
        };
        let v = match stage {
            ShbStage::Pre => m.pre.get(f),
            ShbStage::Post => m.post.get(f),
            ShbStage::Delta => m.delta.get(f),
        };
        // SAFETY: caller contract
        unsafe {
            *value = v.unwrap_or(f64::NAN);
            *defined = v.is_some();
        }
        ShbStatus::Ok
    })
}

/// Writes the six observation flags of the last run into `out[0..6]`.
///
/// # Safety
/// `pop` must be a live handle and `out` writable for six `bool`s.
#[no_mangle]
pub unsafe extern "C" fn shb_population_observations(pop: *mut ShbPopulation, out: *mut bool) -> ShbStatus {
    with_pop(pop, |p| {
        if out.is_null() {
            return fail(ShbStatus::NullPointer, "out is null");
        }
        let Some(m) = &p.metrics else {
            return fail(ShbStatus::NotReady, "call shb_population_run first");
        };
        // SAFETY: caller provides six writable slots
        unsafe { ptr::copy_nonoverlapping(m.observations.0.as_ptr(), out, 6) };
        ShbStatus::Ok
    })
}

/// Runs a TOML configuration (or manifest) and writes its artifacts into
/// `out_dir`. A failed proposition check returns `Ok` with `checks_failed`
/// set.
///
/// # Safety
/// `config_path` and `out_dir` must be NUL-terminated strings and
/// `checks_failed` writable.
#[no_mangle]
pub unsafe extern "C" fn shb_run_config(
    config_path: *const c_char,
    out_dir: *const c_char,
    checks_failed: *mut bool,
) -> ShbStatus {
    guarded(|| {
        if config_path.is_null() || out_dir.is_null() || checks_failed.is_null() {
            return fail(ShbStatus::NullPointer, "arguments must be non-null");
        }
        // SAFETY: caller contract
        let (cfg_path, out) = unsafe { (CStr::from_ptr(config_path), CStr::from_ptr(out_dir)) };
        let cfg = match RunConfig::load(Path::new(&*cfg_path.to_string_lossy())) {
            Ok(c) => c,
            Err(e) => return fail(ShbStatus::Config, e.to_string()),
        };
        match run(&cfg, Path::new(&*out.to_string_lossy()), false) {
            Ok(summary) => {
                // SAFETY: caller contract
                unsafe { *checks_failed = summary.checks_passed == Some(false) };
                ShbStatus::Ok
            }
            Err(HarnessError::Model(e)) => model_error(&e),
            Err(e @ HarnessError::Config(_)) => fail(ShbStatus::Config, e.to_string()),
            Err(e) => fail(ShbStatus::Io, e.to_string()),
        }
    })
}
