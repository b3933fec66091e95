//! C ABI over `ovf-core`.
//!
//! Every function returns an [`OvfStatus`]; on failure the message is
//! available from [`ovf_last_error`] on the same thread. Handles are opaque
//! and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use ovf_core::actuation::{default_kappa, fold_force_profile, fold_travel};
use ovf_core::fold_geometry::{delta_h, thickness, valley_gap, validate_params};
use ovf_core::harness::net_metrics;
use ovf_core::materials::Catalogue;
use ovf_core::plans::{build_plan, Direction, PlanKind};
use ovf_core::sim::{run_plan_partial, Scenario, TrajectoryLog};
use ovf_core::{Error, FoldParameters, FrictionMode};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OvfStatus {
    Ok = 0,
    NullPointer = 1,
    Validation = 2,
    Jam = 3,
    Io = 4,
    Parse = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OvfMode {
    Hf = 0,
    Lf = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OvfPlanKind {
    Translate = 0,
    Rotate = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OvfDirection {
    Distal = 0,
    Proximal = 1,
    Clockwise = 2,
    Counterclockwise = 3,
}

impl From<OvfMode> for FrictionMode {
    fn from(m: OvfMode) -> Self {
        match m {
            OvfMode::Hf => FrictionMode::Hf,
            OvfMode::Lf => FrictionMode::Lf,
        }
    }
}

impl From<OvfPlanKind> for PlanKind {
    fn from(k: OvfPlanKind) -> Self {
        match k {
            OvfPlanKind::Translate => PlanKind::Translate,
            OvfPlanKind::Rotate => PlanKind::Rotate,
        }
    }
}

impl From<OvfDirection> for Direction {
    fn from(d: OvfDirection) -> Self {
        match d {
            OvfDirection::Distal => Direction::Distal,
            OvfDirection::Proximal => Direction::Proximal,
            OvfDirection::Clockwise => Direction::Clockwise,
            OvfDirection::Counterclockwise => Direction::Counterclockwise,
        }
    }
}

/// Fold pattern parameters.
pub struct OvfFold(FoldParameters);

/// Parsed simulation scenario.
pub struct OvfScenario(Scenario);

/// Logged simulation run.
pub struct OvfTrajectory(TrajectoryLog);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> OvfStatus {
    match e.root() {
        Error::Io(_) | Error::Csv(_) => OvfStatus::Io,
        Error::Parse(_) => OvfStatus::Parse,
        _ if e.is_jam() => OvfStatus::Jam,
        _ => OvfStatus::Validation,
    }
}

fn fail(e: Error) -> OvfStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

fn null(what: &str) -> OvfStatus {
    set_error(format!("null pointer: {what}"));
    OvfStatus::NullPointer
}

fn guard(f: impl FnOnce() -> OvfStatus) -> OvfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic".into());
            OvfStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, OvfStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        OvfStatus::Parse
    })
}

unsafe fn write_out<T>(out: *mut T, v: T) -> OvfStatus {
    if out.is_null() {
        return null("out");
    }
    *out = v;
    OvfStatus::Ok
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ovf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates fold parameters with face lengths `l`, `k` (mm), fold angle
/// `alpha` (rad) and `n_units` units; `t` and `m` take their defaults.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ovf_fold_new(l: f64, k: f64, alpha: f64, n_units: u32, out: *mut *mut OvfFold) -> OvfStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        if !(l > 0.0) {
            return fail(Error::Domain(format!("l must be positive, got {l}")));
        }
        let p = FoldParameters::with_faces(l, k, alpha, n_units);
        match validate_params(&p, false) {
            Ok(p) => write_out(out, Box::into_raw(Box::new(OvfFold(p)))),
            Err(e) => fail(e),
        }
    })
}

/// Creates fold parameters from every field: `ratio` is k / l.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ovf_fold_new_full(
    l: f64,
    ratio: f64,
    alpha: f64,
    t: f64,
    m: f64,
    n_units: u32,
    out: *mut *mut OvfFold,
) -> OvfStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        match validate_params(&FoldParameters::new(l, ratio, alpha, t, m, n_units), false) {
            Ok(p) => write_out(out, Box::into_raw(Box::new(OvfFold(p)))),
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `fold` must come from `ovf_fold_new*` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ovf_fold_free(fold: *mut OvfFold) {
    if !fold.is_null() {
        drop(Box::from_raw(fold));
    }
}

unsafe fn with_fold(fold: *const OvfFold, out: *mut f64, f: impl FnOnce(&FoldParameters) -> ovf_core::Result<f64>) -> OvfStatus {
    guard(|| {
        if fold.is_null() {
            return null("fold");
        }
        if out.is_null() {
            return null("out");
        }
        match f(&(*fold).0) {
            Ok(v) => write_out(out, v),
            Err(e) => fail(e),
        }
    })
}

/// Structure thickness in `mode` (mm).
///
/// # Safety
/// `fold` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ovf_fold_thickness(fold: *const OvfFold, mode: OvfMode, out: *mut f64) -> OvfStatus {
    with_fold(fold, out, |p| thickness(p, mode.into()))
}

/// Thickness change between modes (mm).
///
/// # Safety
/// `fold` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ovf_fold_delta_h(fold: *const OvfFold, out: *mut f64) -> OvfStatus {
    with_fold(fold, out, delta_h)
}

/// Opening between consecutive exposed faces in `mode` (mm).
///
/// # Safety
/// `fold` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ovf_fold_valley_gap(fold: *const OvfFold, mode: OvfMode, out: *mut f64) -> OvfStatus {
    with_fold(fold, out, |p| valley_gap(p, mode.into()))
}

/// Actuation travel of a full fold (mm).
///
/// # Safety
/// `fold` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ovf_fold_travel(fold: *const OvfFold, out: *mut f64) -> OvfStatus {
    with_fold(fold, out, fold_travel)
}

/// Peak folding force with the default hinge stiffness (N).
///
/// # Safety
/// `fold` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ovf_fold_peak_force(fold: *const OvfFold, out: *mut f64) -> OvfStatus {
    with_fold(fold, out, |p| Ok(fold_force_profile(p, default_kappa(), 201)?.peak()))
}

/// Parses a scenario from TOML text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ovf_scenario_from_toml(text: *const c_char, out: *mut *mut OvfScenario) -> OvfStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        let text = match str_arg(text, "text") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match Scenario::from_toml(text) {
            Ok(s) => write_out(out, Box::into_raw(Box::new(OvfScenario(s)))),
            Err(e) => fail(e),
        }
    })
}

/// Reads a scenario file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ovf_scenario_load(path: *const c_char, out: *mut *mut OvfScenario) -> OvfStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        let path = match str_arg(path, "path") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match Scenario::load(Path::new(path)) {
            Ok(s) => write_out(out, Box::into_raw(Box::new(OvfScenario(s)))),
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `scenario` must come from `ovf_scenario_*` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ovf_scenario_free(scenario: *mut OvfScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Runs a plan on the scenario. On `OVF_STATUS_JAM` `*out` still receives
/// the trajectory logged before the jam; on other failures it is NULL.
///
/// # Safety
/// `scenario` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ovf_sim_run(
    scenario: *const OvfScenario,
    plan: OvfPlanKind,
    direction: OvfDirection,
    cycles: u32,
    out: *mut *mut OvfTrajectory,
) -> OvfStatus {
    guard(|| {
        if scenario.is_null() {
            return null("scenario");
        }
        if out.is_null() {
            return null("out");
        }
        *out = ptr::null_mut();
        let sc = &(*scenario).0;
        let setup = || -> ovf_core::Result<_> {
            let g = sc.gripper(&Catalogue::default())?;
            let plan = build_plan(&g, plan.into(), direction.into(), cycles)?;
            let w = sc.initial_world(&g, 0, plan.phases[0].modes(), plan.start)?;
            Ok((g, plan, w))
        };
        let (g, plan, w) = match setup() {
            Ok(v) => v,
            Err(e) => return fail(e),
        };
        let (log, err) = run_plan_partial(&g, &w, &plan);
        match err {
            None => write_out(out, Box::into_raw(Box::new(OvfTrajectory(log)))),
            Some(e @ Error::InPhase { .. }) => {
                set_error(e.to_string());
                *out = Box::into_raw(Box::new(OvfTrajectory(log)));
                OvfStatus::Jam
            }
            Some(e) => fail(e),
        }
    })
}

/// # Safety
/// `traj` must come from `ovf_sim_run` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ovf_trajectory_free(traj: *mut OvfTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Number of logged states, or 0 for NULL.
///
/// # Safety
/// `traj` must be NULL or a valid trajectory.
#[no_mangle]
pub unsafe extern "C" fn ovf_trajectory_len(traj: *const OvfTrajectory) -> usize {
    if traj.is_null() {
        0
    } else {
        (*traj).0.len()
    }
}

/// Object pose at state `index`: x, y (mm) and yaw (rad).
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ovf_trajectory_pose(
    traj: *const OvfTrajectory,
    index: usize,
    x: *mut f64,
    y: *mut f64,
    yaw: *mut f64,
) -> OvfStatus {
    guard(|| {
        if traj.is_null() || x.is_null() || y.is_null() || yaw.is_null() {
            return null("argument");
        }
        let log = &(*traj).0;
        let Some(r) = log.records.get(index) else {
            set_error(format!("index {index} out of range"));
            return OvfStatus::Validation;
        };
        *x = r.pose.x;
        *y = r.pose.y;
        *yaw = r.pose.yaw;
        OvfStatus::Ok
    })
}

/// Net translation along the starting finger axis (mm) and net rotation
/// (deg).
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ovf_trajectory_metrics(
    traj: *const OvfTrajectory,
    translation: *mut f64,
    rotation: *mut f64,
) -> OvfStatus {
    guard(|| {
        if traj.is_null() || translation.is_null() || rotation.is_null() {
            return null("argument");
        }
        let (t, r) = net_metrics(&(*traj).0);
        *translation = t;
        *rotation = r;
        OvfStatus::Ok
    })
}

/// Writes the trajectory as CSV.
///
/// # Safety
/// `traj` must be valid and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ovf_trajectory_write_csv(traj: *const OvfTrajectory, path: *const c_char) -> OvfStatus {
    guard(|| {
        if traj.is_null() {
            return null("trajectory");
        }
        let path = match str_arg(path, "path") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let res = std::fs::File::create(path)
            .map_err(Error::from)
            .and_then(|f| (*traj).0.write_csv(std::io::BufWriter::new(f)));
        match res {
            Ok(()) => OvfStatus::Ok,
            Err(e) => fail(e),
        }
    })
}
