//! C ABI over the coloring engine.
//!
//! Conventions: every function is panic-safe (panics become
//! [`RF_ERR_PANIC`]), every pointer argument is null-checked, and handles
//! are opaque — create with [`rf_process_new`], destroy with
//! [`rf_process_free`]. Handles are not thread-safe; guard one handle with
//! one thread (or an external lock). Functions returning `int` use the
//! `RF_OK` / `RF_ERR_*` codes; [`rf_error_message`] maps any code to a
//! static description.

use std::ffi::CStr;
use std::os::raw::{c_char, c_int};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use ramsey_forge::config::ProcessConfig;
use ramsey_forge::phase1::run_phase1;
use ramsey_forge::phase2::{complete_phase2, Phase2Error, ResampleOptions};
use ramsey_forge::rng::{substream, Substream};
use ramsey_forge::state::ColoringState;
use ramsey_forge::trajectories::{traj, TrajId};
use ramsey_forge::validator::{auto_mode, validate, VerifyMode};

/// Success.
pub const RF_OK: c_int = 0;
/// A required pointer argument was null.
pub const RF_ERR_NULL: c_int = -1;
/// The configuration was rejected (n too small, epsilon out of range, …).
pub const RF_ERR_CONFIG: c_int = -2;
/// The call does not apply to the process's current stage.
pub const RF_ERR_STAGE: c_int = -3;
/// Phase-2 resampling exhausted its budget.
pub const RF_ERR_BUDGET: c_int = -4;
/// The finished coloring failed verification.
pub const RF_ERR_INVALID: c_int = -5;
/// A file could not be read or written.
pub const RF_ERR_IO: c_int = -6;
/// A string argument was not valid UTF-8.
pub const RF_ERR_UTF8: c_int = -7;
/// A vertex or color index was out of range.
pub const RF_ERR_BOUNDS: c_int = -8;
/// An internal panic was caught; the handle may be poisoned and should be
/// freed.
pub const RF_ERR_PANIC: c_int = -9;

/// Verification mode selectors for [`rf_process_validate`].
pub const RF_MODE_AUTO: c_int = -1;
pub const RF_MODE_EXHAUSTIVE: c_int = 0;
pub const RF_MODE_PAIRWISE: c_int = 1;
pub const RF_MODE_SAMPLED: c_int = 2;

/// Trajectory selectors for [`rf_traj_eval`].
pub const RF_TRAJ_Q: c_int = 0;
pub const RF_TRAJ_Y: c_int = 1;
pub const RF_TRAJ_A: c_int = 2;
pub const RF_TRAJ_B: c_int = 3;
pub const RF_TRAJ_C1: c_int = 4;
pub const RF_TRAJ_C2: c_int = 5;
pub const RF_TRAJ_C: c_int = 6;
pub const RF_TRAJ_D: c_int = 7;
pub const RF_TRAJ_E: c_int = 8;
pub const RF_TRAJ_F: c_int = 9;
pub const RF_TRAJ_Z0: c_int = 10;
pub const RF_TRAJ_Z1: c_int = 11;
pub const RF_TRAJ_Z2: c_int = 12;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Stage {
    Fresh,
    Phase1Done,
    Completed,
}

/// Opaque process handle.
pub struct RfProcess {
    config: ProcessConfig,
    state: ColoringState,
    stage: Stage,
}

fn catch_code(f: impl FnOnce() -> c_int) -> c_int {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(RF_ERR_PANIC)
}

/// Create a process for `K_n` with palette slack `epsilon` and the given
/// master seed. Returns null if the configuration is invalid (check
/// stderr-free: call with a valid config to distinguish; null means
/// rejected config or allocation panic).
///
/// # Safety
/// The returned pointer must be released with [`rf_process_free`].
#[no_mangle]
pub extern "C" fn rf_process_new(n: u32, epsilon: f64, seed: u64) -> *mut RfProcess {
    catch_unwind(AssertUnwindSafe(|| {
        let config = ProcessConfig::new(n, epsilon, seed);
        match ColoringState::init(&config) {
            Ok(state) => Box::into_raw(Box::new(RfProcess { config, state, stage: Stage::Fresh })),
            Err(_) => std::ptr::null_mut(),
        }
    }))
    .unwrap_or(std::ptr::null_mut())
}

/// Release a handle. Null is a no-op.
///
/// # Safety
/// `p` must be a pointer returned by [`rf_process_new`] that has not
/// already been freed.
#[no_mangle]
pub unsafe extern "C" fn rf_process_free(p: *mut RfProcess) {
    if !p.is_null() {
        drop(unsafe { Box::from_raw(p) });
    }
}

/// Run phase 1 to its natural end. Valid once, on a fresh handle.
///
/// # Safety
/// `p` must be a live handle from [`rf_process_new`] (or null).
#[no_mangle]
pub unsafe extern "C" fn rf_process_run_phase1(p: *mut RfProcess) -> c_int {
    let Some(proc_) = (unsafe { p.as_mut() }) else { return RF_ERR_NULL };
    catch_code(move || {
        if proc_.stage != Stage::Fresh {
            return RF_ERR_STAGE;
        }
        let mut rng = substream(proc_.config.seed, Substream::Phase1);
        run_phase1(&mut proc_.state, &mut rng, &proc_.config, None);
        proc_.stage = Stage::Phase1Done;
        RF_OK
    })
}

/// Color the leftover edges with reserved colors and resample until no bad
/// event remains. Valid once, after phase 1.
///
/// # Safety
/// `p` must be a live handle from [`rf_process_new`] (or null).
#[no_mangle]
pub unsafe extern "C" fn rf_process_complete(p: *mut RfProcess) -> c_int {
    let Some(proc_) = (unsafe { p.as_mut() }) else { return RF_ERR_NULL };
    catch_code(move || {
        if proc_.stage != Stage::Phase1Done {
            return RF_ERR_STAGE;
        }
        let mut rng = substream(proc_.config.seed, Substream::Phase2);
        let opts = ResampleOptions::new(proc_.config.phase2_budget);
        match complete_phase2(&mut proc_.state, &mut rng, proc_.config.epsilon, opts) {
            Ok(_) => {
                proc_.stage = Stage::Completed;
                RF_OK
            }
            Err(Phase2Error::BudgetExceeded { .. }) => RF_ERR_BUDGET,
            Err(Phase2Error::EmptyReservedPalette) => RF_ERR_CONFIG,
        }
    })
}

/// Verify the finished coloring; mode is one of the `RF_MODE_*` constants.
/// Returns the number of violating 4-cliques found (0 for a valid
/// coloring), or a negative error code.
///
/// # Safety
/// `p` must be a live handle from [`rf_process_new`] (or null).
#[no_mangle]
pub unsafe extern "C" fn rf_process_validate(p: *mut RfProcess, mode: c_int) -> i64 {
    let Some(proc_) = (unsafe { p.as_mut() }) else { return RF_ERR_NULL as i64 };
    catch_unwind(AssertUnwindSafe(move || {
        if proc_.stage != Stage::Completed {
            return RF_ERR_STAGE as i64;
        }
        let coloring = proc_.state.to_coloring();
        let mode = match mode {
            RF_MODE_AUTO => auto_mode(coloring.n()),
            RF_MODE_EXHAUSTIVE => VerifyMode::Exhaustive,
            RF_MODE_PAIRWISE => VerifyMode::Pairwise,
            RF_MODE_SAMPLED => VerifyMode::Sampled,
            _ => return RF_ERR_BOUNDS as i64,
        };
        let mut rng = substream(proc_.config.seed, Substream::Telemetry);
        match validate(&coloring, mode, &mut rng) {
            Ok(report) => report.violations as i64,
            Err(_) => RF_ERR_INVALID as i64,
        }
    }))
    .unwrap_or(RF_ERR_PANIC as i64)
}

/// Number of distinct colors on edges so far.
///
/// # Safety
/// `p` must be a live handle from [`rf_process_new`] (or null).
#[no_mangle]
pub unsafe extern "C" fn rf_process_colors_used(p: *const RfProcess) -> i64 {
    let Some(proc_) = (unsafe { p.as_ref() }) else { return RF_ERR_NULL as i64 };
    catch_unwind(AssertUnwindSafe(move || proc_.state.to_coloring().colors_used() as i64))
        .unwrap_or(RF_ERR_PANIC as i64)
}

/// Color of edge `{u, v}`: a color index, `-10` if the edge is still
/// uncolored, or a negative error code for bad arguments.
///
/// # Safety
/// `p` must be a live handle from [`rf_process_new`] (or null).
#[no_mangle]
pub unsafe extern "C" fn rf_process_edge_color(p: *const RfProcess, u: u32, v: u32) -> i64 {
    let Some(proc_) = (unsafe { p.as_ref() }) else { return RF_ERR_NULL as i64 };
    catch_unwind(AssertUnwindSafe(move || {
        let n = proc_.state.n();
        if u >= n || v >= n || u == v {
            return RF_ERR_BOUNDS as i64;
        }
        match proc_.state.color_of(u, v) {
            Some(k) => k as i64,
            None => RF_EDGE_UNCOLORED,
        }
    }))
    .unwrap_or(RF_ERR_PANIC as i64)
}

/// Sentinel returned by [`rf_process_edge_color`] for uncolored edges.
pub const RF_EDGE_UNCOLORED: i64 = -10;

/// Write the current (possibly partial) coloring to `path` in the engine's
/// text format.
///
/// # Safety
/// `p` must be a live handle (or null); `path` must be a valid
/// null-terminated string (or null).
#[no_mangle]
pub unsafe extern "C" fn rf_process_write_coloring(
    p: *const RfProcess,
    path: *const c_char,
) -> c_int {
    let Some(proc_) = (unsafe { p.as_ref() }) else { return RF_ERR_NULL };
    if path.is_null() {
        return RF_ERR_NULL;
    }
    let path = unsafe { CStr::from_ptr(path) };
    catch_code(move || {
        let Ok(path) = path.to_str() else { return RF_ERR_UTF8 };
        match proc_.state.to_coloring().write_file(Path::new(path)) {
            Ok(()) => RF_OK,
            Err(_) => RF_ERR_IO,
        }
    })
}

/// Evaluate a predicted trajectory (an `RF_TRAJ_*` selector) at rescaled
/// time `t ∈ [0, 1/6]` with special fraction `s`. Returns NaN for an
/// unknown selector or out-of-domain `t`.
#[no_mangle]
pub extern "C" fn rf_traj_eval(id: c_int, t: f64, s: f64) -> f64 {
    let id = match id {
        RF_TRAJ_Q => TrajId::Q,
        RF_TRAJ_Y => TrajId::Y,
        RF_TRAJ_A => TrajId::A,
        RF_TRAJ_B => TrajId::B,
        RF_TRAJ_C1 => TrajId::C1,
        RF_TRAJ_C2 => TrajId::C2,
        RF_TRAJ_C => TrajId::C,
        RF_TRAJ_D => TrajId::D,
        RF_TRAJ_E => TrajId::E,
        RF_TRAJ_F => TrajId::F,
        RF_TRAJ_Z0 => TrajId::Z0,
        RF_TRAJ_Z1 => TrajId::Z1,
        RF_TRAJ_Z2 => TrajId::Z2,
        _ => return f64::NAN,
    };
    catch_unwind(|| traj(id, t, s).unwrap_or(f64::NAN)).unwrap_or(f64::NAN)
}

/// Static description of an `RF_*` status code.
#[no_mangle]
pub extern "C" fn rf_error_message(code: c_int) -> *const c_char {
    let msg: &'static [u8] = match code {
        RF_OK => b"ok\0",
        RF_ERR_NULL => b"null pointer argument\0",
        RF_ERR_CONFIG => b"invalid configuration\0",
        RF_ERR_STAGE => b"call does not apply to the process's current stage\0",
        RF_ERR_BUDGET => b"phase-2 resampling budget exhausted\0",
        RF_ERR_INVALID => b"coloring failed verification\0",
        RF_ERR_IO => b"file read or write failed\0",
        RF_ERR_UTF8 => b"string argument was not valid UTF-8\0",
        RF_ERR_BOUNDS => b"index out of range\0",
        RF_ERR_PANIC => b"internal panic\0",
        _ => b"unknown status code\0",
    };
    msg.as_ptr() as *const c_char
}

/// Crate version as a static string.
#[no_mangle]
pub extern "C" fn rf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
