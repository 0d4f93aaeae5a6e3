//! C ABI over the `ringbal` simulator.
//!
//! Simulations are opaque handles created by [`rb_simulation_new`] and
//! released with [`rb_simulation_free`]. Every fallible call returns an
//! [`RbStatus`]; on failure [`rb_last_error_message`] describes the cause.
//! Kinds are passed as the `RB_*` integer constants.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ringbal::potentials::{hop_potential, stationary_bounds};
use ringbal::process::Simulation;
use ringbal::rng::child_stream;
use ringbal::{ProcessKind, Topology, TopologyKind, WeightDistribution};

pub const RB_TOPOLOGY_CYCLE: u32 = 0;
pub const RB_TOPOLOGY_HARARY2: u32 = 1;

pub const RB_PROCESS_AVERAGING: u32 = 0;
pub const RB_PROCESS_TWO_CHOICE: u32 = 1;
pub const RB_PROCESS_HYBRID: u32 = 2;

pub const RB_WEIGHTS_UNIT: u32 = 0;
pub const RB_WEIGHTS_UNIFORM: u32 = 1;
pub const RB_WEIGHTS_EXPONENTIAL: u32 = 2;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BufferTooSmall = 3,
    Panic = 4,
}

/// Opaque simulation handle.
pub struct RbSimulation {
    inner: Simulation,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn guard(f: impl FnOnce() -> RbStatus) -> RbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => {
            if status == RbStatus::Ok {
                set_error("");
            }
            status
        }
        Err(_) => {
            set_error("internal panic");
            RbStatus::Panic
        }
    }
}

fn fail(status: RbStatus, msg: impl Into<String>) -> RbStatus {
    set_error(msg);
    status
}

/// Message for the most recent failed call on this thread, or an empty
/// string. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn rb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rb_version() -> *const c_char {
    static VERSION: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(v) => v,
            Err(_) => panic!("version contains NUL"),
        };
    VERSION.as_ptr()
}

/// Creates a simulation on `n` nodes with all loads zero. The random stream
/// is `(seed, run_id)`, the same one run `run_id` of an experiment uses.
/// `beta` is read only for the hybrid process.
///
/// # Safety
/// `out` must be null or valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn rb_simulation_new(
    topology: u32,
    n: usize,
    process: u32,
    beta: f64,
    weights: u32,
    seed: u64,
    run_id: u64,
    out: *mut *mut RbSimulation,
) -> RbStatus {
    guard(|| {
        if out.is_null() {
            return fail(RbStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let kind = match topology {
            RB_TOPOLOGY_CYCLE => TopologyKind::Cycle,
            RB_TOPOLOGY_HARARY2 => TopologyKind::Harary2,
            other => {
                return fail(
                    RbStatus::InvalidArgument,
                    format!("unknown topology {other}"),
                )
            }
        };
        let process = match process {
            RB_PROCESS_AVERAGING => ProcessKind::Averaging,
            RB_PROCESS_TWO_CHOICE => ProcessKind::TwoChoice,
            RB_PROCESS_HYBRID => ProcessKind::Hybrid { beta },
            other => {
                return fail(
                    RbStatus::InvalidArgument,
                    format!("unknown process {other}"),
                )
            }
        };
        let weights = match weights {
            RB_WEIGHTS_UNIT => WeightDistribution::Unit,
            RB_WEIGHTS_UNIFORM => WeightDistribution::UniformSecondMomentOne,
            RB_WEIGHTS_EXPONENTIAL => WeightDistribution::ExponentialSecondMomentOne,
            other => {
                return fail(
                    RbStatus::InvalidArgument,
                    format!("unknown weights {other}"),
                )
            }
        };
        let sim = Topology::new(kind, n)
            .and_then(|t| Simulation::new(t, process, &weights, child_stream(seed, run_id)));
        match sim {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(RbSimulation { inner }));
                RbStatus::Ok
            }
            Err(e) => fail(RbStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `sim` must be null or a handle from [`rb_simulation_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rb_simulation_free(sim: *mut RbSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

unsafe fn handle<'a>(sim: *const RbSimulation) -> Option<&'a RbSimulation> {
    sim.as_ref()
}

/// Advances the simulation by `steps` steps.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rb_simulation_step(sim: *mut RbSimulation, steps: u64) -> RbStatus {
    guard(|| match sim.as_mut() {
        Some(s) => {
            s.inner.advance(steps);
            RbStatus::Ok
        }
        None => fail(RbStatus::NullPointer, "simulation is null"),
    })
}

/// Node count.
///
/// # Safety
/// `sim` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn rb_simulation_n(sim: *const RbSimulation, out: *mut usize) -> RbStatus {
    read(sim, out, |s| Ok(s.inner.state().n()))
}

/// Steps taken so far.
///
/// # Safety
/// `sim` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn rb_simulation_time(sim: *const RbSimulation, out: *mut u64) -> RbStatus {
    read(sim, out, |s| Ok(s.inner.state().t()))
}

/// Current max-minus-min load.
///
/// # Safety
/// `sim` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn rb_simulation_gap(sim: *const RbSimulation, out: *mut f64) -> RbStatus {
    read(sim, out, |s| Ok(s.inner.state().gap()))
}

/// Current `φ_k`, `1 ≤ k < n`.
///
/// # Safety
/// `sim` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn rb_simulation_hop_potential(
    sim: *const RbSimulation,
    k: usize,
    out: *mut f64,
) -> RbStatus {
    read(sim, out, |s| {
        hop_potential(s.inner.state().loads(), k).map_err(|e| e.to_string())
    })
}

/// Copies the `n` loads into `buf`, which must hold at least `n` values.
///
/// # Safety
/// `sim` must be null or a live handle; `buf` null or valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn rb_simulation_loads(
    sim: *const RbSimulation,
    buf: *mut f64,
    len: usize,
) -> RbStatus {
    guard(|| {
        let Some(s) = handle(sim) else {
            return fail(RbStatus::NullPointer, "simulation is null");
        };
        if buf.is_null() {
            return fail(RbStatus::NullPointer, "buffer is null");
        }
        let loads = s.inner.state().loads();
        if len < loads.len() {
            return fail(
                RbStatus::BufferTooSmall,
                format!("buffer holds {len} values, need {}", loads.len()),
            );
        }
        ptr::copy_nonoverlapping(loads.as_ptr(), buf, loads.len());
        RbStatus::Ok
    })
}

/// `(k(n−k) − 1)·ew2`, the stationary upper bound on `E[φ_k]` for the cycle.
///
/// # Safety
/// `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn rb_stationary_bound(
    n: usize,
    k: usize,
    ew2: f64,
    out: *mut f64,
) -> RbStatus {
    guard(|| {
        if out.is_null() {
            return fail(RbStatus::NullPointer, "out is null");
        }
        if k == 0 || k >= n {
            return fail(
                RbStatus::InvalidArgument,
                format!("hop {k} outside 1..{}", n.saturating_sub(1)),
            );
        }
        match stationary_bounds(n, ew2) {
            Ok(b) => {
                *out = b.get(k);
                RbStatus::Ok
            }
            Err(e) => fail(RbStatus::InvalidArgument, e.to_string()),
        }
    })
}

unsafe fn read<T>(
    sim: *const RbSimulation,
    out: *mut T,
    f: impl FnOnce(&RbSimulation) -> Result<T, String>,
) -> RbStatus {
    guard(|| {
        let Some(s) = handle(sim) else {
            return fail(RbStatus::NullPointer, "simulation is null");
        };
        if out.is_null() {
            return fail(RbStatus::NullPointer, "out is null");
        }
        match f(s) {
            Ok(v) => {
                *out = v;
                RbStatus::Ok
            }
            Err(msg) => fail(RbStatus::InvalidArgument, msg),
        }
    })
}
