//! C ABI over `peps-forge`.
//!
//! Every fallible function returns a [`PfStatus`]. On failure a message is
//! kept per thread and read with [`pf_last_error_message`]. Strings returned
//! through out-parameters are owned by the caller and released with
//! [`pf_string_free`]; instances with [`pf_instance_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use peps_forge::dynamics::{self, CostInputs, RunMode, RunParams, Simulation};
use peps_forge::harness::InstanceConfig;
use peps_forge::Error;

/// Status codes. 1 to 3 match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PfStatus {
    Ok = 0,
    Verification = 1,
    InvalidInput = 2,
    Capacity = 3,
    NullPointer = 4,
    Numerical = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PfMode {
    Bounded = 0,
    UntilSuccess = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PfCostBounds {
    pub measurement_bound: f64,
    pub runtime_bound: f64,
}

/// Opaque handle: a validated instance with every intermediate Hamiltonian
/// analyzed.
pub struct PfInstance {
    config: InstanceConfig,
    sim: Simulation,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn status_of(error: &Error) -> PfStatus {
    match error {
        Error::LemmaViolation(_) => PfStatus::Verification,
        Error::Capacity { .. } => PfStatus::Capacity,
        Error::Numerical(_) | Error::Conditioning { .. } | Error::GaugeRestore { .. } => PfStatus::Numerical,
        _ => PfStatus::InvalidInput,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (PfStatus, String)>) -> PfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PfStatus::Ok,
        Ok(Err((status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("panic: {message}"));
            PfStatus::Panic
        }
    }
}

fn lift<T>(result: peps_forge::Result<T>) -> Result<T, (PfStatus, String)> {
    result.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (PfStatus, String) {
    (PfStatus::NullPointer, format!("{what} is null"))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), (PfStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    // SAFETY: non-null and, per the caller contract, valid for writes.
    unsafe { out.write(value) };
    Ok(())
}

fn to_c_string(text: String) -> Result<*mut c_char, (PfStatus, String)> {
    CString::new(text)
        .map(CString::into_raw)
        .map_err(|_| (PfStatus::Numerical, "output contains a nul byte".into()))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn pf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a JSON instance config and prepares it for runs.
///
/// # Safety
/// `config_json` must be a valid NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pf_instance_new(config_json: *const c_char, out: *mut *mut PfInstance) -> PfStatus {
    guard(|| {
        if config_json.is_null() {
            return Err(null("config_json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        // SAFETY: checked non-null; the caller guarantees NUL termination.
        let text = unsafe { CStr::from_ptr(config_json) }
            .to_str()
            .map_err(|_| (PfStatus::InvalidInput, "config is not UTF-8".to_string()))?;
        let config = lift(InstanceConfig::from_json(text))?;
        let peps = lift(config.build_peps())?;
        let sim = lift(Simulation::prepare(peps, config.c, config.tolerances.zero_tol))?;
        let handle = Box::into_raw(Box::new(PfInstance { config, sim }));
        // SAFETY: checked non-null above.
        unsafe { out.write(handle) };
        Ok(())
    })
}

/// Releases an instance. Null is ignored.
///
/// # Safety
/// `instance` must come from [`pf_instance_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn pf_instance_free(instance: *mut PfInstance) {
    if !instance.is_null() {
        // SAFETY: ownership returns from the caller.
        drop(unsafe { Box::from_raw(instance) });
    }
}

/// Number of vertices, or 0 for a null handle.
///
/// # Safety
/// `instance` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pf_instance_vertex_count(instance: *const PfInstance) -> usize {
    // SAFETY: null or live per the caller contract.
    unsafe { instance.as_ref() }.map_or(0, |i| i.sim.peps().graph().vertex_count())
}

/// Largest tensor condition number of the instance.
///
/// # Safety
/// `instance` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pf_instance_kappa(instance: *const PfInstance, out: *mut f64) -> PfStatus {
    guard(|| {
        // SAFETY: null or live per the caller contract.
        let instance = unsafe { instance.as_ref() }.ok_or_else(|| null("instance"))?;
        unsafe { write(out, instance.sim.peps().kappa(), "out") }
    })
}

/// Runs the algorithm once and returns the report as a JSON string.
/// `eps <= 0` uses the config's value.
///
/// # Safety
/// `instance` must be a live handle and `out_json` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pf_run(
    instance: *const PfInstance,
    seed: u64,
    eps: f64,
    mode: PfMode,
    out_json: *mut *mut c_char,
) -> PfStatus {
    guard(|| {
        // SAFETY: null or live per the caller contract.
        let instance = unsafe { instance.as_ref() }.ok_or_else(|| null("instance"))?;
        if out_json.is_null() {
            return Err(null("out_json"));
        }
        let params = RunParams {
            seed,
            eps: if eps > 0.0 { eps } else { instance.config.eps },
            mode: match mode {
                PfMode::Bounded => RunMode::Bounded,
                PfMode::UntilSuccess => RunMode::UntilSuccess,
            },
        };
        let report = lift(instance.sim.run(&params))?;
        let text = serde_json::to_string(&report).map_err(|e| (PfStatus::Numerical, e.to_string()))?;
        unsafe { write(out_json, to_c_string(text)?, "out_json") }
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn pf_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: produced by `CString::into_raw` in this crate.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Termination probability of the repair loop with at most `m` repairs.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pf_p_term(p: f64, m: u64, out: *mut f64) -> PfStatus {
    guard(|| unsafe { write(out, lift(dynamics::p_term(p, m))?, "out") })
}

/// Exponential upper bound on the failure probability.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pf_p_fail_bound(p: f64, m: f64, out: *mut f64) -> PfStatus {
    guard(|| unsafe { write(out, lift(dynamics::p_fail_bound(p, m))?, "out") })
}

/// Repair budget `s` and `m` for a target error `eps`.
///
/// # Safety
/// `out_s` and `out_m` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pf_required_alternations(
    kappa: f64,
    vertices: usize,
    eps: f64,
    out_s: *mut u64,
    out_m: *mut u64,
) -> PfStatus {
    guard(|| {
        if out_s.is_null() || out_m.is_null() {
            return Err(null("output pointer"));
        }
        let a = lift(dynamics::required_alternations(kappa, vertices, eps))?;
        unsafe {
            write(out_s, a.s, "out_s")?;
            write(out_m, a.m, "out_m")
        }
    })
}

/// Measurement-count and runtime bounds.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn pf_cost_model(
    vertices: usize,
    edges: usize,
    kappa: f64,
    eps: f64,
    gap: f64,
    physical_dim: usize,
    degree: usize,
    out: *mut PfCostBounds,
) -> PfStatus {
    guard(|| {
        let inputs = CostInputs {
            vertices,
            edges,
            kappa,
            eps,
            gap,
            physical_dim,
            degree,
        };
        let bounds = lift(dynamics::cost_model(&inputs))?;
        let bounds = PfCostBounds {
            measurement_bound: bounds.measurement_bound,
            runtime_bound: bounds.runtime_bound,
        };
        unsafe { write(out, bounds, "out") }
    })
}
