//! C ABI for the qtasep library.
//!
//! Conventions:
//! - every fallible function returns a [`QtStatus`] and writes results
//!   through out-pointers;
//! - `QtCdf` is an opaque handle to a tabulated limit CDF, created by the
//!   `qt_cdf_new_*` constructors and released with `qt_cdf_free`;
//! - a thread-local message for the most recent error is available via
//!   `qt_last_error_message` (valid until the next failing call on the
//!   same thread);
//! - all functions are safe to call from multiple threads as long as each
//!   handle is used by one thread at a time.
//!
//! The C header `include/qtasep.h` is generated by cbindgen at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::ptr;

use qtasep::harness;
use qtasep::hydro::{self, RateProfile};
use qtasep::limits::{CdfTable, KernelSpec};
use qtasep::qfun::QParams;
use qtasep::simulate::{monte_carlo_jobs, MonteCarloJob};
use qtasep::stats::EmpiricalDistribution;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: String) {
    let msg = CString::new(msg).unwrap_or_else(|_| CString::new("error").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = msg);
}

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QtStatus {
    Ok = 0,
    /// Invalid argument (domain, profile, contour, or config).
    InvalidArgument = 1,
    /// A numeric tolerance or convergence contract failed.
    NumericFailure = 2,
    /// Null pointer or other usage error.
    UsageError = 3,
}

fn status_of(err: &qtasep::Error) -> QtStatus {
    match err.exit_code() {
        2 => QtStatus::InvalidArgument,
        3 => QtStatus::NumericFailure,
        _ => QtStatus::NumericFailure,
    }
}

fn fail(err: qtasep::Error) -> QtStatus {
    let code = status_of(&err);
    set_error(err.to_string());
    code
}

fn usage(msg: &str) -> QtStatus {
    set_error(msg.to_string());
    QtStatus::UsageError
}

/// Fluctuation phase of the slowest-rate perturbation.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QtPhase {
    /// `alpha > q^theta`: GUE Tracy-Widom fluctuations.
    Gue = 0,
    /// `alpha = q^theta`: rank-k BBP fluctuations.
    Critical = 1,
    /// `alpha < q^theta`: largest eigenvalue of a k x k GUE.
    Gaussian = 2,
}

/// Hydrodynamic constants for one `(q, theta, alpha)`.
///
/// `g` and `sigma` are meaningful only when `has_shock_constants` is 1
/// (i.e. `alpha < 1`).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QtHydroConstants {
    pub kappa: f64,
    pub f: f64,
    pub chi: f64,
    pub g: f64,
    pub sigma: f64,
    pub has_shock_constants: i32,
}

/// Message describing the most recent error on this thread. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qt_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

fn build_profile(
    slow_indices: *const usize,
    slow_rates: *const f64,
    n_slow: usize,
) -> Result<RateProfile, QtStatus> {
    if n_slow == 0 {
        return Ok(RateProfile::homogeneous());
    }
    if slow_indices.is_null() || slow_rates.is_null() {
        return Err(usage(
            "slow_indices / slow_rates must not be NULL when n_slow > 0",
        ));
    }
    let idx = unsafe { std::slice::from_raw_parts(slow_indices, n_slow) };
    let rates = unsafe { std::slice::from_raw_parts(slow_rates, n_slow) };
    RateProfile::new(idx.iter().copied().zip(rates.iter().copied()).collect()).map_err(fail)
}

/// Classify the fluctuation phase for a rate perturbation given as parallel
/// arrays of 1-based particle indices and rates (`n_slow` may be 0).
///
/// # Safety
/// `out_phase` and `out_k` must be valid writable pointers; the slow arrays
/// must contain `n_slow` readable elements.
#[no_mangle]
pub unsafe extern "C" fn qt_classify_phase(
    q: f64,
    theta: f64,
    slow_indices: *const usize,
    slow_rates: *const f64,
    n_slow: usize,
    out_phase: *mut QtPhase,
    out_k: *mut usize,
) -> QtStatus {
    if out_phase.is_null() || out_k.is_null() {
        return usage("out_phase / out_k must not be NULL");
    }
    let qp = match QParams::new(q) {
        Ok(v) => v,
        Err(e) => return fail(e),
    };
    let profile = match build_profile(slow_indices, slow_rates, n_slow) {
        Ok(p) => p,
        Err(code) => return code,
    };
    match hydro::classify_phase(qp, theta, &profile, hydro::DEFAULT_BOUNDARY_TOL) {
        Ok(phase) => {
            unsafe {
                *out_phase = match phase {
                    hydro::Phase::Gue => QtPhase::Gue,
                    hydro::Phase::Critical => QtPhase::Critical,
                    hydro::Phase::Gaussian => QtPhase::Gaussian,
                };
                *out_k = profile.slow_multiplicity();
            }
            QtStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Hydrodynamic constants `kappa, f, chi` (always) and `g, sigma` (when
/// `alpha < 1`).
///
/// # Safety
/// `out` must be a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qt_hydro_constants(
    q: f64,
    theta: f64,
    alpha: f64,
    out: *mut QtHydroConstants,
) -> QtStatus {
    if out.is_null() {
        return usage("out must not be NULL");
    }
    let qp = match QParams::new(q) {
        Ok(v) => v,
        Err(e) => return fail(e),
    };
    match hydro::HydroConstants::new(qp, theta, alpha) {
        Ok(hc) => {
            unsafe {
                *out = QtHydroConstants {
                    kappa: hc.kappa,
                    f: hc.f,
                    chi: hc.chi,
                    g: hc.g.unwrap_or(f64::NAN),
                    sigma: hc.sigma.unwrap_or(f64::NAN),
                    has_shock_constants: i32::from(hc.g.is_some()),
                };
            }
            QtStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// `b = c (log q)^2 / (2 chi^{2/3})`, the BBP shift of the critical branch.
///
/// # Safety
/// `out` must be a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qt_bbp_shift(q: f64, theta: f64, c: f64, out: *mut f64) -> QtStatus {
    if out.is_null() {
        return usage("out must not be NULL");
    }
    let qp = match QParams::new(q) {
        Ok(v) => v,
        Err(e) => return fail(e),
    };
    match harness::bbp_shift(qp, theta, c) {
        Ok(b) => {
            unsafe { *out = b };
            QtStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Opaque handle to a tabulated limit CDF.
pub struct QtCdf {
    table: CdfTable,
}

fn cdf_new(spec: KernelSpec, out: *mut *mut QtCdf) -> QtStatus {
    if out.is_null() {
        return usage("out must not be NULL");
    }
    match CdfTable::build_default(&spec) {
        Ok(table) => {
            let handle = Box::new(QtCdf { table });
            unsafe { *out = Box::into_raw(handle) };
            QtStatus::Ok
        }
        Err(e) => {
            unsafe { *out = ptr::null_mut() };
            fail(e)
        }
    }
}

/// Tabulate the GUE Tracy-Widom CDF. Building a table takes a few seconds.
///
/// # Safety
/// `out` must be a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qt_cdf_new_gue(out: *mut *mut QtCdf) -> QtStatus {
    cdf_new(KernelSpec::airy(), out)
}

/// Tabulate the BBP CDF with shifts `b[0..k]`.
///
/// # Safety
/// `b` must point to `k` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qt_cdf_new_bbp(b: *const f64, k: usize, out: *mut *mut QtCdf) -> QtStatus {
    if k > 0 && b.is_null() {
        return usage("b must not be NULL when k > 0");
    }
    let shifts = if k == 0 {
        Vec::new()
    } else {
        unsafe { std::slice::from_raw_parts(b, k) }.to_vec()
    };
    match KernelSpec::bbp(shifts) {
        Ok(spec) => cdf_new(spec, out),
        Err(e) => fail(e),
    }
}

/// Tabulate `G_k`, the law of the largest eigenvalue of a k x k GUE.
///
/// # Safety
/// `out` must be a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qt_cdf_new_gk(k: usize, out: *mut *mut QtCdf) -> QtStatus {
    match KernelSpec::hermite(k) {
        Ok(spec) => cdf_new(spec, out),
        Err(e) => fail(e),
    }
}

/// Evaluate a tabulated CDF.
///
/// # Safety
/// `cdf` must be a live handle from `qt_cdf_new_*`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qt_cdf_eval(cdf: *const QtCdf, x: f64, out: *mut f64) -> QtStatus {
    if cdf.is_null() || out.is_null() {
        return usage("cdf / out must not be NULL");
    }
    let handle = unsafe { &*cdf };
    unsafe { *out = handle.table.eval(x) };
    QtStatus::Ok
}

/// Release a CDF handle (NULL is a no-op).
///
/// # Safety
/// `cdf` must be NULL or a handle obtained from `qt_cdf_new_*`, released at
/// most once.
#[no_mangle]
pub unsafe extern "C" fn qt_cdf_free(cdf: *mut QtCdf) {
    if !cdf.is_null() {
        drop(unsafe { Box::from_raw(cdf) });
    }
}

/// Kolmogorov-Smirnov distance of samples against a tabulated CDF.
///
/// # Safety
/// `samples` must point to `n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qt_ks_statistic(
    samples: *const f64,
    n: usize,
    cdf: *const QtCdf,
    out: *mut f64,
) -> QtStatus {
    if samples.is_null() || cdf.is_null() || out.is_null() {
        return usage("samples / cdf / out must not be NULL");
    }
    let data = unsafe { std::slice::from_raw_parts(samples, n) }.to_vec();
    let dist = match EmpiricalDistribution::new(data) {
        Ok(d) => d,
        Err(e) => return fail(e),
    };
    let handle = unsafe { &*cdf };
    unsafe { *out = dist.ks_statistic(|x| handle.table.eval(x)) };
    QtStatus::Ok
}

/// Draw `runs` rescaled fluctuation samples `xi` of the `n`-th particle at
/// the scaling-plan horizon, writing them to `out_xi[0..runs]`. Run `j`
/// uses RNG stream `j` of `master_seed`, so results do not depend on
/// `threads`.
///
/// # Safety
/// `out_xi` must point to `runs` writable doubles; the slow arrays must
/// contain `n_slow` readable elements (or be NULL with `n_slow = 0`).
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn qt_monte_carlo_xi(
    q: f64,
    theta: f64,
    c: f64,
    n: u64,
    runs: u64,
    slow_indices: *const usize,
    slow_rates: *const f64,
    n_slow: usize,
    master_seed: u64,
    threads: usize,
    out_xi: *mut f64,
) -> QtStatus {
    if out_xi.is_null() {
        return usage("out_xi must not be NULL");
    }
    let qp = match QParams::new(q) {
        Ok(v) => v,
        Err(e) => return fail(e),
    };
    let profile = match build_profile(slow_indices, slow_rates, n_slow) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let plan = match hydro::scaling_plan(qp, theta, c, n, &profile) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    let jobs = [MonteCarloJob { n, profile, plan }];
    match monte_carlo_jobs(qp, &jobs, runs, master_seed, threads) {
        Ok(table) => {
            let out = unsafe { std::slice::from_raw_parts_mut(out_xi, runs as usize) };
            for (slot, row) in out.iter_mut().zip(table.rows.iter()) {
                *slot = row.xi;
            }
            QtStatus::Ok
        }
        Err(e) => fail(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn version_is_nul_terminated() {
        let p = qt_version();
        let s = unsafe { std::ffi::CStr::from_ptr(p) };
        assert_eq!(s.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
