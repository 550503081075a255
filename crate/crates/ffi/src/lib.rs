//! C ABI for the pseudo-spectral mild-solution toolkit.
//!
//! Conventions:
//! - Every object is an opaque handle created by a `*_new`-style function
//!   and released by its matching `*_free`; `free` accepts null.
//! - Functions return `NSMILD_OK` (0) on success or a negative status
//!   code; outputs are written through pointers only on success.
//! - On failure a thread-local message is set; retrieve it with
//!   [`nsmild_last_error`].
//! - Panics never cross the boundary: they are caught and reported as
//!   `NSMILD_ERR_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use nsmild::config::ExperimentConfig;
use nsmild::decay::{fit_decay_exponent, theoretical_exponent, ExponentSpec};
use nsmild::experiment::{run_experiment, RunOptions};
use nsmild::solver::{integrate, picard_solve, pressure, SolverConfig};
use nsmild::spaces::{
    besov_norm_vec, kato_norm, lq_norm_vec, sobolev_norm, sobolev_norm_vec, BesovSpec, NormSpec,
    Trajectory,
};
use nsmild::spectral::{
    heat_semigroup_vec, leray_project, make_initial_data, GridSpec, InitialData, SpectralField,
    VectorField,
};
use nsmild::verify::{beta_integral, Half};
use nsmild::Error;

pub const NSMILD_OK: i32 = 0;
/// A required pointer argument was null.
pub const NSMILD_ERR_NULL: i32 = -1;
/// An argument was rejected (bad grid, exponent out of range, parse error).
pub const NSMILD_ERR_INVALID: i32 = -2;
/// The fixed-point iteration refused the data as too large.
pub const NSMILD_ERR_SMALLNESS: i32 = -3;
/// The iteration budget ran out before the tolerance was met.
pub const NSMILD_ERR_NO_CONVERGENCE: i32 = -4;
/// The time integration left the trusted regime.
pub const NSMILD_ERR_BLOWUP: i32 = -5;
/// Operating-system I/O failure.
pub const NSMILD_ERR_IO: i32 = -6;
/// A file was readable but not in the expected format.
pub const NSMILD_ERR_FORMAT: i32 = -7;
/// An internal invariant failed; the handle states are still valid.
pub const NSMILD_ERR_PANIC: i32 = -8;

/// Opaque periodic grid description.
pub struct NsmildGrid(GridSpec);
/// Opaque divergence-free velocity field.
pub struct NsmildField(VectorField);
/// Opaque scalar field (for example a recovered pressure).
pub struct NsmildScalar(SpectralField);
/// Opaque time-stamped sequence of velocity fields.
pub struct NsmildTrajectory(Trajectory);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().map(|c| if c == '\0' { ' ' } else { c }).collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap_or_default());
}

fn code_of(e: &Error) -> i32 {
    match e {
        Error::SmallnessViolated(_) => NSMILD_ERR_SMALLNESS,
        Error::NoConvergence { .. } => NSMILD_ERR_NO_CONVERGENCE,
        Error::BlowUp { .. } => NSMILD_ERR_BLOWUP,
        Error::Io(_) => NSMILD_ERR_IO,
        Error::Serialization(_) => NSMILD_ERR_FORMAT,
        _ => NSMILD_ERR_INVALID,
    }
}

fn fail(e: &Error) -> i32 {
    set_error(&e.to_string());
    code_of(e)
}

fn guard(f: impl FnOnce() -> i32) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(code) => code,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "internal panic".into());
            set_error(&msg);
            NSMILD_ERR_PANIC
        }
    }
}

/// # Safety
/// `ptr` must be null or valid for reads.
unsafe fn deref<'a, T>(ptr: *const T, name: &str) -> Result<&'a T, i32> {
    if ptr.is_null() {
        set_error(&format!("{name} is null"));
        return Err(NSMILD_ERR_NULL);
    }
    Ok(&*ptr)
}

unsafe fn out_ptr<'a, T>(ptr: *mut T, name: &str) -> Result<&'a mut T, i32> {
    if ptr.is_null() {
        set_error(&format!("{name} is null"));
        return Err(NSMILD_ERR_NULL);
    }
    Ok(&mut *ptr)
}

unsafe fn path_arg(ptr: *const c_char, name: &str) -> Result<PathBuf, i32> {
    if ptr.is_null() {
        set_error(&format!("{name} is null"));
        return Err(NSMILD_ERR_NULL);
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(PathBuf::from(s)),
        Err(_) => {
            set_error(&format!("{name} is not valid UTF-8"));
            Err(NSMILD_ERR_INVALID)
        }
    }
}

macro_rules! ffi_try {
    ($expr:expr) => {
        match $expr {
            Ok(v) => v,
            Err(code) => return code,
        }
    };
}

fn ok_or<T>(r: Result<T, Error>) -> Result<T, i32> {
    r.map_err(|e| fail(&e))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nsmild_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copy the current thread's last error message into `buf` (truncated to
/// `cap - 1` bytes, always NUL-terminated when `cap > 0`). Returns the
/// full message length in bytes, excluding the terminator, so callers can
/// retry with a larger buffer.
///
/// # Safety
/// `buf` must be valid for writes of `cap` bytes, or `cap` must be 0.
#[no_mangle]
pub unsafe extern "C" fn nsmild_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Create a periodic grid: dimension `d` (2 or 3), `n` modes per axis
/// (even), box side `l`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nsmild_grid_new(
    d: usize,
    n: usize,
    l: f64,
    out: *mut *mut NsmildGrid,
) -> i32 {
    guard(|| {
        let out = ffi_try!(out_ptr(out, "out"));
        let grid = ffi_try!(ok_or(GridSpec::new(d, n, l)));
        *out = Box::into_raw(Box::new(NsmildGrid(grid)));
        NSMILD_OK
    })
}

/// # Safety
/// `grid` must be a handle from this library or null; it is invalid after.
#[no_mangle]
pub unsafe extern "C" fn nsmild_grid_free(grid: *mut NsmildGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Read back the grid parameters. Null outputs are skipped.
///
/// # Safety
/// `grid` must be a valid handle; non-null outputs valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nsmild_grid_info(
    grid: *const NsmildGrid,
    d: *mut usize,
    n: *mut usize,
    l: *mut f64,
) -> i32 {
    guard(|| {
        let g = ffi_try!(deref(grid, "grid"));
        if !d.is_null() {
            *d = g.0.d();
        }
        if !n.is_null() {
            *n = g.0.n();
        }
        if !l.is_null() {
            *l = g.0.l();
        }
        NSMILD_OK
    })
}

unsafe fn make_field(
    grid: *const NsmildGrid,
    data: InitialData,
    out: *mut *mut NsmildField,
) -> i32 {
    guard(|| {
        let g = ffi_try!(deref(grid, "grid"));
        let out = ffi_try!(out_ptr(out, "out"));
        let u = ffi_try!(ok_or(make_initial_data(g.0, &data)));
        *out = Box::into_raw(Box::new(NsmildField(u)));
        NSMILD_OK
    })
}

/// Exact single-mode solution data with the given amplitude.
///
/// # Safety
/// `grid` must be a valid handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nsmild_taylor_green(
    grid: *const NsmildGrid,
    amplitude: f64,
    out: *mut *mut NsmildField,
) -> i32 {
    make_field(grid, InitialData::TaylorGreen { amplitude }, out)
}

/// Random-phase data with spectral slope `beta`, deterministic in `seed`,
/// scaled to the given `L^2` norm.
///
/// # Safety
/// `grid` must be a valid handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nsmild_random_slope(
    grid: *const NsmildGrid,
    beta: f64,
    seed: u64,
    amplitude: f64,
    out: *mut *mut NsmildField,
) -> i32 {
    make_field(
        grid,
        InitialData::RandomSlope {
            beta,
            seed,
            amplitude,
        },
        out,
    )
}

/// Columnar vortex with Gaussian stream function of the given width.
///
/// # Safety
/// `grid` must be a valid handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nsmild_gaussian_vortex(
    grid: *const NsmildGrid,
    width: f64,
    amplitude: f64,
    out: *mut *mut NsmildField,
) -> i32 {
    make_field(grid, InitialData::GaussianVortex { width, amplitude }, out)
}

/// # Safety
/// `field` must be a handle from this library or null; invalid after.
#[no_mangle]
pub unsafe extern "C" fn nsmild_field_free(field: *mut NsmildField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// # Safety
/// `field` must be a valid handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nsmild_field_clone(
    field: *const NsmildField,
    out: *mut *mut NsmildField,
) -> i32 {
    guard(|| {
        let f = ffi_try!(deref(field, "field"));
        let out = ffi_try!(out_ptr(out, "out"));
        *out = Box::into_raw(Box::new(NsmildField(f.0.clone())));
        NSMILD_OK
    })
}

/// Apply the heat semigroup for time `t >= 0`.
///
/// # Safety
/// `field` must be a valid handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nsmild_field_heat_evolve(
    field: *const NsmildField,
    t: f64,
    out: *mut *mut NsmildField,
) -> i32 {
    guard(|| {
        let f = ffi_try!(deref(field, "field"));
        let out = ffi_try!(out_ptr(out, "out"));
        let evolved = ffi_try!(ok_or(heat_semigroup_vec(&f.0, t)));
        *out = Box::into_raw(Box::new(NsmildField(evolved)));
        NSMILD_OK
    })
}

/// Project onto divergence-free fields.
///
/// # Safety
/// `field` must be a valid handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nsmild_field_leray_project(
    field: *const NsmildField,
    out: *mut *mut NsmildField,
) -> i32 {
    guard(|| {
        let f = ffi_try!(deref(field, "field"));
        let out = ffi_try!(out_ptr(out, "out"));
        let projected = ffi_try!(ok_or(leray_project(&f.0)));
        *out = Box::into_raw(Box::new(NsmildField(projected)));
        NSMILD_OK
    })
}

/// Lebesgue norm of the velocity, `1 <= q <= inf` (pass `INFINITY` for the
/// sup norm).
///
/// # Safety
/// `field` must be a valid handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nsmild_field_lq_norm(
    field: *const NsmildField,
    q: f64,
    out: *mut f64,
) -> i32 {
    guard(|| {
        let f = ffi_try!(deref(field, "field"));
        let out = ffi_try!(out_ptr(out, "out"));
        *out = ffi_try!(ok_or(lq_norm_vec(&f.0, q)));
        NSMILD_OK
    })
}

/// Homogeneous Sobolev norm `||Lambda^s u||_q`.
///
/// # Safety
/// `field` must be a valid handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nsmild_field_sobolev_norm(
    field: *const NsmildField,
    s: f64,
    q: f64,
    out: *mut f64,
) -> i32 {
    guard(|| {
        let f = ffi_try!(deref(field, "field"));
        let out = ffi_try!(out_ptr(out, "out"));
        let spec = ffi_try!(ok_or(NormSpec::new(s, q)));
        *out = ffi_try!(ok_or(sobolev_norm_vec(&f.0, &spec)));
        NSMILD_OK
    })
}

/// Heat-characterization Besov norm with negative smoothness `s < 0`,
/// evaluated on the grid's resolved time window.
///
/// # Safety
/// `field` must be a valid handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nsmild_field_besov_norm(
    field: *const NsmildField,
    s: f64,
    q: f64,
    out: *mut f64,
) -> i32 {
    guard(|| {
        let f = ffi_try!(deref(field, "field"));
        let out = ffi_try!(out_ptr(out, "out"));
        let spec = ffi_try!(ok_or(BesovSpec::for_grid(f.0.grid(), s, q)));
        *out = ffi_try!(ok_or(besov_norm_vec(&f.0, &spec)));
        NSMILD_OK
    })
}

/// Write the velocity in the binary container format.
///
/// # Safety
/// `field` must be a valid handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn nsmild_field_save(
    field: *const NsmildField,
    path: *const c_char,
) -> i32 {
    guard(|| {
        let f = ffi_try!(deref(field, "field"));
        let p = ffi_try!(path_arg(path, "path"));
        ffi_try!(ok_or(nsmild::io::write_vector_field(p, &f.0)));
        NSMILD_OK
    })
}

/// Read a velocity written by [`nsmild_field_save`].
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nsmild_field_load(
    path: *const c_char,
    out: *mut *mut NsmildField,
) -> i32 {
    guard(|| {
        let p = ffi_try!(path_arg(path, "path"));
        let out = ffi_try!(out_ptr(out, "out"));
        let u = ffi_try!(ok_or(nsmild::io::read_vector_field(p)));
        *out = Box::into_raw(Box::new(NsmildField(u)));
        NSMILD_OK
    })
}

/// Integrate the full nonlinear equations from `u0` over `[0, t_final]`
/// with a uniform mesh of `n_steps` intervals.
///
/// # Safety
/// `u0` must be a valid handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nsmild_integrate(
    u0: *const NsmildField,
    t_final: f64,
    n_steps: usize,
    out: *mut *mut NsmildTrajectory,
) -> i32 {
    guard(|| {
        let u = ffi_try!(deref(u0, "u0"));
        let out = ffi_try!(out_ptr(out, "out"));
        let cfg = SolverConfig::new(t_final, n_steps);
        let traj = ffi_try!(ok_or(integrate(&u.0, &cfg)));
        *out = Box::into_raw(Box::new(NsmildTrajectory(traj)));
        NSMILD_OK
    })
}

/// Solve the fixed-point formulation by Picard iteration. On success the
/// iteration count is written to `iterations` (when non-null). Data that
/// is too large for the contraction returns `NSMILD_ERR_SMALLNESS`.
///
/// # Safety
/// `u0` must be a valid handle; `out` valid for writes; `iterations`
/// null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nsmild_picard_solve(
    u0: *const NsmildField,
    t_final: f64,
    n_steps: usize,
    tol: f64,
    max_iter: usize,
    out: *mut *mut NsmildTrajectory,
    iterations: *mut usize,
) -> i32 {
    guard(|| {
        let u = ffi_try!(deref(u0, "u0"));
        let out = ffi_try!(out_ptr(out, "out"));
        let mut cfg = SolverConfig::new(t_final, n_steps);
        cfg.picard_tol = tol;
        cfg.picard_max_iter = max_iter;
        let sol = ffi_try!(ok_or(picard_solve(&u.0, &cfg)));
        if !iterations.is_null() {
            *iterations = sol.iterations;
        }
        *out = Box::into_raw(Box::new(NsmildTrajectory(sol.trajectory)));
        NSMILD_OK
    })
}

/// # Safety
/// `traj` must be a handle from this library or null; invalid after.
#[no_mangle]
pub unsafe extern "C" fn nsmild_trajectory_free(traj: *mut NsmildTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Number of stored samples.
///
/// # Safety
/// `traj` must be a valid handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nsmild_trajectory_len(
    traj: *const NsmildTrajectory,
    out: *mut usize,
) -> i32 {
    guard(|| {
        let t = ffi_try!(deref(traj, "traj"));
        let out = ffi_try!(out_ptr(out, "out"));
        *out = t.0.len();
        NSMILD_OK
    })
}

/// Time of sample `index`.
///
/// # Safety
/// `traj` must be a valid handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nsmild_trajectory_time(
    traj: *const NsmildTrajectory,
    index: usize,
    out: *mut f64,
) -> i32 {
    guard(|| {
        let t = ffi_try!(deref(traj, "traj"));
        let out = ffi_try!(out_ptr(out, "out"));
        if index >= t.0.len() {
            set_error(&format!(
                "index {index} out of range for {} samples",
                t.0.len()
            ));
            return NSMILD_ERR_INVALID;
        }
        *out = t.0.sample(index).0;
        NSMILD_OK
    })
}

/// Copy of the velocity at sample `index`.
///
/// # Safety
/// `traj` must be a valid handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nsmild_trajectory_field(
    traj: *const NsmildTrajectory,
    index: usize,
    out: *mut *mut NsmildField,
) -> i32 {
    guard(|| {
        let t = ffi_try!(deref(traj, "traj"));
        let out = ffi_try!(out_ptr(out, "out"));
        if index >= t.0.len() {
            set_error(&format!(
                "index {index} out of range for {} samples",
                t.0.len()
            ));
            return NSMILD_ERR_INVALID;
        }
        *out = Box::into_raw(Box::new(NsmildField(t.0.sample(index).1.clone())));
        NSMILD_OK
    })
}

/// Weighted supremum `sup_t t^{alpha/2} ||Lambda^s u(t)||_q` over the
/// trajectory, with `alpha` the scaling weight of `(s, q)`.
///
/// # Safety
/// `traj` must be a valid handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nsmild_trajectory_kato_norm(
    traj: *const NsmildTrajectory,
    s: f64,
    q: f64,
    out: *mut f64,
) -> i32 {
    guard(|| {
        let t = ffi_try!(deref(traj, "traj"));
        let out = ffi_try!(out_ptr(out, "out"));
        let spec = ffi_try!(ok_or(NormSpec::new(s, q)));
        *out = ffi_try!(ok_or(kato_norm(&t.0, &spec)));
        NSMILD_OK
    })
}

/// Write the trajectory in the binary container format.
///
/// # Safety
/// `traj` must be a valid handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn nsmild_trajectory_save(
    traj: *const NsmildTrajectory,
    path: *const c_char,
) -> i32 {
    guard(|| {
        let t = ffi_try!(deref(traj, "traj"));
        let p = ffi_try!(path_arg(path, "path"));
        ffi_try!(ok_or(nsmild::io::write_trajectory(p, &t.0)));
        NSMILD_OK
    })
}

/// Read a trajectory written by [`nsmild_trajectory_save`].
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nsmild_trajectory_load(
    path: *const c_char,
    out: *mut *mut NsmildTrajectory,
) -> i32 {
    guard(|| {
        let p = ffi_try!(path_arg(path, "path"));
        let out = ffi_try!(out_ptr(out, "out"));
        let t = ffi_try!(ok_or(nsmild::io::read_trajectory(p)));
        *out = Box::into_raw(Box::new(NsmildTrajectory(t)));
        NSMILD_OK
    })
}

/// Recover the pressure of a velocity field as a scalar handle.
///
/// # Safety
/// `field` must be a valid handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nsmild_pressure(
    field: *const NsmildField,
    out: *mut *mut NsmildScalar,
) -> i32 {
    guard(|| {
        let f = ffi_try!(deref(field, "field"));
        let out = ffi_try!(out_ptr(out, "out"));
        let p = ffi_try!(ok_or(pressure(&f.0)));
        *out = Box::into_raw(Box::new(NsmildScalar(p)));
        NSMILD_OK
    })
}

/// # Safety
/// `scalar` must be a handle from this library or null; invalid after.
#[no_mangle]
pub unsafe extern "C" fn nsmild_scalar_free(scalar: *mut NsmildScalar) {
    if !scalar.is_null() {
        drop(Box::from_raw(scalar));
    }
}

/// Homogeneous Sobolev norm of a scalar field.
///
/// # Safety
/// `scalar` must be a valid handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nsmild_scalar_sobolev_norm(
    scalar: *const NsmildScalar,
    s: f64,
    q: f64,
    out: *mut f64,
) -> i32 {
    guard(|| {
        let f = ffi_try!(deref(scalar, "scalar"));
        let out = ffi_try!(out_ptr(out, "out"));
        let spec = ffi_try!(ok_or(NormSpec::new(s, q)));
        *out = ffi_try!(ok_or(sobolev_norm(&f.0, &spec)));
        NSMILD_OK
    })
}

/// Predicted decay envelope exponent. `field_kind`: 0 velocity,
/// 1 pressure; `n` is the velocity time-derivative order.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nsmild_theoretical_exponent(
    field_kind: i32,
    s: f64,
    q: f64,
    n: u32,
    d: usize,
    out: *mut f64,
) -> i32 {
    guard(|| {
        let out = ffi_try!(out_ptr(out, "out"));
        let spec = match field_kind {
            0 => ExponentSpec::velocity(s, q, n),
            1 => ExponentSpec::pressure(s, q),
            _ => {
                set_error("field_kind must be 0 (velocity) or 1 (pressure)");
                return NSMILD_ERR_INVALID;
            }
        };
        *out = ffi_try!(ok_or(theoretical_exponent(&spec, d)));
        NSMILD_OK
    })
}

/// Least-squares power-law fit `values ~ amplitude * t^exponent` over
/// `len >= 5` positive samples. Null result pointers are skipped.
///
/// # Safety
/// `times` and `values` must be valid for `len` reads; non-null result
/// pointers valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nsmild_fit_decay(
    times: *const f64,
    values: *const f64,
    len: usize,
    exponent: *mut f64,
    amplitude: *mut f64,
    r_squared: *mut f64,
) -> i32 {
    guard(|| {
        if times.is_null() || values.is_null() {
            set_error("times/values are null");
            return NSMILD_ERR_NULL;
        }
        let ts = std::slice::from_raw_parts(times, len);
        let vs = std::slice::from_raw_parts(values, len);
        let rows: Vec<(f64, f64)> = ts.iter().copied().zip(vs.iter().copied()).collect();
        let fit = ffi_try!(ok_or(fit_decay_exponent(&rows)));
        if !exponent.is_null() {
            *exponent = fit.exponent;
        }
        if !amplitude.is_null() {
            *amplitude = fit.amplitude;
        }
        if !r_squared.is_null() {
            *r_squared = fit.r_squared;
        }
        NSMILD_OK
    })
}

/// One half of the singular kernel integral
/// `int_0^1 (1 - tau)^{-gamma} tau^{-theta} dtau`, split at `tau = 1/2`.
/// `half`: 0 lower, 1 upper. Divergent hypotheses return
/// `NSMILD_ERR_INVALID`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nsmild_beta_integral(
    gamma: f64,
    theta: f64,
    half: i32,
    out: *mut f64,
) -> i32 {
    guard(|| {
        let out = ffi_try!(out_ptr(out, "out"));
        let h = match half {
            0 => Half::Lower,
            1 => Half::Upper,
            _ => {
                set_error("half must be 0 (lower) or 1 (upper)");
                return NSMILD_ERR_INVALID;
            }
        };
        *out = ffi_try!(ok_or(beta_integral(gamma, theta, h)));
        NSMILD_OK
    })
}

/// Run a full experiment from a TOML configuration file, writing
/// artifacts under `output_dir` (null defers to the environment and the
/// file). Writes 1 to `all_pass` when every criterion passed, else 0.
///
/// # Safety
/// `config_path` must be a NUL-terminated string; `output_dir` null or
/// NUL-terminated; `all_pass` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nsmild_run_experiment(
    config_path: *const c_char,
    output_dir: *const c_char,
    all_pass: *mut i32,
) -> i32 {
    guard(|| {
        let cfg_path = ffi_try!(path_arg(config_path, "config_path"));
        let out_dir = if output_dir.is_null() {
            None
        } else {
            Some(ffi_try!(path_arg(output_dir, "output_dir")))
        };
        let cfg = ffi_try!(ok_or(ExperimentConfig::load(cfg_path)));
        let summary = ffi_try!(ok_or(run_experiment(
            &cfg,
            &RunOptions {
                output_dir: out_dir,
                threads: None,
            },
        )));
        if !all_pass.is_null() {
            *all_pass = i32::from(summary.all_pass);
        }
        NSMILD_OK
    })
}
