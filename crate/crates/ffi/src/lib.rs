//! C interface to `sympidx`.
//!
//! Objects are opaque handles created by `*_new` / `*_from_json` and released
//! with the matching `*_free`. Every fallible call returns a
//! [`SympidxStatus`]; on failure the message is available from
//! [`sympidx_last_error`] on the same thread until the next call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sympidx::flows::{ellipsoid_orbit_index, EllipsoidSpec};
use sympidx::indices::{cz_index, mean_index, SymplecticPath};
use sympidx::linalg::Mat;
use sympidx::maslov::{maslov_index_with, CoisotropicLoop, HolonomyPath, LiftStrategy};
use sympidx::pathio::{read_holonomy, read_loop, read_matrix, read_path};
use sympidx::rho::compute_rho;
use sympidx::sympcore::{validate_symplectic, SymplecticMatrix};
use sympidx::Error;

/// Result of every fallible call. Values 2 and 3 match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SympidxStatus {
    Ok = 0,
    /// Null pointer, bad UTF-8, or a size that does not fit.
    InvalidArgument = 1,
    /// The input was rejected by validation.
    Input = 2,
    /// The numerics failed (refinement exhausted, ill-conditioned spectrum).
    Numerical = 3,
    /// A bug inside the library; the call was aborted.
    Internal = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SympidxStrategy {
    BlockAssembly = 0,
    FrameTransport = 1,
}

/// Certified symplectic matrix.
pub struct SympidxMatrix(SymplecticMatrix);

/// Sampled symplectic path.
pub struct SympidxPath(SymplecticPath);

/// Coisotropic loop together with its holonomy.
pub struct SympidxLoop {
    lp: CoisotropicLoop,
    hol: HolonomyPath,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

enum Failure {
    Arg(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SympidxStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SympidxStatus::Ok,
        Ok(Err(Failure::Arg(m))) => {
            set_error(m);
            SympidxStatus::InvalidArgument
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            if e.is_numerical() {
                SympidxStatus::Numerical
            } else {
                SympidxStatus::Input
            }
        }
        Err(_) => {
            set_error("internal error: panic inside sympidx".into());
            SympidxStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Arg(format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Arg(format!("{what} is not valid UTF-8")))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Arg(format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::Arg(format!("{what} is null")))
}

fn out_ptr<T>(p: *mut T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure::Arg(format!("{what} is null")))
    } else {
        Ok(())
    }
}

fn frame_count(half_dim: usize, extra: usize) -> Result<usize, Failure> {
    let d = half_dim
        .checked_mul(2)
        .ok_or_else(|| Failure::Arg("half_dim too large".into()))?;
    d.checked_mul(d)
        .and_then(|x| x.checked_mul(extra))
        .ok_or_else(|| Failure::Arg("matrix data too large".into()))
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next call into the library from this thread.
#[no_mangle]
pub extern "C" fn sympidx_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sympidx_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Validate a row-major `2n × 2n` matrix as symplectic within `tol`.
///
/// # Safety
/// `entries` must point to `4 n²` doubles and `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn sympidx_matrix_new(
    half_dim: usize,
    entries: *const f64,
    tol: f64,
    out: *mut *mut SympidxMatrix,
) -> SympidxStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let data = slice(entries, frame_count(half_dim, 1)?, "entries")?;
        let d = 2 * half_dim;
        let m = validate_symplectic(Mat::from_row_slice(d, d, data), tol)?;
        *out = Box::into_raw(Box::new(SympidxMatrix(m)));
        Ok(())
    })
}

/// Parse a `matrix/1` JSON document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sympidx_matrix_from_json(json: *const c_char, out: *mut *mut SympidxMatrix) -> SympidxStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let (m, _) = read_matrix(text(json, "json")?.as_bytes())?;
        *out = Box::into_raw(Box::new(SympidxMatrix(m)));
        Ok(())
    })
}

/// # Safety
/// `m` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sympidx_matrix_free(m: *mut SympidxMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// ρ-invariant of `m`, written as real and imaginary parts.
///
/// # Safety
/// `m` must be a live handle; `re` and `im` writable.
#[no_mangle]
pub unsafe extern "C" fn sympidx_rho(m: *const SympidxMatrix, re: *mut f64, im: *mut f64) -> SympidxStatus {
    guard(|| {
        out_ptr(re, "re")?;
        out_ptr(im, "im")?;
        let z = compute_rho(&handle(m, "matrix")?.0)?;
        *re = z.re;
        *im = z.im;
        Ok(())
    })
}

/// Build a path from `count` samples: `times[count]` and `count` row-major
/// `2n × 2n` frames laid end to end.
///
/// # Safety
/// `times` must hold `count` doubles, `frames` `count · 4n²`, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sympidx_path_new(
    half_dim: usize,
    count: usize,
    times: *const f64,
    frames: *const f64,
    tol: f64,
    out: *mut *mut SympidxPath,
) -> SympidxStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let t = slice(times, count, "times")?;
        let f = slice(frames, frame_count(half_dim, count)?, "frames")?;
        let d = 2 * half_dim;
        let mats = f.chunks_exact(d * d).map(|c| Mat::from_row_slice(d, d, c)).collect();
        let p = SymplecticPath::new(half_dim, t.to_vec(), mats, tol)?;
        *out = Box::into_raw(Box::new(SympidxPath(p)));
        Ok(())
    })
}

/// Parse a `symplectic-path/1` JSON document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sympidx_path_from_json(json: *const c_char, out: *mut *mut SympidxPath) -> SympidxStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let (p, _) = read_path(text(json, "json")?.as_bytes())?;
        *out = Box::into_raw(Box::new(SympidxPath(p)));
        Ok(())
    })
}

/// # Safety
/// `p` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sympidx_path_free(p: *mut SympidxPath) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Mean index Δ of the path.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sympidx_mean_index(p: *const SympidxPath, out: *mut f64) -> SympidxStatus {
    guard(|| {
        out_ptr(out, "out")?;
        *out = mean_index(&handle(p, "path")?.0)?.value();
        Ok(())
    })
}

/// Conley–Zehnder index of a path with nondegenerate endpoint.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sympidx_cz_index(p: *const SympidxPath, out: *mut i64) -> SympidxStatus {
    guard(|| {
        out_ptr(out, "out")?;
        *out = cz_index(&handle(p, "path")?.0)?.value() as i64;
        Ok(())
    })
}

/// Parse a `coisotropic-loop/1` document and its `holonomy/1` document.
///
/// # Safety
/// Both strings must be NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sympidx_loop_from_json(
    loop_json: *const c_char,
    holonomy_json: *const c_char,
    out: *mut *mut SympidxLoop,
) -> SympidxStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let (lp, _) = read_loop(text(loop_json, "loop_json")?.as_bytes())?;
        let (hol, _) = read_holonomy(text(holonomy_json, "holonomy_json")?.as_bytes())?;
        *out = Box::into_raw(Box::new(SympidxLoop { lp, hol }));
        Ok(())
    })
}

/// # Safety
/// `l` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sympidx_loop_free(l: *mut SympidxLoop) {
    if !l.is_null() {
        drop(Box::from_raw(l));
    }
}

/// Maslov index of the loop using the chosen lift.
///
/// # Safety
/// `l` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sympidx_maslov_index(
    l: *const SympidxLoop,
    strategy: SympidxStrategy,
    out: *mut f64,
) -> SympidxStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let l = handle(l, "loop")?;
        let s = match strategy {
            SympidxStrategy::BlockAssembly => LiftStrategy::BlockAssembly,
            SympidxStrategy::FrameTransport => LiftStrategy::FrameTransport,
        };
        *out = maslov_index_with(&l.lp, &l.hol, s)?.value();
        Ok(())
    })
}

/// Index of the orbit `orbit` (1-based) on the ellipsoid with weights
/// `lambdas[n]`, numerically and in closed form.
///
/// # Safety
/// `lambdas` must hold `n` doubles; both outputs writable.
#[no_mangle]
pub unsafe extern "C" fn sympidx_ellipsoid(
    lambdas: *const f64,
    n: usize,
    orbit: usize,
    samples: usize,
    mu_numeric: *mut f64,
    mu_closed_form: *mut f64,
) -> SympidxStatus {
    guard(|| {
        out_ptr(mu_numeric, "mu_numeric")?;
        out_ptr(mu_closed_form, "mu_closed_form")?;
        let spec = EllipsoidSpec::new(slice(lambdas, n, "lambdas")?.to_vec(), orbit)?;
        let r = ellipsoid_orbit_index(&spec, samples)?;
        *mu_numeric = r.mu_numeric;
        *mu_closed_form = r.mu_closed_form;
        Ok(())
    })
}
