//! C ABI over `harmonic_ball`.
//!
//! Every fallible function returns an [`HbStatus`] and writes its result
//! through an out-pointer. On failure a message is kept per thread and can be
//! read with [`hb_last_error_message`]. Handles returned through `out`
//! pointers are owned by the caller and released with the matching `_free`
//! function. Panics never cross the boundary; they surface as
//! `HB_STATUS_PANIC`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use harmonic_ball::energetics::dirichlet_energy;
use harmonic_ball::error::Error;
use harmonic_ball::geometry::ln_unit_ball_volume;
use harmonic_ball::harmonics::{identity_map, random_harmonic_polynomial, zonal_on_axis, HarmonicMap, MapKind};
use harmonic_ball::identities::{green_residual, pohozaev_residual};
use harmonic_ball::integration::{integrate_poly_ball, integrate_poly_sphere, QuadratureSpec};
use harmonic_ball::polynomial::text::{format_exact, parse_exact};
use harmonic_ball::polynomial::ExactPoly;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Dimension = 4,
    Domain = 5,
    Refused = 6,
    ZeroEnergy = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Sparse polynomial with exact rational coefficients.
pub struct HbPoly(ExactPoly);

/// Polynomial map `R^n -> R^m` together with its harmonicity certificate.
pub struct HbMap(HarmonicMap);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(HbStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Dimension { .. } | Error::Axis { .. } => HbStatus::Dimension,
            Error::Domain(_) | Error::Config(_) => HbStatus::Domain,
            Error::Refused(_) => HbStatus::Refused,
            Error::ZeroEnergy(_) => HbStatus::ZeroEnergy,
            Error::Parse { .. } => HbStatus::Parse,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(HbStatus::NullPointer, format!("{what} is null"))
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> HbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            HbStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            HbStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, v: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(v);
    Ok(())
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null("text"));
    }
    CStr::from_ptr(s).to_str().map_err(|e| Failure(HbStatus::InvalidUtf8, e.to_string()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hb_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Length in bytes, without the terminator, of this thread's last error
/// message; 0 when the last call succeeded.
#[no_mangle]
pub extern "C" fn hb_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(0, |c| c.as_bytes().len()))
}

/// Copy this thread's last error message into `buf` (NUL-terminated).
/// Returns `HB_STATUS_BUFFER_TOO_SMALL` when `len` cannot hold it.
#[no_mangle]
pub unsafe extern "C" fn hb_last_error_message(buf: *mut c_char, len: usize) -> HbStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone()).unwrap_or_default();
    copy_c_string(msg.as_bytes_with_nul(), buf, len)
}

unsafe fn copy_c_string(bytes: &[u8], buf: *mut c_char, len: usize) -> HbStatus {
    if bytes.len() > len {
        return HbStatus::BufferTooSmall;
    }
    if buf.is_null() {
        return HbStatus::NullPointer;
    }
    ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, bytes.len());
    HbStatus::Ok
}

/// Parse `text` as a polynomial in `n` variables `x1..xn`.
#[no_mangle]
pub unsafe extern "C" fn hb_poly_parse(text_ptr: *const c_char, n: usize, out: *mut *mut HbPoly) -> HbStatus {
    guard(|| {
        let p = parse_exact(text(text_ptr)?, n)?;
        write_out(out, Box::into_raw(Box::new(HbPoly(p))))
    })
}

#[no_mangle]
pub unsafe extern "C" fn hb_poly_free(p: *mut HbPoly) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

#[no_mangle]
pub unsafe extern "C" fn hb_poly_dimension(p: *const HbPoly, out: *mut usize) -> HbStatus {
    guard(|| write_out(out, deref(p, "poly")?.0.dimension()))
}

/// Canonical text of `p`. `needed` receives the size including the
/// terminator; call with `buf = NULL, len = 0` to query it.
#[no_mangle]
pub unsafe extern "C" fn hb_poly_format(
    p: *const HbPoly,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> HbStatus {
    guard(|| {
        let s = CString::new(format_exact(&deref(p, "poly")?.0)).expect("formatter emits no NUL");
        let bytes = s.as_bytes_with_nul();
        write_out(needed, bytes.len())?;
        match copy_c_string(bytes, buf, len) {
            HbStatus::Ok => Ok(()),
            HbStatus::BufferTooSmall => {
                Err(Failure(HbStatus::BufferTooSmall, format!("need {} bytes, have {len}", bytes.len())))
            }
            s => Err(Failure(s, "buf is null".into())),
        }
    })
}

/// Evaluate `p` at the point `x[0..n]`.
#[no_mangle]
pub unsafe extern "C" fn hb_poly_evaluate(p: *const HbPoly, x: *const f64, n: usize, out: *mut f64) -> HbStatus {
    guard(|| {
        let p = deref(p, "poly")?;
        if x.is_null() {
            return Err(null("x"));
        }
        let v = p.0.evaluate(std::slice::from_raw_parts(x, n))?;
        write_out(out, v)
    })
}

#[no_mangle]
pub unsafe extern "C" fn hb_poly_laplacian(p: *const HbPoly, out: *mut *mut HbPoly) -> HbStatus {
    guard(|| {
        let lap = deref(p, "poly")?.0.laplacian();
        write_out(out, Box::into_raw(Box::new(HbPoly(lap))))
    })
}

/// Exact test `Δp = 0`.
#[no_mangle]
pub unsafe extern "C" fn hb_poly_is_harmonic(p: *const HbPoly, out: *mut bool) -> HbStatus {
    guard(|| write_out(out, deref(p, "poly")?.0.is_harmonic()))
}

/// `∫_{B_r} p` by exact moments.
#[no_mangle]
pub unsafe extern "C" fn hb_poly_integrate_ball(p: *const HbPoly, r: f64, out: *mut f64) -> HbStatus {
    guard(|| write_out(out, integrate_poly_ball(&deref(p, "poly")?.0, r, &QuadratureSpec::exact())?.value))
}

/// `∫_{∂B_r} p` by exact moments.
#[no_mangle]
pub unsafe extern "C" fn hb_poly_integrate_sphere(p: *const HbPoly, r: f64, out: *mut f64) -> HbStatus {
    guard(|| write_out(out, integrate_poly_sphere(&deref(p, "poly")?.0, r, &QuadratureSpec::exact())?.value))
}

unsafe fn emit_map(out: *mut *mut HbMap, m: HarmonicMap) -> Result<(), Failure> {
    write_out(out, Box::into_raw(Box::new(HbMap(m))))
}

/// The identity map `x ↦ x` on `R^n`.
#[no_mangle]
pub unsafe extern "C" fn hb_map_identity(n: usize, out: *mut *mut HbMap) -> HbStatus {
    guard(|| emit_map(out, identity_map(n)?))
}

/// Degree-`k` zonal harmonic about the coordinate axis `axis` (zero-based).
#[no_mangle]
pub unsafe extern "C" fn hb_map_zonal(n: usize, k: u32, axis: usize, out: *mut *mut HbMap) -> HbStatus {
    guard(|| emit_map(out, zonal_on_axis(n, k, axis)?))
}

/// Random homogeneous harmonic polynomial of degree `k`, fixed by `seed`.
#[no_mangle]
pub unsafe extern "C" fn hb_map_random(n: usize, k: u32, seed: u64, out: *mut *mut HbMap) -> HbStatus {
    guard(|| emit_map(out, random_harmonic_polynomial(n, k, seed)?))
}

/// Scalar map from a copy of `p`; harmonicity is certified, not assumed.
#[no_mangle]
pub unsafe extern "C" fn hb_map_from_poly(p: *const HbPoly, out: *mut *mut HbMap) -> HbStatus {
    guard(|| emit_map(out, HarmonicMap::scalar(deref(p, "poly")?.0.clone(), MapKind::Custom)))
}

#[no_mangle]
pub unsafe extern "C" fn hb_map_free(m: *mut HbMap) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

#[no_mangle]
pub unsafe extern "C" fn hb_map_dimension(m: *const HbMap, out: *mut usize) -> HbStatus {
    guard(|| write_out(out, deref(m, "map")?.0.dimension()))
}

#[no_mangle]
pub unsafe extern "C" fn hb_map_is_certified(m: *const HbMap, out: *mut bool) -> HbStatus {
    guard(|| write_out(out, deref(m, "map")?.0.certified()))
}

/// `∫_{B_r} |∇u|²`, exact.
#[no_mangle]
pub unsafe extern "C" fn hb_dirichlet_energy(m: *const HbMap, r: f64, out: *mut f64) -> HbStatus {
    guard(|| write_out(out, dirichlet_energy(&deref(m, "map")?.0, r, &QuadratureSpec::exact())?.value))
}

/// Normalized Pohozaev residual at radius `r`; refuses uncertified maps.
#[no_mangle]
pub unsafe extern "C" fn hb_pohozaev_residual(m: *const HbMap, r: f64, out: *mut f64) -> HbStatus {
    guard(|| write_out(out, pohozaev_residual(&deref(m, "map")?.0, r, &QuadratureSpec::exact())?.normalized_residual))
}

/// Normalized Green residual at radius `r`; refuses uncertified maps.
#[no_mangle]
pub unsafe extern "C" fn hb_green_residual(m: *const HbMap, r: f64, out: *mut f64) -> HbStatus {
    guard(|| write_out(out, green_residual(&deref(m, "map")?.0, r, &QuadratureSpec::exact())?.normalized_residual))
}

/// `ln V_n`, finite for every `n`.
#[no_mangle]
pub extern "C" fn hb_ln_unit_ball_volume(n: usize) -> f64 {
    ln_unit_ball_volume(n)
}
