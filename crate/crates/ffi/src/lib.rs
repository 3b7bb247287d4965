//! C interface to `tracial`.
//!
//! Algebras and tuples cross the boundary as opaque handles owned by the
//! caller and released with the matching `*_free` function. Every fallible
//! call returns a [`TracialStatus`]; on failure a message is kept per thread
//! and can be read with [`tracial_last_error`].
//!
//! Matrix data is passed as interleaved `(re, im)` doubles, row-major, block
//! after block, entry after entry.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;
use std::sync::Arc;

use tracial::algebra::json::InclusionJson;
use tracial::algebra::{Element, TracialAlgebra as Algebra, Tuple};
use tracial::closure::dcl_finite;
use tracial::transport::{wasserstein, TransportOptions};
use tracial::{Error, Mat, C64};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TracialStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    TooLarge = 3,
    /// A result was written but the optimizer did not meet its tolerance.
    Unconverged = 4,
    Panic = 5,
}

/// A weighted direct sum of matrix blocks.
pub struct TracialAlgebra(Arc<Algebra>);

/// A tuple of elements of one algebra.
pub struct TracialTuple(Tuple);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: TracialStatus, msg: &str) -> TracialStatus {
    set_error(msg);
    status
}

fn from_error(e: &Error) -> TracialStatus {
    let status = match e {
        Error::TooLarge(_) => TracialStatus::TooLarge,
        _ => TracialStatus::InvalidInput,
    };
    fail(status, &e.to_string())
}

fn guard(f: impl FnOnce() -> TracialStatus) -> TracialStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(TracialStatus::Panic, "internal panic"))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tracial_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, empty if none. Valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tracial_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds `⊕ M_{dims[j]}` with trace weights `num[j]/den[j]`, which must sum
/// to one.
///
/// # Safety
/// `dims`, `num` and `den` must each point to `blocks` readable values and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tracial_algebra_new(
    blocks: usize,
    dims: *const usize,
    num: *const i64,
    den: *const i64,
    out: *mut *mut TracialAlgebra,
) -> TracialStatus {
    guard(|| {
        if dims.is_null() || num.is_null() || den.is_null() || out.is_null() {
            return fail(TracialStatus::NullPointer, "null argument");
        }
        let (dims, num, den) = unsafe {
            (
                slice::from_raw_parts(dims, blocks),
                slice::from_raw_parts(num, blocks),
                slice::from_raw_parts(den, blocks),
            )
        };
        let parts: Vec<(usize, i64, i64)> = (0..blocks).map(|j| (dims[j], num[j], den[j])).collect();
        match Algebra::from_parts(&parts) {
            Ok(a) => {
                unsafe { *out = Box::into_raw(Box::new(TracialAlgebra(a))) };
                TracialStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// Complex dimension `Σ n_j²`, or 0 for a null handle.
///
/// # Safety
/// `alg` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tracial_algebra_dim(alg: *const TracialAlgebra) -> usize {
    unsafe { alg.as_ref() }.map_or(0, |a| a.0.dim())
}

/// # Safety
/// `alg` must be null or a handle from [`tracial_algebra_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tracial_algebra_free(alg: *mut TracialAlgebra) {
    if !alg.is_null() {
        drop(unsafe { Box::from_raw(alg) });
    }
}

/// Builds a tuple of `arity` elements from `len` doubles, which must equal
/// `2 · arity · dim(alg)`.
///
/// # Safety
/// `alg` must be a live handle, `data` must point to `len` readable doubles
/// and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tracial_tuple_new(
    alg: *const TracialAlgebra,
    arity: usize,
    data: *const f64,
    len: usize,
    out: *mut *mut TracialTuple,
) -> TracialStatus {
    guard(|| {
        let Some(alg) = (unsafe { alg.as_ref() }) else {
            return fail(TracialStatus::NullPointer, "null algebra");
        };
        if data.is_null() || out.is_null() {
            return fail(TracialStatus::NullPointer, "null argument");
        }
        let alg = &alg.0;
        let expected = 2 * arity * alg.dim();
        if arity == 0 || len != expected {
            return fail(
                TracialStatus::InvalidInput,
                &format!("expected {expected} doubles for arity {arity}, got {len}"),
            );
        }
        let data = unsafe { slice::from_raw_parts(data, len) };
        let mut at = 0;
        let mut entries = Vec::with_capacity(arity);
        for _ in 0..arity {
            let blocks = alg
                .blocks()
                .iter()
                .map(|b| {
                    let m = Mat::from_row_iterator(
                        b.dim,
                        b.dim,
                        data[at..at + 2 * b.dim * b.dim].chunks(2).map(|c| C64::new(c[0], c[1])),
                    );
                    at += 2 * b.dim * b.dim;
                    m
                })
                .collect();
            match Element::from_blocks(alg, blocks) {
                Ok(e) => entries.push(e),
                Err(e) => return from_error(&e),
            }
        }
        match Tuple::new(entries) {
            Ok(t) => {
                unsafe { *out = Box::into_raw(Box::new(TracialTuple(t))) };
                TracialStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// `‖x‖ = (Σ_k τ(x_k* x_k))^{1/2}`, or NaN for a null handle.
///
/// # Safety
/// `x` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tracial_tuple_norm(x: *const TracialTuple) -> f64 {
    unsafe { x.as_ref() }.map_or(f64::NAN, |x| x.0.norm())
}

/// # Safety
/// `x` must be null or a handle from [`tracial_tuple_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tracial_tuple_free(x: *mut TracialTuple) {
    if !x.is_null() {
        drop(unsafe { Box::from_raw(x) });
    }
}

/// Wasserstein distance between two tuples of the same factor. Writes the
/// distance and returns `Unconverged` when the best restart missed `tol`.
///
/// # Safety
/// `x` and `y` must be live handles and `d` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tracial_wasserstein(
    x: *const TracialTuple,
    y: *const TracialTuple,
    restarts: usize,
    seed: u64,
    tol: f64,
    d: *mut f64,
) -> TracialStatus {
    guard(|| {
        let (Some(x), Some(y)) = (unsafe { x.as_ref() }, unsafe { y.as_ref() }) else {
            return fail(TracialStatus::NullPointer, "null tuple");
        };
        if d.is_null() {
            return fail(TracialStatus::NullPointer, "null output");
        }
        if !(tol > 0.0) {
            return fail(TracialStatus::InvalidInput, "tol must be positive");
        }
        let opts = TransportOptions {
            restarts,
            seed,
            tol,
            ..Default::default()
        };
        match wasserstein(&x.0, &y.0, &opts) {
            Ok(w) => {
                unsafe { *d = w.d };
                if w.cost.converged {
                    TracialStatus::Ok
                } else {
                    fail(TracialStatus::Unconverged, "orbit optimizer did not converge")
                }
            }
            Err(e) => from_error(&e),
        }
    })
}

/// Dimension of the definable closure of an inclusion given as JSON
/// (`{"sub": ..., "amb": ..., "mult": ...}`, as read by the CLI).
///
/// # Safety
/// `json` must be a NUL-terminated string and `dim` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tracial_dcl_dim(json: *const c_char, dim: *mut usize) -> TracialStatus {
    guard(|| {
        if json.is_null() || dim.is_null() {
            return fail(TracialStatus::NullPointer, "null argument");
        }
        let Ok(text) = unsafe { CStr::from_ptr(json) }.to_str() else {
            return fail(TracialStatus::InvalidInput, "input is not UTF-8");
        };
        let inc = match serde_json::from_str::<InclusionJson>(text) {
            Ok(j) => j.build(),
            Err(e) => Err(Error::from(e)),
        };
        match inc {
            Ok(inc) => {
                unsafe { *dim = dcl_finite(&inc).dim };
                TracialStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}
