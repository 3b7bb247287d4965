use std::ffi::{CStr, CString};
use std::ptr;

use tracial_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(tracial_last_error()) }.to_string_lossy().into_owned()
}

fn algebra(dims: &[usize], num: &[i64], den: &[i64]) -> (TracialStatus, *mut TracialAlgebra) {
    let mut out = ptr::null_mut();
    let s = unsafe { tracial_algebra_new(dims.len(), dims.as_ptr(), num.as_ptr(), den.as_ptr(), &mut out) };
    (s, out)
}

fn m2() -> *mut TracialAlgebra {
    let (s, a) = algebra(&[2], &[1], &[1]);
    assert_eq!(s, TracialStatus::Ok);
    a
}

/// Row-major interleaved data for `diag(a, b)` in M₂.
fn diag(a: f64, b: f64) -> [f64; 8] {
    [a, 0.0, 0.0, 0.0, 0.0, 0.0, b, 0.0]
}

fn tuple(alg: *const TracialAlgebra, data: &[f64]) -> *mut TracialTuple {
    let mut out = ptr::null_mut();
    let s = unsafe { tracial_tuple_new(alg, 1, data.as_ptr(), data.len(), &mut out) };
    assert_eq!(s, TracialStatus::Ok, "{}", last_error());
    out
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(tracial_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn algebra_lifecycle() {
    let (s, a) = algebra(&[2, 1], &[2, 1], &[3, 3]);
    assert_eq!(s, TracialStatus::Ok);
    assert_eq!(unsafe { tracial_algebra_dim(a) }, 5);
    unsafe { tracial_algebra_free(a) };
    unsafe { tracial_algebra_free(ptr::null_mut()) };
    assert_eq!(unsafe { tracial_algebra_dim(ptr::null()) }, 0);
}

#[test]
fn bad_weights_are_reported() {
    let (s, a) = algebra(&[2, 1], &[1, 1], &[3, 3]);
    assert_eq!(s, TracialStatus::InvalidInput);
    assert!(a.is_null());
    assert!(last_error().contains("weights sum to 2/3"), "{}", last_error());
}

#[test]
fn oversized_algebra_is_too_large() {
    let (s, _) = algebra(&[9], &[1], &[1]);
    assert_eq!(s, TracialStatus::TooLarge);
}

#[test]
fn null_arguments() {
    let mut out = ptr::null_mut();
    let s = unsafe { tracial_algebra_new(1, ptr::null(), ptr::null(), ptr::null(), &mut out) };
    assert_eq!(s, TracialStatus::NullPointer);
    let mut d = 0.0;
    let s = unsafe { tracial_wasserstein(ptr::null(), ptr::null(), 1, 0, 1e-9, &mut d) };
    assert_eq!(s, TracialStatus::NullPointer);
}

#[test]
fn tuple_length_is_checked() {
    let a = m2();
    let mut out = ptr::null_mut();
    let data = [0.0; 6];
    let s = unsafe { tracial_tuple_new(a, 1, data.as_ptr(), data.len(), &mut out) };
    assert_eq!(s, TracialStatus::InvalidInput);
    assert!(last_error().contains("expected 8 doubles"));
    unsafe { tracial_algebra_free(a) };
}

#[test]
fn norm_uses_normalized_trace() {
    let a = m2();
    let x = tuple(a, &diag(1.0, 2.0));
    // τ(x*x) = (1 + 4)/2.
    assert!((unsafe { tracial_tuple_norm(x) } - 2.5_f64.sqrt()).abs() < 1e-15);
    unsafe {
        tracial_tuple_free(x);
        tracial_algebra_free(a);
    }
}

#[test]
fn wasserstein_of_conjugate_and_zero() {
    let a = m2();
    let x = tuple(a, &diag(1.0, 2.0));
    let y = tuple(a, &diag(2.0, 1.0));
    let z = tuple(a, &diag(0.0, 0.0));
    let mut d = f64::NAN;
    assert_eq!(unsafe { tracial_wasserstein(x, y, 4, 1, 1e-9, &mut d) }, TracialStatus::Ok);
    assert!(d.abs() < 1e-7, "{d}");
    assert_eq!(unsafe { tracial_wasserstein(x, z, 4, 1, 1e-9, &mut d) }, TracialStatus::Ok);
    assert!((d - 2.5_f64.sqrt()).abs() < 1e-9, "{d}");
    assert_eq!(unsafe { tracial_wasserstein(x, y, 4, 1, -1.0, &mut d) }, TracialStatus::InvalidInput);
    unsafe {
        for t in [x, y, z] {
            tracial_tuple_free(t);
        }
        tracial_algebra_free(a);
    }
}

#[test]
fn dcl_from_json() {
    let cases = [
        (r#"{"sub": {"blocks": [{"dim": 1, "weight": "1"}]}, "amb": {"blocks": [{"dim": 2, "weight": "1/2"}, {"dim": 2, "weight": "1/2"}]}, "mult": [[2, 2]]}"#, 1),
        (r#"{"sub": {"blocks": [{"dim": 1, "weight": "1"}]}, "amb": {"blocks": [{"dim": 2, "weight": "1/3"}, {"dim": 2, "weight": "2/3"}]}, "mult": [[2, 2]]}"#, 2),
    ];
    for (json, expect) in cases {
        let c = CString::new(json).unwrap();
        let mut dim = 0;
        assert_eq!(unsafe { tracial_dcl_dim(c.as_ptr(), &mut dim) }, TracialStatus::Ok, "{}", last_error());
        assert_eq!(dim, expect);
    }
    let bad = CString::new(r#"{"sub": 1}"#).unwrap();
    let mut dim = 0;
    assert_eq!(unsafe { tracial_dcl_dim(bad.as_ptr(), &mut dim) }, TracialStatus::InvalidInput);
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/tracial.h");
    for name in [
        "tracial_version",
        "tracial_last_error",
        "tracial_algebra_new",
        "tracial_algebra_dim",
        "tracial_algebra_free",
        "tracial_tuple_new",
        "tracial_tuple_norm",
        "tracial_tuple_free",
        "tracial_wasserstein",
        "tracial_dcl_dim",
        "TRACIAL_STATUS_UNCONVERGED = 4",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
