use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use homog_dirac_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(hd_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

fn group(name: &str) -> *mut HdGroup {
    let name = CString::new(name).unwrap();
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { hd_group_catalog(name.as_ptr(), 1.0, &mut g) }, HdStatus::Ok);
    g
}

#[test]
fn group_handles() {
    let g = group("su2");
    let (mut d, mut p) = (0, 0);
    assert_eq!(unsafe { hd_group_dims(g, &mut d, &mut p) }, HdStatus::Ok);
    assert_eq!((d, p), (3, 2));
    unsafe { hd_group_free(g) };

    let bad = CString::new("so5").unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { hd_group_catalog(bad.as_ptr(), 1.0, &mut out) },
        HdStatus::Unsupported
    );
    assert!(out.is_null());
    assert!(last_error().contains("so5"));
    assert_eq!(
        unsafe { hd_group_catalog(ptr::null(), 1.0, &mut out) },
        HdStatus::NullPointer
    );
    assert_eq!(
        unsafe { hd_group_dims(ptr::null(), &mut d, &mut p) },
        HdStatus::NullPointer
    );
    // freeing null is a no-op
    unsafe {
        hd_group_free(ptr::null_mut());
        hd_connection_free(ptr::null_mut());
        hd_spectrum_free(ptr::null_mut());
        hd_string_free(ptr::null_mut());
    }
}

#[test]
fn criterion_through_the_abi() {
    let g = group("su2-trivial-k");
    let mut lc = ptr::null_mut();
    assert_eq!(unsafe { hd_connection_levi_civita(g, &mut lc) }, HdStatus::Ok);
    let (mut tt, mut sa, mut verdict) = (1.0, 1.0, 0);
    let s = unsafe { hd_connection_criterion(lc, 5, 1, 1e-8, &mut tt, &mut sa, &mut verdict) };
    assert_eq!(s, HdStatus::Ok);
    assert_eq!(verdict, 1);
    assert!(tt < 1e-10 && sa < 1e-10);

    // γ(e₁) rotates e₁ into e₂: criterion vector e₂
    let mut gamma = [0.0; 27];
    gamma[3] = 1.0; // (1, 0) of block 0
    gamma[1] = -1.0; // (0, 1)
    let mut bad = ptr::null_mut();
    assert_eq!(
        unsafe { hd_connection_from_gamma(g, gamma.as_ptr(), 27, &mut bad) },
        HdStatus::Ok
    );
    let s = unsafe { hd_connection_criterion(bad, 5, 1, 1e-8, &mut tt, &mut sa, &mut verdict) };
    assert_eq!(s, HdStatus::Ok);
    assert_eq!(verdict, 0);
    assert!((sa - 1.0).abs() < 1e-12, "{sa}");

    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { hd_connection_from_gamma(g, gamma.as_ptr(), 26, &mut out) },
        HdStatus::InvalidArgument
    );
    assert!(last_error().contains("27"));
    unsafe {
        hd_connection_free(lc);
        hd_connection_free(bad);
        hd_group_free(g);
    }
}

#[test]
fn sphere_spectrum() {
    let g = group("su2");
    let mut lc = ptr::null_mut();
    assert_eq!(unsafe { hd_connection_levi_civita(g, &mut lc) }, HdStatus::Ok);
    let mut spec = ptr::null_mut();
    assert_eq!(unsafe { hd_spectrum_compute(lc, 1, 6, &mut spec) }, HdStatus::Ok);
    let n = unsafe { hd_spectrum_len(spec) };
    assert_eq!(n, 2 + 12);
    let (mut level, mut e) = (0.0, 0.0);
    let mut zeros = 0;
    for i in 0..n {
        assert_eq!(unsafe { hd_spectrum_entry(spec, i, &mut level, &mut e) }, HdStatus::Ok);
        if e.abs() < 1e-8 {
            zeros += 1;
        } else {
            // ℓ = 1: ±√(ℓ(ℓ+1))
            assert_eq!(level, 1.0);
            assert!((e.abs() - 2f64.sqrt()).abs() < 1e-9);
        }
    }
    assert_eq!(zeros, 2);
    assert_eq!(
        unsafe { hd_spectrum_entry(spec, n, &mut level, &mut e) },
        HdStatus::InvalidArgument
    );
    unsafe {
        hd_spectrum_free(spec);
        hd_connection_free(lc);
        hd_group_free(g);
    }
}

#[test]
fn verify_returns_json() {
    let cfg = CString::new("connection = canonical\nsample_count = 5\n").unwrap();
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { hd_verify(cfg.as_ptr(), 0, &mut json) }, HdStatus::Ok);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    unsafe { hd_string_free(json) };
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["pass"], true);
    assert!(v["checks"].as_array().unwrap().len() > 10);

    let cfg = CString::new("group = su2\nsubgroup = trivial\nconnection = gamma-file(/nonexistent)\n").unwrap();
    let mut json = ptr::null_mut();
    assert_eq!(
        unsafe { hd_verify(cfg.as_ptr(), 2, &mut json) },
        HdStatus::InvalidArgument
    );
    assert!(json.is_null());
    assert!(last_error().contains("nonexistent"));
    assert_eq!(
        unsafe { hd_verify(cfg.as_ptr(), 9, &mut json) },
        HdStatus::InvalidArgument
    );
}

/// The generated header is valid C.
#[test]
fn header_compiles() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/homog_dirac.h");
    let Ok(status) = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c", header])
        .status()
    else {
        eprintln!("no C compiler; skipped");
        return;
    };
    assert!(status.success());
}
