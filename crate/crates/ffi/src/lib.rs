//! C ABI over homog-dirac.
//!
//! Groups, connections and spectra are opaque handles, released with the
//! matching `hd_*_free`. Every fallible
//! call returns an [`HdStatus`]; on failure `hd_last_error_message` gives a
//! description that stays valid until the next failing call on the same
//! thread. Strings handed out by the library are released with
//! `hd_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use homog_dirac::config::RunConfig;
use homog_dirac::dirac::criterion_check;
use homog_dirac::geometry::{Connection, Frame};
use homog_dirac::lie::GroupModel;
use homog_dirac::quadrature::space_rule;
use homog_dirac::run::{run_verify, Suite};
use homog_dirac::spectral::spectrum;
use homog_dirac::Error;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HdStatus {
    Ok = 0,
    /// A verification ran and at least one check failed.
    CheckFailed = 1,
    NullPointer = 2,
    InvalidArgument = 3,
    Unsupported = 4,
    Numerical = 5,
    Io = 6,
    Panic = 7,
}

/// A group G with subgroup K.
pub struct HdGroup {
    inner: Arc<GroupModel>,
}

/// An invariant connection on the tangent bundle of G/K.
pub struct HdConnection {
    inner: Arc<Connection>,
}

/// Eigenvalues of the Dirac operator, block by block.
pub struct HdSpectrum {
    /// (spin level, eigenvalue) sorted by level then eigenvalue.
    rows: Vec<(f64, f64)>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> HdStatus {
    match e {
        Error::Config(_)
        | Error::DimensionMismatch { .. }
        | Error::Codomain(_)
        | Error::InvalidCharge { .. }
        | Error::NotSkew(_)
        | Error::NotEquivariant(_)
        | Error::NotUnitary(_)
        | Error::EmptyFamily => HdStatus::InvalidArgument,
        Error::UnsupportedGroup(_) => HdStatus::Unsupported,
        Error::Io(_) => HdStatus::Io,
        _ => HdStatus::Numerical,
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard<F: FnOnce() -> Result<HdStatus, (HdStatus, String)>>(f: F) -> HdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err((s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            HdStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (HdStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (HdStatus, String) {
    (HdStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (HdStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    // SAFETY: caller passes a NUL-terminated string.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| (HdStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) {
    // SAFETY: checked non-null by the caller.
    unsafe { *out = Box::into_raw(Box::new(value)) };
}

/// Description of the last failure on this thread; never null.
#[no_mangle]
pub extern "C" fn hd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hd_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: allocated by CString::into_raw below.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Looks up a catalog group ("su2" or "su2-trivial-k") with the given
/// inner-product scale.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hd_group_catalog(name: *const c_char, scale: f64, out: *mut *mut HdGroup) -> HdStatus {
    guard(|| {
        let name = unsafe { str_arg(name, "name") }?;
        if out.is_null() {
            return Err(null("out"));
        }
        let g = GroupModel::catalog(name, scale).map_err(lib_err)?;
        unsafe { put(out, HdGroup { inner: g }) };
        Ok(HdStatus::Ok)
    })
}

/// dim 𝔤 and dim 𝔪.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hd_group_dims(group: *const HdGroup, dim: *mut usize, dim_m: *mut usize) -> HdStatus {
    guard(|| {
        let g = unsafe { group.as_ref() }.ok_or_else(|| null("group"))?;
        if dim.is_null() || dim_m.is_null() {
            return Err(null("output"));
        }
        unsafe {
            *dim = g.inner.dim();
            *dim_m = g.inner.dim_m();
        }
        Ok(HdStatus::Ok)
    })
}

/// # Safety
/// `group` must come from `hd_group_catalog` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hd_group_free(group: *mut HdGroup) {
    if !group.is_null() {
        drop(unsafe { Box::from_raw(group) });
    }
}

unsafe fn connection_out(out: *mut *mut HdConnection, c: Arc<Connection>) -> Result<HdStatus, (HdStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    unsafe { put(out, HdConnection { inner: c }) };
    Ok(HdStatus::Ok)
}

/// The canonical connection ∇⁰.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hd_connection_canonical(group: *const HdGroup, out: *mut *mut HdConnection) -> HdStatus {
    guard(|| {
        let g = unsafe { group.as_ref() }.ok_or_else(|| null("group"))?;
        unsafe { connection_out(out, Connection::canonical(&g.inner)) }
    })
}

/// The Levi-Civita connection of the normal metric.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hd_connection_levi_civita(group: *const HdGroup, out: *mut *mut HdConnection) -> HdStatus {
    guard(|| {
        let g = unsafe { group.as_ref() }.ok_or_else(|| null("group"))?;
        unsafe { connection_out(out, Connection::levi_civita(&g.inner)) }
    })
}

/// A tangent connection from γ(e_1), …, γ(e_p): `len = p·p·p` doubles,
/// block after block, each row-major.
///
/// # Safety
/// `gamma` must point to `len` doubles; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hd_connection_from_gamma(
    group: *const HdGroup,
    gamma: *const f64,
    len: usize,
    out: *mut *mut HdConnection,
) -> HdStatus {
    guard(|| {
        let g = unsafe { group.as_ref() }.ok_or_else(|| null("group"))?;
        if gamma.is_null() {
            return Err(null("gamma"));
        }
        let p = g.inner.dim_m();
        if len != p * p * p {
            return Err((
                HdStatus::InvalidArgument,
                format!("gamma needs {} entries, got {len}", p * p * p),
            ));
        }
        // SAFETY: length checked against the caller's declaration.
        let data = unsafe { std::slice::from_raw_parts(gamma, len) };
        let blocks = data.chunks(p * p).map(|c| DMatrix::from_row_slice(p, p, c)).collect();
        let c = Connection::tangent(&g.inner, blocks).map_err(lib_err)?;
        unsafe { connection_out(out, c) }
    })
}

/// Both forms of the self-adjointness criterion at `samples` Haar points.
/// `verdict` is 1 when the criterion holds within `tolerance`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hd_connection_criterion(
    conn: *const HdConnection,
    samples: usize,
    seed: u64,
    tolerance: f64,
    torsion_trace: *mut f64,
    self_action: *mut f64,
    verdict: *mut i32,
) -> HdStatus {
    guard(|| {
        let c = unsafe { conn.as_ref() }.ok_or_else(|| null("connection"))?;
        if torsion_trace.is_null() || self_action.is_null() || verdict.is_null() {
            return Err(null("output"));
        }
        let g = c.inner.group();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs = (0..samples.max(1))
            .map(|_| g.sample_haar(&mut rng))
            .collect::<Result<Vec<_>, _>>()
            .map_err(lib_err)?;
        let frame = Arc::new(Frame::standard(g));
        let r = criterion_check(&c.inner, &frame, &xs, tolerance).map_err(lib_err)?;
        unsafe {
            *torsion_trace = r.torsion_trace_max;
            *self_action = r.self_action_residual;
            *verdict = r.verdict as i32;
        }
        Ok(HdStatus::Ok)
    })
}

/// # Safety
/// `conn` must come from an `hd_connection_*` constructor.
#[no_mangle]
pub unsafe extern "C" fn hd_connection_free(conn: *mut HdConnection) {
    if !conn.is_null() {
        drop(unsafe { Box::from_raw(conn) });
    }
}

/// Dirac spectrum on spins 0..=`max_level` with quadrature bandwidth
/// `bandwidth`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hd_spectrum_compute(
    conn: *const HdConnection,
    max_level: u32,
    bandwidth: u32,
    out: *mut *mut HdSpectrum,
) -> HdStatus {
    guard(|| {
        let c = unsafe { conn.as_ref() }.ok_or_else(|| null("connection"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let g = c.inner.group();
        let frame = Arc::new(Frame::standard(g));
        let rule = space_rule(g, bandwidth, None).map_err(lib_err)?;
        let blocks = spectrum(&c.inner, &frame, max_level, &rule).map_err(lib_err)?;
        let rows = blocks
            .iter()
            .flat_map(|b| b.eigenvalues.iter().map(move |e| (b.level.value(), *e)))
            .collect();
        unsafe { put(out, HdSpectrum { rows }) };
        Ok(HdStatus::Ok)
    })
}

/// Number of eigenvalues; 0 for a null handle.
///
/// # Safety
/// `spec` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn hd_spectrum_len(spec: *const HdSpectrum) -> usize {
    unsafe { spec.as_ref() }.map_or(0, |s| s.rows.len())
}

/// The `index`-th (level, eigenvalue) pair.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hd_spectrum_entry(
    spec: *const HdSpectrum,
    index: usize,
    level: *mut f64,
    eigenvalue: *mut f64,
) -> HdStatus {
    guard(|| {
        let s = unsafe { spec.as_ref() }.ok_or_else(|| null("spectrum"))?;
        if level.is_null() || eigenvalue.is_null() {
            return Err(null("output"));
        }
        let &(l, e) = s.rows.get(index).ok_or_else(|| {
            (
                HdStatus::InvalidArgument,
                format!("index {index} out of range (len {})", s.rows.len()),
            )
        })?;
        unsafe {
            *level = l;
            *eigenvalue = e;
        }
        Ok(HdStatus::Ok)
    })
}

/// # Safety
/// `spec` must come from `hd_spectrum_compute`.
#[no_mangle]
pub unsafe extern "C" fn hd_spectrum_free(spec: *mut HdSpectrum) {
    if !spec.is_null() {
        drop(unsafe { Box::from_raw(spec) });
    }
}

/// Runs a verification suite (0 geometry, 1 dirac, 2 all) on a config
/// given as `key = value` text and returns the JSON report in `json_out`
/// (free with `hd_string_free`). Returns `CheckFailed` when a check fails.
///
/// # Safety
/// `config` must be a NUL-terminated string and `json_out` valid.
#[no_mangle]
pub unsafe extern "C" fn hd_verify(config: *const c_char, suite: i32, json_out: *mut *mut c_char) -> HdStatus {
    guard(|| {
        let text = unsafe { str_arg(config, "config") }?;
        if json_out.is_null() {
            return Err(null("json_out"));
        }
        let suite = match suite {
            0 => Suite::Geometry,
            1 => Suite::Dirac,
            2 => Suite::All,
            s => return Err((HdStatus::InvalidArgument, format!("unknown suite {s}"))),
        };
        let cfg = RunConfig::parse(text).map_err(lib_err)?;
        let report = run_verify(&cfg, suite).map_err(lib_err)?;
        let json = CString::new(report.to_json()).expect("JSON has no NUL");
        unsafe { *json_out = json.into_raw() };
        if report.pass {
            Ok(HdStatus::Ok)
        } else {
            set_error(&format!(
                "failed checks: {}",
                report
                    .failures()
                    .map(|e| e.check.as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            ));
            Ok(HdStatus::CheckFailed)
        }
    })
}
