//! C ABI over `mkit`.
//!
//! Germs cross the boundary as opaque [`MkitGerm`] handles built from a germ
//! document (JSON). Results come back as NUL-terminated UTF-8 strings owned by
//! the library; release them with [`mkit_string_free`]. Every entry point
//! returns an [`MkitStatus`]; on failure [`mkit_last_error_message`] holds a
//! description for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use mkit::contact::classify_contact_surface;
use mkit::cubic::cubic_tensor_closed;
use mkit::darboux::{darboux_directions_surface, is_generalized_darboux_with, DEFAULT_THRESHOLD};
use mkit::document::{class_json, cubic_json, darboux_json, germ_json, quadric_json, GermDocument};
use mkit::moutard::{moutard_beta, moutard_pencil, moutard_quadric};
use mkit::verify::{run_suite, Suite};
use mkit::{Backend, HypersurfaceGerm, MkitError, Rational, Scalar};
use serde_json::{json, Value};

/// Status codes. `MKIT_VERIFY_FAILED` and `MKIT_INVALID_INPUT` carry the same
/// meaning as the command-line exit codes 1 and 2.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MkitStatus {
    MkitOk = 0,
    MkitVerifyFailed = 1,
    MkitInvalidInput = 2,
    MkitNullPointer = 3,
    MkitDegeneratePoint = 4,
    MkitNotDarboux = 5,
    MkitInternal = 6,
    MkitPanic = 7,
}

/// Opaque germ handle.
pub struct MkitGerm {
    inner: Germ,
}

enum Germ {
    Exact(HypersurfaceGerm<Rational>),
    Float(HypersurfaceGerm<f64>),
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("NUL bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &MkitError) -> MkitStatus {
    match e {
        MkitError::InternalMismatch(_) => MkitStatus::MkitVerifyFailed,
        MkitError::DegeneratePoint => MkitStatus::MkitDegeneratePoint,
        MkitError::NotDarbouxDirection(_) => MkitStatus::MkitNotDarboux,
        _ => MkitStatus::MkitInvalidInput,
    }
}

struct Failure(MkitStatus, String);

impl From<MkitError> for Failure {
    fn from(e: MkitError) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MkitStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            MkitStatus::MkitOk
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("panic: {msg}"));
            MkitStatus::MkitPanic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(MkitStatus::MkitNullPointer, format!("{what} is NULL")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(MkitStatus::MkitInvalidInput, format!("{what} is not UTF-8")))
}

unsafe fn germ_ref<'a>(g: *const MkitGerm) -> Result<&'a Germ, Failure> {
    g.as_ref().map(|g| &g.inner).ok_or_else(|| Failure(MkitStatus::MkitNullPointer, "germ is NULL".into()))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(MkitStatus::MkitNullPointer, "output pointer is NULL".into()));
    }
    let c = CString::new(s).map_err(|_| Failure(MkitStatus::MkitInternal, "result contains a NUL byte".into()))?;
    *out = c.into_raw();
    Ok(())
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

macro_rules! with_germ {
    ($germ:expr, $g:ident => $body:expr) => {
        match $germ {
            Germ::Exact($g) => $body,
            Germ::Float($g) => $body,
        }
    };
}

fn pencil_value<S: Scalar>(g: &HypersurfaceGerm<S>) -> Value {
    json!({
        "base": quadric_json(moutard_pencil(g).base()),
        "moutard_beta": moutard_beta(g).to_json(),
        "moutard_quadric": quadric_json(&moutard_quadric(g)),
    })
}

fn darboux_value<S: Scalar>(g: &HypersurfaceGerm<S>, threshold: f64) -> Result<Value, MkitError> {
    let report = is_generalized_darboux_with(g, threshold)?;
    let surface = if g.n() == 2 { Some(darboux_directions_surface(g)?) } else { None };
    Ok(json!({"report": darboux_json(&report), "surface_directions": surface}))
}

fn classify_value<S: Scalar>(g: &HypersurfaceGerm<S>, beta: Option<&str>) -> Result<Value, MkitError> {
    let beta: S = match beta {
        Some(b) => mkit::scalar::scalar_from_json(&Value::String(b.to_string()))?,
        None => moutard_beta(g),
    };
    let (class, reduced) = classify_contact_surface(g, &beta)?;
    let mut v = class_json(&class, reduced.as_ref());
    v["beta"] = beta.to_json();
    Ok(v)
}

/// Parses a germ document. The germ must already be in normal form.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mkit_germ_from_json(json: *const c_char, out: *mut *mut MkitGerm) -> MkitStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure(MkitStatus::MkitNullPointer, "output pointer is NULL".into()));
        }
        let doc = GermDocument::parse(read_str(json, "json")?)?;
        let inner = match doc.backend {
            Backend::Exact => Germ::Exact(doc.germ()?),
            Backend::Float => Germ::Float(doc.germ()?),
        };
        *out = Box::into_raw(Box::new(MkitGerm { inner }));
        Ok(())
    })
}

/// Releases a germ handle. NULL is ignored.
///
/// # Safety
/// `germ` must come from [`mkit_germ_from_json`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mkit_germ_free(germ: *mut MkitGerm) {
    if !germ.is_null() {
        drop(Box::from_raw(germ));
    }
}

/// Number of tangent variables `n`.
///
/// # Safety
/// `germ` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mkit_germ_dimension(germ: *const MkitGerm, out: *mut usize) -> MkitStatus {
    guard(|| {
        let g = germ_ref(germ)?;
        if out.is_null() {
            return Err(Failure(MkitStatus::MkitNullPointer, "output pointer is NULL".into()));
        }
        *out = with_germ!(g, g => g.n());
        Ok(())
    })
}

/// The germ as a document (JSON), suitable for [`mkit_germ_from_json`].
///
/// # Safety
/// `germ` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mkit_germ_to_json(germ: *const MkitGerm, out: *mut *mut c_char) -> MkitStatus {
    guard(|| {
        let g = germ_ref(germ)?;
        let text = with_germ!(g, g => GermDocument::from_germ(g).to_json_string());
        write_string(out, text)
    })
}

/// Moutard parameter beta as text: `p/q` on exact germs, a decimal on float
/// germs.
///
/// # Safety
/// `germ` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mkit_beta(germ: *const MkitGerm, out: *mut *mut c_char) -> MkitStatus {
    guard(|| {
        let g = germ_ref(germ)?;
        write_string(out, with_germ!(g, g => moutard_beta(g).show()))
    })
}

/// Germ tensors, pencil base, beta and the Moutard quadric (JSON).
///
/// # Safety
/// `germ` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mkit_pencil_json(germ: *const MkitGerm, out: *mut *mut c_char) -> MkitStatus {
    guard(|| {
        let g = germ_ref(germ)?;
        let mut v = with_germ!(g, g => pencil_value(g));
        v["germ"] = with_germ!(g, g => germ_json(g));
        write_string(out, pretty(&v))
    })
}

/// Cubic form at the origin (JSON list of `{index, value}`).
///
/// # Safety
/// `germ` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mkit_cubic_form_json(germ: *const MkitGerm, out: *mut *mut c_char) -> MkitStatus {
    guard(|| {
        let g = germ_ref(germ)?;
        write_string(out, pretty(&with_germ!(g, g => cubic_json(&cubic_tensor_closed(g)))))
    })
}

/// Generalized Darboux test of the x1-axis; `threshold <= 0` selects the
/// default. `is_darboux` (may be NULL) receives 1 or 0; `out` (may be NULL)
/// receives the full report.
///
/// # Safety
/// `germ` must be a live handle; non-NULL outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn mkit_darboux(
    germ: *const MkitGerm,
    threshold: f64,
    is_darboux: *mut c_int,
    out: *mut *mut c_char,
) -> MkitStatus {
    guard(|| {
        let g = germ_ref(germ)?;
        let th = if threshold > 0.0 { threshold } else { DEFAULT_THRESHOLD };
        let v = with_germ!(g, g => darboux_value(g, th))?;
        if !is_darboux.is_null() {
            *is_darboux = c_int::from(v["report"]["verdict_b"] == true);
        }
        if !out.is_null() {
            write_string(out, pretty(&v))?;
        }
        Ok(())
    })
}

/// E6/E7 classification of a surface germ whose x1-axis is a Darboux
/// direction, against the pencil member `beta` (text; NULL for the Moutard
/// member).
///
/// # Safety
/// `germ` must be a live handle; `beta` NULL or NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mkit_classify_json(
    germ: *const MkitGerm,
    beta: *const c_char,
    out: *mut *mut c_char,
) -> MkitStatus {
    guard(|| {
        let g = germ_ref(germ)?;
        let beta = if beta.is_null() { None } else { Some(read_str(beta, "beta")?) };
        let v = with_germ!(g, g => classify_value(g, beta))?;
        write_string(out, pretty(&v))
    })
}

/// Runs a verification suite. `count == 0` selects the suite's default.
/// Returns `MKIT_VERIFY_FAILED` when a counterexample was found; the report
/// (may be NULL) is written either way.
///
/// # Safety
/// `suite` must be NUL-terminated; `out` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn mkit_verify(
    suite: *const c_char,
    seed: u64,
    count: usize,
    out: *mut *mut c_char,
) -> MkitStatus {
    let mut failed = None;
    let status = guard(|| {
        let suite: Suite = read_str(suite, "suite")?.parse()?;
        let count = if count == 0 { suite.default_count() } else { count };
        let report = run_suite(suite, seed, count)?;
        if !out.is_null() {
            write_string(out, pretty(&serde_json::to_value(&report).expect("serializable")))?;
        }
        if !report.passed {
            failed = Some(format!("{suite}: counterexample found"));
        }
        Ok(())
    });
    match failed {
        Some(msg) if status == MkitStatus::MkitOk => {
            set_error(&msg);
            MkitStatus::MkitVerifyFailed
        }
        _ => status,
    }
}

/// Message for the last failing call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn mkit_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mkit_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn mkit_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}
