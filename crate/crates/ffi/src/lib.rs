//! C ABI over `ptsym-core`.
//!
//! Matrices and vectors cross the boundary as interleaved `(re, im)` doubles,
//! matrices in row-major order, so an `n×n` matrix is `2·n·n` doubles. Every
//! fallible call returns a [`PtsymStatus`]; on failure the message is kept
//! per thread and read with [`ptsym_last_error`]. Handles are opaque and must
//! be released with their `_free` function.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;
use std::slice;

use ptsym_core::cli::{run_scenario, validate_scenario, RunSummary, ScenarioConfig};
use ptsym_core::models::two_level_frame;
use ptsym_core::{
    norm_equivalence_bounds, symmetry_report, validate_frames, AntilinearOperator, CPTFrame, ComplexMatrix,
    ComplexVector, Error, C64,
};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PtsymStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Bad configuration or model definition.
    Config = 3,
    /// A frame axiom failed.
    FrameAxiom = 4,
    /// A numerical failure: non-convergence, overflow, broken symmetry.
    Numeric = 5,
    Io = 6,
    /// The requested value does not exist for this run.
    NoData = 7,
    /// A Rust panic was caught at the boundary.
    Panic = 8,
}

impl From<&Error> for PtsymStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::FrameAxiom { .. } => PtsymStatus::FrameAxiom,
            Error::Io(_) => PtsymStatus::Io,
            e if e.is_config() => PtsymStatus::Config,
            _ => PtsymStatus::Numeric,
        }
    }
}

/// A validated CPT frame.
pub struct PtsymFrame {
    inner: CPTFrame,
}

/// A completed scenario run.
pub struct PtsymRun {
    summary: RunSummary,
    json: CString,
}

/// Symmetry checks of one Hamiltonian against one frame.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct PtsymSymmetry {
    pub pt_symmetric: bool,
    pub cpt_hermitian: bool,
    pub unbroken: bool,
    pub max_eigen_imag: f64,
    pub pt_residual: f64,
    pub hermitian_residual: f64,
    pub eigenspace_residual: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Failure inside a call: a status plus its message.
struct Fail(PtsymStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(PtsymStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(PtsymStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(PtsymStatus::InvalidArgument, msg.into())
}

/// Runs `f`, records any failure or panic, and returns the status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PtsymStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PtsymStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            PtsymStatus::Panic
        }
    }
}

unsafe fn doubles<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn read_matrix(p: *const f64, dim: usize, what: &str) -> Result<ComplexMatrix, Fail> {
    let d = doubles(p, 2 * dim * dim, what)?;
    Ok(ComplexMatrix::from_fn(dim, |i, j| {
        let k = 2 * (i * dim + j);
        C64::new(d[k], d[k + 1])
    }))
}

unsafe fn read_vector(p: *const f64, dim: usize, what: &str) -> Result<ComplexVector, Fail> {
    let d = doubles(p, 2 * dim, what)?;
    Ok(ComplexVector::from_fn(dim, |k| C64::new(d[2 * k], d[2 * k + 1])))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn frame_ref<'a>(frame: *const PtsymFrame) -> Result<&'a CPTFrame, Fail> {
    frame.as_ref().map(|f| &f.inner).ok_or_else(|| null("frame"))
}

unsafe fn run_ref<'a>(run: *const PtsymRun) -> Result<&'a PtsymRun, Fail> {
    run.as_ref().ok_or_else(|| null("run"))
}

unsafe fn put<T>(out: *mut T, v: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn ptsym_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ptsym_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Validates `C`, `P` and `T = K·conj(·)` and returns a frame handle.
/// `k` may be null for plain complex conjugation.
#[no_mangle]
pub unsafe extern "C" fn ptsym_frame_new(
    dim: usize,
    c: *const f64,
    p: *const f64,
    k: *const f64,
    tol: f64,
    out: *mut *mut PtsymFrame,
) -> PtsymStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        out.write(ptr::null_mut());
        if dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        let c = read_matrix(c, dim, "c")?;
        let p = read_matrix(p, dim, "p")?;
        let t = if k.is_null() {
            AntilinearOperator::conjugation(dim)
        } else {
            AntilinearOperator::new(read_matrix(k, dim, "k")?)
        };
        let inner = validate_frames(c, p, t, tol)?;
        out.write(Box::into_raw(Box::new(PtsymFrame { inner })));
        Ok(())
    })
}

/// The two-level frame `C = [[i·tan α, sec α], [sec α, −i·tan α]]`,
/// `P = swap`, `T = conj`.
#[no_mangle]
pub unsafe extern "C" fn ptsym_frame_two_level(alpha: f64, tol: f64, out: *mut *mut PtsymFrame) -> PtsymStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        out.write(ptr::null_mut());
        let inner = two_level_frame(alpha, tol)?;
        out.write(Box::into_raw(Box::new(PtsymFrame { inner })));
        Ok(())
    })
}

/// Releases a frame; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ptsym_frame_free(frame: *mut PtsymFrame) {
    if !frame.is_null() {
        drop(Box::from_raw(frame));
    }
}

/// Dimension of the frame, 0 for null.
#[no_mangle]
pub unsafe extern "C" fn ptsym_frame_dim(frame: *const PtsymFrame) -> usize {
    frame.as_ref().map_or(0, |f| f.inner.dim())
}

/// Writes the metric `P·C` into `out` (`2·dim·dim` doubles).
#[no_mangle]
pub unsafe extern "C" fn ptsym_frame_metric(frame: *const PtsymFrame, out: *mut f64) -> PtsymStatus {
    guard(|| {
        let f = frame_ref(frame)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let m = f.metric().as_slice();
        let dst = slice::from_raw_parts_mut(out, 2 * m.len());
        for (k, z) in m.iter().enumerate() {
            dst[2 * k] = z.re;
            dst[2 * k + 1] = z.im;
        }
        Ok(())
    })
}

/// `(x|y) = x†·P·C·y`, written to `out_re` and `out_im`.
#[no_mangle]
pub unsafe extern "C" fn ptsym_frame_inner(
    frame: *const PtsymFrame,
    x: *const f64,
    y: *const f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> PtsymStatus {
    guard(|| {
        let f = frame_ref(frame)?;
        let x = read_vector(x, f.dim(), "x")?;
        let y = read_vector(y, f.dim(), "y")?;
        let z = f.inner(&x, &y)?;
        put(out_re, z.re, "out_re")?;
        put(out_im, z.im, "out_im")
    })
}

/// Constants `lo`, `hi` with `lo·‖x‖ ≤ ‖x‖_CPT ≤ hi·‖x‖`.
#[no_mangle]
pub unsafe extern "C" fn ptsym_frame_norm_bounds(frame: *const PtsymFrame, lo: *mut f64, hi: *mut f64) -> PtsymStatus {
    guard(|| {
        let (l, h) = norm_equivalence_bounds(frame_ref(frame)?);
        put(lo, l, "lo")?;
        put(hi, h, "hi")
    })
}

/// PT-symmetry, CPT-Hermiticity and unbroken-ness of `h` on this frame.
#[no_mangle]
pub unsafe extern "C" fn ptsym_symmetry_check(
    frame: *const PtsymFrame,
    h: *const f64,
    tol: f64,
    out: *mut PtsymSymmetry,
) -> PtsymStatus {
    guard(|| {
        let f = frame_ref(frame)?;
        let h = read_matrix(h, f.dim(), "h")?;
        let r = symmetry_report(f, &h, tol)?;
        put(
            out,
            PtsymSymmetry {
                pt_symmetric: r.pt_symmetric,
                cpt_hermitian: r.cpt_hermitian,
                unbroken: r.unbroken,
                max_eigen_imag: r.eigen_realness,
                pt_residual: r.pt_residual,
                hermitian_residual: r.hermitian_residual,
                eigenspace_residual: r.eigenspace_residual,
            },
            "out",
        )
    })
}

fn load_config(toml: &str, out_dir: Option<&str>) -> Result<ScenarioConfig, Fail> {
    let mut cfg = ScenarioConfig::from_toml_str(toml)?;
    if let Some(d) = out_dir {
        cfg.output.dir = PathBuf::from(d);
    }
    cfg.validate()?;
    Ok(cfg)
}

unsafe fn opt_str<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Fail> {
    if p.is_null() {
        Ok(None)
    } else {
        read_str(p, what).map(Some)
    }
}

/// Runs a scenario given as TOML text and writes its artifacts under
/// `out_dir` (or the config's `output.dir` when null). A run whose checks
/// fail still returns `Ok`; query [`ptsym_run_passed`].
#[no_mangle]
pub unsafe extern "C" fn ptsym_run_toml(toml: *const c_char, out_dir: *const c_char, out: *mut *mut PtsymRun) -> PtsymStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        out.write(ptr::null_mut());
        let cfg = load_config(read_str(toml, "toml")?, opt_str(out_dir, "out_dir")?)?;
        let summary = run_scenario(&cfg)?;
        let json = serde_json::to_string_pretty(&summary).map_err(|e| invalid(e.to_string()))?;
        let json = CString::new(json).map_err(|e| invalid(e.to_string()))?;
        out.write(Box::into_raw(Box::new(PtsymRun { summary, json })));
        Ok(())
    })
}

/// Like [`ptsym_run_toml`] with the TOML read from `path`.
#[no_mangle]
pub unsafe extern "C" fn ptsym_run_file(path: *const c_char, out_dir: *const c_char, out: *mut *mut PtsymRun) -> PtsymStatus {
    let text = match read_str(path, "path") {
        Ok(p) => std::fs::read_to_string(p).map_err(|e| Fail(PtsymStatus::Io, format!("{p}: {e}"))),
        Err(f) => Err(f),
    };
    match text.and_then(|t| CString::new(t).map_err(|e| invalid(e.to_string()))) {
        Ok(t) => ptsym_run_toml(t.as_ptr(), out_dir, out),
        Err(Fail(s, m)) => {
            set_error(m);
            if !out.is_null() {
                out.write(ptr::null_mut());
            }
            s
        }
    }
}

/// Frame and symmetry checks on every grid point without evolving; writes
/// whether all passed to `passed`.
#[no_mangle]
pub unsafe extern "C" fn ptsym_validate_toml(toml: *const c_char, passed: *mut bool) -> PtsymStatus {
    guard(|| {
        let cfg = load_config(read_str(toml, "toml")?, None)?;
        put(passed, validate_scenario(&cfg)?.passed, "passed")
    })
}

/// Releases a run; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ptsym_run_free(run: *mut PtsymRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// True when every enabled check passed; false for null.
#[no_mangle]
pub unsafe extern "C" fn ptsym_run_passed(run: *const PtsymRun) -> bool {
    run.as_ref().is_some_and(|r| r.summary.passed)
}

/// Largest CPT-norm drift along the trajectory.
#[no_mangle]
pub unsafe extern "C" fn ptsym_run_norm_drift(run: *const PtsymRun, out: *mut f64) -> PtsymStatus {
    guard(|| put(out, run_ref(run)?.summary.norm_drift, "out"))
}

/// Total adiabatic bound `V(T)`; `NoData` when the adiabatic check was off.
#[no_mangle]
pub unsafe extern "C" fn ptsym_run_v_total(run: *const PtsymRun, out: *mut f64) -> PtsymStatus {
    guard(|| {
        let a = run_ref(run)?.summary.adiabatic.as_ref();
        let a = a.ok_or_else(|| Fail(PtsymStatus::NoData, "adiabatic check was disabled".into()))?;
        put(out, a.v_total, "out")
    })
}

/// Largest fidelity loss; `NoData` when the adiabatic check was off.
#[no_mangle]
pub unsafe extern "C" fn ptsym_run_max_loss(run: *const PtsymRun, out: *mut f64) -> PtsymStatus {
    guard(|| {
        let a = run_ref(run)?.summary.adiabatic.as_ref();
        let a = a.ok_or_else(|| Fail(PtsymStatus::NoData, "adiabatic check was disabled".into()))?;
        put(out, a.max_loss, "out")
    })
}

/// The run summary as JSON, owned by the run handle; null for null.
#[no_mangle]
pub unsafe extern "C" fn ptsym_run_summary_json(run: *const PtsymRun) -> *const c_char {
    run.as_ref().map_or(ptr::null(), |r| r.json.as_ptr())
}
