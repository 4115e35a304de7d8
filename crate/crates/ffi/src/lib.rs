//! C ABI over the `wavedecay` library.
//!
//! Every function returns a [`WdStatus`]; results go through out-pointers.
//! Objects are opaque heap handles released with the matching `*_free`. On a
//! non-OK status the message is kept per thread and can be read with
//! [`wd_last_error_message`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use wavedecay::cli::{CliError, ExperimentConfig, Mode};
use wavedecay::envelope::{self, ClosedFormParams, EnvelopeCurve, EnvelopeError, ExampleId};
use wavedecay::feedback::{self, FeedbackError, FeedbackSpec, InfinityBranch, MonotoneError, MonotoneFn, OriginBranch};
use wavedecay::raytrace::{gcc_entry_time, sample_bundle, BoxDomain, MediumFields, RayError};
use wavedecay::wavesim::{self, SimError, Trace};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numeric = 3,
    Config = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WdOriginKind {
    Linear = 0,
    Power = 1,
    ExpCubic = 2,
    ExpAbs = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WdInfinityKind {
    Linear = 0,
    Power = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WdExample {
    ExpOrigin = 0,
    PolyOrigin = 1,
    SublinOrigin = 2,
    ExpCubic = 3,
    ExpAbs = 4,
    SublinInfinity = 5,
    SuperlinInfinity = 6,
}

/// Feedback law description. `origin_exponent` is read only for the power
/// origin branch, `r` only for the power branch at infinity.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WdFeedbackParams {
    pub origin: WdOriginKind,
    pub origin_exponent: f64,
    pub m0: f64,
    pub big_m0: f64,
    pub infinity: WdInfinityKind,
    pub r: f64,
    pub m: f64,
    pub big_m: f64,
}

/// Closed-form constants; a NaN field means "not supplied".
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WdClosedFormParams {
    pub e0: f64,
    pub t0: f64,
    pub ctilde: f64,
    pub p: f64,
    pub theta: f64,
    pub r: f64,
    pub p0: f64,
    pub alpha: f64,
}

pub struct WdFeedback(FeedbackSpec);
pub struct WdMonotone(MonotoneFn);
pub struct WdCurve(EnvelopeCurve);
pub struct WdTrace(Trace);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

struct Failure(WdStatus, String);

impl Failure {
    fn null(what: &str) -> Self {
        Failure(WdStatus::NullPointer, format!("{what} is null"))
    }

    fn invalid(msg: impl Into<String>) -> Self {
        Failure(WdStatus::InvalidArgument, msg.into())
    }
}

macro_rules! numeric_from {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure(WdStatus::Numeric, e.to_string())
            }
        }
    )*};
}

numeric_from!(FeedbackError, MonotoneError, EnvelopeError, SimError, RayError);

impl From<CliError> for Failure {
    fn from(e: CliError) -> Self {
        let status = match e {
            CliError::Parse { .. } | CliError::Validation { .. } | CliError::Io { .. } => WdStatus::Config,
            _ => WdStatus::Numeric,
        };
        Failure(status, e.to_string())
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> WdStatus {
    let outcome = catch_unwind(AssertUnwindSafe(body)).unwrap_or_else(|payload| {
        let msg = payload
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| payload.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "unknown panic".into());
        Err(Failure(WdStatus::Panic, msg))
    });
    match outcome {
        Ok(()) => {
            LAST_ERROR.with(|e| e.borrow_mut().clear());
            WdStatus::Ok
        }
        Err(Failure(status, msg)) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = msg);
            status
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::null("out"));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_handle<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::null("out"));
    }
    out.write(Box::into_raw(Box::new(value)));
    Ok(())
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

unsafe fn copy_column(src: &[f64], dst: *mut f64) {
    if !dst.is_null() {
        ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len - 1` bytes) and returns the full message length.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn wd_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// # Safety
/// `params` must be null or point to a valid struct; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn wd_feedback_new(params: *const WdFeedbackParams, out: *mut *mut WdFeedback) -> WdStatus {
    guard(|| {
        let p = deref(params, "params")?;
        let origin = match p.origin {
            WdOriginKind::Linear => OriginBranch::Linear { m0: p.m0, big_m0: p.big_m0 },
            WdOriginKind::Power => OriginBranch::Power { exponent: p.origin_exponent, m0: p.m0, big_m0: p.big_m0 },
            WdOriginKind::ExpCubic => OriginBranch::ExpCubic,
            WdOriginKind::ExpAbs => OriginBranch::ExpAbs,
        };
        let infinity = match p.infinity {
            WdInfinityKind::Linear => InfinityBranch::Linear { m: p.m, big_m: p.big_m },
            WdInfinityKind::Power => InfinityBranch::Power { r: p.r, m: p.m, big_m: p.big_m },
        };
        let spec = FeedbackSpec::new(origin, infinity).map_err(|e| Failure::invalid(e.to_string()))?;
        write_handle(out, WdFeedback(spec))
    })
}

/// # Safety
/// `fb` must be a live handle or null; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn wd_feedback_eval(fb: *const WdFeedback, s: f64, out: *mut f64) -> WdStatus {
    guard(|| write_out(out, feedback::eval_g(&deref(fb, "feedback")?.0, s)))
}

/// # Safety
/// `fb` must be null or a handle from [`wd_feedback_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wd_feedback_free(fb: *mut WdFeedback) {
    free(fb)
}

/// Builds the concave majorant `h₀` for a feedback law.
///
/// # Safety
/// `fb` must be a live handle or null; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn wd_h0_build(fb: *const WdFeedback, out: *mut *mut WdMonotone) -> WdStatus {
    guard(|| {
        let h0 = feedback::build_h0(&deref(fb, "feedback")?.0)?;
        write_handle(out, WdMonotone(h0))
    })
}

/// `x ↦ slope·x`.
///
/// # Safety
/// `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn wd_monotone_linear(slope: f64, out: *mut *mut WdMonotone) -> WdStatus {
    guard(|| {
        if !(slope > 0.0 && slope.is_finite()) {
            return Err(Failure::invalid(format!("slope must be positive, got {slope}")));
        }
        write_handle(out, WdMonotone(MonotoneFn::linear(slope)))
    })
}

/// `x ↦ coeff·x^exponent`.
///
/// # Safety
/// `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn wd_monotone_power(coeff: f64, exponent: f64, out: *mut *mut WdMonotone) -> WdStatus {
    guard(|| {
        if !(coeff > 0.0 && exponent > 0.0 && coeff.is_finite() && exponent.is_finite()) {
            return Err(Failure::invalid(format!("need coeff > 0 and exponent > 0, got {coeff}, {exponent}")));
        }
        write_handle(out, WdMonotone(MonotoneFn::power(coeff, exponent)))
    })
}

/// `h₁` for growth order `r` at infinity.
///
/// # Safety
/// `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn wd_h1_build(r: f64, p0: f64, out: *mut *mut WdMonotone) -> WdStatus {
    guard(|| write_handle(out, WdMonotone(envelope::build_h1(r, p0)?)))
}

/// `h = h₁ + h₀(·/meas_qt)`.
///
/// # Safety
/// `h0` and `h1` must be live handles or null; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn wd_h_build(
    h0: *const WdMonotone,
    h1: *const WdMonotone,
    meas_qt: f64,
    out: *mut *mut WdMonotone,
) -> WdStatus {
    guard(|| {
        let h = envelope::build_h(&deref(h0, "h0")?.0, &deref(h1, "h1")?.0, meas_qt)?;
        write_handle(out, WdMonotone(h))
    })
}

/// `q = ((K+1)·I + K·h)⁻¹`.
///
/// # Safety
/// `h` must be a live handle or null; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn wd_q_build(h: *const WdMonotone, k: f64, out: *mut *mut WdMonotone) -> WdStatus {
    guard(|| write_handle(out, WdMonotone(envelope::build_q(&deref(h, "h")?.0, k)?)))
}

/// # Safety
/// `f` must be a live handle or null; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn wd_monotone_eval(f: *const WdMonotone, x: f64, out: *mut f64) -> WdStatus {
    guard(|| {
        if x.is_nan() || x < 0.0 {
            return Err(Failure::invalid(format!("x must be non-negative, got {x}")));
        }
        write_out(out, deref(f, "function")?.0.eval(x))
    })
}

/// # Safety
/// `f` must be a live handle or null; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn wd_monotone_inverse(f: *const WdMonotone, y: f64, out: *mut f64) -> WdStatus {
    guard(|| {
        let x = deref(f, "function")?.0.inverse(y)?;
        write_out(out, x)
    })
}

/// # Safety
/// `f` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wd_monotone_free(f: *mut WdMonotone) {
    free(f)
}

/// Integrates `S' + q(S) = 0`, `S(0) = e0`, on `[0, t_max]` with RK4.
///
/// # Safety
/// `q` must be a live handle or null; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn wd_envelope_solve(
    q: *const WdMonotone,
    e0: f64,
    t_max: f64,
    dt: f64,
    out: *mut *mut WdCurve,
) -> WdStatus {
    guard(|| {
        let curve = envelope::solve_envelope(&deref(q, "q")?.0, e0, t_max, dt)?;
        write_handle(out, WdCurve(curve))
    })
}

/// # Safety
/// `curve` must be a live handle or null; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn wd_curve_len(curve: *const WdCurve, out: *mut usize) -> WdStatus {
    guard(|| write_out(out, deref(curve, "curve")?.0.len()))
}

/// Copies the `t` and `S` columns; either destination may be null.
///
/// # Safety
/// Non-null `t` and `s` must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn wd_curve_copy(curve: *const WdCurve, t: *mut f64, s: *mut f64, len: usize) -> WdStatus {
    guard(|| {
        let c = &deref(curve, "curve")?.0;
        if len < c.len() {
            return Err(Failure(WdStatus::BufferTooSmall, format!("need {} entries, got {len}", c.len())));
        }
        copy_column(&c.t, t);
        copy_column(&c.s, s);
        Ok(())
    })
}

/// # Safety
/// `curve` must be null or a handle from [`wd_envelope_solve`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wd_curve_free(curve: *mut WdCurve) {
    free(curve)
}

fn example_id(id: WdExample) -> ExampleId {
    match id {
        WdExample::ExpOrigin => ExampleId::ExpOrigin,
        WdExample::PolyOrigin => ExampleId::PolyOrigin,
        WdExample::SublinOrigin => ExampleId::SublinOrigin,
        WdExample::ExpCubic => ExampleId::ExpCubic,
        WdExample::ExpAbs => ExampleId::ExpAbs,
        WdExample::SublinInfinity => ExampleId::SublinInfinity,
        WdExample::SuperlinInfinity => ExampleId::SuperlinInfinity,
    }
}

/// Closed-form decay bound of a standard family at time `t`.
///
/// # Safety
/// `params` must be null or valid; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn wd_closed_form(
    id: WdExample,
    params: *const WdClosedFormParams,
    t: f64,
    out: *mut f64,
) -> WdStatus {
    guard(|| {
        let p = deref(params, "params")?;
        let opt = |v: f64| (!v.is_nan()).then_some(v);
        let cf = ClosedFormParams {
            e0: p.e0,
            t0: p.t0,
            ctilde: opt(p.ctilde),
            p: opt(p.p),
            theta: opt(p.theta),
            r: opt(p.r),
            p0: opt(p.p0),
            alpha: opt(p.alpha),
        };
        write_out(out, envelope::closed_form(example_id(id), &cf, t)?)
    })
}

/// Runs the wave simulation described by a TOML document (the `simulate`
/// sections of an experiment config).
///
/// # Safety
/// `toml` must be null or a NUL-terminated string; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn wd_simulate_toml(toml: *const c_char, out: *mut *mut WdTrace) -> WdStatus {
    guard(|| {
        if toml.is_null() {
            return Err(Failure::null("toml"));
        }
        let text = CStr::from_ptr(toml).to_str().map_err(|e| Failure(WdStatus::Config, e.to_string()))?;
        let cfg = ExperimentConfig::parse_str(text)?;
        cfg.validate(Mode::Simulate)?;
        let trace = wavesim::run(&cfg.sim_config()?)?;
        write_handle(out, WdTrace(trace))
    })
}

/// # Safety
/// `trace` must be a live handle or null; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn wd_trace_len(trace: *const WdTrace, out: *mut usize) -> WdStatus {
    guard(|| write_out(out, deref(trace, "trace")?.0.len()))
}

/// Copies the `t`, `E`, `D` and observability columns; any destination may be null.
///
/// # Safety
/// Each non-null destination must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn wd_trace_copy(
    trace: *const WdTrace,
    t: *mut f64,
    energy: *mut f64,
    damping: *mut f64,
    obs: *mut f64,
    len: usize,
) -> WdStatus {
    guard(|| {
        let tr = &deref(trace, "trace")?.0;
        if len < tr.len() {
            return Err(Failure(WdStatus::BufferTooSmall, format!("need {} entries, got {len}", tr.len())));
        }
        copy_column(&tr.times, t);
        copy_column(&tr.energy, energy);
        copy_column(&tr.damping, damping);
        copy_column(&tr.obs_num, obs);
        Ok(())
    })
}

/// # Safety
/// `trace` must be null or a handle from [`wd_simulate_toml`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wd_trace_free(trace: *mut WdTrace) {
    free(trace)
}

fn gcc_box<const D: usize>(
    extent: [f64; D],
    rho: f64,
    collar_width: f64,
    n_pos: usize,
    n_dir: usize,
    ds: f64,
    t_max: f64,
) -> Result<f64, Failure> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Failure::invalid(format!("rho must be positive, got {rho}")));
    }
    let mut k = [[0.0; D]; D];
    (0..D).for_each(|i| k[i][i] = 1.0);
    let med = MediumFields::Constant { rho, k };
    let domain = BoxDomain::new(extent)?;
    let bundle = sample_bundle(&domain, n_pos, n_dir)?;
    let collar = domain.collar(collar_width);
    Ok(gcc_entry_time(&med, &domain, &collar, &bundle, t_max, ds)?.t0)
}

/// Worst collar entry time `T₀` for a constant medium `ρ`, `K = I` on the box
/// `[0, extent]^dim` (`dim` is 1 or 2), with reflecting walls.
///
/// # Safety
/// `extent` must be null or valid for `dim` doubles; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn wd_gcc_time(
    dim: usize,
    extent: *const f64,
    rho: f64,
    collar_width: f64,
    n_pos: usize,
    n_dir: usize,
    ds: f64,
    t_max: f64,
    out: *mut f64,
) -> WdStatus {
    guard(|| {
        if extent.is_null() {
            return Err(Failure::null("extent"));
        }
        let t0 = match dim {
            1 => gcc_box([*extent], rho, collar_width, n_pos, n_dir, ds, t_max)?,
            2 => gcc_box([*extent, *extent.add(1)], rho, collar_width, n_pos, n_dir, ds, t_max)?,
            _ => return Err(Failure::invalid(format!("dim must be 1 or 2, got {dim}"))),
        };
        write_out(out, t0)
    })
}
