//! C ABI over the `gaussfluct` library.
//!
//! Every entry point returns a [`GfStatus`]. Results are written through out
//! pointers. On failure the message is kept per thread and can be read with
//! [`gf_last_error_message`]. Handles are opaque and must be released with
//! the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use gaussfluct::domain::DomainSpec;
use gaussfluct::experiment::{run_suite, write_outputs, ExperimentConfig};
use gaussfluct::field::{build_sampler, FieldSampler};
use gaussfluct::hermite::hermite_h;
use gaussfluct::special::bessel_j;
use gaussfluct::spectral::{covariance_from_spectrum, spectral_condition, SpectralCondition, SpectralMeasure};
use gaussfluct::variance::rank_one_variance;
use gaussfluct::Error;

/// Status codes shared by all functions.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GfStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    NonexistentField = 3,
    Quadrature = 4,
    NonFiniteObservable = 5,
    UnknownId = 6,
    GridTooLarge = 7,
    BudgetExceeded = 8,
    ZeroVariance = 9,
    InsufficientSpan = 10,
    ExcludedCase = 11,
    Config = 12,
    Io = 13,
    Serialization = 14,
    Panic = 15,
}

/// A spectral measure.
pub struct GfMeasure(SpectralMeasure);

/// A frozen field realization.
pub struct GfSampler(FieldSampler);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> GfStatus {
    match e {
        Error::InvalidArgument(_) => GfStatus::InvalidArgument,
        Error::NonexistentField { .. } => GfStatus::NonexistentField,
        Error::Quadrature { .. } => GfStatus::Quadrature,
        Error::NonFiniteObservable { .. } => GfStatus::NonFiniteObservable,
        Error::UnknownId { .. } => GfStatus::UnknownId,
        Error::GridTooLarge { .. } => GfStatus::GridTooLarge,
        Error::BudgetExceeded { .. } => GfStatus::BudgetExceeded,
        Error::ZeroVariance => GfStatus::ZeroVariance,
        Error::InsufficientSpan { .. } => GfStatus::InsufficientSpan,
        Error::ExcludedCase(_) => GfStatus::ExcludedCase,
        Error::Config { .. } => GfStatus::Config,
        Error::Io(_) => GfStatus::Io,
        Error::Json(_) => GfStatus::Serialization,
    }
}

enum Failure {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            GfStatus::Ok
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(name))) => {
            set_error(format!("null pointer passed for `{name}`"));
            GfStatus::NullPointer
        }
        Err(_) => {
            set_error("internal panic".into());
            GfStatus::Panic
        }
    }
}

unsafe fn out_ref<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(name))
}

unsafe fn in_ref<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn in_str<'a>(p: *const c_char, name: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Lib(Error::InvalidArgument(format!("`{name}` is not valid UTF-8"))))
}

/// Copies the last error message of the calling thread into `buf`
/// (NUL-terminated, truncated to `len - 1` bytes). Returns the full message
/// length in bytes, excluding the terminator.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn gf_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Bessel function of the first kind `J_nu(x)`, `nu >= 0`, `x >= 0`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gf_bessel_j(nu: f64, x: f64, out: *mut f64) -> GfStatus {
    guard(|| {
        *out_ref(out, "out")? = bessel_j(nu, x)?;
        Ok(())
    })
}

/// Probabilists' Hermite polynomial `H_q(x)`. Negative `q` is rejected.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gf_hermite_h(q: i32, x: f64, out: *mut f64) -> GfStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        if q < 0 {
            return Err(Error::InvalidArgument(format!("Hermite degree must be non-negative, got {q}")).into());
        }
        *out = hermite_h(q as usize, x);
        Ok(())
    })
}

/// Parses a measure id such as `berry`, `bessel:2,1` or `powerlaw:0.4`.
///
/// # Safety
/// `id` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gf_measure_from_id(id: *const c_char, out: *mut *mut GfMeasure) -> GfStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let mu = SpectralMeasure::from_id(in_str(id, "id")?)?;
        *out = Box::into_raw(Box::new(GfMeasure(mu)));
        Ok(())
    })
}

/// Releases a measure. Null is ignored.
///
/// # Safety
/// `measure` must come from [`gf_measure_from_id`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gf_measure_free(measure: *mut GfMeasure) {
    if !measure.is_null() {
        drop(Box::from_raw(measure));
    }
}

/// Covariance `rho(r)` of the isotropic field with spectral measure `measure` in dimension `d`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn gf_covariance(measure: *const GfMeasure, d: usize, r: f64, out: *mut f64) -> GfStatus {
    guard(|| {
        let mu = in_ref(measure, "measure")?;
        *out_ref(out, "out")? = covariance_from_spectrum(&mu.0, d, r)?;
        Ok(())
    })
}

/// Spectral condition for Hermite rank `rank`. Writes 1 to `finite` and the
/// integral to `value` when finite, otherwise 0 and NaN.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn gf_spectral_condition(
    measure: *const GfMeasure,
    d: usize,
    rank: usize,
    finite: *mut i32,
    value: *mut f64,
) -> GfStatus {
    guard(|| {
        let mu = in_ref(measure, "measure")?;
        let finite = out_ref(finite, "finite")?;
        let value = out_ref(value, "value")?;
        match spectral_condition(&mu.0, d, rank)? {
            SpectralCondition::Finite { value: v, .. } => {
                *finite = 1;
                *value = v;
            }
            SpectralCondition::Divergent => {
                *finite = 0;
                *value = f64::NAN;
            }
        }
        Ok(())
    })
}

/// First-chaos variance over `t D` for a domain id such as `ball:2,1`.
///
/// # Safety
/// Pointers must be valid and `domain` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn gf_rank_one_variance(
    measure: *const GfMeasure,
    domain: *const c_char,
    t: f64,
    out: *mut f64,
) -> GfStatus {
    guard(|| {
        let mu = in_ref(measure, "measure")?;
        let dom = DomainSpec::from_id(in_str(domain, "domain")?)?;
        *out_ref(out, "out")? = rank_one_variance(&mu.0, &dom, t)?;
        Ok(())
    })
}

/// Draws a field realization with `waves` plane waves.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn gf_sampler_new(
    measure: *const GfMeasure,
    d: usize,
    waves: usize,
    seed: u64,
    out: *mut *mut GfSampler,
) -> GfStatus {
    guard(|| {
        let mu = in_ref(measure, "measure")?;
        let out = out_ref(out, "out")?;
        let s = build_sampler(&mu.0, d, waves, seed)?;
        *out = Box::into_raw(Box::new(GfSampler(s)));
        Ok(())
    })
}

/// Evaluates the field at `n_points` points stored row-major in `points`
/// (`n_points * d` values). Writes `n_points` values to `out`.
///
/// # Safety
/// `points` must hold `n_points * d` values and `out` room for `n_points`.
#[no_mangle]
pub unsafe extern "C" fn gf_sampler_evaluate(
    sampler: *const GfSampler,
    points: *const f64,
    n_points: usize,
    out: *mut f64,
) -> GfStatus {
    guard(|| {
        let s = &in_ref(sampler, "sampler")?.0;
        if n_points == 0 {
            return Ok(());
        }
        if points.is_null() {
            return Err(Failure::Null("points"));
        }
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let pts = std::slice::from_raw_parts(points, n_points * s.dim());
        let values = s.evaluate(pts)?;
        std::slice::from_raw_parts_mut(out, n_points).copy_from_slice(&values);
        Ok(())
    })
}

/// Releases a sampler. Null is ignored.
///
/// # Safety
/// `sampler` must come from [`gf_sampler_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gf_sampler_free(sampler: *mut GfSampler) {
    if !sampler.is_null() {
        drop(Box::from_raw(sampler));
    }
}

/// Runs the experiment described by the config file at `config_path` and
/// writes its reports under `out_dir`.
///
/// # Safety
/// Both arguments must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn gf_run_config(config_path: *const c_char, out_dir: *const c_char) -> GfStatus {
    guard(|| {
        let cfg = ExperimentConfig::from_file(Path::new(in_str(config_path, "config_path")?))?;
        let out = Path::new(in_str(out_dir, "out_dir")?);
        let reports = run_suite(&cfg)?;
        write_outputs(&cfg, &reports, out)?;
        Ok(())
    })
}
