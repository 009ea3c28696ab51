//! C ABI over `spectra_cdma`.
//!
//! Objects cross the boundary as opaque handles: `SpectraWaveform`,
//! `SpectraLaw`, `SpectraSequence` (moments or free cumulants) and
//! `SpectraRule`. Every constructor writes its handle through an out
//! pointer and has a matching `*_free`. Every fallible call returns a
//! `SpectraStatus`; on failure `spectra_last_error()` holds a message for
//! the calling thread until its next failing call.
//!
//! Panics never unwind into C: they surface as `SPECTRA_STATUS_PANIC`.

// Entry points check pointers for null before use; the remaining contract
// (live handles, readable buffers) is the C caller's and is documented above.
#![allow(clippy::not_unsafe_ptr_arg_deref)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use spectra_cdma::aem::{cumulants_from_moments, MomentSequence, PowerMomentSpec};
use spectra_cdma::nc::catalan;
use spectra_cdma::quadrature::{
    mmse_value, spectral_efficiency_mmse_lb, spectral_efficiency_opt, QuadratureRule, SpectralLaw,
};
use spectra_cdma::waveform::ChipWaveform;
use spectra_cdma::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectraStatus {
    Ok = 0,
    /// Bad argument value (load, order, unknown waveform, ...).
    InvalidArgument = 1,
    /// Numerical breakdown (Hankel loss of positivity, non-finite values).
    Numerical = 2,
    NullPointer = 3,
    /// Result does not fit the output type.
    OutOfRange = 4,
    Panic = 5,
}

/// Chip waveform.
pub struct SpectraWaveform(ChipWaveform);

/// Limiting eigenvalue law of a crosscorrelation matrix.
pub struct SpectraLaw(SpectralLaw);

/// Moment or free-cumulant sequence, indexed from order 1.
pub struct SpectraSequence(Vec<f64>);

/// Gauss quadrature rule.
pub struct SpectraRule(QuadratureRule);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
}

fn fail(status: SpectraStatus, message: impl Into<String>) -> SpectraStatus {
    set_error(message);
    status
}

fn status_of(e: &Error) -> SpectraStatus {
    match e {
        Error::Overflow(_) => SpectraStatus::OutOfRange,
        e if e.is_numerical() => SpectraStatus::Numerical,
        _ => SpectraStatus::InvalidArgument,
    }
}

/// Runs `body`, translating errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), SpectraStatus>) -> SpectraStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => SpectraStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(SpectraStatus::Panic, "internal panic"),
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, SpectraStatus>;
}

impl<T> OrStatus<T> for spectra_cdma::Result<T> {
    fn or_status(self) -> Result<T, SpectraStatus> {
        self.map_err(|e| fail(status_of(&e), e.to_string()))
    }
}

fn non_null<'a, T>(p: *const T, what: &str) -> Result<&'a T, SpectraStatus> {
    // SAFETY: callers hand us either null or a pointer from our constructors
    unsafe { p.as_ref() }.ok_or_else(|| fail(SpectraStatus::NullPointer, format!("{what} is null")))
}

fn write_out<T>(out: *mut T, value: T) -> Result<(), SpectraStatus> {
    if out.is_null() {
        return Err(fail(SpectraStatus::NullPointer, "output pointer is null"));
    }
    // SAFETY: checked non-null; the caller owns the storage
    unsafe { out.write(value) };
    Ok(())
}

fn boxed<T>(out: *mut *mut T, value: T) -> Result<(), SpectraStatus> {
    if out.is_null() {
        return Err(fail(SpectraStatus::NullPointer, "output pointer is null"));
    }
    // SAFETY: as above
    unsafe { out.write(Box::into_raw(Box::new(value))) };
    Ok(())
}

fn free<T>(p: *mut T) {
    if !p.is_null() {
        // SAFETY: p came from Box::into_raw in a constructor and is freed once
        drop(unsafe { Box::from_raw(p) });
    }
}

fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, SpectraStatus> {
    if p.is_null() {
        return Err(fail(SpectraStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: non-null, NUL-terminated by contract
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| fail(SpectraStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn spectra_version() -> *const c_char {
    static VERSION: &[u8] = concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes();
    VERSION.as_ptr().cast()
}

/// Message of the last failing call on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn spectra_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Catalan number C_n.
#[no_mangle]
pub extern "C" fn spectra_catalan(n: usize, out: *mut u64) -> SpectraStatus {
    guard(|| {
        let c = catalan(n).or_status()?;
        let c = u64::try_from(c).map_err(|_| fail(SpectraStatus::OutOfRange, format!("C_{n} exceeds 64 bits")))?;
        write_out(out, c)
    })
}

/// Parses `sinc`, `srrc:<alpha>` or `custom:<csv path>`.
#[no_mangle]
pub extern "C" fn spectra_waveform_parse(spec: *const c_char, out: *mut *mut SpectraWaveform) -> SpectraStatus {
    guard(|| {
        let w = ChipWaveform::parse(c_str(spec, "waveform spec")?).or_status()?;
        boxed(out, SpectraWaveform(w))
    })
}

/// Spectral moment W^(m), m >= 1.
#[no_mangle]
pub extern "C" fn spectra_waveform_w_moment(w: *const SpectraWaveform, m: usize, out: *mut f64) -> SpectraStatus {
    guard(|| {
        let w = non_null(w, "waveform")?;
        write_out(out, w.0.w_moment(m).or_status()?)
    })
}

#[no_mangle]
pub extern "C" fn spectra_waveform_free(w: *mut SpectraWaveform) {
    free(w);
}

/// Limiting law at load `beta`. A null `waveform` selects the
/// chip-synchronous law; otherwise the chip-asynchronous law of that pulse.
/// `fading` is `"unfaded"`, `"rayleigh"` or null (unfaded).
#[no_mangle]
pub extern "C" fn spectra_law_new(
    beta: f64,
    waveform: *const SpectraWaveform,
    fading: *const c_char,
    out: *mut *mut SpectraLaw,
) -> SpectraStatus {
    guard(|| {
        let power = if fading.is_null() {
            PowerMomentSpec::unfaded()
        } else {
            PowerMomentSpec::parse(c_str(fading, "fading")?).or_status()?
        };
        // SAFETY: null or a live handle
        let law = match unsafe { waveform.as_ref() } {
            None => SpectralLaw::chip_synchronous(beta, power),
            Some(w) => SpectralLaw::chip_asynchronous(beta, w.0.clone(), power),
        }
        .or_status()?;
        boxed(out, SpectraLaw(law))
    })
}

/// Moments m_1..m_{n_max} of the law.
#[no_mangle]
pub extern "C" fn spectra_law_moments(
    law: *const SpectraLaw,
    n_max: usize,
    out: *mut *mut SpectraSequence,
) -> SpectraStatus {
    guard(|| {
        let law = non_null(law, "law")?;
        let m = law.0.moments(n_max).or_status()?;
        boxed(out, SpectraSequence(m.values().to_vec()))
    })
}

/// Gauss rule with `points` nodes (0 picks 10 unfaded, 15 faded).
#[no_mangle]
pub extern "C" fn spectra_law_rule(law: *const SpectraLaw, points: usize, out: *mut *mut SpectraRule) -> SpectraStatus {
    guard(|| {
        let law = non_null(law, "law")?;
        let q = if points == 0 { law.0.default_points() } else { points };
        boxed(out, SpectraRule(law.0.rule(q).or_status()?))
    })
}

#[no_mangle]
pub extern "C" fn spectra_law_free(law: *mut SpectraLaw) {
    free(law);
}

/// Wraps `len` caller values as a sequence (order 1 first).
#[no_mangle]
pub extern "C" fn spectra_sequence_from_values(
    values: *const f64,
    len: usize,
    out: *mut *mut SpectraSequence,
) -> SpectraStatus {
    guard(|| {
        if values.is_null() {
            return Err(fail(SpectraStatus::NullPointer, "values is null"));
        }
        // SAFETY: caller guarantees `len` readable values
        let v = unsafe { std::slice::from_raw_parts(values, len) }.to_vec();
        boxed(out, SpectraSequence(v))
    })
}

/// Free cumulants c_1..c_{n_max} of a moment sequence.
#[no_mangle]
pub extern "C" fn spectra_cumulants_from_moments(
    moments: *const SpectraSequence,
    n_max: usize,
    out: *mut *mut SpectraSequence,
) -> SpectraStatus {
    guard(|| {
        let m = non_null(moments, "moments")?;
        let c = cumulants_from_moments(&MomentSequence::new("moments", m.0.clone()), n_max).or_status()?;
        boxed(out, SpectraSequence(c.values().to_vec()))
    })
}

#[no_mangle]
pub extern "C" fn spectra_sequence_len(s: *const SpectraSequence) -> usize {
    // SAFETY: null or a live handle
    unsafe { s.as_ref() }.map_or(0, |s| s.0.len())
}

/// Borrowed pointer to the values; valid until the sequence is freed.
#[no_mangle]
pub extern "C" fn spectra_sequence_values(s: *const SpectraSequence) -> *const f64 {
    // SAFETY: null or a live handle
    unsafe { s.as_ref() }.map_or(ptr::null(), |s| s.0.as_ptr())
}

/// Element of order `n` (1-based).
#[no_mangle]
pub extern "C" fn spectra_sequence_get(s: *const SpectraSequence, n: usize, out: *mut f64) -> SpectraStatus {
    guard(|| {
        let s = non_null(s, "sequence")?;
        let v = n
            .checked_sub(1)
            .and_then(|i| s.0.get(i))
            .ok_or_else(|| fail(SpectraStatus::OutOfRange, format!("order {n} outside 1..={}", s.0.len())))?;
        write_out(out, *v)
    })
}

#[no_mangle]
pub extern "C" fn spectra_sequence_free(s: *mut SpectraSequence) {
    free(s);
}

/// Number of nodes, including an atom at zero if present.
#[no_mangle]
pub extern "C" fn spectra_rule_len(r: *const SpectraRule) -> usize {
    // SAFETY: null or a live handle
    unsafe { r.as_ref() }.map_or(0, |r| r.0.len())
}

#[no_mangle]
pub extern "C" fn spectra_rule_nodes(r: *const SpectraRule) -> *const f64 {
    // SAFETY: null or a live handle
    unsafe { r.as_ref() }.map_or(ptr::null(), |r| r.0.nodes().as_ptr())
}

#[no_mangle]
pub extern "C" fn spectra_rule_weights(r: *const SpectraRule) -> *const f64 {
    // SAFETY: null or a live handle
    unsafe { r.as_ref() }.map_or(ptr::null(), |r| r.0.weights().as_ptr())
}

/// True when the rule was cut short after a breakdown.
#[no_mangle]
pub extern "C" fn spectra_rule_truncated(r: *const SpectraRule) -> bool {
    // SAFETY: null or a live handle
    unsafe { r.as_ref() }.is_some_and(|r| r.0.warning().is_some())
}

/// E{1/(1 + snr X)}.
#[no_mangle]
pub extern "C" fn spectra_rule_mmse(r: *const SpectraRule, snr: f64, out: *mut f64) -> SpectraStatus {
    guard(|| {
        let r = non_null(r, "rule")?;
        write_out(out, mmse_value(&r.0, snr).or_status()?)
    })
}

/// Optimum-receiver spectral efficiency in bit/s/Hz.
#[no_mangle]
pub extern "C" fn spectra_rule_efficiency_opt(
    r: *const SpectraRule,
    alpha: f64,
    beta: f64,
    snr: f64,
    out: *mut f64,
) -> SpectraStatus {
    guard(|| {
        let r = non_null(r, "rule")?;
        write_out(out, spectral_efficiency_opt(&r.0, alpha, beta, snr).or_status()?)
    })
}

/// Linear MMSE receiver spectral efficiency (lower bound form).
#[no_mangle]
pub extern "C" fn spectra_rule_efficiency_mmse(
    r: *const SpectraRule,
    alpha: f64,
    beta: f64,
    snr: f64,
    out: *mut f64,
) -> SpectraStatus {
    guard(|| {
        let r = non_null(r, "rule")?;
        write_out(out, spectral_efficiency_mmse_lb(&r.0, alpha, beta, snr).or_status()?)
    })
}

#[no_mangle]
pub extern "C" fn spectra_rule_free(r: *mut SpectraRule) {
    free(r);
}
