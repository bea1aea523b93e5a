//! C ABI for the blowuplab laboratory: opaque handles, status codes, and a
//! generated header (include/blowuplab.h, via cbindgen at build time).
//!
//! Conventions: constructors return null on failure; fallible queries
//! return a `BlowuplabStatus` and write results through out-pointers; every
//! failure stores a message retrievable with `blowuplab_last_error`.
//! Handles must be released with the matching `_free` function.

use blowuplab::exponents::{self, ProblemPoint, Regime};
use blowuplab::metric::{MetricFamily, MetricProfile};
use blowuplab::rescale::{build_rescaling, DampingProfile, TimeRescaling};
use blowuplab::wave_solver::{run_with_consistency, RunMode};
use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::ptr;

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl std::fmt::Display) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.to_string());
}

/// Status codes returned by fallible entry points.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BlowuplabStatus {
    Ok = 0,
    InvalidArgument = 1,
    NumericalFailure = 2,
    NoBlowup = 3,
    Utf8 = 4,
    NullPointer = 5,
}

fn status_of(err: &blowuplab::Error) -> BlowuplabStatus {
    match err {
        blowuplab::Error::NoBlowup(_) => BlowuplabStatus::NoBlowup,
        e if e.exit_code() == 2 => BlowuplabStatus::InvalidArgument,
        _ => BlowuplabStatus::NumericalFailure,
    }
}

/// Regime codes mirrored from the classifier.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BlowuplabRegime {
    S = 0,
    Z = 1,
    G = 2,
    S1 = 3,
    CriticalS = 4,
    CriticalG = 5,
    OutsideBlowupRegion = 6,
}

impl From<Regime> for BlowuplabRegime {
    fn from(r: Regime) -> Self {
        match r {
            Regime::S => BlowuplabRegime::S,
            Regime::Z => BlowuplabRegime::Z,
            Regime::G => BlowuplabRegime::G,
            Regime::S1 => BlowuplabRegime::S1,
            Regime::CriticalS => BlowuplabRegime::CriticalS,
            Regime::CriticalG => BlowuplabRegime::CriticalG,
            Regime::OutsideBlowupRegion => BlowuplabRegime::OutsideBlowupRegion,
        }
    }
}

/// Opaque radial metric profile.
pub struct BlowuplabMetric {
    inner: MetricProfile,
}

/// Opaque damping time-rescaling (m, h, η, m̃ bundle).
pub struct BlowuplabRescaling {
    inner: TimeRescaling,
}

/// Blow-up report with plain C layout.
#[repr(C)]
#[derive(Clone, Copy)]
pub struct BlowuplabReport {
    pub blown_up: i32,
    /// Lifespan estimate in original time.
    pub t_num: f64,
    /// Detection time in the run's own time variable.
    pub raw_time: f64,
    /// 1 = blow-up time stable under h → h/2, 0 = not, -1 = not checked.
    pub refinement_consistent: i32,
    pub min_support_margin: f64,
    pub steps: u64,
}

/// Copy the most recent error message into `buf` (truncated, always
/// NUL-terminated); returns the full message length.
/// # Safety
/// `buf` must point to at least `len` writable bytes (or be null).
#[no_mangle]
pub unsafe extern "C" fn blowuplab_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Positive root of (n−1)x² − (n+1)x − 2 = 0.
/// # Safety
/// `out` must be a valid pointer to writable memory for one f64.
#[no_mangle]
pub unsafe extern "C" fn blowuplab_strauss_exponent(n: u32, out: *mut f64) -> BlowuplabStatus {
    if out.is_null() {
        return BlowuplabStatus::NullPointer;
    }
    match exponents::strauss_exponent(n as usize) {
        Ok(v) => {
            *out = v;
            BlowuplabStatus::Ok
        }
        Err(e) => {
            set_error(&e);
            status_of(&e)
        }
    }
}

/// p_G(n) = 1 + 2/(n−1).
/// # Safety
/// `out` must be a valid pointer to writable memory for one f64.
#[no_mangle]
pub unsafe extern "C" fn blowuplab_glassey_exponent(n: u32, out: *mut f64) -> BlowuplabStatus {
    if out.is_null() {
        return BlowuplabStatus::NullPointer;
    }
    match exponents::glassey_exponent(n as usize) {
        Ok(v) => {
            *out = v;
            BlowuplabStatus::Ok
        }
        Err(e) => {
            set_error(&e);
            status_of(&e)
        }
    }
}

/// Classify the (p, q) point. `out_alpha` receives the positive lifespan
/// exponent (NaN on the critical lines, where `out_log_exponent` holds the
/// exponent κ of exp(C₀ε^{-κ}) instead).
/// # Safety
/// All three out-pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn blowuplab_classify(
    n: u32,
    p: f64,
    q: f64,
    c1: f64,
    c2: f64,
    u1_nontrivial: i32,
    out_regime: *mut BlowuplabRegime,
    out_alpha: *mut f64,
    out_log_exponent: *mut f64,
) -> BlowuplabStatus {
    if out_regime.is_null() || out_alpha.is_null() || out_log_exponent.is_null() {
        return BlowuplabStatus::NullPointer;
    }
    let point = ProblemPoint {
        n: n as usize,
        p,
        q,
        c1,
        c2,
        u1_nontrivial: u1_nontrivial != 0,
    };
    match exponents::classify_region(&point) {
        Ok(v) => {
            *out_regime = v.regime.into();
            *out_alpha = v.alpha.unwrap_or(f64::NAN);
            *out_log_exponent = v.log_exponent.unwrap_or(f64::NAN);
            BlowuplabStatus::Ok
        }
        Err(e) => {
            set_error(&e);
            status_of(&e)
        }
    }
}

/// Evaluate the predicted lifespan upper bound C₀ε^{-α} (or exp(C₀ε^{-κ})).
/// # Safety
/// `out` must be a valid pointer to writable memory for one f64.
#[no_mangle]
pub unsafe extern "C" fn blowuplab_lifespan_bound(
    n: u32,
    p: f64,
    q: f64,
    c1: f64,
    c2: f64,
    u1_nontrivial: i32,
    eps: f64,
    c0: f64,
    out: *mut f64,
) -> BlowuplabStatus {
    if out.is_null() {
        return BlowuplabStatus::NullPointer;
    }
    let point = ProblemPoint {
        n: n as usize,
        p,
        q,
        c1,
        c2,
        u1_nontrivial: u1_nontrivial != 0,
    };
    let result = exponents::classify_region(&point)
        .and_then(|v| exponents::lifespan_bound(&v, eps, c0));
    match result {
        Ok(v) => {
            *out = v;
            BlowuplabStatus::Ok
        }
        Err(e) => {
            set_error(&e);
            status_of(&e)
        }
    }
}

/// Metric families for `blowuplab_metric_new`.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum BlowuplabMetricFamily {
    Flat = 0,
    PowerPerturbation = 1,
    ExponentialPerturbation = 2,
}

/// Create a radial metric profile; returns null on invalid parameters.
#[no_mangle]
pub extern "C" fn blowuplab_metric_new(
    family: BlowuplabMetricFamily,
    a: f64,
    rate: f64,
    dim: u32,
) -> *mut BlowuplabMetric {
    let fam = match family {
        BlowuplabMetricFamily::Flat => MetricFamily::Flat,
        BlowuplabMetricFamily::PowerPerturbation => MetricFamily::PowerPerturbation,
        BlowuplabMetricFamily::ExponentialPerturbation => MetricFamily::ExponentialPerturbation,
    };
    match MetricProfile::new(fam, a, rate, dim as usize) {
        Ok(inner) => Box::into_raw(Box::new(BlowuplabMetric { inner })),
        Err(e) => {
            set_error(&e);
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `m` must come from `blowuplab_metric_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn blowuplab_metric_free(m: *mut BlowuplabMetric) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Conformal factor K(r).
/// # Safety
/// `m` must be a live handle from `blowuplab_metric_new` (or null).
#[no_mangle]
pub unsafe extern "C" fn blowuplab_metric_k(m: *const BlowuplabMetric, r: f64) -> f64 {
    match m.as_ref() {
        Some(m) => m.inner.k(r),
        None => f64::NAN,
    }
}

/// Geodesic radius r̃(r) = ∫₀ʳ K.
/// # Safety
/// `m` must be a live metric handle (or null); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn blowuplab_metric_geodesic_radius(
    m: *const BlowuplabMetric,
    r: f64,
    out: *mut f64,
) -> BlowuplabStatus {
    let Some(m) = m.as_ref() else {
        return BlowuplabStatus::NullPointer;
    };
    if out.is_null() {
        return BlowuplabStatus::NullPointer;
    }
    match m.inner.geodesic_radius(r) {
        Ok(v) => {
            *out = v;
            BlowuplabStatus::Ok
        }
        Err(e) => {
            set_error(&e);
            status_of(&e)
        }
    }
}

/// Largest δ₀ ∈ (0,1) with δ₀ < K < 1/δ₀.
/// # Safety
/// `m` must be a live handle from `blowuplab_metric_new` (or null).
#[no_mangle]
pub unsafe extern "C" fn blowuplab_metric_ellipticity(m: *const BlowuplabMetric) -> f64 {
    match m.as_ref() {
        Some(m) => m.inner.ellipticity_bounds(),
        None => f64::NAN,
    }
}

/// Build the damping time rescaling for b(t) = mu(1+t)^{-beta} (mu = 0 for
/// the identity map); returns null on invalid parameters.
#[no_mangle]
pub extern "C" fn blowuplab_rescaling_new(
    mu: f64,
    beta: f64,
    t_max: f64,
    tol: f64,
) -> *mut BlowuplabRescaling {
    let damping = if mu == 0.0 {
        Ok(DampingProfile::zero())
    } else {
        DampingProfile::scattering_power(mu, beta)
    };
    let result = damping.and_then(|d| build_rescaling(d, t_max, tol));
    match result {
        Ok(inner) => Box::into_raw(Box::new(BlowuplabRescaling { inner })),
        Err(e) => {
            set_error(&e);
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `r` must come from `blowuplab_rescaling_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn blowuplab_rescaling_free(r: *mut BlowuplabRescaling) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// η(s), the inverse of s = ∫₀ᵗ 1/m.
/// # Safety
/// `r` must be a live handle from `blowuplab_rescaling_new` (or null).
#[no_mangle]
pub unsafe extern "C" fn blowuplab_rescaling_eta(r: *const BlowuplabRescaling, s: f64) -> f64 {
    match r.as_ref() {
        Some(r) => r.inner.eta(s),
        None => f64::NAN,
    }
}

/// m̃(s) = m(η(s)).
/// # Safety
/// `r` must be a live handle from `blowuplab_rescaling_new` (or null).
#[no_mangle]
pub unsafe extern "C" fn blowuplab_rescaling_m_tilde(
    r: *const BlowuplabRescaling,
    s: f64,
) -> f64 {
    match r.as_ref() {
        Some(r) => r.inner.m_tilde(s),
        None => f64::NAN,
    }
}

/// k = m(∞) = exp(∫₀^∞ b).
/// # Safety
/// `r` must be a live handle from `blowuplab_rescaling_new` (or null).
#[no_mangle]
pub unsafe extern "C" fn blowuplab_rescaling_k(r: *const BlowuplabRescaling) -> f64 {
    match r.as_ref() {
        Some(r) => r.inner.k,
        None => f64::NAN,
    }
}

/// δ₁ with m ∈ [δ₁, 1/δ₁].
/// # Safety
/// `r` must be a live handle from `blowuplab_rescaling_new` (or null).
#[no_mangle]
pub unsafe extern "C" fn blowuplab_rescaling_delta1(r: *const BlowuplabRescaling) -> f64 {
    match r.as_ref() {
        Some(r) => r.inner.delta1,
        None => f64::NAN,
    }
}

/// Closed-form blow-up time of I' = κI^p(1+t)^{-a}, I(0) = ε. Writes both
/// T and ln T (the critical-decay case overflows T itself).
/// # Safety
/// `out_t` and `out_ln_t` must be valid pointers for writes.
#[no_mangle]
pub unsafe extern "C" fn blowuplab_kato_first_order(
    p: f64,
    a: f64,
    kappa: f64,
    eps: f64,
    out_t: *mut f64,
    out_ln_t: *mut f64,
) -> BlowuplabStatus {
    if out_t.is_null() || out_ln_t.is_null() {
        return BlowuplabStatus::NullPointer;
    }
    match blowuplab::blowup::first_order_blowup_time(p, a, kappa, eps) {
        Ok(kt) => {
            *out_t = kt.t;
            *out_ln_t = kt.ln_t;
            BlowuplabStatus::Ok
        }
        Err(e) => {
            set_error(&e);
            status_of(&e)
        }
    }
}

/// Run the solver from a configuration file (key = value text), with the
/// refinement cross-check. `mode`: 0 = original equation, 1 = transformed.
///
/// # Safety
/// `path` must be a NUL-terminated UTF-8 string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn blowuplab_run_config(
    path: *const c_char,
    mode: i32,
    out: *mut BlowuplabReport,
) -> BlowuplabStatus {
    if path.is_null() || out.is_null() {
        return BlowuplabStatus::NullPointer;
    }
    let Ok(path) = CStr::from_ptr(path).to_str() else {
        set_error("path is not valid UTF-8");
        return BlowuplabStatus::Utf8;
    };
    let run_mode = if mode == 0 {
        RunMode::Original
    } else {
        RunMode::Transformed
    };
    let result = blowuplab::config::RunConfig::parse_file(std::path::Path::new(path))
        .and_then(|cfg| {
            let solver = cfg.solver_config()?;
            run_with_consistency(&solver, cfg.eps, run_mode)
        });
    match result {
        Ok(rep) => {
            *out = BlowuplabReport {
                blown_up: rep.blown_up as i32,
                t_num: rep.t_num,
                raw_time: rep.raw_time,
                refinement_consistent: match rep.refinement_consistent {
                    Some(true) => 1,
                    Some(false) => 0,
                    None => -1,
                },
                min_support_margin: rep.min_support_margin,
                steps: rep.steps as u64,
            };
            BlowuplabStatus::Ok
        }
        Err(e) => {
            set_error(&e);
            status_of(&e)
        }
    }
}

/// Static library version string.
#[no_mangle]
pub extern "C" fn blowuplab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
