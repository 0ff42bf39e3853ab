//! C ABI over `echomem`.
//!
//! Every fallible function returns an [`EchomemStatus`] and writes results
//! through out-pointers; on failure the out-pointers are left untouched and
//! [`echomem_last_error`] holds a message for the calling thread. Objects are
//! opaque handles released with the matching `*_free` function. Panics are
//! caught at the boundary and reported as `ECHOMEM_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use echomem::area::{self, AreaProtocolConfig, Geometry};
use echomem::cli::commands::{protocol_echo, protocol_transfer};
use echomem::cli::config::{Protocol, RunConfig};
use echomem::oracle::transform::Grid;
use echomem::pulses::{self, Pulse};
use echomem::Error;
use num_complex::Complex64;

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EchomemStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Domain = 3,
    Bifurcation = 4,
    GridMismatch = 5,
    Aliasing = 6,
    QuadratureNonConvergence = 7,
    StepUnderflow = 8,
    Search = 9,
    Singular = 10,
    UndefinedMeasure = 11,
    Overflow = 12,
    InvalidUtf8 = 13,
    BufferTooSmall = 14,
    Panic = 15,
}

impl From<&Error> for EchomemStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidInput(_) => Self::InvalidInput,
            Error::Domain(_) => Self::Domain,
            Error::Bifurcation { .. } => Self::Bifurcation,
            Error::GridMismatch(_) => Self::GridMismatch,
            Error::Aliasing { .. } => Self::Aliasing,
            Error::QuadratureNonConvergence { .. } => Self::QuadratureNonConvergence,
            Error::StepUnderflow { .. } => Self::StepUnderflow,
            Error::Search(_) => Self::Search,
            Error::Singular(_) => Self::Singular,
            Error::UndefinedMeasure(_) => Self::UndefinedMeasure,
            Error::Overflow(_) => Self::Overflow,
        }
    }
}

/// Configured memory protocol.
pub struct EchomemProtocol(Protocol);

/// Sampled complex pulse envelope.
pub struct EchomemPulse(Pulse);

/// Inputs to the pulse-area solutions.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct EchomemAreaConfig {
    pub theta_s0: f64,
    pub theta_c1: f64,
    pub theta_c2: f64,
    pub gamma_e: f64,
    pub alpha0: f64,
    pub length: f64,
    /// Non-zero selects backward geometry.
    pub backward: i32,
}

impl From<&EchomemAreaConfig> for AreaProtocolConfig {
    fn from(c: &EchomemAreaConfig) -> Self {
        AreaProtocolConfig {
            theta_s0: c.theta_s0,
            theta_c1: c.theta_c1,
            theta_c2: c.theta_c2,
            gamma_e: c.gamma_e,
            alpha0: c.alpha0,
            length: c.length,
            geometry: if c.backward != 0 { Geometry::Backward } else { Geometry::Forward },
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

enum Failure {
    Lib(Error),
    Status(EchomemStatus, String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(EchomemStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, translating errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> EchomemStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            EchomemStatus::Ok
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            EchomemStatus::from(&e)
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            EchomemStatus::Panic
        }
    }
}

/// # Safety
/// `p` must be null or valid for reads.
unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

/// # Safety
/// `p` must be null or valid for writes.
unsafe fn put<T>(p: *mut T, v: T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(v);
    Ok(())
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`). Returns the buffer size needed for the whole message.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes of writes.
#[no_mangle]
pub unsafe extern "C" fn echomem_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        bytes.len() + 1
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn echomem_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a protocol from JSON, e.g. `{"kind": "crib-bwd", "depth": 2.0}`.
/// The schema matches the `protocol` object of the CLI configuration.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn echomem_protocol_from_json(json: *const c_char, out: *mut *mut EchomemProtocol) -> EchomemStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Failure::Status(EchomemStatus::InvalidUtf8, e.to_string()))?;
        let cfg = RunConfig::from_json(&format!("{{\"protocol\": {text}}}"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        put(out, Box::into_raw(Box::new(EchomemProtocol(cfg.protocol))), "out")
    })
}

/// # Safety
/// `p` must be null or a handle from [`echomem_protocol_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn echomem_protocol_free(p: *mut EchomemProtocol) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Complex transfer function at offset `omega`.
///
/// # Safety
/// `p` must be a live protocol handle; `re` and `im` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn echomem_protocol_transfer(
    p: *const EchomemProtocol,
    omega: f64,
    re: *mut f64,
    im: *mut f64,
) -> EchomemStatus {
    guard(|| {
        let proto = deref(p, "protocol")?;
        if re.is_null() || im.is_null() {
            return Err(null("re/im"));
        }
        let h = protocol_transfer(&proto.0, omega)?;
        put(re, h.re, "re")?;
        put(im, h.im, "im")
    })
}

/// Spectral efficiency `|H(omega_k)|^2` for `n` offsets.
///
/// # Safety
/// `omegas` and `eta` must each be valid for `n` elements.
#[no_mangle]
pub unsafe extern "C" fn echomem_protocol_efficiency(
    p: *const EchomemProtocol,
    omegas: *const f64,
    n: usize,
    eta: *mut f64,
) -> EchomemStatus {
    guard(|| {
        let proto = deref(p, "protocol")?;
        if n > 0 && (omegas.is_null() || eta.is_null()) {
            return Err(null("omegas/eta"));
        }
        if n == 0 {
            return Ok(());
        }
        let ws = std::slice::from_raw_parts(omegas, n);
        let values = ws.iter().map(|&w| protocol_transfer(&proto.0, w).map(|h| h.norm_sqr())).collect::<Result<Vec<_>, _>>()?;
        std::slice::from_raw_parts_mut(eta, n).copy_from_slice(&values);
        Ok(())
    })
}

/// Gaussian pulse with `1/e` spectral half width `bandwidth` on a centered
/// grid of `samples` points spaced `dt`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn echomem_pulse_gaussian(
    bandwidth: f64,
    amplitude: f64,
    samples: usize,
    dt: f64,
    out: *mut *mut EchomemPulse,
) -> EchomemStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let pulse = pulses::gaussian_pulse_with_bandwidth(bandwidth, amplitude, Grid::new(samples, dt)?)?;
        put(out, Box::into_raw(Box::new(EchomemPulse(pulse))), "out")
    })
}

/// Pulse from `n` complex samples given as separate real and imaginary arrays.
///
/// # Safety
/// `re` and `im` must each be valid for `n` reads; `out` for writes.
#[no_mangle]
pub unsafe extern "C" fn echomem_pulse_from_samples(
    re: *const f64,
    im: *const f64,
    n: usize,
    dt: f64,
    out: *mut *mut EchomemPulse,
) -> EchomemStatus {
    guard(|| {
        if re.is_null() || im.is_null() || out.is_null() {
            return Err(null("re/im/out"));
        }
        let grid = Grid::new(n, dt)?;
        let (re, im) = (std::slice::from_raw_parts(re, n), std::slice::from_raw_parts(im, n));
        let env = re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        let pulse = Pulse::new(grid, env)?;
        put(out, Box::into_raw(Box::new(EchomemPulse(pulse))), "out")
    })
}

/// # Safety
/// `p` must be null or a live pulse handle.
#[no_mangle]
pub unsafe extern "C" fn echomem_pulse_free(p: *mut EchomemPulse) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Number of samples; 0 for a null handle.
///
/// # Safety
/// `p` must be null or a live pulse handle.
#[no_mangle]
pub unsafe extern "C" fn echomem_pulse_len(p: *const EchomemPulse) -> usize {
    p.as_ref().map_or(0, |p| p.0.grid.n)
}

/// Copies the envelope into `re`/`im`, which must hold `len` samples.
///
/// # Safety
/// `re` and `im` must each be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn echomem_pulse_samples(
    p: *const EchomemPulse,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> EchomemStatus {
    guard(|| {
        let pulse = &deref(p, "pulse")?.0;
        if re.is_null() || im.is_null() {
            return Err(null("re/im"));
        }
        let n = pulse.grid.n;
        if len < n {
            return Err(Failure::Status(EchomemStatus::BufferTooSmall, format!("need {n} samples, buffer holds {len}")));
        }
        let (re, im) = (std::slice::from_raw_parts_mut(re, n), std::slice::from_raw_parts_mut(im, n));
        for (k, v) in pulse.envelope.iter().enumerate() {
            re[k] = v.re;
            im[k] = v.im;
        }
        Ok(())
    })
}

/// Energy and RMS duration of a pulse.
///
/// # Safety
/// `energy` and `rms_duration` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn echomem_pulse_stats(
    p: *const EchomemPulse,
    energy: *mut f64,
    rms_duration: *mut f64,
) -> EchomemStatus {
    guard(|| {
        let pulse = &deref(p, "pulse")?.0;
        if energy.is_null() || rms_duration.is_null() {
            return Err(null("energy/rms_duration"));
        }
        put(energy, pulse.energy(), "energy")?;
        put(rms_duration, pulse.rms_duration(), "rms_duration")
    })
}

/// Stores and retrieves `input`. Writes a new pulse handle and the fraction
/// of input spectral energy near the grid edge (values above 1e-3 mean the
/// grid is too coarse).
///
/// # Safety
/// Handles must be live; `echo` and `aliasing_fraction` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn echomem_protocol_echo(
    p: *const EchomemProtocol,
    input: *const EchomemPulse,
    echo: *mut *mut EchomemPulse,
    aliasing_fraction: *mut f64,
) -> EchomemStatus {
    guard(|| {
        let proto = deref(p, "protocol")?;
        let pulse = deref(input, "input")?;
        if echo.is_null() || aliasing_fraction.is_null() {
            return Err(null("echo/aliasing_fraction"));
        }
        let (out, fraction) = protocol_echo(&proto.0, &pulse.0)?;
        put(aliasing_fraction, fraction, "aliasing_fraction")?;
        put(echo, Box::into_raw(Box::new(EchomemPulse(out))), "echo")
    })
}

/// Echo-to-input energy ratio.
///
/// # Safety
/// Handles must be live; `eta` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn echomem_energy_efficiency(
    input: *const EchomemPulse,
    echo: *const EchomemPulse,
    eta: *mut f64,
) -> EchomemStatus {
    guard(|| {
        let (a, b) = (deref(input, "input")?, deref(echo, "echo")?);
        put(eta, pulses::energy_efficiency(&a.0, &b.0)?, "eta")
    })
}

/// Optimal resonant depth and efficiency of forward CRIB at offset `omega`.
///
/// # Safety
/// `depth` and `eta` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn echomem_crib_forward_optimum(omega: f64, depth: *mut f64, eta: *mut f64) -> EchomemStatus {
    guard(|| {
        if depth.is_null() || eta.is_null() {
            return Err(null("depth/eta"));
        }
        let o = echomem::linear::crib_forward_optimal_depth(omega)?;
        put(depth, o.depth, "depth")?;
        put(eta, o.eta, "eta")
    })
}

/// Comb dephasing factor for a given finesse.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn echomem_afc_dephasing(finesse: f64, out: *mut f64) -> EchomemStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        put(out, echomem::afc::afc_dephasing(finesse)?, "out")
    })
}

/// Signal area after propagating to `z` in an absorber.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn echomem_absorber_area(z: f64, theta0: f64, alpha0: f64, out: *mut f64) -> EchomemStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        put(out, area::mccall_hahn_area(z, theta0, alpha0)?, "out")
    })
}

/// CRIB echo area at `z` (closed form).
///
/// # Safety
/// `cfg` must be valid for reads, `out` for writes.
#[no_mangle]
pub unsafe extern "C" fn echomem_crib_echo_area(cfg: *const EchomemAreaConfig, z: f64, out: *mut f64) -> EchomemStatus {
    guard(|| {
        let c = AreaProtocolConfig::from(deref(cfg, "cfg")?);
        if out.is_null() {
            return Err(null("out"));
        }
        put(out, area::crib_area(z, &c)?, "out")
    })
}

/// ROSE echo area at `z` (closed form).
///
/// # Safety
/// `cfg` must be valid for reads, `out` for writes.
#[no_mangle]
pub unsafe extern "C" fn echomem_rose_echo_area(cfg: *const EchomemAreaConfig, z: f64, out: *mut f64) -> EchomemStatus {
    guard(|| {
        let c = AreaProtocolConfig::from(deref(cfg, "cfg")?);
        if out.is_null() {
            return Err(null("out"));
        }
        put(out, area::rose_closed_form(z, &c)?, "out")
    })
}
