//! C ABI for `qchan`.
//!
//! Objects are opaque heap handles created by `*_from_*` / `*_named` functions and
//! released with the matching `*_free`. Every fallible call returns a [`QchanStatus`];
//! on failure the message is available from [`qchan_last_error`] on the same thread.
//! Matrices cross the boundary as row-major arrays of interleaved `(re, im)` doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use qchan::capacity::{self, CapacityOptions};
use qchan::channels::{self, Ensemble, KrausChannel};
use qchan::cli::exit_code;
use qchan::entropy;
use qchan::io::{self, RENORMALIZE_TOL};
use qchan::matcore::{c, CMatrix, DensityMatrix};
use qchan::petz;
use qchan::Error;

/// Status codes. The first four match the command-line exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QchanStatus {
    Ok = 0,
    AssertionFailed = 1,
    InvalidInput = 2,
    NonConvergence = 3,
    NullPointer = 4,
    Panic = 5,
}

/// Opaque quantum channel.
pub struct QchanChannel {
    inner: KrausChannel,
}

/// Opaque density matrix.
pub struct QchanState {
    inner: DensityMatrix,
}

/// Opaque ensemble of states.
pub struct QchanEnsemble {
    inner: Ensemble,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct QchanCapacityOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct QchanCapacity {
    /// Bits; `+inf` is reported as `INFINITY`.
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct QchanAudit {
    pub chi_in: f64,
    pub chi_out: f64,
    pub gap: f64,
    pub max_residual: f64,
    pub reversible: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> QchanStatus {
    match exit_code(err) {
        1 => QchanStatus::AssertionFailed,
        3 => QchanStatus::NonConvergence,
        _ => QchanStatus::InvalidInput,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> QchanStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            QchanStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer passed as {what}"));
            QchanStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            QchanStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    unsafe { p.as_ref() }.ok_or(Failure::Null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    unsafe { p.as_mut() }.ok_or(Failure::Null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    unsafe { CStr::from_ptr(p) }.to_str().map_err(|_| {
        Failure::Lib(Error::InvalidParameter {
            reason: format!("{what} is not valid UTF-8"),
        })
    })
}

unsafe fn matrix(data: *const f64, rows: usize, cols: usize, what: &'static str) -> Result<CMatrix, Failure> {
    if data.is_null() {
        return Err(Failure::Null(what));
    }
    let raw = unsafe { std::slice::from_raw_parts(data, 2 * rows * cols) };
    Ok(CMatrix::from_fn(rows, cols, |i, j| {
        let k = 2 * (i * cols + j);
        c(raw[k], raw[k + 1])
    }))
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Copies `s` NUL-terminated into `buf` when it fits and returns the required size including the NUL.
unsafe fn copy_out(s: &str, buf: *mut c_char, len: usize) -> usize {
    let needed = s.len() + 1;
    if !buf.is_null() && len >= needed {
        unsafe {
            std::ptr::copy_nonoverlapping(s.as_ptr(), buf.cast(), s.len());
            *buf.add(s.len()) = 0;
        }
    }
    needed
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qchan_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Last error message on this thread. Returns the buffer size needed (including the NUL);
/// the message is written only if `len` is at least that size.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn qchan_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| unsafe { copy_out(&e.borrow(), buf, len) })
}

/// Parses a channel document (`{"dim_in", "dim_out", "kraus"}`).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qchan_channel_from_json(json: *const c_char, out_channel: *mut *mut QchanChannel) -> QchanStatus {
    guard(|| {
        let src = unsafe { text(json, "json")? };
        let slot = unsafe { out(out_channel, "out_channel")? };
        let inner = io::parse_channel(src, "<json>", RENORMALIZE_TOL)?;
        *slot = boxed(QchanChannel { inner });
        Ok(())
    })
}

/// Builds a channel from `count` Kraus operators, each `dim_out × dim_in`, stored consecutively.
///
/// # Safety
/// `data` must hold `2 · count · dim_out · dim_in` doubles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qchan_channel_from_kraus(
    dim_in: usize,
    dim_out: usize,
    count: usize,
    data: *const f64,
    out_channel: *mut *mut QchanChannel,
) -> QchanStatus {
    guard(|| {
        let slot = unsafe { out(out_channel, "out_channel")? };
        let block = 2 * dim_in * dim_out;
        let ops = (0..count)
            .map(|k| unsafe { matrix(data.wrapping_add(k * block), dim_out, dim_in, "data") })
            .collect::<Result<Vec<_>, _>>()?;
        *slot = boxed(QchanChannel {
            inner: KrausChannel::new(ops)?,
        });
        Ok(())
    })
}

/// Built-in channel by name: `identity:D`, `dephasing:D`, `partial-trace:B:E`, `trine`, `depolarizing:D:P`, `replacement:D_IN:D_OUT`.
///
/// # Safety
/// `spec` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qchan_channel_named(spec: *const c_char, out_channel: *mut *mut QchanChannel) -> QchanStatus {
    guard(|| {
        let name = unsafe { text(spec, "spec")? };
        let slot = unsafe { out(out_channel, "out_channel")? };
        *slot = boxed(QchanChannel {
            inner: channels::named_channel(name)?,
        });
        Ok(())
    })
}

/// # Safety
/// `channel` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qchan_channel_free(channel: *mut QchanChannel) {
    if !channel.is_null() {
        drop(unsafe { Box::from_raw(channel) });
    }
}

/// # Safety
/// `channel` must be a live handle; the outputs must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qchan_channel_dims(channel: *const QchanChannel, dim_in: *mut usize, dim_out: *mut usize) -> QchanStatus {
    guard(|| {
        let ch = unsafe { deref(channel, "channel")? };
        *unsafe { out(dim_in, "dim_in")? } = ch.inner.dim_in();
        *unsafe { out(dim_out, "dim_out")? } = ch.inner.dim_out();
        Ok(())
    })
}

/// Serializes the channel. `needed` receives the buffer size including the NUL; the text is
/// written only if `len` suffices.
///
/// # Safety
/// `channel` must be a live handle; `buf` null or valid for `len` bytes; `needed` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qchan_channel_to_json(
    channel: *const QchanChannel,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> QchanStatus {
    guard(|| {
        let ch = unsafe { deref(channel, "channel")? };
        let slot = unsafe { out(needed, "needed")? };
        *slot = unsafe { copy_out(&io::channel_to_json(&ch.inner), buf, len) };
        Ok(())
    })
}

/// Complementary channel from the minimal Stinespring dilation.
///
/// # Safety
/// `channel` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qchan_channel_complementary(channel: *const QchanChannel, out_channel: *mut *mut QchanChannel) -> QchanStatus {
    guard(|| {
        let ch = unsafe { deref(channel, "channel")? };
        let slot = unsafe { out(out_channel, "out_channel")? };
        *slot = boxed(QchanChannel {
            inner: channels::complementary(&ch.inner)?,
        });
        Ok(())
    })
}

/// Parses a density matrix given as a nested `[re, im]` array.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qchan_state_from_json(json: *const c_char, out_state: *mut *mut QchanState) -> QchanStatus {
    guard(|| {
        let src = unsafe { text(json, "json")? };
        let slot = unsafe { out(out_state, "out_state")? };
        *slot = boxed(QchanState {
            inner: io::parse_state(src, "<json>")?,
        });
        Ok(())
    })
}

/// # Safety
/// `data` must hold `2 · dim · dim` doubles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qchan_state_from_matrix(dim: usize, data: *const f64, out_state: *mut *mut QchanState) -> QchanStatus {
    guard(|| {
        let slot = unsafe { out(out_state, "out_state")? };
        let m = unsafe { matrix(data, dim, dim, "data")? };
        *slot = boxed(QchanState {
            inner: DensityMatrix::new(m)?,
        });
        Ok(())
    })
}

/// # Safety
/// `state` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qchan_state_free(state: *mut QchanState) {
    if !state.is_null() {
        drop(unsafe { Box::from_raw(state) });
    }
}

/// Parses an ensemble given as an array of `{"prob", "state"}` objects.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qchan_ensemble_from_json(json: *const c_char, out_ensemble: *mut *mut QchanEnsemble) -> QchanStatus {
    guard(|| {
        let src = unsafe { text(json, "json")? };
        let slot = unsafe { out(out_ensemble, "out_ensemble")? };
        *slot = boxed(QchanEnsemble {
            inner: io::parse_ensemble(src, "<json>")?,
        });
        Ok(())
    })
}

/// # Safety
/// `ensemble` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qchan_ensemble_free(ensemble: *mut QchanEnsemble) {
    if !ensemble.is_null() {
        drop(unsafe { Box::from_raw(ensemble) });
    }
}

/// Holevo quantity `χ` of an ensemble, in bits.
///
/// # Safety
/// `ensemble` must be a live handle; `value` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qchan_holevo(ensemble: *const QchanEnsemble, value: *mut f64) -> QchanStatus {
    guard(|| {
        let ens = unsafe { deref(ensemble, "ensemble")? };
        let slot = unsafe { out(value, "value")? };
        *slot = entropy::holevo(&ens.inner)?.value();
        Ok(())
    })
}

/// `χ` of the image ensemble under the channel.
///
/// # Safety
/// Handles must be live; `value` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qchan_holevo_image(channel: *const QchanChannel, ensemble: *const QchanEnsemble, value: *mut f64) -> QchanStatus {
    guard(|| {
        let ch = unsafe { deref(channel, "channel")? };
        let ens = unsafe { deref(ensemble, "ensemble")? };
        let slot = unsafe { out(value, "value")? };
        *slot = entropy::holevo_image(&ch.inner, &ens.inner)?.value();
        Ok(())
    })
}

/// Quantum mutual information `I(Φ, ρ)` in bits.
///
/// # Safety
/// Handles must be live; `value` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qchan_mutual_info(channel: *const QchanChannel, state: *const QchanState, value: *mut f64) -> QchanStatus {
    guard(|| {
        let ch = unsafe { deref(channel, "channel")? };
        let st = unsafe { deref(state, "state")? };
        let slot = unsafe { out(value, "value")? };
        *slot = entropy::mutual_info(&ch.inner, &st.inner)?.value();
        Ok(())
    })
}

/// Petz-recovery reversibility audit.
///
/// # Safety
/// Handles must be live; `report` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qchan_audit(channel: *const QchanChannel, ensemble: *const QchanEnsemble, report: *mut QchanAudit) -> QchanStatus {
    guard(|| {
        let ch = unsafe { deref(channel, "channel")? };
        let ens = unsafe { deref(ensemble, "ensemble")? };
        let slot = unsafe { out(report, "report")? };
        let rep = petz::reversibility_audit(&ch.inner, &ens.inner)?;
        *slot = QchanAudit {
            chi_in: rep.chi_in.value(),
            chi_out: rep.chi_out.value(),
            gap: rep.gap,
            max_residual: rep.max_residual(),
            reversible: rep.reversible,
        };
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn qchan_capacity_options_default() -> QchanCapacityOptions {
    let d = CapacityOptions::default();
    QchanCapacityOptions {
        tol: d.tol,
        max_iter: d.max_iter,
        restarts: d.restarts,
        seed: d.seed,
    }
}

fn options(opts: Option<&QchanCapacityOptions>) -> Result<CapacityOptions, Failure> {
    let o = opts.copied().unwrap_or_else(|| qchan_capacity_options_default());
    if !(o.tol > 0.0) || o.max_iter == 0 || o.restarts == 0 {
        return Err(Failure::Lib(Error::InvalidParameter {
            reason: "capacity options need tol > 0, max_iter ≥ 1 and restarts ≥ 1".into(),
        }));
    }
    Ok(CapacityOptions {
        tol: o.tol,
        max_iter: o.max_iter,
        restarts: o.restarts,
        seed: o.seed,
        ensemble_cap: None,
    })
}

fn fill(r: capacity::CapacityResult) -> QchanCapacity {
    QchanCapacity {
        value: r.bits(),
        iterations: r.iterations,
        converged: r.converged,
    }
}

/// Holevo capacity `C̄(Φ)`. `opts` may be null for defaults.
///
/// # Safety
/// `channel` must be live; `opts` null or valid; `result` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qchan_holevo_capacity(
    channel: *const QchanChannel,
    opts: *const QchanCapacityOptions,
    result: *mut QchanCapacity,
) -> QchanStatus {
    guard(|| {
        let ch = unsafe { deref(channel, "channel")? };
        let slot = unsafe { out(result, "result")? };
        let o = options(unsafe { opts.as_ref() })?;
        *slot = fill(capacity::holevo_capacity(&ch.inner, &o)?);
        Ok(())
    })
}

/// Minimal output entropy `H_min(Φ)`. `opts` may be null for defaults.
///
/// # Safety
/// `channel` must be live; `opts` null or valid; `result` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qchan_min_output_entropy(
    channel: *const QchanChannel,
    opts: *const QchanCapacityOptions,
    result: *mut QchanCapacity,
) -> QchanStatus {
    guard(|| {
        let ch = unsafe { deref(channel, "channel")? };
        let slot = unsafe { out(result, "result")? };
        let o = options(unsafe { opts.as_ref() })?;
        *slot = fill(capacity::min_output_entropy(&ch.inner, &o)?);
        Ok(())
    })
}

/// State-constrained Holevo capacity `C̄(Φ, ρ)`. `opts` may be null for defaults.
///
/// # Safety
/// Handles must be live; `opts` null or valid; `result` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qchan_constrained_holevo(
    channel: *const QchanChannel,
    state: *const QchanState,
    opts: *const QchanCapacityOptions,
    result: *mut QchanCapacity,
) -> QchanStatus {
    guard(|| {
        let ch = unsafe { deref(channel, "channel")? };
        let st = unsafe { deref(state, "state")? };
        let slot = unsafe { out(result, "result")? };
        let o = options(unsafe { opts.as_ref() })?;
        *slot = fill(capacity::constrained_holevo(&ch.inner, &st.inner, &o)?);
        Ok(())
    })
}
