//! C ABI over `qubobench`.
//!
//! Handles are opaque pointers created by `*_new`/`*_load`/`*_from_text`
//! functions and released with the matching `*_free`. Every fallible call
//! returns a [`QbStatus`]; the message for the most recent failure on the
//! calling thread is available from [`qb_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use qubobench::baselines::brute_force_qubo;
use qubobench::harness::load_instance;
use qubobench::pce::{solve_pce, PceOptions};
use qubobench::problems::{Family, FormulationOptions, Instance};
use qubobench::{Error, QuboModel};

/// Result code for every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidArgument = 4,
    DimensionMismatch = 5,
    TooLarge = 6,
    Io = 7,
    Internal = 8,
    Panic = 9,
}

/// A QUBO model.
pub struct QbQubo(QuboModel);

/// A benchmark instance loaded from a file.
pub struct QbInstance(Instance);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> QbStatus {
    match e {
        Error::Parse { .. } => QbStatus::ParseError,
        Error::Io { .. } => QbStatus::Io,
        Error::DimensionMismatch(_) | Error::IndexOutOfRange { .. } | Error::ParamCountMismatch { .. } => {
            QbStatus::DimensionMismatch
        }
        Error::TooLarge { .. } | Error::QubitCapExceeded { .. } | Error::CapacityExceeded { .. } => QbStatus::TooLarge,
        Error::Invalid(_) | Error::UnknownFamily(_) | Error::EmptyInput => QbStatus::InvalidArgument,
        _ => QbStatus::Internal,
    }
}

enum Fail {
    Status(QbStatus, String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> QbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QbStatus::Ok,
        Ok(Err(Fail::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("panic inside qubobench".into());
            QbStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail::Status(QbStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Status(QbStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn bits_arg<'a>(p: *const u8, len: usize, want: usize) -> Result<&'a [u8], Fail> {
    if len != want {
        return Err(Fail::Status(
            QbStatus::DimensionMismatch,
            format!("bit buffer of length {len} for dimension {want}"),
        ));
    }
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null("bit buffer"));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write_bits(out: *mut u8, len: usize, bits: &[u8]) -> Result<(), Fail> {
    if len != bits.len() {
        return Err(Fail::Status(
            QbStatus::DimensionMismatch,
            format!("output buffer of length {len} for {} bits", bits.len()),
        ));
    }
    if len > 0 {
        if out.is_null() {
            return Err(null("output buffer"));
        }
        ptr::copy_nonoverlapping(bits.as_ptr(), out, len);
    }
    Ok(())
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Zero QUBO on `n` variables.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn qb_qubo_new(n: usize, out: *mut *mut QbQubo) -> QbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = Box::into_raw(Box::new(QbQubo(QuboModel::zeros(n))));
        Ok(())
    })
}

/// Parse the `N offset` / `i j coeff` text form.
///
/// # Safety
/// `text` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qb_qubo_from_text(text: *const c_char, out: *mut *mut QbQubo) -> QbStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let q = QuboModel::from_text(text, "<buffer>")?;
        *out = Box::into_raw(Box::new(QbQubo(q)));
        Ok(())
    })
}

/// Add `value` to the coefficient of `x_i x_j` (`x_i` when `i == j`).
///
/// # Safety
/// `qubo` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qb_qubo_add_term(qubo: *mut QbQubo, i: usize, j: usize, value: f64) -> QbStatus {
    guard(|| {
        let q = &mut qubo.as_mut().ok_or_else(|| null("qubo"))?.0;
        let n = q.dimension();
        if i >= n || j >= n {
            return Err(Error::IndexOutOfRange {
                index: i.max(j),
                len: n,
            }
            .into());
        }
        if i == j {
            q.add_linear(i, value);
        } else {
            q.add_quadratic(i, j, value);
        }
        Ok(())
    })
}

/// Number of variables, or 0 for a null handle.
///
/// # Safety
/// `qubo` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qb_qubo_dimension(qubo: *const QbQubo) -> usize {
    qubo.as_ref().map_or(0, |q| q.0.dimension())
}

/// Energy of a bit assignment (`len` must equal the dimension).
///
/// # Safety
/// `bits` must point to `len` bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qb_qubo_energy(qubo: *const QbQubo, bits: *const u8, len: usize, out: *mut f64) -> QbStatus {
    guard(|| {
        let q = &handle(qubo, "qubo")?.0;
        let bits = bits_arg(bits, len, q.dimension())?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = q.energy(bits);
        Ok(())
    })
}

/// Text form; release with [`qb_string_free`].
///
/// # Safety
/// `qubo` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qb_qubo_to_text(qubo: *const QbQubo, out: *mut *mut c_char) -> QbStatus {
    guard(|| {
        let q = &handle(qubo, "qubo")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = CString::new(q.to_text()).expect("no interior nul").into_raw();
        Ok(())
    })
}

/// Exhaustive minimum. `bits_out` receives the minimiser.
///
/// # Safety
/// `bits_out` must hold `len` bytes; `value_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qb_qubo_brute_force(
    qubo: *const QbQubo,
    bits_out: *mut u8,
    len: usize,
    value_out: *mut f64,
) -> QbStatus {
    guard(|| {
        let q = &handle(qubo, "qubo")?.0;
        if value_out.is_null() {
            return Err(null("value_out"));
        }
        let (bits, value) = brute_force_qubo(q)?;
        write_bits(bits_out, len, &bits)?;
        *value_out = value;
        Ok(())
    })
}

/// Solve with Pauli correlation encoding and bit-swap polishing.
/// `max_rounds == 0` keeps the default round cap.
///
/// # Safety
/// `bits_out` must hold `len` bytes; `value_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qb_qubo_solve_pce(
    qubo: *const QbQubo,
    seed: u64,
    max_rounds: usize,
    bits_out: *mut u8,
    len: usize,
    value_out: *mut f64,
) -> QbStatus {
    guard(|| {
        let q = &handle(qubo, "qubo")?.0;
        if value_out.is_null() {
            return Err(null("value_out"));
        }
        let mut opts = PceOptions::default();
        if max_rounds > 0 {
            opts.multistep.max_rounds = Some(max_rounds);
        }
        let out = solve_pce(q, &opts, seed)?;
        write_bits(bits_out, len, &out.bits)?;
        *value_out = out.qubo_value;
        Ok(())
    })
}

/// # Safety
/// `qubo` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qb_qubo_free(qubo: *mut QbQubo) {
    if !qubo.is_null() {
        drop(Box::from_raw(qubo));
    }
}

/// Load an instance file. `family` is one of `mdkp`, `mis`, `qap`, `msp`,
/// `qubo`.
///
/// # Safety
/// `path` and `family` must be nul-terminated strings; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qb_instance_load(
    path: *const c_char,
    family: *const c_char,
    out: *mut *mut QbInstance,
) -> QbStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let family: Family = str_arg(family, "family")?.parse()?;
        if out.is_null() {
            return Err(null("out"));
        }
        let inst = load_instance(Path::new(path), family)?;
        *out = Box::into_raw(Box::new(QbInstance(inst)));
        Ok(())
    })
}

/// Lower an instance to a new QUBO handle. `penalty <= 0` uses the
/// family default; `preprocess != 0` applies MIS reductions.
///
/// # Safety
/// `inst` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qb_instance_to_qubo(
    inst: *const QbInstance,
    penalty: f64,
    preprocess: i32,
    out: *mut *mut QbQubo,
) -> QbStatus {
    guard(|| {
        let inst = &handle(inst, "instance")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        let f = inst.formulate(&FormulationOptions {
            penalty: (penalty > 0.0).then_some(penalty),
            preprocess_mis: preprocess != 0,
        })?;
        *out = Box::into_raw(Box::new(QbQubo(f.qubo)));
        Ok(())
    })
}

/// # Safety
/// `inst` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qb_instance_free(inst: *mut QbInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
