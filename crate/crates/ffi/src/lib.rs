//! C ABI over `predim-core`.
//!
//! Every fallible function returns a [`PredimStatus`] and writes its result
//! through an out-pointer. On failure the message is available from
//! [`predim_last_error`] on the same thread until the next call. Strings
//! returned through out-pointers are owned by the caller and released with
//! [`predim_string_free`]; handles are released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use predim_core::predim::{GsOutcome, Predim, PredimensionSpec};
use predim_core::structures::{load_structure, PreStructure};
use predim_core::toric::{intersect_cosets, typicality, LatticeCoset};
use predim_core::{Budget, Error, PointSet};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PredimStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Malformed input: JSON, labels, specs, bindings.
    Input = 3,
    /// An enumeration budget or time limit was exceeded.
    Budget = 4,
    /// Well-formed input outside the operation's domain.
    Domain = 5,
    /// Internal consistency failure or panic.
    Internal = 6,
}

/// A structure together with the predimension evaluated on it.
pub struct PredimStructure {
    m: PreStructure,
    spec: PredimensionSpec,
    budget: Budget,
}

/// A torsion coset of a subtorus.
pub struct PredimCoset(LatticeCoset);

enum Failure {
    Null,
    Utf8,
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PredimStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    let (status, msg) = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => return PredimStatus::Ok,
        Ok(Err(Failure::Null)) => (PredimStatus::NullPointer, "null pointer argument".to_string()),
        Ok(Err(Failure::Utf8)) => (PredimStatus::InvalidUtf8, "string argument is not valid UTF-8".to_string()),
        Ok(Err(Failure::Core(e))) => {
            let status = match &e {
                e if e.is_input() => PredimStatus::Input,
                Error::Budget { .. } | Error::Timeout(_) => PredimStatus::Budget,
                Error::Domain(_) => PredimStatus::Domain,
                _ => PredimStatus::Internal,
            };
            (status, e.to_string())
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            (PredimStatus::Internal, format!("panic: {msg}"))
        }
    };
    set_error(msg);
    status
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null);
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::Utf8)
}

unsafe fn opt_str_arg<'a>(p: *const c_char) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p).map(Some)
    }
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null)
}

unsafe fn write<T>(out: *mut T, v: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null);
    }
    out.write(v);
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|e| Error::Consistency(e.to_string()))?;
    write(out, c.into_raw())
}

fn set_of(m: &PreStructure, labels: &str) -> Result<PointSet, Failure> {
    let labels: Vec<&str> = labels.split(',').map(str::trim).filter(|l| !l.is_empty()).collect();
    Ok(m.set_of(&labels)?)
}

impl PredimStructure {
    fn predim(&self) -> Result<Predim<'_>, Failure> {
        Ok(Predim::new(&self.spec, &self.m)?.with_budget(self.budget.clone()))
    }
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into this library on the same thread; do not free.
#[no_mangle]
pub extern "C" fn predim_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn predim_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a structure from JSON. `spec` may be null, in which case the
/// structure's declared predimension is used.
///
/// # Safety
/// `json` and non-null `spec` must be NUL-terminated strings; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn predim_structure_load(
    json: *const c_char,
    spec: *const c_char,
    out: *mut *mut PredimStructure,
) -> PredimStatus {
    guard(|| {
        let m = load_structure(str_arg(json)?.as_bytes())?;
        let spec = match opt_str_arg(spec)?.or(m.declared_spec()) {
            Some(s) => s.parse::<PredimensionSpec>()?,
            None => return Err(Error::input("spec", "no predimension given and none declared").into()),
        };
        Predim::new(&spec, &m)?;
        write(out, Box::into_raw(Box::new(PredimStructure { m, spec, budget: Budget::default() })))
    })
}

/// # Safety
/// `h` must be null or a handle from [`predim_structure_load`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn predim_structure_free(h: *mut PredimStructure) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Sets the enumeration limits used by later calls on `h`. A zero
/// `timeout_ms` disables the time limit.
///
/// # Safety
/// `h` must be a live structure handle.
#[no_mangle]
pub unsafe extern "C" fn predim_structure_set_budget(
    h: *mut PredimStructure,
    max_points: usize,
    max_subsets: u64,
    timeout_ms: u64,
) -> PredimStatus {
    guard(|| {
        let h = h.as_mut().ok_or(Failure::Null)?;
        let b = Budget::new(max_points, max_subsets as u128);
        h.budget = if timeout_ms > 0 { b.with_timeout_ms(timeout_ms) } else { b };
        Ok(())
    })
}

/// # Safety
/// `h` must be a live structure handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn predim_structure_point_count(h: *const PredimStructure, out: *mut usize) -> PredimStatus {
    guard(|| write(out, handle(h)?.m.n()))
}

/// Predimension of the comma-separated label set `set`.
///
/// # Safety
/// `h` must be a live structure handle, `set` a NUL-terminated string, and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn predim_delta(h: *const PredimStructure, set: *const c_char, out: *mut i64) -> PredimStatus {
    guard(|| {
        let h = handle(h)?;
        let x = set_of(&h.m, str_arg(set)?)?;
        write(out, h.predim()?.delta(x)?)
    })
}

/// Dimension `∂` of the comma-separated label set `set`.
///
/// # Safety
/// As for [`predim_delta`].
#[no_mangle]
pub unsafe extern "C" fn predim_d_partial(h: *const PredimStructure, set: *const c_char, out: *mut i64) -> PredimStatus {
    guard(|| {
        let h = handle(h)?;
        let x = set_of(&h.m, str_arg(set)?)?;
        write(out, h.predim()?.d_partial(x)?)
    })
}

/// # Safety
/// As for [`predim_delta`].
#[no_mangle]
pub unsafe extern "C" fn predim_is_strong(h: *const PredimStructure, set: *const c_char, out: *mut bool) -> PredimStatus {
    guard(|| {
        let h = handle(h)?;
        let x = set_of(&h.m, str_arg(set)?)?;
        write(out, h.predim()?.is_strong(x)?)
    })
}

/// Strong closure of `set`, written as a JSON array of labels.
///
/// # Safety
/// As for [`predim_delta`]; free `*out` with [`predim_string_free`].
#[no_mangle]
pub unsafe extern "C" fn predim_strong_closure(
    h: *const PredimStructure,
    set: *const c_char,
    out: *mut *mut c_char,
) -> PredimStatus {
    guard(|| {
        let h = handle(h)?;
        let x = set_of(&h.m, str_arg(set)?)?;
        let c = h.predim()?.strong_closure(x)?;
        write_string(out, serde_json::to_string(&h.m.labels_of(c)).expect("labels serialize"))
    })
}

/// Writes `true` when every set has non-negative predimension; otherwise
/// `false` and, if `witness` is non-null, a JSON array with the labels of an
/// inclusion-minimal negative set.
///
/// # Safety
/// `h` must be a live structure handle, `ok` writable, and `witness` null or
/// writable; free `*witness` with [`predim_string_free`].
#[no_mangle]
pub unsafe extern "C" fn predim_gs_check(
    h: *const PredimStructure,
    ok: *mut bool,
    witness: *mut *mut c_char,
) -> PredimStatus {
    guard(|| {
        let h = handle(h)?;
        match h.predim()?.gs_check()? {
            GsOutcome::Ok => write(ok, true),
            GsOutcome::Witness(w) => {
                write(ok, false)?;
                if !witness.is_null() {
                    write_string(witness, serde_json::to_string(&h.m.labels_of(w)).expect("labels serialize"))?;
                }
                Ok(())
            }
        }
    })
}

/// Parses a coset from JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn predim_coset_load(json: *const c_char, out: *mut *mut PredimCoset) -> PredimStatus {
    guard(|| {
        let c = LatticeCoset::from_json(str_arg(json)?)?;
        write(out, Box::into_raw(Box::new(PredimCoset(c))))
    })
}

/// # Safety
/// `c` must be null or a handle from [`predim_coset_load`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn predim_coset_free(c: *mut PredimCoset) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// # Safety
/// `c` must be a live coset handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn predim_coset_dim(c: *const PredimCoset, out: *mut usize) -> PredimStatus {
    guard(|| write(out, handle(c)?.0.dim()))
}

/// Intersection of two cosets as JSON `{"dim": d, "components": "k"}`,
/// with `dim = -1` when empty.
///
/// # Safety
/// `a` and `b` must be live coset handles; free `*out` with
/// [`predim_string_free`].
#[no_mangle]
pub unsafe extern "C" fn predim_coset_intersect(
    a: *const PredimCoset,
    b: *const PredimCoset,
    out: *mut *mut c_char,
) -> PredimStatus {
    guard(|| {
        let i = intersect_cosets(&handle(a)?.0, &handle(b)?.0)?;
        write_string(out, serde_json::to_string(&i).expect("intersection serializes"))
    })
}

/// Typicality of `w ∩ s` as JSON, or `null` when the intersection is empty.
///
/// # Safety
/// As for [`predim_coset_intersect`].
#[no_mangle]
pub unsafe extern "C" fn predim_coset_typicality(
    w: *const PredimCoset,
    s: *const PredimCoset,
    out: *mut *mut c_char,
) -> PredimStatus {
    guard(|| {
        let t = typicality(&handle(w)?.0, &handle(s)?.0)?;
        write_string(out, serde_json::to_string(&t).expect("typicality serializes"))
    })
}

/// Runs the command-line interface in-process. `argv` excludes the program
/// name. Captured output is written to `out_stdout` / `out_stderr` (each
/// may be null to discard) and the exit code to `exit_code`.
///
/// # Safety
/// `argv` must point to `argc` NUL-terminated strings; out-pointers must be
/// null or writable.
#[no_mangle]
pub unsafe extern "C" fn predim_cli_run(
    argv: *const *const c_char,
    argc: usize,
    out_stdout: *mut *mut c_char,
    out_stderr: *mut *mut c_char,
    exit_code: *mut i32,
) -> PredimStatus {
    guard(|| {
        if argv.is_null() && argc > 0 {
            return Err(Failure::Null);
        }
        let mut args = vec!["predim".to_string()];
        for i in 0..argc {
            args.push(str_arg(*argv.add(i))?.to_string());
        }
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let code = predim_core::cli::run(&args, &mut o, &mut e);
        for (ptr, buf) in [(out_stdout, o), (out_stderr, e)] {
            if !ptr.is_null() {
                write_string(ptr, String::from_utf8_lossy(&buf).into_owned())?;
            }
        }
        write(exit_code, code)
    })
}
