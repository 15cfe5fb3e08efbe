//! C ABI over the quantauto library.
//!
//! Machines cross the boundary as opaque `QaMachine` handles. Every call
//! returns a `QaStatus`; on failure `qa_last_error` describes the problem
//! until the next call on the same thread. Strings handed out by the
//! library are released with `qa_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use quantauto::automata::{assign_weights, uniform_weights, validate_machine, Machine, ModelKind, WeightAssignment};
use quantauto::exactmath::Rational;
use quantauto::format::{parse_machine, serialize_machine};
use quantauto::measures::measure_run;
use quantauto::runs::{enumerate_runs_with_budget, Run, TimeGrid, DEFAULT_RUN_BUDGET};
use quantauto::{translations as tr, Error};

/// Result code of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QaStatus {
    Ok = 0,
    NullArgument = 1,
    Usage = 2,
    Parse = 3,
    Structural = 4,
    Validation = 5,
    Unsupported = 6,
    Degenerate = 7,
    Accuracy = 8,
    Budget = 9,
    InvalidUtf8 = 10,
    Panic = 11,
}

/// Opaque machine handle.
pub struct QaMachine {
    inner: Machine,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> QaStatus {
    match e {
        Error::Parse(_) => QaStatus::Parse,
        Error::Structural(_) => QaStatus::Structural,
        Error::Validation(_) => QaStatus::Validation,
        Error::Unsupported(_) => QaStatus::Unsupported,
        Error::Degenerate(_) => QaStatus::Degenerate,
        Error::Accuracy { .. } => QaStatus::Accuracy,
        Error::Budget { .. } => QaStatus::Budget,
        Error::Usage(_) => QaStatus::Usage,
    }
}

enum Fail {
    Null(&'static str),
    Utf8,
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> QaStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QaStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(&format!("null argument: {what}"));
            QaStatus::NullArgument
        }
        Ok(Err(Fail::Utf8)) => {
            set_error("string argument is not valid UTF-8");
            QaStatus::InvalidUtf8
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            QaStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Utf8)
}

unsafe fn opt_str<'a>(p: *const c_char) -> Result<Option<&'a str>, Fail> {
    if p.is_null() {
        Ok(None)
    } else {
        CStr::from_ptr(p).to_str().map(Some).map_err(|_| Fail::Utf8)
    }
}

unsafe fn machine<'a>(m: *const QaMachine) -> Result<&'a Machine, Fail> {
    m.as_ref().map(|h| &h.inner).ok_or(Fail::Null("machine"))
}

unsafe fn put<T>(out: *mut T, v: T, what: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    out.write(v);
    Ok(())
}

fn into_c(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

fn weights(m: &Machine, spec: Option<&str>) -> Result<Option<WeightAssignment>, Fail> {
    if !m.kind().needs_weights() {
        return Ok(None);
    }
    Ok(Some(match spec {
        None => return Err(Fail::Lib(Error::Usage(format!("{} machines need a weighting", m.kind())))),
        Some("uniform") => uniform_weights(m)?,
        Some(s) => assign_weights(m, &s.parse::<Rational>()?)?,
    }))
}

fn grid(s: Option<&str>) -> Result<TimeGrid, Fail> {
    match s {
        None => Ok(TimeGrid::empty()),
        Some(t) if t.trim().is_empty() => Ok(TimeGrid::empty()),
        Some(t) => Ok(TimeGrid::parse(t)?),
    }
}

/// Message for the most recent failure on this thread; empty after success.
/// The pointer stays valid until the next library call on this thread.
#[no_mangle]
pub extern "C" fn qa_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qa_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a machine definition (JSON text).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qa_machine_parse(json: *const c_char, out: *mut *mut QaMachine) -> QaStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let m = parse_machine(text)?;
        out.write(Box::into_raw(Box::new(QaMachine { inner: m })));
        Ok(())
    })
}

/// Releases a machine handle. Null is ignored.
///
/// # Safety
/// `m` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qa_machine_free(m: *mut QaMachine) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Model name ("nfa", "ta", "pa", "pta", "tapd" or "sta"), statically allocated.
///
/// # Safety
/// `m` must be a live handle or null (which yields an empty string).
#[no_mangle]
pub unsafe extern "C" fn qa_machine_kind(m: *const QaMachine) -> *const c_char {
    let name: &'static CStr = match m.as_ref().map(|h| h.inner.kind()) {
        Some(ModelKind::Nfa) => c"nfa",
        Some(ModelKind::Ta) => c"ta",
        Some(ModelKind::Pa) => c"pa",
        Some(ModelKind::Pta) => c"pta",
        Some(ModelKind::Tapd) => c"tapd",
        Some(ModelKind::Sta) => c"sta",
        None => c"",
    };
    name.as_ptr()
}

/// # Safety
/// `m` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn qa_machine_size(m: *const QaMachine, states: *mut usize, edges: *mut usize) -> QaStatus {
    guard(|| {
        let m = machine(m)?;
        put(states, m.num_states(), "states")?;
        put(edges, m.num_edges(), "edges")
    })
}

/// Sets `*valid`; the violations, if any, are in `qa_last_error`.
///
/// # Safety
/// `m` must be a live handle; `valid` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qa_machine_validate(m: *const QaMachine, valid: *mut bool) -> QaStatus {
    guard(|| {
        let r = validate_machine(machine(m)?);
        put(valid, r.valid, "valid")?;
        if !r.valid {
            set_error(&r.violations.join("; "));
        }
        Ok(())
    })
}

/// Machine definition text; free with `qa_string_free`.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qa_machine_serialize(m: *const QaMachine, out: *mut *mut c_char) -> QaStatus {
    guard(|| {
        let text = serialize_machine(machine(m)?);
        put(out, into_c(text), "out")
    })
}

/// Number of runs with exactly `depth` steps. `grid` is a comma-separated
/// list of time points (null or empty for untimed machines).
///
/// # Safety
/// `m` must be a live handle; `grid` null or NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qa_count_runs(
    m: *const QaMachine,
    depth: usize,
    grid_csv: *const c_char,
    out: *mut usize,
) -> QaStatus {
    guard(|| {
        let m = machine(m)?;
        let runs = enumerate_runs_with_budget(m, depth, &grid(opt_str(grid_csv)?)?, DEFAULT_RUN_BUDGET)?;
        put(out, runs.len(), "out")
    })
}

/// Measure of the run taking `edges[0..n]` at the given times. `weights`
/// is a slack such as "1/10" or "uniform" (NFA and TA only). The value is
/// written as text ("1/12", or "value ± error" when numeric).
///
/// # Safety
/// `edges` must hold `n` values; string arguments null or NUL-terminated;
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qa_measure_path(
    m: *const QaMachine,
    edges: *const usize,
    n: usize,
    times_csv: *const c_char,
    weights_spec: *const c_char,
    out: *mut *mut c_char,
) -> QaStatus {
    guard(|| {
        let m = machine(m)?;
        let es: &[usize] = if n == 0 {
            &[]
        } else if edges.is_null() {
            return Err(Fail::Null("edges"));
        } else {
            std::slice::from_raw_parts(edges, n)
        };
        let times = grid(opt_str(times_csv)?)?;
        let run = Run::along(m, es, times.points())?;
        let w = weights(m, opt_str(weights_spec)?)?;
        let v = measure_run(m, w.as_ref(), &run)?;
        put(out, into_c(v.to_string()), "out")
    })
}

/// Translation into another class. `target` is one of "ta", "pa", "pta",
/// "tapd", "sta", "region", "nfa-gcd". The witness (with weights, when the
/// target needs them) is written as JSON text.
///
/// # Safety
/// `m` must be a live handle; strings null or NUL-terminated; outs writable.
#[no_mangle]
pub unsafe extern "C" fn qa_translate(
    m: *const QaMachine,
    target: *const c_char,
    degree: u32,
    weights_spec: *const c_char,
    out: *mut *mut QaMachine,
    witness_json: *mut *mut c_char,
) -> QaStatus {
    guard(|| {
        let m = machine(m)?;
        let target = str_arg(target, "target")?;
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let t = match target {
            "ta" => tr::nfa_to_timed(m)?,
            "pa" => tr::nfa_to_prob(m)?,
            "pta" if m.kind() == ModelKind::Ta => tr::timed_to_probtimed(m)?,
            "pta" => tr::prob_to_probtimed(m)?,
            "tapd" => tr::probtimed_to_delay(m, degree)?,
            "sta" => tr::delay_to_stochastic(m)?,
            "region" => {
                let w = weights(m, opt_str(weights_spec)?)?
                    .ok_or_else(|| Fail::Lib(Error::Usage("region needs a timed automaton".into())))?;
                tr::region_automaton(m, &w, tr::DEFAULT_REGION_BUDGET)?
            }
            "nfa-gcd" if m.kind() == ModelKind::Pta => tr::probtimed_to_timed(m, tr::DEFAULT_SPLIT_BUDGET)?,
            "nfa-gcd" => tr::prob_to_nfa_gcd(m, tr::DEFAULT_SPLIT_BUDGET)?,
            other => return Err(Fail::Lib(Error::Usage(format!("unknown target '{other}'")))),
        };
        let mut wit = t.witness.to_json(m, &t.machine);
        if let Some(w) = &t.weights {
            wit["weights"] = w.weights().iter().map(|x| x.to_string()).collect();
        }
        if !witness_json.is_null() {
            witness_json.write(into_c(wit.to_string()));
        }
        out.write(Box::into_raw(Box::new(QaMachine { inner: t.machine })));
        Ok(())
    })
}

/// Runs the built-in counterexample suite; the report is JSON text.
///
/// # Safety
/// Out pointers must be writable; `report_json` may be null.
#[no_mangle]
pub unsafe extern "C" fn qa_repro(all_passed: *mut bool, report_json: *mut *mut c_char) -> QaStatus {
    guard(|| {
        let r = quantauto::expressiveness::verify_counterexamples()?;
        put(all_passed, r.all_passed(), "all_passed")?;
        if !report_json.is_null() {
            report_json.write(into_c(serde_json::to_string(&r).expect("report")));
        }
        Ok(())
    })
}
