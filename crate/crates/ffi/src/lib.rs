//! C ABI over the `cexcheck` engine.
//!
//! Every function returns a [`CexStatus`]; results come back through out
//! pointers. Handles and strings handed out here must be released with the
//! matching `*_free` function. After a non-`Ok` status,
//! [`cex_last_error_message`] describes the failure on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cexcheck::dsl::{self, ExecOptions, Program, ProgramReport, Session};
use cexcheck::report::SuiteReport;
use cexcheck::scenario::{self, Scenario};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CexStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    UnknownScenario = 4,
    OutOfRange = 5,
    Internal = 6,
}

/// A parsed DSL program.
pub struct CexProgram {
    program: Program,
}

/// A finished run: a program execution or a scenario report.
pub struct CexReport {
    json: String,
    markdown: String,
    passed: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn guard(f: impl FnOnce() -> Result<(), (CexStatus, String)>) -> CexStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CexStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CexStatus::Internal
        }
    }
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, (CexStatus, String)> {
    if s.is_null() {
        return Err((CexStatus::NullArgument, "null string".into()));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| (CexStatus::InvalidUtf8, e.to_string()))
}

fn check_out<T>(out: *mut T) -> Result<(), (CexStatus, String)> {
    if out.is_null() {
        Err((CexStatus::NullArgument, "null out pointer".into()))
    } else {
        Ok(())
    }
}

fn c_string(s: &str) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("nul bytes replaced").into_raw()
}

fn program_report(r: &ProgramReport) -> CexReport {
    let passed = r.errors.is_empty() && r.checks.iter().all(|c| c.error.is_none() && c.coherent());
    CexReport {
        json: serde_json::to_string_pretty(r).expect("report serializes"),
        markdown: r.to_markdown(),
        passed,
    }
}

/// Parse `source` into a program handle.
///
/// # Safety
/// `source` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cex_program_parse(source: *const c_char, out: *mut *mut CexProgram) -> CexStatus {
    guard(|| {
        check_out(out)?;
        let src = text(source)?;
        let program = dsl::parse(src).map_err(|e| (CexStatus::ParseError, e.to_string()))?;
        *out = Box::into_raw(Box::new(CexProgram { program }));
        Ok(())
    })
}

/// # Safety
/// `program` must come from [`cex_program_parse`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cex_program_free(program: *mut CexProgram) {
    if !program.is_null() {
        drop(Box::from_raw(program));
    }
}

/// Execute a program with default options.
///
/// # Safety
/// `program` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cex_program_execute(program: *const CexProgram, out: *mut *mut CexReport) -> CexStatus {
    guard(|| {
        check_out(out)?;
        let p = program.as_ref().ok_or((CexStatus::NullArgument, "null program".to_string()))?;
        let r = Session::new().execute(&p.program, &ExecOptions::default());
        *out = Box::into_raw(Box::new(program_report(&r)));
        Ok(())
    })
}

/// Number of built-in scenarios.
#[no_mangle]
pub extern "C" fn cex_scenario_count() -> usize {
    scenario::builtin_sources().len()
}

/// Id of the built-in scenario at `index`, as a string for [`cex_string_free`].
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cex_scenario_id(index: usize, out: *mut *mut c_char) -> CexStatus {
    guard(|| {
        check_out(out)?;
        let all = scenario::builtin();
        let s = all
            .get(index)
            .ok_or((CexStatus::OutOfRange, format!("index {index} of {}", all.len())))?;
        *out = c_string(&s.id);
        Ok(())
    })
}

fn find(id: &str) -> Result<Scenario, (CexStatus, String)> {
    let all = scenario::builtin();
    scenario::find(&all, id)
        .cloned()
        .map_err(|e| (CexStatus::UnknownScenario, e.to_string()))
}

/// Run one built-in scenario by id.
///
/// # Safety
/// `id` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cex_scenario_run(id: *const c_char, out: *mut *mut CexReport) -> CexStatus {
    guard(|| {
        check_out(out)?;
        let s = find(text(id)?)?;
        let opts = ExecOptions::default();
        let suite = SuiteReport::new(&opts, vec![scenario::run_scenario(&s, &opts)]);
        *out = Box::into_raw(Box::new(CexReport {
            json: suite.to_json(),
            markdown: suite.to_markdown(),
            passed: suite.all_passed(),
        }));
        Ok(())
    })
}

unsafe fn report_string(report: *const CexReport, out: *mut *mut c_char, pick: fn(&CexReport) -> &str) -> CexStatus {
    guard(|| {
        check_out(out)?;
        let r = report.as_ref().ok_or((CexStatus::NullArgument, "null report".to_string()))?;
        *out = c_string(pick(r));
        Ok(())
    })
}

/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cex_report_json(report: *const CexReport, out: *mut *mut c_char) -> CexStatus {
    report_string(report, out, |r| &r.json)
}

/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cex_report_markdown(report: *const CexReport, out: *mut *mut c_char) -> CexStatus {
    report_string(report, out, |r| &r.markdown)
}

/// 1 if the run passed, 0 if not, -1 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cex_report_passed(report: *const CexReport) -> i32 {
    match report.as_ref() {
        Some(r) => r.passed as i32,
        None => -1,
    }
}

/// # Safety
/// `report` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cex_report_free(report: *mut CexReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must be a string returned by this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cex_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failure on this thread, or null. Valid until the
/// next call into the library from the same thread; do not free.
#[no_mangle]
pub extern "C" fn cex_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}
