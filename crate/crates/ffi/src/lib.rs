//! C interface to the fourql engine.
//!
//! Every fallible function returns a [`FourqlStatus`]; on failure
//! [`fourql_last_error`] describes the problem. Objects returned through out
//! pointers are owned by the caller and released with the matching `_free`
//! function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fourql::dump::{self, DumpOptions};
use fourql::{parse_formula, query, LayeredSolution, Program, TruthValue};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FourqlStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidProgram = 4,
    QueryError = 5,
    DatalogError = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FourqlTruth {
    False = 0,
    Unknown = 1,
    Inconsistent = 2,
    True = 3,
}

impl From<TruthValue> for FourqlTruth {
    fn from(v: TruthValue) -> FourqlTruth {
        match v {
            TruthValue::False => FourqlTruth::False,
            TruthValue::Unknown => FourqlTruth::Unknown,
            TruthValue::Inconsistent => FourqlTruth::Inconsistent,
            TruthValue::True => FourqlTruth::True,
        }
    }
}

/// A parsed and validated program.
pub struct FourqlProgram {
    program: Program,
    source: String,
}

/// The model of a program.
pub struct FourqlModel {
    solution: LayeredSolution,
    source: String,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let c = CString::new(message.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: FourqlStatus, message: impl Into<String>) -> FourqlStatus {
    set_error(message);
    status
}

fn guard(f: impl FnOnce() -> FourqlStatus) -> FourqlStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(FourqlStatus::Panic, "internal error"))
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, FourqlStatus> {
    if p.is_null() {
        return Err(fail(FourqlStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(FourqlStatus::InvalidUtf8, "argument is not UTF-8"))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("nul bytes removed").into_raw()
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fourql_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses and validates `source`.
///
/// # Safety
/// `source` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fourql_program_new(source: *const c_char, out: *mut *mut FourqlProgram) -> FourqlStatus {
    guard(|| {
        if out.is_null() {
            return fail(FourqlStatus::NullArgument, "null out pointer");
        }
        *out = ptr::null_mut();
        let src = match text(source) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let program = match fourql::parse_program(src) {
            Ok(p) => p,
            Err(e) => return fail(FourqlStatus::ParseError, e.to_string()),
        };
        let errors: Vec<String> = fourql::syntax::validate(&program)
            .into_iter()
            .filter(|d| d.is_error())
            .map(|d| d.to_string())
            .collect();
        if !errors.is_empty() {
            return fail(FourqlStatus::InvalidProgram, errors.join("\n"));
        }
        *out = Box::into_raw(Box::new(FourqlProgram {
            program,
            source: src.to_owned(),
        }));
        FourqlStatus::Ok
    })
}

/// # Safety
/// `program` must come from [`fourql_program_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn fourql_program_free(program: *mut FourqlProgram) {
    if !program.is_null() {
        drop(Box::from_raw(program));
    }
}

/// Grounds, layer-checks and solves `program`.
///
/// # Safety
/// `program` must be a live program handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fourql_solve(program: *const FourqlProgram, out: *mut *mut FourqlModel) -> FourqlStatus {
    guard(|| {
        if program.is_null() || out.is_null() {
            return fail(FourqlStatus::NullArgument, "null argument");
        }
        *out = ptr::null_mut();
        let p = &*program;
        match fourql::solve_layered(&p.program) {
            Ok(solution) => {
                *out = Box::into_raw(Box::new(FourqlModel {
                    solution,
                    source: p.source.clone(),
                }));
                FourqlStatus::Ok
            }
            Err(e) => fail(FourqlStatus::InvalidProgram, e.to_string()),
        }
    })
}

/// # Safety
/// `model` must come from [`fourql_solve`] or be null.
#[no_mangle]
pub unsafe extern "C" fn fourql_model_free(model: *mut FourqlModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Evaluates a ground formula such as `main.a, -main.b` in the model.
///
/// # Safety
/// `model` must be a live model handle, `formula` a nul-terminated string
/// and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fourql_model_query(
    model: *const FourqlModel,
    formula: *const c_char,
    out: *mut FourqlTruth,
) -> FourqlStatus {
    guard(|| {
        if model.is_null() || out.is_null() {
            return fail(FourqlStatus::NullArgument, "null argument");
        }
        let f = match text(formula) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let f = match parse_formula(f) {
            Ok(f) => f,
            Err(e) => return fail(FourqlStatus::QueryError, e.to_string()),
        };
        let m = &*model;
        match query::evaluate(&f, m.solution.ground.signatures(), &m.solution.global) {
            Ok(v) => {
                *out = v.into();
                FourqlStatus::Ok
            }
            Err(e) => fail(FourqlStatus::QueryError, e.to_string()),
        }
    })
}

/// Writes the model as a JSON document. Free the result with
/// [`fourql_string_free`].
///
/// # Safety
/// `model` must be a live model handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fourql_model_to_json(
    model: *const FourqlModel,
    show_unknown: bool,
    out: *mut *mut c_char,
) -> FourqlStatus {
    guard(|| {
        if model.is_null() || out.is_null() {
            return fail(FourqlStatus::NullArgument, "null argument");
        }
        let m = &*model;
        let opts = DumpOptions {
            show_unknown,
            ..Default::default()
        };
        let d = dump::model_dump(m.source.as_bytes(), &m.solution, &opts);
        *out = into_c_string(dump::to_json(&d));
        FourqlStatus::Ok
    })
}

/// Translates stratified Datalog with negation into module rules. Free the
/// result with [`fourql_string_free`].
///
/// # Safety
/// `source` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fourql_translate_datalog(source: *const c_char, out: *mut *mut c_char) -> FourqlStatus {
    guard(|| {
        if out.is_null() {
            return fail(FourqlStatus::NullArgument, "null out pointer");
        }
        *out = ptr::null_mut();
        let src = match text(source) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match fourql::parse_datalog(src).and_then(|p| fourql::translate(&p)) {
            Ok(t) => {
                *out = into_c_string(t.program.to_string());
                FourqlStatus::Ok
            }
            Err(e) => fail(FourqlStatus::DatalogError, e.to_string()),
        }
    })
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn fourql_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
