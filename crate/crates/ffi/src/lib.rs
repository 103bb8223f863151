//! C interface over the eagerline core.
//!
//! Problems and plans are opaque handles created and released here.  Every
//! returned string is owned by the caller and must be released with
//! `eagerline_string_free`.  Functions never unwind across the boundary;
//! a caught panic reports `EAGERLINE_STATUS_ERR_INTERNAL`.

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use eagerline::allen;
use eagerline::dsl;
use eagerline::eager;
use eagerline::model::{bind_all, validate_plan, validate_problem, Plan, Problem};
use eagerline::oracle;
use eagerline::planfile;
use eagerline::solver::{BuildError, Product, SolveBudget, SolveStatus};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EagerlineStatus {
    Ok = 0,
    /// A required pointer argument was null.
    ErrNull = 1,
    /// A string argument was not valid UTF-8.
    ErrUtf8 = 2,
    /// The problem or plan text did not parse.
    ErrParse = 3,
    /// The problem is malformed.
    ErrInvalid = 4,
    /// The problem is outside the eager fragment.
    ErrNotEager = 5,
    /// The problem has no solution.
    ErrNoSolution = 6,
    /// The search budget ran out before a verdict.
    ErrBudget = 7,
    /// The plan is not a solution.
    ErrVerify = 8,
    /// An internal error was caught at the boundary.
    ErrInternal = 9,
}

/// Opaque parsed problem.
pub struct EagerlineProblem {
    inner: Problem,
}

/// Opaque plan tied to the problem it was made from.
pub struct EagerlinePlan {
    inner: Plan,
}

fn leak_string(s: String) -> *mut c_char {
    let cleaned = if s.as_bytes().contains(&0) {
        s.replace('\0', " ")
    } else {
        s
    };
    CString::new(cleaned).expect("interior nul removed").into_raw()
}

unsafe fn put_string(out: *mut *mut c_char, s: String) {
    if !out.is_null() {
        *out = leak_string(s);
    }
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, EagerlineStatus> {
    if ptr.is_null() {
        return Err(EagerlineStatus::ErrNull);
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| EagerlineStatus::ErrUtf8)
}

fn guarded(f: impl FnOnce() -> EagerlineStatus) -> EagerlineStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => EagerlineStatus::ErrInternal,
    }
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn eagerline_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Releases a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn eagerline_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses problem text.  On failure `error_out`, when non-null, receives a
/// message describing the first problem found.
#[no_mangle]
pub unsafe extern "C" fn eagerline_problem_parse(
    text: *const c_char,
    problem_out: *mut *mut EagerlineProblem,
    error_out: *mut *mut c_char,
) -> EagerlineStatus {
    guarded(|| unsafe {
        if problem_out.is_null() {
            return EagerlineStatus::ErrNull;
        }
        *problem_out = ptr::null_mut();
        let text = match read_str(text) {
            Ok(t) => t,
            Err(status) => return status,
        };
        match dsl::parse_problem(text) {
            Ok(problem) => {
                *problem_out = Box::into_raw(Box::new(EagerlineProblem { inner: problem }));
                EagerlineStatus::Ok
            }
            Err(e) => {
                put_string(error_out, e.to_string());
                EagerlineStatus::ErrParse
            }
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn eagerline_problem_free(problem: *mut EagerlineProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Validates the problem and classifies its rules.  `report_out`, when
/// non-null, receives a JSON report with per-rule verdicts.
#[no_mangle]
pub unsafe extern "C" fn eagerline_problem_check(
    problem: *const EagerlineProblem,
    report_out: *mut *mut c_char,
) -> EagerlineStatus {
    guarded(|| unsafe {
        let Some(handle) = problem.as_ref() else {
            return EagerlineStatus::ErrNull;
        };
        let p = &handle.inner;
        let issues: Vec<String> = validate_problem(p).iter().map(|v| v.to_string()).collect();
        if !issues.is_empty() {
            let report = serde_json::json!({ "valid": false, "issues": issues });
            put_string(report_out, report.to_string());
            return EagerlineStatus::ErrInvalid;
        }
        let classes = match eager::classify_problem(p) {
            Ok(c) => c,
            Err(e) => {
                let report = serde_json::json!({ "valid": false, "issues": [e.to_string()] });
                put_string(report_out, report.to_string());
                return EagerlineStatus::ErrInvalid;
            }
        };
        let eager_all = eager::all_eager(&classes);
        let report = serde_json::json!({
            "valid": true,
            "eager": eager_all,
            "rules": classes.iter().map(|c| serde_json::json!({
                "name": c.name,
                "eager": c.eager,
                "reasons": c.reasons(),
            })).collect::<Vec<_>>(),
        });
        put_string(report_out, report.to_string());
        if eager_all {
            EagerlineStatus::Ok
        } else {
            EagerlineStatus::ErrNotEager
        }
    })
}

/// Searches for a solution.  Budgets of zero mean the defaults.  On
/// `EAGERLINE_STATUS_OK` the caller owns the plan in `plan_out`.
#[no_mangle]
pub unsafe extern "C" fn eagerline_solve(
    problem: *const EagerlineProblem,
    max_states: usize,
    max_len: usize,
    plan_out: *mut *mut EagerlinePlan,
) -> EagerlineStatus {
    guarded(|| unsafe {
        let Some(handle) = problem.as_ref() else {
            return EagerlineStatus::ErrNull;
        };
        if plan_out.is_null() {
            return EagerlineStatus::ErrNull;
        }
        *plan_out = ptr::null_mut();
        let mut product = match Product::new(&handle.inner) {
            Ok(product) => product,
            Err(BuildError::Invalid(_)) => return EagerlineStatus::ErrInvalid,
            Err(BuildError::NotEager(_)) => return EagerlineStatus::ErrNotEager,
            Err(BuildError::Dag(_)) => return EagerlineStatus::ErrInvalid,
        };
        let default = SolveBudget::default();
        let budget = SolveBudget {
            max_states: if max_states == 0 { default.max_states } else { max_states },
            max_len: if max_len == 0 { default.max_len } else { max_len },
        };
        let outcome = product.find_solution(&budget);
        match outcome.status {
            SolveStatus::Solution => {
                let plan = outcome.plan.expect("solution carries a plan");
                *plan_out = Box::into_raw(Box::new(EagerlinePlan { inner: plan }));
                EagerlineStatus::Ok
            }
            SolveStatus::Empty => EagerlineStatus::ErrNoSolution,
            SolveStatus::BudgetExhausted => EagerlineStatus::ErrBudget,
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn eagerline_plan_free(plan: *mut EagerlinePlan) {
    if !plan.is_null() {
        drop(Box::from_raw(plan));
    }
}

/// Number of time points the plan spans.
#[no_mangle]
pub unsafe extern "C" fn eagerline_plan_horizon(plan: *const EagerlinePlan) -> u64 {
    match plan.as_ref() {
        Some(handle) => handle.inner.horizon,
        None => 0,
    }
}

/// Renders the plan as JSON against its problem's names.
#[no_mangle]
pub unsafe extern "C" fn eagerline_plan_to_json(
    problem: *const EagerlineProblem,
    plan: *const EagerlinePlan,
    json_out: *mut *mut c_char,
) -> EagerlineStatus {
    guarded(|| unsafe {
        let (Some(p), Some(pl)) = (problem.as_ref(), plan.as_ref()) else {
            return EagerlineStatus::ErrNull;
        };
        if json_out.is_null() {
            return EagerlineStatus::ErrNull;
        }
        put_string(json_out, planfile::render_plan(&p.inner, &pl.inner));
        EagerlineStatus::Ok
    })
}

/// Parses a plan from JSON against the problem's names.
#[no_mangle]
pub unsafe extern "C" fn eagerline_plan_parse_json(
    problem: *const EagerlineProblem,
    text: *const c_char,
    plan_out: *mut *mut EagerlinePlan,
    error_out: *mut *mut c_char,
) -> EagerlineStatus {
    guarded(|| unsafe {
        let Some(handle) = problem.as_ref() else {
            return EagerlineStatus::ErrNull;
        };
        if plan_out.is_null() {
            return EagerlineStatus::ErrNull;
        }
        *plan_out = ptr::null_mut();
        let text = match read_str(text) {
            Ok(t) => t,
            Err(status) => return status,
        };
        match planfile::parse_plan(&handle.inner, text) {
            Ok(plan) => {
                *plan_out = Box::into_raw(Box::new(EagerlinePlan { inner: plan }));
                EagerlineStatus::Ok
            }
            Err(e) => {
                put_string(error_out, e.to_string());
                EagerlineStatus::ErrParse
            }
        }
    })
}

/// Checks the plan against every rule of the problem.  `report_out`, when
/// non-null, receives a JSON report listing any failures.
#[no_mangle]
pub unsafe extern "C" fn eagerline_verify(
    problem: *const EagerlineProblem,
    plan: *const EagerlinePlan,
    report_out: *mut *mut c_char,
) -> EagerlineStatus {
    guarded(|| unsafe {
        let (Some(p), Some(pl)) = (problem.as_ref(), plan.as_ref()) else {
            return EagerlineStatus::ErrNull;
        };
        let issues: Vec<String> =
            validate_problem(&p.inner).iter().map(|v| v.to_string()).collect();
        if !issues.is_empty() {
            let report = serde_json::json!({ "solution": false, "problem_issues": issues });
            put_string(report_out, report.to_string());
            return EagerlineStatus::ErrInvalid;
        }
        let rules = match bind_all(&p.inner) {
            Ok(rules) => rules,
            Err(e) => {
                let report =
                    serde_json::json!({ "solution": false, "problem_issues": [e.to_string()] });
                put_string(report_out, report.to_string());
                return EagerlineStatus::ErrInvalid;
            }
        };
        let plan_issues = validate_plan(&p.inner, &pl.inner);
        if !plan_issues.is_empty() {
            let report = serde_json::json!({ "solution": false, "plan_issues": plan_issues });
            put_string(report_out, report.to_string());
            return EagerlineStatus::ErrVerify;
        }
        let failures = oracle::verify_solution(&pl.inner, &rules);
        let ok = failures.is_empty();
        let report = serde_json::json!({
            "solution": ok,
            "rule_failures": failures.iter().map(|f| serde_json::json!({
                "rule": f.rule,
                "trigger_token": f.trigger_token,
            })).collect::<Vec<_>>(),
        });
        put_string(report_out, report.to_string());
        if ok {
            EagerlineStatus::Ok
        } else {
            EagerlineStatus::ErrVerify
        }
    })
}

/// Renders the interval-relation ambiguity table, as CSV when `csv` is
/// nonzero, with touching-interval encodings when `reflexive` is nonzero.
#[no_mangle]
pub unsafe extern "C" fn eagerline_allen_table(
    csv: bool,
    reflexive: bool,
    table_out: *mut *mut c_char,
) -> EagerlineStatus {
    guarded(|| unsafe {
        if table_out.is_null() {
            return EagerlineStatus::ErrNull;
        }
        let rows = allen::allen_table(!reflexive);
        let text = if csv {
            allen::render_csv(&rows)
        } else {
            allen::render_text(&rows)
        };
        put_string(table_out, text);
        EagerlineStatus::Ok
    })
}
