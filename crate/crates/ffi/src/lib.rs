//! C ABI over `contest_core`.
//!
//! Every fallible function returns a [`ContestStatus`] and writes results
//! through out-pointers. The status values match the CLI exit codes. On
//! failure, [`contest_last_error_message`] returns a description that stays
//! valid until the next failing call on the same thread. Solutions are opaque
//! handles owned by the caller and released with [`contest_solution_free`].
//! Strings returned by the library are released with [`contest_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use contest_core::cli::exit_code;
use contest_core::design::{optimize_prizes, DesignProblem};
use contest_core::sim::{simulate_equilibrium, SimConfig};
use contest_core::verify::verify_with_tol;
use contest_core::{ContestError, ContestParams, EquilibriumSolution, RegimeKind};

#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContestStatus {
    Ok = 0,
    Validation = 2,
    NoConvergence = 3,
    SimResolution = 4,
    Design = 5,
    NullPointer = -1,
    Panic = -2,
}

#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContestRegime {
    Low = 0,
    Medium = 1,
    High = 2,
}

impl From<RegimeKind> for ContestRegime {
    fn from(kind: RegimeKind) -> Self {
        match kind {
            RegimeKind::Low => ContestRegime::Low,
            RegimeKind::Medium => ContestRegime::Medium,
            RegimeKind::High => ContestRegime::High,
        }
    }
}

/// Contest primitives. Set `prize_lose` and `hazard_follow` to zero for the
/// baseline contest.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ContestParamsC {
    pub r: f64,
    pub c: f64,
    pub prize_win: f64,
    pub prize_lose: f64,
    pub hazard_lead: f64,
    pub hazard_follow: f64,
    pub pi: f64,
    pub sigma: f64,
}

/// Monte Carlo summary from agent i's side; `*_se` are standard errors.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ContestSimSummary {
    pub payoff_i: f64,
    pub payoff_i_se: f64,
    pub payoff_j: f64,
    pub payoff_j_se: f64,
    pub win_prob_i: f64,
    pub win_prob_j: f64,
    pub success_time: f64,
    pub success_time_se: f64,
    pub follower_time: f64,
    pub follower_time_se: f64,
    pub horizon_cap_reached: usize,
}

/// Opaque equilibrium handle.
pub struct ContestSolution {
    params: ContestParams,
    inner: EquilibriumSolution,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &ContestError) -> ContestStatus {
    match exit_code(err) {
        2 => ContestStatus::Validation,
        3 => ContestStatus::NoConvergence,
        4 => ContestStatus::SimResolution,
        _ => ContestStatus::Design,
    }
}

enum Fail {
    Null(&'static str),
    Core(ContestError),
    Input(String),
}

impl From<ContestError> for Fail {
    fn from(e: ContestError) -> Self {
        Fail::Core(e)
    }
}

/// Runs `f`, converting errors and panics into a status and a message.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> ContestStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ContestStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            ContestStatus::NullPointer
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Input(msg))) => {
            set_error(msg);
            ContestStatus::Validation
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            ContestStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn read_str<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Fail::Input(format!("{what} is not UTF-8: {e}")))
}

fn to_c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|e| Fail::Input(e.to_string()))
}

fn params_from_c(p: &ContestParamsC) -> Result<ContestParams, Fail> {
    Ok(ContestParams::new(
        p.r,
        p.c,
        p.prize_win,
        p.prize_lose,
        p.hazard_lead,
        p.hazard_follow,
        p.pi,
        p.sigma,
    )?)
}

/// Message for the last failure on this thread, or NULL if none. Owned by
/// the library.
#[no_mangle]
pub extern "C" fn contest_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses and validates a JSON parameter object.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out_params` writable.
#[no_mangle]
pub unsafe extern "C" fn contest_params_from_json(
    json: *const c_char,
    out_params: *mut ContestParamsC,
) -> ContestStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        let o = out(out_params, "out_params")?;
        let p: ContestParams = serde_json::from_str(text).map_err(|e| Fail::Input(e.to_string()))?;
        *o = ContestParamsC {
            r: p.r,
            c: p.c,
            prize_win: p.prize_win,
            prize_lose: p.prize_lose,
            hazard_lead: p.hazard_lead,
            hazard_follow: p.hazard_follow,
            pi: p.pi,
            sigma: p.sigma,
        };
        Ok(())
    })
}

/// Profitability φ̄.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn contest_profitability(
    params: *const ContestParamsC,
    out_phi: *mut f64,
) -> ContestStatus {
    guard(|| {
        let p = params_from_c(deref(params, "params")?)?;
        *out(out_phi, "out_phi")? = contest_core::profitability(&p)?;
        Ok(())
    })
}

/// The threshold shape f(φ) for φ ≥ 1.
///
/// # Safety
/// `out_f` must be writable.
#[no_mangle]
pub unsafe extern "C" fn contest_f_of_phi(phi: f64, out_f: *mut f64) -> ContestStatus {
    guard(|| {
        *out(out_f, "out_f")? = contest_core::f_of_phi(phi)?;
        Ok(())
    })
}

/// Return regime of the risky move and the π/σ threshold.
///
/// # Safety
/// `params` must be valid; `out_threshold` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn contest_classify(
    params: *const ContestParamsC,
    out_regime: *mut ContestRegime,
    out_threshold: *mut f64,
) -> ContestStatus {
    guard(|| {
        let p = params_from_c(deref(params, "params")?)?;
        let regime = contest_core::classify(&p)?;
        *out(out_regime, "out_regime")? = regime.kind.into();
        if let Some(t) = out_threshold.as_mut() {
            *t = regime.threshold;
        }
        Ok(())
    })
}

fn boxed_solution(params: ContestParams) -> Result<*mut ContestSolution, Fail> {
    let inner = contest_core::solve(&params)?;
    Ok(Box::into_raw(Box::new(ContestSolution { params, inner })))
}

/// Solves for the equilibrium. On success `*out_solution` holds a handle
/// to free with [`contest_solution_free`].
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn contest_solve(
    params: *const ContestParamsC,
    out_solution: *mut *mut ContestSolution,
) -> ContestStatus {
    guard(|| {
        let p = params_from_c(deref(params, "params")?)?;
        let o = out(out_solution, "out_solution")?;
        *o = boxed_solution(p)?;
        Ok(())
    })
}

/// [`contest_solve`] from a JSON parameter object.
///
/// # Safety
/// `json` must be NUL-terminated and `out_solution` writable.
#[no_mangle]
pub unsafe extern "C" fn contest_solve_json(
    json: *const c_char,
    out_solution: *mut *mut ContestSolution,
) -> ContestStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        let o = out(out_solution, "out_solution")?;
        let p: ContestParams = serde_json::from_str(text).map_err(|e| Fail::Input(e.to_string()))?;
        *o = boxed_solution(p)?;
        Ok(())
    })
}

/// # Safety
/// `solution` must come from a solve call and not be used afterwards. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn contest_solution_free(solution: *mut ContestSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Dropout boundary k*.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn contest_solution_k_star(
    solution: *const ContestSolution,
    out_k: *mut f64,
) -> ContestStatus {
    guard(|| {
        *out(out_k, "out_k")? = deref(solution, "solution")?.inner.k_star;
        Ok(())
    })
}

/// Leader switching point k**; NaN outside the Medium regime.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn contest_solution_k_star_star(
    solution: *const ContestSolution,
    out_k: *mut f64,
) -> ContestStatus {
    guard(|| {
        let s = deref(solution, "solution")?;
        *out(out_k, "out_k")? = s.inner.k_star_star.unwrap_or(f64::NAN);
        Ok(())
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn contest_solution_regime(
    solution: *const ContestSolution,
    out_regime: *mut ContestRegime,
) -> ContestStatus {
    guard(|| {
        *out(out_regime, "out_regime")? = deref(solution, "solution")?.inner.regime.kind.into();
        Ok(())
    })
}

/// Value V(Δk) on [−k*, k*].
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn contest_solution_eval(
    solution: *const ContestSolution,
    dk: f64,
    out_value: *mut f64,
) -> ContestStatus {
    guard(|| {
        let s = deref(solution, "solution")?;
        *out(out_value, "out_value")? = s.inner.value_at(dk)?;
        Ok(())
    })
}

/// Full solution as JSON. Free with [`contest_string_free`].
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn contest_solution_to_json(
    solution: *const ContestSolution,
    out_json: *mut *mut c_char,
) -> ContestStatus {
    guard(|| {
        let s = deref(solution, "solution")?;
        let o = out(out_json, "out_json")?;
        let text = serde_json::to_string(&s.inner).map_err(|e| Fail::Input(e.to_string()))?;
        *o = to_c_string(text)?;
        Ok(())
    })
}

/// Runs the equilibrium verifier with `grid_n` points per region.
/// `out_passed` is set to 1 when every check holds within `tol`.
///
/// # Safety
/// `solution` and `out_passed` must be valid; `out_max_residual` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn contest_verify(
    solution: *const ContestSolution,
    grid_n: usize,
    tol: f64,
    out_passed: *mut i32,
    out_max_residual: *mut f64,
) -> ContestStatus {
    guard(|| {
        let s = deref(solution, "solution")?;
        let passed = out(out_passed, "out_passed")?;
        if grid_n < 2 || !(tol > 0.0) {
            return Err(Fail::Input("grid_n must be at least 2 and tol positive".into()));
        }
        let report = verify_with_tol(&s.inner, &s.params, grid_n, tol);
        *passed = report.passed as i32;
        if let Some(m) = out_max_residual.as_mut() {
            *m = report.max_bellman_residual;
        }
        Ok(())
    })
}

/// Monte Carlo under the equilibrium strategies from gap `k0`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn contest_simulate(
    solution: *const ContestSolution,
    n_paths: usize,
    dt: f64,
    k0: f64,
    seed: u64,
    out_summary: *mut ContestSimSummary,
) -> ContestStatus {
    guard(|| {
        let s = deref(solution, "solution")?;
        let o = out(out_summary, "out_summary")?;
        let cfg = SimConfig::new(n_paths, dt, k0, seed);
        let res = simulate_equilibrium(&s.params, &s.inner, &cfg)?;
        *o = ContestSimSummary {
            payoff_i: res.mean_discounted_payoff_i.mean,
            payoff_i_se: res.mean_discounted_payoff_i.se,
            payoff_j: res.mean_discounted_payoff_j.mean,
            payoff_j_se: res.mean_discounted_payoff_j.se,
            win_prob_i: res.win_prob_i.mean,
            win_prob_j: res.win_prob_j.mean,
            success_time: res.mean_success_time.mean,
            success_time_se: res.mean_success_time.se,
            follower_time: res.mean_follower_time.mean,
            follower_time_se: res.mean_follower_time.se,
            horizon_cap_reached: res.horizon_cap_reached,
        };
        Ok(())
    })
}

/// Optimal prize allocation for a JSON design problem, returned as JSON.
/// Free the result with [`contest_string_free`].
///
/// # Safety
/// `problem_json` must be NUL-terminated and `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn contest_optimize_prizes(
    problem_json: *const c_char,
    out_json: *mut *mut c_char,
) -> ContestStatus {
    guard(|| {
        let text = read_str(problem_json, "problem_json")?;
        let o = out(out_json, "out_json")?;
        let prob: DesignProblem = serde_json::from_str(text).map_err(|e| Fail::Input(e.to_string()))?;
        let alloc = optimize_prizes(&prob)?;
        let json = serde_json::to_string(&alloc).map_err(|e| Fail::Input(e.to_string()))?;
        *o = to_c_string(json)?;
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn contest_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
