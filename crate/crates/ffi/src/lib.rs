//! C interface. Problems live behind an opaque handle; every fallible call
//! returns a [`PolycdStatus`] and leaves a message retrievable with
//! [`polycd_last_error_message`] on the calling thread.
//!
//! Matrices are passed row-major as `rows * cols` doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ndarray::{Array1, Array2, ArrayView1};
use polycd::error::Error;
use polycd::harness::{compute_gap, run_solver, solver_for, Method, Problem};
use polycd::objective::{KdeHuberObjective, LeastSquaresObjective, LogisticObjective};
use polycd::polytope::Polytope;
use polycd::step::StepRule;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolycdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NotConverged = 4,
    Consistency = 5,
    Unsupported = 6,
    Io = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolycdFeasibleSet {
    /// Probability simplex; the radius argument is ignored.
    Simplex = 0,
    /// ℓ1 ball of the given radius.
    L1Ball = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolycdMethod {
    Polycd = 0,
    Polycdwa = 1,
    Fw = 2,
    Afw = 3,
    Fista = 4,
    Twocd = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolycdStepRule {
    LineSearch = 0,
    Gradient = 1,
}

/// Opaque problem handle.
pub struct PolycdProblem {
    problem: Problem,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PolycdStatus {
    match e {
        Error::DimensionMismatch { .. } => PolycdStatus::DimensionMismatch,
        Error::NotConverged { .. } => PolycdStatus::NotConverged,
        Error::Consistency(_) => PolycdStatus::Consistency,
        Error::Unsupported(_) => PolycdStatus::Unsupported,
        Error::Io { .. } | Error::Json { .. } => PolycdStatus::Io,
        _ => PolycdStatus::InvalidArgument,
    }
}

struct Fail(PolycdStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(body: impl FnOnce() -> Result<(), Fail>) -> PolycdStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => PolycdStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("panic: {msg}"));
            PolycdStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(PolycdStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(PolycdStatus::InvalidArgument, msg.into())
}

/// # Safety
/// `p` must be null or point to `len` readable doubles.
unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn matrix(p: *const f64, rows: usize, cols: usize, what: &str) -> Result<Array2<f64>, Fail> {
    let len = rows.checked_mul(cols).ok_or_else(|| invalid("matrix size overflows"))?;
    let data = slice(p, len, what)?.to_vec();
    Array2::from_shape_vec((rows, cols), data).map_err(|e| invalid(e.to_string()))
}

unsafe fn emit(out: *mut *mut PolycdProblem, problem: Problem) -> Result<(), Fail> {
    *out = Box::into_raw(Box::new(PolycdProblem { problem }));
    Ok(())
}

/// Least squares ‖A x − b‖² over the simplex or an ℓ1 ball.
///
/// # Safety
/// `a` holds `rows * cols` doubles, `b` holds `rows`, `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn polycd_problem_least_squares(
    a: *const f64,
    b: *const f64,
    rows: usize,
    cols: usize,
    set: PolycdFeasibleSet,
    radius: f64,
    out: *mut *mut PolycdProblem,
) -> PolycdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let a = matrix(a, rows, cols, "a")?;
        let b = Array1::from(slice(b, rows, "b")?.to_vec());
        let obj = LeastSquaresObjective::least_squares(a, b)?;
        let problem = match set {
            PolycdFeasibleSet::Simplex => Problem::Quadratic(obj),
            PolycdFeasibleSet::L1Ball => Problem::Lasso { obj, radius },
        };
        problem.polytope()?;
        emit(out, problem)
    })
}

/// Logistic loss Σ log(1 + exp(−yᵢ aᵢᵀx)) over an ℓ1 ball; labels are ±1.
///
/// # Safety
/// `a` holds `rows * cols` doubles, `labels` holds `rows`, `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn polycd_problem_logistic(
    a: *const f64,
    labels: *const f64,
    rows: usize,
    cols: usize,
    radius: f64,
    out: *mut *mut PolycdProblem,
) -> PolycdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let a = matrix(a, rows, cols, "a")?;
        let y = Array1::from(slice(labels, rows, "labels")?.to_vec());
        let problem = Problem::Logistic { obj: LogisticObjective::logistic(a, y)?, radius };
        problem.polytope()?;
        emit(out, problem)
    })
}

/// Robust kernel density weights over the simplex, one sample per row.
///
/// # Safety
/// `points` holds `n * dim` doubles, `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn polycd_problem_kde(
    points: *const f64,
    n: usize,
    dim: usize,
    bandwidth: f64,
    huber_mu: f64,
    out: *mut *mut PolycdProblem,
) -> PolycdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let pts = matrix(points, n, dim, "points")?;
        emit(out, Problem::Kde(KdeHuberObjective::new(pts, bandwidth, huber_mu)?))
    })
}

/// # Safety
/// `problem` is null or a handle from a constructor, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn polycd_problem_free(problem: *mut PolycdProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Number of decision variables, or 0 for a null handle.
///
/// # Safety
/// `problem` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn polycd_problem_dim(problem: *const PolycdProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.problem.objective().dim())
}

/// Runs one solver from the first vertex. `max_iter` bounds outer iterations
/// (iterations for FW/AFW/FISTA, epochs for 2-CD) and `tol` is the relative
/// improvement at which it stops. Writes the solution to `x_out` (length
/// `polycd_problem_dim`) and optionally the final value and iteration count.
///
/// # Safety
/// `problem` is a live handle; `x_out` has room for `dim` doubles;
/// `f_out` and `iterations_out` are null or writable.
#[no_mangle]
pub unsafe extern "C" fn polycd_solve(
    problem: *const PolycdProblem,
    method: PolycdMethod,
    rule: PolycdStepRule,
    max_iter: usize,
    tol: f64,
    x_out: *mut f64,
    f_out: *mut f64,
    iterations_out: *mut usize,
) -> PolycdStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        if x_out.is_null() {
            return Err(null("x_out"));
        }
        let method = match method {
            PolycdMethod::Polycd => Method::Polycd,
            PolycdMethod::Polycdwa => Method::Polycdwa,
            PolycdMethod::Fw => Method::Fw,
            PolycdMethod::Afw => Method::Afw,
            PolycdMethod::Fista => Method::Fista,
            PolycdMethod::Twocd => Method::Twocd,
        };
        let rule = match rule {
            PolycdStepRule::LineSearch => StepRule::LineSearch,
            PolycdStepRule::Gradient => StepRule::Gradient,
        };
        let spec = solver_for(method, rule, max_iter, tol);
        let run = run_solver(&p.problem, &spec)?;
        for (k, v) in run.x.iter().enumerate() {
            *x_out.add(k) = *v;
        }
        if !f_out.is_null() {
            *f_out = run.f_value;
        }
        if !iterations_out.is_null() {
            *iterations_out = run.trace.last().map_or(0, |r| r.t);
        }
        Ok(())
    })
}

/// Objective value at `x`.
///
/// # Safety
/// `problem` is a live handle; `x` holds `dim` doubles; `f_out` is writable.
#[no_mangle]
pub unsafe extern "C" fn polycd_value(problem: *const PolycdProblem, x: *const f64, f_out: *mut f64) -> PolycdStatus {
    guard(|| {
        let p = problem.as_ref().ok_or_else(|| null("problem"))?;
        if f_out.is_null() {
            return Err(null("f_out"));
        }
        let obj = p.problem.objective();
        let x = slice(x, obj.dim(), "x")?;
        *f_out = obj.value_at(ArrayView1::from(x));
        Ok(())
    })
}

/// Euclidean projection of `y` onto the simplex or an ℓ1 ball of `radius`.
///
/// # Safety
/// `y` and `out` hold `dim` doubles and may alias.
#[no_mangle]
pub unsafe extern "C" fn polycd_project(
    set: PolycdFeasibleSet,
    radius: f64,
    y: *const f64,
    dim: usize,
    out: *mut f64,
) -> PolycdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let y = Array1::from(slice(y, dim, "y")?.to_vec());
        let p = match set {
            PolycdFeasibleSet::Simplex => Polytope::simplex(dim)?,
            PolycdFeasibleSet::L1Ball => Polytope::l1_ball(dim, radius)?,
        };
        let x = p.project(y.view())?;
        for (k, v) in x.iter().enumerate() {
            *out.add(k) = *v;
        }
        Ok(())
    })
}

/// (f_hat − f_star) / max(|f_star|, 1)
#[no_mangle]
pub extern "C" fn polycd_gap(f_hat: f64, f_star: f64) -> f64 {
    compute_gap(f_hat, f_star)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn polycd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn polycd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}
