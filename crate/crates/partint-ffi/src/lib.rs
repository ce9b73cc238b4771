//! C interface to the partint toolkit: expression parsing and evaluation,
//! catalog models, Poisson brackets at phase points, and implicit-midpoint
//! integration.
//!
//! Conventions:
//!
//! * Every fallible call returns a [`PartintStatus`]; `PARTINT_STATUS_OK`
//!   means the out-parameters were written. On any other status, call
//!   [`partint_last_error_message`] for a human-readable reason.
//! * Handles (`PartintExpr`, `PartintModel`, `PartintTrajectory`) are
//!   opaque; free each with its matching `*_free` function exactly once.
//!   Passing null where a handle is expected fails with
//!   `PARTINT_STATUS_INVALID_ARGUMENT`; freeing null is a no-op.
//! * Strings returned through `char**` out-parameters are heap-allocated;
//!   release them with [`partint_string_free`].
//! * Phase-point coordinate arrays follow the model chart's ordering:
//!   positions first, then momenta (see [`partint_model_coord_name`]).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};

use partint::dynamics::{integrate, IntegratorSpec, Trajectory};
use partint::expr::{Binding, Expression};
use partint::models::{catalog_model, SystemModel};
use partint::poisson::{poisson_bracket, PhasePoint, PoissonError};

/// Result of a toolkit call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PartintStatus {
    /// The call succeeded and all out-parameters are valid.
    Ok = 0,
    /// A pointer was null, an index was out of range, a buffer length did
    /// not match, or a string was not valid UTF-8.
    InvalidArgument = 1,
    /// The expression source failed to parse.
    ParseError = 2,
    /// No catalog model has the requested id.
    UnknownModel = 3,
    /// Evaluation failed: an unbound symbol or a domain violation
    /// (division by zero, square root of a negative value, …).
    EvalError = 4,
    /// Integration failed mid-run: the Newton solve did not converge or
    /// the flow left the energy's domain.
    DynamicsError = 5,
}

/// A parsed expression. Create with [`partint_expr_parse`], release with
/// [`partint_expr_free`].
pub struct PartintExpr(Expression);

/// A catalog system: canonical chart, energy, observables. Create with
/// [`partint_model_open`], release with [`partint_model_free`].
pub struct PartintModel(SystemModel);

/// A finished integration run. Create with [`partint_simulate`], release
/// with [`partint_trajectory_free`].
pub struct PartintTrajectory {
    inner: Trajectory,
    dim: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: PartintStatus, message: impl Into<String>) -> PartintStatus {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(text).expect("nul bytes stripped");
    });
    status
}

fn invalid(message: impl Into<String>) -> PartintStatus {
    fail(PartintStatus::InvalidArgument, message)
}

fn poisson_status(e: &PoissonError) -> PartintStatus {
    match e {
        PoissonError::Eval(_) | PoissonError::NonFinite { .. } => PartintStatus::EvalError,
        _ => PartintStatus::InvalidArgument,
    }
}

/// # Safety
/// `ptr` must be a valid NUL-terminated string or null.
unsafe fn read_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, PartintStatus> {
    if ptr.is_null() {
        return Err(invalid(format!("{what} is null")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn borrow<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, PartintStatus> {
    ptr.as_ref()
        .ok_or_else(|| invalid(format!("{what} handle is null")))
}

fn alloc_string(text: &str) -> *mut c_char {
    CString::new(text.replace('\0', " "))
        .expect("nul bytes stripped")
        .into_raw()
}

/// Message describing the most recent failure on this thread, as a
/// NUL-terminated string. Empty until a call fails. The pointer stays
/// valid until the next failing call on the same thread; do not free it.
#[no_mangle]
pub extern "C" fn partint_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Releases a string returned through a `char**` out-parameter.
///
/// # Safety
/// `s` must have come from this library and not have been freed already;
/// null is ignored.
#[no_mangle]
pub unsafe extern "C" fn partint_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ------------------------------------------------------------- expressions

/// Parses an expression (symbols, rationals, `+ - * / ^`, `sqrt`, `sin`,
/// `cos`, `exp`, `log`) into a new handle.
///
/// # Safety
/// `source` must be a valid NUL-terminated string; `out` must be a valid
/// pointer. On success `*out` owns the new handle.
#[no_mangle]
pub unsafe extern "C" fn partint_expr_parse(
    source: *const c_char,
    out: *mut *mut PartintExpr,
) -> PartintStatus {
    if out.is_null() {
        return invalid("out pointer is null");
    }
    let text = match read_str(source, "expression source") {
        Ok(t) => t,
        Err(s) => return s,
    };
    match Expression::parse(text) {
        Ok(expr) => {
            *out = Box::into_raw(Box::new(PartintExpr(expr)));
            PartintStatus::Ok
        }
        Err(e) => fail(PartintStatus::ParseError, e.to_string()),
    }
}

/// Releases an expression handle. Null is ignored.
///
/// # Safety
/// `expr` must have come from [`partint_expr_parse`] and not have been
/// freed already.
#[no_mangle]
pub unsafe extern "C" fn partint_expr_free(expr: *mut PartintExpr) {
    if !expr.is_null() {
        drop(Box::from_raw(expr));
    }
}

/// Renders the expression's canonical source text into `*out`.
///
/// # Safety
/// `expr` must be a live handle; `out` must be a valid pointer. Release
/// `*out` with [`partint_string_free`].
#[no_mangle]
pub unsafe extern "C" fn partint_expr_source(
    expr: *const PartintExpr,
    out: *mut *mut c_char,
) -> PartintStatus {
    if out.is_null() {
        return invalid("out pointer is null");
    }
    match borrow(expr, "expression") {
        Ok(e) => {
            *out = alloc_string(&e.0.to_string());
            PartintStatus::Ok
        }
        Err(s) => s,
    }
}

/// Evaluates the expression with `len` symbol bindings: `names[i]` (a
/// NUL-terminated string) bound to `values[i]`. Every free symbol of the
/// expression must be bound.
///
/// # Safety
/// `expr` must be a live handle; `names` and `values` must point to `len`
/// valid entries (or `len` must be 0); `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn partint_expr_eval(
    expr: *const PartintExpr,
    names: *const *const c_char,
    values: *const f64,
    len: usize,
    out: *mut f64,
) -> PartintStatus {
    if out.is_null() {
        return invalid("out pointer is null");
    }
    let expr = match borrow(expr, "expression") {
        Ok(e) => e,
        Err(s) => return s,
    };
    if len > 0 && (names.is_null() || values.is_null()) {
        return invalid("names/values are null but len is nonzero");
    }
    let mut binding = Binding::new();
    for i in 0..len {
        let name = match read_str(*names.add(i), "binding name") {
            Ok(n) => n,
            Err(s) => return s,
        };
        binding.insert(name, *values.add(i));
    }
    match expr.0.eval(&binding) {
        Ok(v) => {
            *out = v;
            PartintStatus::Ok
        }
        Err(e) => fail(PartintStatus::EvalError, e.to_string()),
    }
}

// ------------------------------------------------------------------ models

/// Opens a catalog system by id (`hc`, `hc2`, `Hmf`, `HN`, `HRNrho`,
/// `vol-N2` … `vol-N6`).
///
/// # Safety
/// `id` must be a valid NUL-terminated string; `out` must be a valid
/// pointer. On success `*out` owns the new handle.
#[no_mangle]
pub unsafe extern "C" fn partint_model_open(
    id: *const c_char,
    out: *mut *mut PartintModel,
) -> PartintStatus {
    if out.is_null() {
        return invalid("out pointer is null");
    }
    let id = match read_str(id, "model id") {
        Ok(t) => t,
        Err(s) => return s,
    };
    match catalog_model(id) {
        Some(model) => {
            *out = Box::into_raw(Box::new(PartintModel(model)));
            PartintStatus::Ok
        }
        None => fail(
            PartintStatus::UnknownModel,
            format!("no catalog model has id `{id}`"),
        ),
    }
}

/// Releases a model handle. Null is ignored.
///
/// # Safety
/// `model` must have come from [`partint_model_open`] and not have been
/// freed already.
#[no_mangle]
pub unsafe extern "C" fn partint_model_free(model: *mut PartintModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of phase-space coordinates of the model's chart (positions plus
/// momenta). Returns 0 for a null handle.
///
/// # Safety
/// `model` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn partint_model_dim(model: *const PartintModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.chart.dim())
}

/// Writes the name of coordinate `index` (chart order: positions first,
/// then momenta) into `*out`.
///
/// # Safety
/// `model` must be a live handle; `out` must be a valid pointer. Release
/// `*out` with [`partint_string_free`].
#[no_mangle]
pub unsafe extern "C" fn partint_model_coord_name(
    model: *const PartintModel,
    index: usize,
    out: *mut *mut c_char,
) -> PartintStatus {
    if out.is_null() {
        return invalid("out pointer is null");
    }
    let model = match borrow(model, "model") {
        Ok(m) => m,
        Err(s) => return s,
    };
    let chart = &model.0.chart;
    if index >= chart.dim() {
        return invalid(format!(
            "coordinate index {index} is out of range for a {}-coordinate chart",
            chart.dim()
        ));
    }
    *out = alloc_string(chart.coord_name(index));
    PartintStatus::Ok
}

/// Writes the model's energy as canonical expression source into `*out`.
///
/// # Safety
/// `model` must be a live handle; `out` must be a valid pointer. Release
/// `*out` with [`partint_string_free`].
#[no_mangle]
pub unsafe extern "C" fn partint_model_energy_source(
    model: *const PartintModel,
    out: *mut *mut c_char,
) -> PartintStatus {
    if out.is_null() {
        return invalid("out pointer is null");
    }
    match borrow(model, "model") {
        Ok(m) => {
            *out = alloc_string(&m.0.energy_expression().to_string());
            PartintStatus::Ok
        }
        Err(s) => s,
    }
}

// ----------------------------------------------------------------- bracket

/// Evaluates the canonical Poisson bracket `{f, g}` at the phase point
/// whose coordinates (in chart order) are `coords[0..len]`; `len` must
/// equal [`partint_model_dim`].
///
/// # Safety
/// All handles must be live; `coords` must point to `len` doubles; `out`
/// must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn partint_bracket_at(
    model: *const PartintModel,
    f: *const PartintExpr,
    g: *const PartintExpr,
    coords: *const f64,
    len: usize,
    out: *mut f64,
) -> PartintStatus {
    if out.is_null() {
        return invalid("out pointer is null");
    }
    let (model, f, g) = match (
        borrow(model, "model"),
        borrow(f, "f expression"),
        borrow(g, "g expression"),
    ) {
        (Ok(m), Ok(f), Ok(g)) => (m, f, g),
        (Err(s), _, _) | (_, Err(s), _) | (_, _, Err(s)) => return s,
    };
    if coords.is_null() {
        return invalid("coords is null");
    }
    let values = std::slice::from_raw_parts(coords, len).to_vec();
    let point = match PhasePoint::new(model.0.chart.clone(), values) {
        Ok(p) => p,
        Err(e) => return fail(poisson_status(&e), e.to_string()),
    };
    match poisson_bracket(&f.0, &g.0, &point) {
        Ok(v) => {
            *out = v;
            PartintStatus::Ok
        }
        Err(e) => fail(poisson_status(&e), e.to_string()),
    }
}

// ---------------------------------------------------------------- dynamics

/// Integrates the model's own energy with the implicit midpoint scheme
/// from the phase point `coords[0..len]` (`len` must equal
/// [`partint_model_dim`]), taking `steps` steps of size `dt`. On success
/// `*out` owns a trajectory of `steps + 1` states.
///
/// # Safety
/// `model` must be a live handle; `coords` must point to `len` doubles;
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn partint_simulate(
    model: *const PartintModel,
    coords: *const f64,
    len: usize,
    dt: f64,
    steps: usize,
    out: *mut *mut PartintTrajectory,
) -> PartintStatus {
    if out.is_null() {
        return invalid("out pointer is null");
    }
    let model = match borrow(model, "model") {
        Ok(m) => m,
        Err(s) => return s,
    };
    if coords.is_null() {
        return invalid("coords is null");
    }
    let spec = IntegratorSpec::midpoint(dt, steps);
    if let Err(e) = spec.validate() {
        return invalid(e.to_string());
    }
    let values = std::slice::from_raw_parts(coords, len).to_vec();
    let start = match PhasePoint::new(model.0.chart.clone(), values) {
        Ok(p) => p,
        Err(e) => return fail(poisson_status(&e), e.to_string()),
    };
    let result = match integrate(&model.0.energy, &start, &spec, &[]) {
        Ok(r) => r,
        Err(e) => return fail(PartintStatus::DynamicsError, e.to_string()),
    };
    if let Some(e) = result.error {
        let done = result.trajectory.len().saturating_sub(1);
        return fail(
            PartintStatus::DynamicsError,
            format!("{e} (after {done} of {steps} steps)"),
        );
    }
    *out = Box::into_raw(Box::new(PartintTrajectory {
        inner: result.trajectory,
        dim: model.0.chart.dim(),
    }));
    PartintStatus::Ok
}

/// Releases a trajectory handle. Null is ignored.
///
/// # Safety
/// `trajectory` must have come from [`partint_simulate`] and not have
/// been freed already.
#[no_mangle]
pub unsafe extern "C" fn partint_trajectory_free(trajectory: *mut PartintTrajectory) {
    if !trajectory.is_null() {
        drop(Box::from_raw(trajectory));
    }
}

/// Number of stored states (steps + 1). Returns 0 for a null handle.
///
/// # Safety
/// `trajectory` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn partint_trajectory_len(trajectory: *const PartintTrajectory) -> usize {
    trajectory.as_ref().map_or(0, |t| t.inner.len())
}

/// Number of coordinates per state. Returns 0 for a null handle.
///
/// # Safety
/// `trajectory` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn partint_trajectory_dim(trajectory: *const PartintTrajectory) -> usize {
    trajectory.as_ref().map_or(0, |t| t.dim)
}

/// Writes the time stamp of state `step` into `*out`.
///
/// # Safety
/// `trajectory` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn partint_trajectory_time(
    trajectory: *const PartintTrajectory,
    step: usize,
    out: *mut f64,
) -> PartintStatus {
    if out.is_null() {
        return invalid("out pointer is null");
    }
    let t = match borrow(trajectory, "trajectory") {
        Ok(t) => t,
        Err(s) => return s,
    };
    match t.inner.times().get(step) {
        Some(&v) => {
            *out = v;
            PartintStatus::Ok
        }
        None => invalid(format!(
            "step {step} is out of range for a {}-state trajectory",
            t.inner.len()
        )),
    }
}

/// Copies the coordinates of state `step` (chart order) into
/// `out_coords[0..dim]` with `dim` from [`partint_trajectory_dim`].
///
/// # Safety
/// `trajectory` must be a live handle; `out_coords` must point to at
/// least `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn partint_trajectory_state(
    trajectory: *const PartintTrajectory,
    step: usize,
    out_coords: *mut f64,
) -> PartintStatus {
    if out_coords.is_null() {
        return invalid("out pointer is null");
    }
    let t = match borrow(trajectory, "trajectory") {
        Ok(t) => t,
        Err(s) => return s,
    };
    match t.inner.states().get(step) {
        Some(state) => {
            std::ptr::copy_nonoverlapping(state.coords().as_ptr(), out_coords, t.dim);
            PartintStatus::Ok
        }
        None => invalid(format!(
            "step {step} is out of range for a {}-state trajectory",
            t.inner.len()
        )),
    }
}

/// Writes the recorded energy of state `step` into `*out`.
///
/// # Safety
/// `trajectory` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn partint_trajectory_energy(
    trajectory: *const PartintTrajectory,
    step: usize,
    out: *mut f64,
) -> PartintStatus {
    if out.is_null() {
        return invalid("out pointer is null");
    }
    let t = match borrow(trajectory, "trajectory") {
        Ok(t) => t,
        Err(s) => return s,
    };
    match t.inner.energy().get(step) {
        Some(&v) => {
            *out = v;
            PartintStatus::Ok
        }
        None => invalid(format!(
            "step {step} is out of range for a {}-state trajectory",
            t.inner.len()
        )),
    }
}
