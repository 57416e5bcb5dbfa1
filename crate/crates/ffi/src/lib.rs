//! C ABI over the `qdyn` solvers.
//!
//! Models are opaque handles created with [`qdyn_model_new`] and released
//! with [`qdyn_model_free`]. Every fallible call returns a [`QdynStatus`];
//! the message of the most recent failure on the calling thread is
//! available from [`qdyn_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qdyn::linalg::C64;
use qdyn::loss::SingleExcitationState;
use qdyn::model::{ModelParams, Scenario};
use qdyn::oracle::IntegratorConfig;
use qdyn::{dephasing, loss, oracle, Error};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QdynStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    Panic = 4,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QdynScenario {
    Dephasing = 0,
    Loss = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QdynMethod {
    /// Closed-form solution.
    Exact = 0,
    /// Adaptive integration of the full master equation.
    Oracle = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QdynComplex {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for QdynComplex {
    fn from(z: C64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<QdynComplex> for C64 {
    fn from(z: QdynComplex) -> Self {
        C64::new(z.re, z.im)
    }
}

/// Opaque model handle.
pub struct QdynModel {
    params: ModelParams,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> QdynStatus {
    if err.is_numerical() {
        QdynStatus::Numerical
    } else {
        QdynStatus::InvalidArgument
    }
}

/// Runs `f`, recording errors and converting panics into a status.
fn guarded(f: impl FnOnce() -> Result<(), (QdynStatus, String)>) -> QdynStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            QdynStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            QdynStatus::Panic
        }
    }
}

fn lift(err: Error) -> (QdynStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(what: &str) -> (QdynStatus, String) {
    (QdynStatus::NullPointer, format!("{what} is null"))
}

unsafe fn model_ref<'a>(model: *const QdynModel) -> Result<&'a QdynModel, (QdynStatus, String)> {
    model.as_ref().ok_or_else(|| null("model"))
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn qdyn_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qdyn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a model with coupling `g`, detuning `delta`, dephasing rate
/// `gamma`, loss rate `kappa` and `fock_dim` cavity levels.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn qdyn_model_new(
    g: f64,
    delta: f64,
    gamma: f64,
    kappa: f64,
    fock_dim: usize,
    out: *mut *mut QdynModel,
) -> QdynStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let params = ModelParams::new(g, delta, gamma, kappa, fock_dim).map_err(lift)?;
        *out = Box::into_raw(Box::new(QdynModel { params }));
        Ok(())
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must come from [`qdyn_model_new`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn qdyn_model_free(model: *mut QdynModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// The four eigenvalues of the dephasing block for excitation sector `n`.
///
/// # Safety
/// `model` must be a live handle and `out` must point to four writable values.
#[no_mangle]
pub unsafe extern "C" fn qdyn_dephasing_eigenvalues(
    model: *const QdynModel,
    n: usize,
    out: *mut QdynComplex,
) -> QdynStatus {
    guarded(|| {
        let m = model_ref(model)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let p = &m.params;
        let ev = if p.delta == 0.0 {
            dephasing::eigenvalues_resonant(p, n)
        } else {
            dephasing::eigenvalues_general(p, n)
        }
        .map_err(lift)?;
        for (k, z) in ev.as_array().into_iter().enumerate() {
            *out.add(k) = z.into();
        }
        Ok(())
    })
}

/// The two eigenvalues of the effective Hamiltonian block for `n ≥ 1`.
///
/// # Safety
/// `model` must be a live handle and `out` must point to two writable values.
#[no_mangle]
pub unsafe extern "C" fn qdyn_loss_block_eigenvalues(
    model: *const QdynModel,
    n: usize,
    out: *mut QdynComplex,
) -> QdynStatus {
    guarded(|| {
        let m = model_ref(model)?;
        if out.is_null() {
            return Err(null("out"));
        }
        if n == 0 {
            return Err((QdynStatus::InvalidArgument, "n must be at least 1".into()));
        }
        let block = loss::k_block(&m.params, n);
        *out = block.eps1.into();
        *out.add(1) = block.eps2.unwrap_or(block.eps1).into();
        Ok(())
    })
}

/// Amplitude `f(t)` of the excited state under photon loss.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qdyn_loss_amplitude(
    model: *const QdynModel,
    t: f64,
    out: *mut QdynComplex,
) -> QdynStatus {
    guarded(|| {
        let m = model_ref(model)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = loss::amplitude(&m.params, t).map_err(lift)?.into();
        Ok(())
    })
}

/// Excited-state population and atomic purity on a time grid.
///
/// The atom starts in `c_g|g⟩ + c_e|e⟩` with the cavity in vacuum. The
/// dephasing closed form only supports `c_e = 1`; use the oracle method for
/// other initial states.
///
/// # Safety
/// `model` must be a live handle; `t`, `p_e` and `purity` must each point to
/// `len` values (`p_e` and `purity` writable). `p_e` or `purity` may be null
/// to skip that output.
#[no_mangle]
pub unsafe extern "C" fn qdyn_observables(
    model: *const QdynModel,
    scenario: QdynScenario,
    method: QdynMethod,
    c_g: QdynComplex,
    c_e: QdynComplex,
    t: *const f64,
    len: usize,
    p_e: *mut f64,
    purity: *mut f64,
) -> QdynStatus {
    guarded(|| {
        let m = model_ref(model)?;
        if t.is_null() && len > 0 {
            return Err(null("t"));
        }
        let grid: &[f64] = if len == 0 { &[] } else { std::slice::from_raw_parts(t, len) };
        let psi = SingleExcitationState::new(c_g.into(), c_e.into()).map_err(lift)?;
        let scenario = match scenario {
            QdynScenario::Dephasing => Scenario::Dephasing,
            QdynScenario::Loss => Scenario::Loss,
        };
        let p = &m.params;
        let series = match (method, scenario) {
            (QdynMethod::Exact, Scenario::Loss) => loss::atom_observables_loss(p, &psi, grid),
            (QdynMethod::Exact, Scenario::Dephasing) => {
                if psi != SingleExcitationState::excited() {
                    return Err((
                        QdynStatus::InvalidArgument,
                        "the dephasing closed form needs the excited initial state".into(),
                    ));
                }
                dephasing::atom_observables_dephasing(p, 1, grid)
            }
            (QdynMethod::Oracle, s) => {
                let rho0 = psi.density_matrix(&p.dims);
                oracle::atom_observables_oracle(p, s, &rho0, grid, &IntegratorConfig::default())
                    .map(|run| run.series)
            }
        }
        .map_err(lift)?;
        for (name, dst) in [("p_e", p_e), ("purity", purity)] {
            if dst.is_null() {
                continue;
            }
            let src = series.column(name).unwrap_or_default();
            ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len().min(len));
        }
        Ok(())
    })
}
