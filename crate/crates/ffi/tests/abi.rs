use std::ffi::CStr;
use std::ptr;

use qdyn_ffi::*;

const ONE: QdynComplex = QdynComplex { re: 1.0, im: 0.0 };
const ZERO: QdynComplex = QdynComplex { re: 0.0, im: 0.0 };

fn model(g: f64, delta: f64, gamma: f64, kappa: f64) -> *mut QdynModel {
    let mut m = ptr::null_mut();
    let s = unsafe { qdyn_model_new(g, delta, gamma, kappa, 4, &mut m) };
    assert_eq!(s, QdynStatus::Ok);
    assert!(!m.is_null());
    m
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(qdyn_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(qdyn_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn invalid_parameters_are_reported() {
    let mut m = ptr::null_mut();
    let s = unsafe { qdyn_model_new(1.0, 0.0, -1.0, 0.0, 4, &mut m) };
    assert_eq!(s, QdynStatus::InvalidArgument);
    assert!(m.is_null());
    assert!(!last_error().is_empty());
    let s = unsafe { qdyn_model_new(1.0, 0.0, 1.0, 0.0, 4, ptr::null_mut()) };
    assert_eq!(s, QdynStatus::NullPointer);
}

#[test]
fn null_handles_are_rejected() {
    let mut out = [ZERO; 4];
    let s = unsafe { qdyn_dephasing_eigenvalues(ptr::null(), 1, out.as_mut_ptr()) };
    assert_eq!(s, QdynStatus::NullPointer);
    unsafe { qdyn_model_free(ptr::null_mut()) };
}

#[test]
fn resonant_dephasing_eigenvalues() {
    // γ = 8g gives η = 1/4 and l_± = -γ(1 ∓ √(3)/2)/2.
    let m = model(1.0, 0.0, 8.0, 0.0);
    let mut out = [ZERO; 4];
    assert_eq!(unsafe { qdyn_dephasing_eigenvalues(m, 1, out.as_mut_ptr()) }, QdynStatus::Ok);
    let x = 3f64.sqrt() / 2.0;
    let expect = [0.0, -8.0, -4.0 * (1.0 - x), -4.0 * (1.0 + x)];
    for (z, e) in out.iter().zip(expect) {
        assert!((z.re - e).abs() < 1e-12 && z.im.abs() < 1e-12, "{z:?} vs {e}");
    }
    assert_eq!(unsafe { qdyn_dephasing_eigenvalues(m, 0, out.as_mut_ptr()) }, QdynStatus::InvalidArgument);
    unsafe { qdyn_model_free(m) };
}

#[test]
fn loss_block_satisfies_trace() {
    let m = model(1.0, 0.8, 0.0, 3.0);
    let mut out = [ZERO; 2];
    assert_eq!(unsafe { qdyn_loss_block_eigenvalues(m, 2, out.as_mut_ptr()) }, QdynStatus::Ok);
    // Tr K⁽²⁾ = -iκ + (2δ - iκ)/2.
    let tr_re = out[0].re + out[1].re;
    let tr_im = out[0].im + out[1].im;
    assert!((tr_re - 0.8).abs() < 1e-12);
    assert!((tr_im + 4.5).abs() < 1e-12);
    unsafe { qdyn_model_free(m) };
}

#[test]
fn amplitude_at_exceptional_point() {
    let m = model(1.0, 0.0, 0.0, 4.0);
    let mut f = ZERO;
    assert_eq!(unsafe { qdyn_loss_amplitude(m, 1.0, &mut f) }, QdynStatus::Ok);
    assert!((f.re - 2.0 * (-1f64).exp()).abs() < 1e-12);
    assert_eq!(unsafe { qdyn_loss_amplitude(m, -1.0, &mut f) }, QdynStatus::InvalidArgument);
    unsafe { qdyn_model_free(m) };
}

#[test]
fn exact_and_oracle_agree_through_abi() {
    let t: Vec<f64> = (0..21).map(|k| k as f64 * 0.5).collect();
    for (scenario, m) in [
        (QdynScenario::Dephasing, model(1.0, 0.0, 10.0, 0.0)),
        (QdynScenario::Loss, model(1.0, 0.8, 0.0, 10.0)),
    ] {
        let (mut pe_a, mut pu_a) = (vec![0.0; t.len()], vec![0.0; t.len()]);
        let (mut pe_b, mut pu_b) = (vec![0.0; t.len()], vec![0.0; t.len()]);
        for (method, pe, pu) in [
            (QdynMethod::Exact, &mut pe_a, &mut pu_a),
            (QdynMethod::Oracle, &mut pe_b, &mut pu_b),
        ] {
            let s = unsafe {
                qdyn_observables(m, scenario, method, ZERO, ONE, t.as_ptr(), t.len(), pe.as_mut_ptr(), pu.as_mut_ptr())
            };
            assert_eq!(s, QdynStatus::Ok, "{}", last_error());
        }
        for k in 0..t.len() {
            assert!((pe_a[k] - pe_b[k]).abs() < 1e-6);
            assert!((pu_a[k] - pu_b[k]).abs() < 1e-6);
        }
        unsafe { qdyn_model_free(m) };
    }
}

#[test]
fn superposition_rules() {
    let m = model(1.0, 0.0, 2.0, 2.0);
    let t = [0.0, 1.0];
    let mut pe = [0.0; 2];
    let c = QdynComplex { re: 0.6, im: 0.0 };
    let d = QdynComplex { re: 0.0, im: 0.8 };
    let run = |scenario, method, pe: &mut [f64; 2]| unsafe {
        qdyn_observables(m, scenario, method, c, d, t.as_ptr(), 2, pe.as_mut_ptr(), ptr::null_mut())
    };
    assert_eq!(run(QdynScenario::Loss, QdynMethod::Exact, &mut pe), QdynStatus::Ok);
    assert!((pe[0] - 0.64).abs() < 1e-12);
    assert_eq!(run(QdynScenario::Dephasing, QdynMethod::Exact, &mut pe), QdynStatus::InvalidArgument);
    assert_eq!(run(QdynScenario::Dephasing, QdynMethod::Oracle, &mut pe), QdynStatus::Ok);
    let bad = QdynComplex { re: 0.9, im: 0.0 };
    let s = unsafe { qdyn_observables(m, QdynScenario::Loss, QdynMethod::Exact, bad, d, t.as_ptr(), 2, pe.as_mut_ptr(), ptr::null_mut()) };
    assert_eq!(s, QdynStatus::InvalidArgument);
    unsafe { qdyn_model_free(m) };
}

#[test]
fn oversized_oracle_is_numerical_failure() {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { qdyn_model_new(1.0, 0.0, 0.0, 1.0, 40, &mut m) }, QdynStatus::Ok);
    let t = [0.0, 1.0];
    let mut pe = [0.0; 2];
    let s = unsafe {
        qdyn_observables(m, QdynScenario::Loss, QdynMethod::Oracle, ZERO, ONE, t.as_ptr(), 2, pe.as_mut_ptr(), ptr::null_mut())
    };
    assert_eq!(s, QdynStatus::Numerical);
    unsafe { qdyn_model_free(m) };
}
