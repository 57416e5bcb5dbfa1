//! Exact solution of the cavity-dephasing scenario.
//!
//! Dephasing conserves `a†a + σ+σ-`, so a state started in the sector
//! spanned by `{|g,n⟩, |e,n-1⟩}` stays there. Its density matrix is
//! `v₁|g,n⟩⟨g,n| + v₂|g,n⟩⟨e,n-1| + v₃|e,n-1⟩⟨g,n| + v₄|e,n-1⟩⟨e,n-1|`
//! and `v = (v₁, v₂, v₃, v₄)` obeys `v̇ = L v` with a 4×4 block `L`.
//!
//! The block is read off the full Liouvillian built in [`crate::model`];
//! [`block_matrix_closed_form`] is the hand-written version. The two agree
//! with the coupling entry `(3,4)` equal to `ig√n`.

use crate::error::{Error, Result};
use crate::hilbert::{HilbertDims, EXCITED, GROUND};
use crate::linalg::{multiset_distance, re, ComplexMatrix, C64, I, ONE, ZERO};
use crate::model::{liouvillian, ModelParams, Scenario};
use crate::series::{check_grid, TimeSeries};

/// Sector coefficient vector `(v₁, v₂, v₃, v₄)`.
pub type SectorVector = [C64; 4];

/// Sector vector of the initial state `|e, n-1⟩`.
pub const EXCITED_ATOM: SectorVector = [ZERO, ZERO, ZERO, ONE];

#[derive(Clone, Debug)]
pub struct DephasingBlock {
    pub n: usize,
    pub matrix: ComplexMatrix,
    /// `η_n = 16 g² n / γ²`; infinite when `γ = 0` and `g > 0`.
    pub eta: f64,
}

impl DephasingBlock {
    /// Trace of the sector state, `v₁ + v₄`, is conserved: `(1,0,0,1) L = 0`.
    pub fn trace_leak(&self) -> f64 {
        (0..4)
            .map(|c| (self.matrix[(0, c)] + self.matrix[(3, c)]).norm())
            .fold(0.0, f64::max)
    }
}

/// `η_n = 16 g² n / γ²`.
pub fn eta(p: &ModelParams, n: usize) -> f64 {
    let num = 16.0 * p.g * p.g * n as f64;
    if num == 0.0 {
        0.0
    } else {
        num / (p.gamma * p.gamma)
    }
}

fn require_sector(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "excitation sector n = 0 is one-dimensional; the 4x4 block needs n >= 1".into(),
        ));
    }
    Ok(())
}

/// Joint-space indices of `|g,n⟩` and `|e,n-1⟩`.
fn sector_states(dims: &HilbertDims, n: usize) -> (usize, usize) {
    (dims.index(GROUND, n), dims.index(EXCITED, n - 1))
}

/// Vectorized positions of the four sector outer products, in `v` order.
fn sector_vec_indices(dims: &HilbertDims, n: usize) -> [usize; 4] {
    let d = dims.total_dim();
    let (gn, e) = sector_states(dims, n);
    let at = |r: usize, c: usize| crate::hilbert::vec_index(d, r, c);
    [at(gn, gn), at(gn, e), at(e, gn), at(e, e)]
}

/// The 4×4 sector block, projected out of the full dephasing Liouvillian.
pub fn block_matrix(p: &ModelParams, n: usize) -> Result<DephasingBlock> {
    require_sector(n)?;
    let local = if p.dims.max_photons() >= n {
        *p
    } else {
        p.with_fock_dim(n + 1)?
    };
    let l = liouvillian(&local, Scenario::Dephasing);
    let idx = sector_vec_indices(&local.dims, n);
    Ok(DephasingBlock {
        n,
        matrix: l.submatrix(&idx, &idx),
        eta: eta(p, n),
    })
}

/// Hand-written sector block:
///
/// ```text
/// [  0      ig√n    -ig√n     0    ]
/// [ ig√n   -γ+iδ     0      -ig√n  ]
/// [-ig√n     0     -γ-iδ    ig√n   ]
/// [  0     -ig√n    ig√n      0    ]
/// ```
pub fn block_matrix_closed_form(p: &ModelParams, n: usize) -> Result<DephasingBlock> {
    require_sector(n)?;
    Ok(DephasingBlock {
        n,
        matrix: coupling_block(p, (n as f64).sqrt()),
        eta: eta(p, n),
    })
}

/// Block with the `(3,4)` entry set to `i g` instead of `i g √n`. Kept as a
/// regression reference: it disagrees with the projected block for `n ≥ 2`.
pub fn block_matrix_unscaled_entry(p: &ModelParams, n: usize) -> Result<DephasingBlock> {
    let mut b = block_matrix_closed_form(p, n)?;
    b.matrix[(2, 3)] = I * p.g;
    Ok(b)
}

fn coupling_block(p: &ModelParams, sqrt_n: f64) -> ComplexMatrix {
    let c = I * (p.g * sqrt_n);
    let d2 = C64::new(-p.gamma, p.delta);
    let d3 = C64::new(-p.gamma, -p.delta);
    ComplexMatrix::from_rows(&[
        [ZERO, c, -c, ZERO],
        [c, d2, ZERO, -c],
        [-c, ZERO, d3, c],
        [ZERO, -c, c, ZERO],
    ])
}

/// Intermediates of the cubic root formula.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CubicTerms {
    pub q: f64,
    pub r: f64,
    pub s: C64,
}

/// The four block eigenvalues.
///
/// Resonant case: `zero = 0`, `first = -γ`, `plus`/`minus` = `l_±`.
/// General case: `zero = z₀`, `first = z₁`, `plus`/`minus` = `z_±`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DephasingEigenvalues {
    pub zero: C64,
    pub first: C64,
    pub plus: C64,
    pub minus: C64,
    pub cubic: Option<CubicTerms>,
}

impl DephasingEigenvalues {
    pub fn as_array(&self) -> [C64; 4] {
        [self.zero, self.first, self.plus, self.minus]
    }
}

/// Closed-form eigenvalues at resonance (`δ = 0`):
/// `{0, -γ, -γ(1 ∓ √(1-η_n))/2}`.
pub fn eigenvalues_resonant(p: &ModelParams, n: usize) -> Result<DephasingEigenvalues> {
    require_sector(n)?;
    if p.delta != 0.0 {
        return Err(Error::NotResonant(p.delta));
    }
    if p.gamma <= 0.0 {
        return Err(Error::InvalidParameter("resonant eigenvalues need gamma > 0".into()));
    }
    let eta = eta(p, n);
    let x = re(1.0 - eta).sqrt();
    // 1 - x written as η / (1 + x) to keep l₊ accurate when η is tiny.
    let plus = -p.gamma * re(eta) / (2.0 * (ONE + x));
    let minus = -p.gamma * (ONE + x) / 2.0;
    Ok(DephasingEigenvalues {
        zero: ZERO,
        first: re(-p.gamma),
        plus,
        minus,
        cubic: None,
    })
}

/// `Q(z) = z (4g²nγ + (4g²n + γ² + δ²) z + 2γ z² + z³)`, the characteristic
/// polynomial of the block.
pub fn characteristic_polynomial(p: &ModelParams, n: usize, z: C64) -> C64 {
    let gn = 4.0 * p.g * p.g * n as f64;
    let c1 = gn + p.gamma * p.gamma + p.delta * p.delta;
    z * (re(gn * p.gamma) + z * (re(c1) + z * (re(2.0 * p.gamma) + z)))
}

/// Sum of the moduli of the terms of `Q(z)`; the natural scale for
/// residual checks.
pub fn characteristic_scale(p: &ModelParams, n: usize, z: C64) -> f64 {
    let gn = 4.0 * p.g * p.g * n as f64;
    let c1 = gn + p.gamma * p.gamma + p.delta * p.delta;
    let a = z.norm();
    a * (gn * p.gamma + c1 * a + 2.0 * p.gamma * a * a + a * a * a)
}

/// Closed-form eigenvalues for any detuning, from the cubic formula for
/// the roots of `Q(z)/z`.
pub fn eigenvalues_general(p: &ModelParams, n: usize) -> Result<DephasingEigenvalues> {
    require_sector(n)?;
    let g2n = p.g * p.g * n as f64;
    let gamma = p.gamma;
    let d2 = p.delta * p.delta;
    let q = -(gamma * gamma - 3.0 * d2 - 12.0 * g2n) / 9.0;
    let r = gamma * (gamma * gamma + 9.0 * d2 - 18.0 * g2n) / 27.0;
    let disc = re(q * q * q + r * r).sqrt();
    // Both signs of the square root give the same roots (s ↔ -q/s); take
    // the one without cancellation so s only vanishes when q = r = 0.
    let w_plus = re(r) + disc;
    let w_minus = re(r) - disc;
    let w = if w_plus.norm() >= w_minus.norm() {
        w_plus
    } else {
        w_minus
    };
    let s = w.cbrt();
    let scale = gamma.max(p.delta.abs()).max(g2n.sqrt());
    let (diff, sum) = if s.norm() <= 1e-12 * scale {
        // Triple root at -2γ/3.
        (ZERO, ZERO)
    } else {
        (s - q / s, s + q / s)
    };
    let shift = re(-2.0 * gamma / 3.0);
    let first = shift + diff;
    let rot = I * (3f64.sqrt() / 2.0) * sum;
    let plus = shift - diff / 2.0 + rot;
    let minus = shift - diff / 2.0 - rot;
    Ok(DephasingEigenvalues {
        zero: ZERO,
        first,
        plus,
        minus,
        cubic: Some(CubicTerms { q, r, s }),
    })
}

/// Numeric spectrum of the projected block.
pub fn numeric_eigenvalues(p: &ModelParams, n: usize) -> Result<Vec<C64>> {
    block_matrix(p, n)?.matrix.eigenvalues()
}

/// Largest distance between the closed-form eigenvalues and the numeric
/// spectrum of the block, divided by the spectral radius (at least 1e-300).
pub fn spectral_mismatch(p: &ModelParams, n: usize) -> Result<f64> {
    let closed = if p.delta == 0.0 && p.gamma > 0.0 {
        eigenvalues_resonant(p, n)?
    } else {
        eigenvalues_general(p, n)?
    };
    let numeric = numeric_eigenvalues(p, n)?;
    let radius = numeric.iter().map(|z| z.norm()).fold(1e-300, f64::max);
    Ok(multiset_distance(&closed.as_array(), &numeric) / radius)
}

/// `v(t) = exp(L t) v₀` inside sector `n`.
///
/// Uses the eigendecomposition of the block and falls back to a direct
/// matrix exponential when the eigenbasis is ill-conditioned (near the
/// degenerate point `η_n = 1` at resonance).
pub fn evolve_sector(p: &ModelParams, n: usize, v0: &SectorVector, t: f64) -> Result<SectorVector> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let block = block_matrix(p, n)?;
    evolve_block(&block.matrix, v0, &[t]).map(|mut v| v.remove(0))
}

fn evolve_block(l: &ComplexMatrix, v0: &SectorVector, ts: &[f64]) -> Result<Vec<SectorVector>> {
    let to_array = |v: Vec<C64>| -> SectorVector { [v[0], v[1], v[2], v[3]] };
    match l.eigen() {
        Ok(sd) if sd.basis_condition() < 1e6 => ts
            .iter()
            .map(|&t| sd.propagate(v0, t).map(to_array))
            .collect(),
        _ => ts
            .iter()
            .map(|&t| {
                let e = l.scale(re(t)).expm()?;
                e.matvec(v0).map(to_array)
            })
            .collect(),
    }
}

/// Reduced atomic state from a sector vector: the coherences trace out,
/// leaving `diag(v₁, v₄)` in the `(g, e)` basis.
pub fn atomic_state(v: &SectorVector) -> ComplexMatrix {
    ComplexMatrix::diag(&[v[0], v[3]])
}

/// `h_n(t)` for the initial state `|e, n-1⟩` at resonance.
///
/// `h_n(t) = η e^{l₊t}/(2η + 4l₊/γ) + η e^{l₋t}/(2η + 4l₋/γ)`, evaluated
/// with the equivalent weights `(1+x)/(2x)` and `-(1-x)/(2x)`,
/// `x = √(1-η_n)`. Close to `η_n = 1` it switches to
/// `e^{-γt/2}(cosh y + sinh(y)/x)`, `y = γxt/2`, which has no `1/x`.
pub fn excitation_imbalance(p: &ModelParams, n: usize, t: f64) -> Result<C64> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let ev = eigenvalues_resonant(p, n)?;
    let eta = eta(p, n);
    let x = re(1.0 - eta).sqrt();
    if x.norm() < 1e-3 {
        let y = p.gamma * x * t / 2.0;
        let decay = (-p.gamma * t / 2.0).exp();
        return Ok(decay * (y.cosh() + re(p.gamma * t / 2.0) * sinhc(y)));
    }
    let w_plus = (ONE + x) / (2.0 * x);
    let w_minus = -(re(eta) / (ONE + x)) / (2.0 * x);
    Ok(w_plus * (ev.plus * t).exp() + w_minus * (ev.minus * t).exp())
}

fn sinhc(y: C64) -> C64 {
    if y.norm() < 1e-4 {
        ONE + y * y / 6.0
    } else {
        y.sinh() / y
    }
}

/// `p_e(t) = (1 + h_n(t)) / 2`.
pub fn excited_population(p: &ModelParams, n: usize, t: f64) -> Result<f64> {
    let h = excitation_imbalance(p, n, t)?;
    debug_assert!(h.im.abs() < 1e-10, "h_n has imaginary part {}", h.im);
    Ok(0.5 * (1.0 + h.re))
}

/// Atomic purity at resonance:
/// `P(t) = 1/2 + (f₊ + f₋ - η e^{-γt}) / (4(1-η))`,
/// `f_± = ½(1 ± x)² e^{-γ(1∓x)t}`.
///
/// Equivalent to `(1 + h_n²)/2`, which is used within 1e-3 of `η = 1`
/// where the rational form is singular.
pub fn purity_closed_form(p: &ModelParams, n: usize, t: f64) -> Result<f64> {
    purity_rational(p, n, t, -1.0)
}

/// The rational purity formula with `+η e^{-γt}`. It gives
/// `P(0) = 1/2 + 1/(2(1-η))`, not 1, and is kept as a regression reference.
pub fn purity_closed_form_wrong_sign(p: &ModelParams, n: usize, t: f64) -> Result<f64> {
    purity_rational(p, n, t, 1.0)
}

fn purity_rational(p: &ModelParams, n: usize, t: f64, sign: f64) -> Result<f64> {
    let ev = eigenvalues_resonant(p, n)?;
    let eta = eta(p, n);
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    if (1.0 - eta).abs() < 1e-3 {
        let h = excitation_imbalance(p, n, t)?.re;
        return Ok(0.5 * (1.0 + h * h));
    }
    let x = re(1.0 - eta).sqrt();
    let f_plus = 0.5 * (ONE + x).powi(2) * (2.0 * ev.plus * t).exp();
    let f_minus = 0.5 * (ONE - x).powi(2) * (2.0 * ev.minus * t).exp();
    let decay = re(sign * eta * (-p.gamma * t).exp());
    let val = 0.5 + (f_plus + f_minus + decay) / (4.0 * (1.0 - eta));
    Ok(val.re)
}

/// Time series of the atomic observables for the initial state
/// `|e, n-1⟩`.
///
/// Columns: `re_h`, `im_h`, `p_e`, `purity` (closed forms, resonance only)
/// and `p_e_sector`, `purity_sector` (from the exponentiated 4×4 block,
/// any detuning). Off resonance the closed-form columns are filled from
/// the sector evolution.
pub fn atom_observables_dephasing(
    p: &ModelParams,
    n: usize,
    t_grid: &[f64],
) -> Result<TimeSeries> {
    check_grid(t_grid)?;
    let block = block_matrix(p, n)?;
    let sector = evolve_block(&block.matrix, &EXCITED_ATOM, t_grid)?;
    let pe_sector: Vec<f64> = sector.iter().map(|v| v[3].re).collect();
    let purity_sector: Vec<f64> = sector
        .iter()
        .map(|v| crate::hilbert::purity(&atomic_state(v)))
        .collect();

    let resonant = p.delta == 0.0 && p.gamma > 0.0;
    let (re_h, im_h, pe, purity) = if resonant {
        let mut re_h = Vec::with_capacity(t_grid.len());
        let mut im_h = Vec::with_capacity(t_grid.len());
        let mut pe = Vec::with_capacity(t_grid.len());
        let mut purity = Vec::with_capacity(t_grid.len());
        for &t in t_grid {
            let h = excitation_imbalance(p, n, t)?;
            re_h.push(h.re);
            im_h.push(h.im);
            pe.push(0.5 * (1.0 + h.re));
            purity.push(purity_closed_form(p, n, t)?);
        }
        (re_h, im_h, pe, purity)
    } else {
        let re_h = sector.iter().map(|v| (v[3] - v[0]).re).collect();
        let im_h = sector.iter().map(|v| (v[3] - v[0]).im).collect();
        (re_h, im_h, pe_sector.clone(), purity_sector.clone())
    };

    let mut ts = TimeSeries::new(t_grid.to_vec());
    ts.push_column("re_h", re_h)?;
    ts.push_column("im_h", im_h)?;
    ts.push_column("p_e", pe)?;
    ts.push_column("purity", purity)?;
    ts.push_column("p_e_sector", pe_sector)?;
    ts.push_column("purity_sector", purity_sector)?;
    Ok(ts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::nearest_distance;

    fn params(g: f64, delta: f64, gamma: f64) -> ModelParams {
        ModelParams::dephasing(g, delta, gamma, 4).unwrap()
    }

    #[test]
    fn rejects_vacuum_sector() {
        assert!(block_matrix(&params(1.0, 0.0, 1.0), 0).is_err());
        assert!(eigenvalues_general(&params(1.0, 0.0, 1.0), 0).is_err());
    }

    #[test]
    fn decoupled_block_is_diagonal() {
        let b = block_matrix(&params(0.0, 0.4, 2.0), 1).unwrap();
        let expect = ComplexMatrix::diag(&[ZERO, C64::new(-2.0, 0.4), C64::new(-2.0, -0.4), ZERO]);
        assert!(b.matrix.approx_eq(&expect, 1e-15));
    }

    #[test]
    fn projected_block_matches_closed_form() {
        let p = params(1.0, 0.7, 3.0);
        let projected = block_matrix(&p, 2).unwrap();
        let closed = block_matrix_closed_form(&p, 2).unwrap();
        assert!(projected.matrix.approx_eq(&closed.matrix, 1e-14));
    }

    #[test]
    fn unscaled_entry_disagrees_with_projection_for_n_above_one() {
        let p = params(1.0, 0.7, 3.0);
        let projected = block_matrix(&p, 2).unwrap();
        let variant = block_matrix_unscaled_entry(&p, 2).unwrap();
        let entry = projected.matrix[(2, 3)];
        assert!((entry - I * 2f64.sqrt()).norm() < 1e-14);
        assert!((variant.matrix[(2, 3)] - entry).norm() > 0.4);
        // Rows 2 and 3 must be complex conjugates of each other for the
        // generator to map Hermitian states to Hermitian states.
        let conj_gap = (variant.matrix[(2, 3)] - variant.matrix[(1, 3)].conj()).norm();
        assert!(conj_gap > 0.4);
        let good = projected.matrix.eigenvalues().unwrap();
        let bad = variant.matrix.eigenvalues().unwrap();
        assert!(crate::linalg::multiset_distance(&good, &bad) > 1e-3);
        assert!(projected.trace_leak() < 1e-15);
    }

    #[test]
    fn block_needs_larger_truncation_transparently() {
        let p = ModelParams::dephasing(0.5, 0.1, 1.0, 2).unwrap();
        let b = block_matrix(&p, 5).unwrap();
        assert!(b.matrix.approx_eq(&block_matrix_closed_form(&p, 5).unwrap().matrix, 1e-14));
    }

    #[test]
    fn resonant_eigenvalues_limits() {
        let e = eigenvalues_resonant(&params(0.0, 0.0, 3.0), 1).unwrap();
        let vals = e.as_array();
        assert!(multiset_distance(&vals, &[ZERO, re(-3.0), ZERO, re(-3.0)]) < 1e-15);

        // η = 1: g = 1, n = 1, γ = 4
        let e = eigenvalues_resonant(&params(1.0, 0.0, 4.0), 1).unwrap();
        assert!((e.plus - re(-2.0)).norm() < 1e-15);
        assert!((e.minus - re(-2.0)).norm() < 1e-15);

        assert!(matches!(
            eigenvalues_resonant(&params(1.0, 0.1, 4.0), 1),
            Err(Error::NotResonant(_))
        ));
    }

    #[test]
    fn resonant_eigenvalues_match_numeric() {
        let p = params(1.0, 0.0, 10.0);
        assert!(spectral_mismatch(&p, 1).unwrap() < 1e-12);
        // η > 1: complex pair
        let p = params(1.0, 0.0, 1.0);
        let e = eigenvalues_resonant(&p, 1).unwrap();
        assert!(e.plus.im.abs() > 1.0);
        assert!((e.plus - e.minus.conj()).norm() < 1e-14);
        assert!(spectral_mismatch(&p, 1).unwrap() < 1e-12);
    }

    #[test]
    fn general_roots_solve_characteristic_polynomial() {
        let p = params(1.0, 0.8, 10.0);
        let e = eigenvalues_general(&p, 1).unwrap();
        for z in e.as_array() {
            let scale = characteristic_scale(&p, 1, z).max(1.0);
            assert!(characteristic_polynomial(&p, 1, z).norm() < 1e-9 * scale);
        }
        let numeric = numeric_eigenvalues(&p, 1).unwrap();
        for z in e.as_array() {
            assert!(nearest_distance(z, &numeric) < 1e-10);
        }
    }

    #[test]
    fn general_roots_sum_to_minus_two_gamma() {
        for (g, d, gm, n) in [(1.0, 0.8, 10.0, 1), (0.3, 2.0, 0.5, 3), (2.0, 0.0, 1.0, 2)] {
            let e = eigenvalues_general(&params(g, d, gm), n).unwrap();
            let s = e.first + e.plus + e.minus;
            assert!((s - re(-2.0 * gm)).norm() < 1e-12 * gm.max(1.0));
        }
    }

    #[test]
    fn general_reduces_to_resonant() {
        for (g, gm, n) in [(1.0, 10.0, 1), (1.0, 1.0, 1), (0.2, 3.0, 4), (1.0, 4.0, 1)] {
            let p = params(g, 0.0, gm);
            let a = eigenvalues_resonant(&p, n).unwrap().as_array();
            let b = eigenvalues_general(&p, n).unwrap().as_array();
            assert!(multiset_distance(&a, &b) < 1e-7 * gm, "g={g} gamma={gm}");
        }
    }

    #[test]
    fn general_handles_zero_dephasing() {
        let p = params(0.0, 0.6, 0.0);
        let e = eigenvalues_general(&p, 1).unwrap().as_array();
        assert!(multiset_distance(&e, &[ZERO, ZERO, I * 0.6, -I * 0.6]) < 1e-14);
        let p = params(0.0, 0.0, 0.0);
        let e = eigenvalues_general(&p, 1).unwrap().as_array();
        assert!(e.iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn sector_evolution_basics() {
        let p = params(1.0, 0.3, 2.0);
        let v0 = [re(0.3), C64::new(0.1, 0.2), C64::new(0.1, -0.2), re(0.7)];
        let v = evolve_sector(&p, 1, &v0, 0.0).unwrap();
        for k in 0..4 {
            assert!((v[k] - v0[k]).norm() < 1e-13);
        }
        let v = evolve_sector(&p, 1, &v0, 1.7).unwrap();
        assert!((v[0] + v[3] - ONE).norm() < 1e-13);
        assert!(evolve_sector(&p, 1, &v0, -1.0).is_err());

        let p0 = params(0.0, 0.4, 2.0);
        let v = evolve_sector(&p0, 1, &[ZERO, ONE, ZERO, ZERO], 0.9).unwrap();
        let expect = (C64::new(-2.0, 0.4) * 0.9).exp();
        assert!((v[1] - expect).norm() < 1e-14);
        assert!(v[0].norm() + v[2].norm() + v[3].norm() < 1e-14);
    }

    #[test]
    fn sector_evolution_at_degenerate_point() {
        // η₁ = 1 makes the block defective; the expm fallback handles it.
        let p = params(1.0, 0.0, 4.0);
        for t in [0.1, 0.5, 2.0] {
            let v = evolve_sector(&p, 1, &EXCITED_ATOM, t).unwrap();
            let h = excitation_imbalance(&p, 1, t).unwrap();
            assert!(((v[3] - v[0]).re - h.re).abs() < 1e-10);
            // confluent closed form (1 + γt/2) e^{-γt/2}
            assert!((h.re - (1.0 + 2.0 * t) * (-2.0 * t).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn h_matches_literal_rational_form() {
        for (g, gm) in [(1.0, 10.0), (1.0, 1.0), (1.0, 100.0), (0.7, 2.0)] {
            let p = params(g, 0.0, gm);
            let e = eigenvalues_resonant(&p, 1).unwrap();
            let eta = eta(&p, 1);
            for t in [0.0, 0.3, 1.0, 4.0] {
                let lit = re(eta) * (e.plus * t).exp() / (2.0 * eta + 4.0 * e.plus / gm)
                    + re(eta) * (e.minus * t).exp() / (2.0 * eta + 4.0 * e.minus / gm);
                let h = excitation_imbalance(&p, 1, t).unwrap();
                assert!((lit - h).norm() < 1e-9, "g={g} gamma={gm} t={t}");
                assert!(h.im.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn observables_start_pure_and_excited() {
        for gm in [1.0, 4.0, 10.0, 1000.0] {
            let p = params(1.0, 0.0, gm);
            assert!((excitation_imbalance(&p, 1, 0.0).unwrap() - ONE).norm() < 1e-12);
            assert!((excited_population(&p, 1, 0.0).unwrap() - 1.0).abs() < 1e-12);
            assert!((purity_closed_form(&p, 1, 0.0).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn wrong_sign_purity_fails_at_time_zero() {
        let p = params(1.0, 0.0, 5.0);
        let eta = eta(&p, 1);
        let variant = purity_closed_form_wrong_sign(&p, 1, 0.0).unwrap();
        assert!((variant - (0.5 + 0.5 / (1.0 - eta))).abs() < 1e-12);
        assert!((variant - 1.0).abs() > 0.1);
    }

    #[test]
    fn long_time_limit_is_maximally_mixed() {
        let p = params(1.0, 0.0, 10.0);
        let t = 2000.0;
        assert!((excited_population(&p, 1, t).unwrap() - 0.5).abs() < 1e-6);
        assert!((purity_closed_form(&p, 1, t).unwrap() - 0.5).abs() < 1e-6);
    }

    #[test]
    fn closed_forms_match_sector_evolution() {
        let grid: Vec<f64> = (0..60).map(|k| k as f64 * 0.1).collect();
        for gm in [1.0, 3.9, 4.0, 4.1, 10.0, 100.0] {
            let ts = atom_observables_dephasing(&params(1.0, 0.0, gm), 1, &grid).unwrap();
            let pe = ts.column("p_e").unwrap();
            let pe_s = ts.column("p_e_sector").unwrap();
            let pu = ts.column("purity").unwrap();
            let pu_s = ts.column("purity_sector").unwrap();
            for k in 0..grid.len() {
                assert!((pe[k] - pe_s[k]).abs() < 1e-9, "gamma={gm} k={k}");
                assert!((pu[k] - pu_s[k]).abs() < 1e-9, "gamma={gm} k={k}");
                assert!(pu[k] >= 0.5 - 1e-12 && pu[k] <= 1.0 + 1e-12);
                assert!(pe[k] >= -1e-12 && pe[k] <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn off_resonance_observables_use_sector_evolution() {
        let grid = [0.0, 0.5, 1.0];
        let ts = atom_observables_dephasing(&params(1.0, 0.8, 10.0), 1, &grid).unwrap();
        assert_eq!(ts.column("p_e"), ts.column("p_e_sector"));
        assert!(atom_observables_dephasing(&params(1.0, 0.8, 10.0), 1, &[-1.0]).is_err());
    }

    #[test]
    fn small_eta_eigenvalue_is_coupling_insensitive() {
        for gm in [40.0, 100.0, 1000.0] {
            let p = params(1.0, 0.0, gm);
            let eta = eta(&p, 1);
            assert!(eta <= 0.01);
            let e = eigenvalues_resonant(&p, 1).unwrap();
            assert!((e.plus - re(-gm * eta / 4.0)).norm() <= gm * eta * eta);
        }
    }
}
