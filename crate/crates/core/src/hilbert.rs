//! Operators and states on the truncated qubit ⊗ cavity space.
//!
//! Conventions used everywhere in the crate:
//!
//! * the qubit factor comes first: joint index `q * fock_dim + n` with
//!   `q = 0` for |g⟩, `q = 1` for |e⟩ and `n` the photon number;
//! * matrices are vectorized by stacking columns, so entry `(r, c)` of a
//!   `d × d` matrix lands at index `c * d + r`. Under this convention the
//!   map `X ↦ A X B` is the matrix `Bᵀ ⊗ A`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{re, ComplexMatrix, C64, ONE, ZERO};

pub const QUBIT_DIM: usize = 2;
pub const GROUND: usize = 0;
pub const EXCITED: usize = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HilbertDims {
    fock_dim: usize,
}

impl HilbertDims {
    pub fn new(fock_dim: usize) -> Result<Self> {
        if fock_dim < 2 {
            return Err(Error::InvalidDims(format!(
                "fock_dim must be at least 2 (vacuum plus one photon), got {fock_dim}"
            )));
        }
        Ok(Self { fock_dim })
    }

    pub fn fock_dim(&self) -> usize {
        self.fock_dim
    }

    /// Highest photon number kept, `N = fock_dim - 1`.
    pub fn max_photons(&self) -> usize {
        self.fock_dim - 1
    }

    pub fn qubit_dim(&self) -> usize {
        QUBIT_DIM
    }

    pub fn total_dim(&self) -> usize {
        QUBIT_DIM * self.fock_dim
    }

    /// Joint basis index of |q, n⟩.
    pub fn index(&self, qubit: usize, photons: usize) -> usize {
        debug_assert!(qubit < QUBIT_DIM && photons < self.fock_dim);
        qubit * self.fock_dim + photons
    }

    /// Inverse of [`HilbertDims::index`].
    pub fn split(&self, index: usize) -> (usize, usize) {
        (index / self.fock_dim, index % self.fock_dim)
    }

    /// Eigenvalue of `a†a + σ+σ-` on a joint basis state.
    pub fn excitations(&self, index: usize) -> usize {
        let (q, n) = self.split(index);
        q + n
    }
}

/// Acceptance thresholds for density-matrix checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub herm: f64,
    pub trace: f64,
    pub pos: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-10,
            trace: 1e-10,
            pos: 1e-8,
        }
    }
}

/// Measured deviations of a matrix from being a valid state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateDefects {
    pub herm: f64,
    pub trace: f64,
    pub min_eigenvalue: f64,
}

impl StateDefects {
    pub fn within(&self, tol: &Tolerances) -> bool {
        self.herm <= tol.herm && self.trace <= tol.trace && self.min_eigenvalue >= -tol.pos
    }
}

/// Hermitian, unit-trace, positive semidefinite operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates against the default [`Tolerances`].
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerances(matrix, &Tolerances::default())
    }

    pub fn with_tolerances(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "density matrix must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let defects = defects(&matrix)?;
        if !defects.within(tol) {
            return Err(Error::InvalidDensityMatrix(format!(
                "hermiticity error {:e}, trace error {:e}, min eigenvalue {:e}",
                defects.herm, defects.trace, defects.min_eigenvalue
            )));
        }
        Ok(Self { matrix })
    }

    /// Skips validation. For results of trace- and positivity-preserving
    /// maps applied to already valid states.
    pub(crate) fn new_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    /// `|ψ⟩⟨ψ|` for a normalized ket.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDensityMatrix(format!(
                "state vector has squared norm {norm}"
            )));
        }
        let d = psi.len();
        Ok(Self {
            matrix: ComplexMatrix::from_fn(d, d, |r, c| psi[r] * psi[c].conj()),
        })
    }

    /// Projector onto the joint basis state |q, n⟩.
    pub fn basis(dims: &HilbertDims, qubit: usize, photons: usize) -> Self {
        let d = dims.total_dim();
        let k = dims.index(qubit, photons);
        let mut m = ComplexMatrix::zeros(d, d);
        m[(k, k)] = ONE;
        Self { matrix: m }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn purity(&self) -> f64 {
        purity(&self.matrix)
    }

    pub fn defects(&self) -> Result<StateDefects> {
        defects(&self.matrix)
    }

    pub fn vectorize(&self) -> Vec<C64> {
        vectorize(&self.matrix)
    }

    /// Population `⟨k|ρ|k⟩`.
    pub fn population(&self, k: usize) -> f64 {
        self.matrix[(k, k)].re
    }

    /// Trace distance `½ Σ|λ_i|` to another state of the same dimension.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        let diff = &self.matrix - &other.matrix;
        Ok(0.5 * diff.hermitian_eigenvalues()?.iter().map(|l| l.abs()).sum::<f64>())
    }
}

/// `Tr ρ²` for a Hermitian matrix.
pub fn purity(m: &ComplexMatrix) -> f64 {
    // Tr(ρρ) = Σ_rc ρ_rc ρ_cr = Σ |ρ_rc|² when ρ is Hermitian.
    m.as_slice().iter().map(|z| z.norm_sqr()).sum()
}

fn defects(m: &ComplexMatrix) -> Result<StateDefects> {
    let herm = m.hermiticity_error();
    let trace = (m.trace() - ONE).norm();
    let min_eigenvalue = m
        .hermitian_eigenvalues()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    Ok(StateDefects {
        herm,
        trace,
        min_eigenvalue,
    })
}

/// Cavity annihilation operator on the Fock factor alone:
/// `a[n-1, n] = √n` for `1 ≤ n ≤ N`.
pub fn annihilation_op(dims: &HilbertDims) -> ComplexMatrix {
    let f = dims.fock_dim();
    let mut a = ComplexMatrix::zeros(f, f);
    for n in 1..f {
        a[(n - 1, n)] = re((n as f64).sqrt());
    }
    a
}

/// Photon-number operator `a†a` on the Fock factor, built directly on the
/// diagonal.
pub fn number_op(dims: &HilbertDims) -> ComplexMatrix {
    let diag: Vec<C64> = (0..dims.fock_dim()).map(|n| re(n as f64)).collect();
    ComplexMatrix::diag(&diag)
}

/// `(σ+, σ-)` in the basis `(g, e)`: `σ+|g⟩ = |e⟩`, `σ-|e⟩ = |g⟩`.
pub fn qubit_ops() -> (ComplexMatrix, ComplexMatrix) {
    let mut sigma_plus = ComplexMatrix::zeros(2, 2);
    sigma_plus[(EXCITED, GROUND)] = ONE;
    let sigma_minus = sigma_plus.transpose();
    (sigma_plus, sigma_minus)
}

/// Excited-state projector `σ+σ-` on the qubit.
pub fn excited_projector() -> ComplexMatrix {
    ComplexMatrix::diag(&[ZERO, ONE])
}

/// `a ⊗ b` with `a` the slow (outer) factor.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

/// Lifts a cavity operator to the joint space as `I₂ ⊗ A`.
pub fn lift_cavity(dims: &HilbertDims, cavity_op: &ComplexMatrix) -> Result<ComplexMatrix> {
    if cavity_op.rows() != dims.fock_dim() || !cavity_op.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "cavity operator is {}x{}, fock_dim is {}",
            cavity_op.rows(),
            cavity_op.cols(),
            dims.fock_dim()
        )));
    }
    Ok(ComplexMatrix::identity(QUBIT_DIM).kron(cavity_op))
}

/// Lifts a qubit operator to the joint space as `A ⊗ I_cav`.
pub fn lift_qubit(dims: &HilbertDims, qubit_op: &ComplexMatrix) -> Result<ComplexMatrix> {
    if qubit_op.rows() != QUBIT_DIM || !qubit_op.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "qubit operator is {}x{}",
            qubit_op.rows(),
            qubit_op.cols()
        )));
    }
    Ok(qubit_op.kron(&ComplexMatrix::identity(dims.fock_dim())))
}

/// Excitation-number operator `a†a + σ+σ-` on the joint space.
pub fn excitation_number_op(dims: &HilbertDims) -> ComplexMatrix {
    let diag: Vec<C64> = (0..dims.total_dim())
        .map(|k| re(dims.excitations(k) as f64))
        .collect();
    ComplexMatrix::diag(&diag)
}

/// Column-stacking vectorization of a square matrix.
pub fn vectorize(m: &ComplexMatrix) -> Vec<C64> {
    let d = m.rows();
    let mut v = Vec::with_capacity(d * m.cols());
    for c in 0..m.cols() {
        for r in 0..d {
            v.push(m[(r, c)]);
        }
    }
    v
}

/// Inverse of [`vectorize`] for a square result.
pub fn unvectorize(v: &[C64]) -> Result<ComplexMatrix> {
    let d = (v.len() as f64).sqrt().round() as usize;
    if d * d != v.len() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} is not a vectorized square matrix",
            v.len()
        )));
    }
    Ok(ComplexMatrix::from_fn(d, d, |r, c| v[c * d + r]))
}

/// Superoperator of `X ↦ A X B` under column stacking: `Bᵀ ⊗ A`.
pub fn sandwich_superop(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    b.transpose().kron(a)
}

/// Index of the vectorized entry `(r, c)` of a `d × d` matrix.
#[inline]
pub fn vec_index(d: usize, r: usize, c: usize) -> usize {
    c * d + r
}

/// Traces out the cavity from a joint-space matrix.
pub fn trace_out_cavity(m: &ComplexMatrix, dims: &HilbertDims) -> Result<ComplexMatrix> {
    let d = dims.total_dim();
    if m.rows() != d || m.cols() != d {
        return Err(Error::DimensionMismatch(format!(
            "expected {d}x{d} joint-space matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(ComplexMatrix::from_fn(QUBIT_DIM, QUBIT_DIM, |q, p| {
        (0..dims.fock_dim())
            .map(|n| m[(dims.index(q, n), dims.index(p, n))])
            .sum()
    }))
}

/// Reduced qubit state `Tr_cav ρ`.
pub fn partial_trace_cavity(rho: &DensityMatrix, dims: &HilbertDims) -> Result<DensityMatrix> {
    Ok(DensityMatrix::new_unchecked(trace_out_cavity(rho.matrix(), dims)?))
}

/// Traces out the qubit, leaving the cavity state.
pub fn trace_out_qubit(m: &ComplexMatrix, dims: &HilbertDims) -> Result<ComplexMatrix> {
    let d = dims.total_dim();
    if m.rows() != d || m.cols() != d {
        return Err(Error::DimensionMismatch(format!(
            "expected {d}x{d} joint-space matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let f = dims.fock_dim();
    Ok(ComplexMatrix::from_fn(f, f, |n, k| {
        (0..QUBIT_DIM).map(|q| m[(dims.index(q, n), dims.index(q, k))]).sum()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::I;

    #[test]
    fn dims_validation() {
        assert!(matches!(HilbertDims::new(1), Err(Error::InvalidDims(_))));
        let d = HilbertDims::new(3).unwrap();
        assert_eq!(d.total_dim(), 6);
        assert_eq!(d.max_photons(), 2);
        assert_eq!(d.index(EXCITED, 2), 5);
        assert_eq!(d.split(5), (1, 2));
        assert_eq!(d.excitations(5), 3);
    }

    #[test]
    fn annihilation_small_cases() {
        let a = annihilation_op(&HilbertDims::new(2).unwrap());
        assert!(a.approx_eq(&ComplexMatrix::from_rows(&[[ZERO, ONE], [ZERO, ZERO]]), 0.0));
        let a3 = annihilation_op(&HilbertDims::new(3).unwrap());
        assert_eq!(a3[(1, 2)], re(2f64.sqrt()));
    }

    #[test]
    fn number_operator_from_ladder() {
        for f in 2..7 {
            let dims = HilbertDims::new(f).unwrap();
            let a = annihilation_op(&dims);
            let n = &a.adjoint() * &a;
            for k in 0..f {
                for j in 0..f {
                    let expect = if j == k { k as f64 } else { 0.0 };
                    assert!((n[(j, k)] - re(expect)).norm() < 1e-14);
                }
            }
            assert!(n.approx_eq(&number_op(&dims), 1e-14));
        }
    }

    #[test]
    fn ladder_matrix_elements_exact() {
        let dims = HilbertDims::new(6).unwrap();
        let a = annihilation_op(&dims);
        for m in 0..6 {
            for n in 0..6 {
                let expect = if m + 1 == n { (n as f64).sqrt() } else { 0.0 };
                assert_eq!(a[(m, n)], re(expect));
            }
        }
    }

    #[test]
    fn canonical_commutator_holds_below_truncation() {
        let dims = HilbertDims::new(5).unwrap();
        let a = annihilation_op(&dims);
        let comm = a.commutator(&a.adjoint()).unwrap();
        let n_max = dims.max_photons();
        for k in 0..n_max {
            assert!((comm[(k, k)] - ONE).norm() < 1e-13);
        }
        // The top level sees [a, a†] = -N instead of 1.
        assert!((comm[(n_max, n_max)] - re(-(n_max as f64))).norm() < 1e-13);
    }

    #[test]
    fn qubit_operator_identities() {
        let (sp, sm) = qubit_ops();
        assert!((&sp * &sm).approx_eq(&excited_projector(), 0.0));
        let x = &sp + &sm;
        assert!(x.approx_eq(&ComplexMatrix::from_rows(&[[ZERO, ONE], [ONE, ZERO]]), 0.0));
        let comm = sp.commutator(&sm).unwrap();
        assert!(comm.approx_eq(&ComplexMatrix::diag(&[re(-1.0), ONE]), 0.0));
        assert!((&sp * &sp).max_abs() == 0.0);
    }

    #[test]
    fn vectorize_stacks_columns() {
        let m = ComplexMatrix::from_rows(&[[re(1.0), re(2.0)], [re(3.0), re(4.0)]]);
        assert_eq!(vectorize(&m), vec![re(1.0), re(3.0), re(2.0), re(4.0)]);
        assert!(unvectorize(&vectorize(&m)).unwrap().approx_eq(&m, 0.0));
        assert!(unvectorize(&[ONE, ONE, ONE]).is_err());
    }

    #[test]
    fn partial_trace_examples() {
        let dims = HilbertDims::new(3).unwrap();
        let rho = DensityMatrix::basis(&dims, GROUND, 0);
        let red = partial_trace_cavity(&rho, &dims).unwrap();
        assert!(red.matrix().approx_eq(&ComplexMatrix::diag(&[ONE, ZERO]), 0.0));

        let mix = &DensityMatrix::basis(&dims, GROUND, 0).into_matrix().scale(re(0.5))
            + &DensityMatrix::basis(&dims, EXCITED, 1).into_matrix().scale(re(0.5));
        let red = partial_trace_cavity(&DensityMatrix::new(mix).unwrap(), &dims).unwrap();
        assert!(red.matrix().approx_eq(&ComplexMatrix::diag(&[re(0.5), re(0.5)]), 1e-15));
    }

    #[test]
    fn partial_trace_dimension_mismatch() {
        let dims = HilbertDims::new(3).unwrap();
        let rho = DensityMatrix::new(ComplexMatrix::diag(&[re(0.5), re(0.5)])).unwrap();
        assert!(matches!(
            partial_trace_cavity(&rho, &dims),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(ComplexMatrix::diag(&[re(0.6), re(0.6)])).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::diag(&[re(1.5), re(-0.5)])).is_err());
        let non_herm = ComplexMatrix::from_rows(&[[re(0.5), I], [ZERO, re(0.5)]]);
        assert!(DensityMatrix::new(non_herm).is_err());
        let plus = DensityMatrix::pure(&[re(0.5f64.sqrt()), re(0.5f64.sqrt())]).unwrap();
        assert!((plus.purity() - 1.0).abs() < 1e-15);
        assert!(DensityMatrix::pure(&[ONE, ONE]).is_err());
    }

    #[test]
    fn trace_distance_between_orthogonal_states() {
        let g = DensityMatrix::new(ComplexMatrix::diag(&[ONE, ZERO])).unwrap();
        let e = DensityMatrix::new(ComplexMatrix::diag(&[ZERO, ONE])).unwrap();
        assert!((g.trace_distance(&e).unwrap() - 1.0).abs() < 1e-14);
    }
}
