//! Dense complex matrices.
//!
//! Everything in this crate (operators, superoperators, density matrices,
//! the small sector blocks) is carried by [`ComplexMatrix`]. Storage is
//! row-major. Non-Hermitian eigenproblems and SVDs are delegated to `faer`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use faer::linalg::solvers::DenseSolveCore;
use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Shorthand for a real number as a complex scalar.
#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<const N: usize>(rows: &[[C64; N]]) -> Self {
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self {
            rows: rows.len(),
            cols: N,
            data,
        }
    }

    pub fn diag(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    /// Column vector from a slice.
    pub fn column(entries: &[C64]) -> Self {
        Self {
            rows: entries.len(),
            cols: 1,
            data: entries.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major view of the entries.
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let dst = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
            for (k, &a) in row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let src = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `y = self * x` for a plain vector, writing into `y`.
    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        for (r, out) in y.iter_mut().enumerate() {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            *out = row.iter().zip(x).map(|(&a, &b)| a * b).sum();
        }
    }

    pub fn matvec(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                x.len(),
                self.cols
            )));
        }
        let mut y = vec![ZERO; self.rows];
        self.matvec_into(x, &mut y);
        Ok(y)
    }

    /// Kronecker product `self ⊗ rhs`; the left factor indexes the slow
    /// (outer) block.
    pub fn kron(&self, rhs: &Self) -> Self {
        let rows = self.rows * rhs.rows;
        let cols = self.cols * rhs.cols;
        Self::from_fn(rows, cols, |r, c| {
            self[(r / rhs.rows, c / rhs.cols)] * rhs[(r % rhs.rows, c % rhs.cols)]
        })
    }

    pub fn commutator(&self, rhs: &Self) -> Result<Self> {
        Ok(&self.matmul(rhs)? - &rhs.matmul(self)?)
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise distance to `other`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Deviation from Hermiticity, `max |A - A†|`.
    pub fn hermiticity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for r in 0..self.rows {
            for c in r..self.cols {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn hermitian_part(&self) -> Self {
        let adj = self.adjoint();
        Self::from_fn(self.rows, self.cols, |r, c| 0.5 * (self[(r, c)] + adj[(r, c)]))
    }

    /// Restriction to the given row and column index sets.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |r, c| self[(rows[r], cols[c])])
    }

    pub(crate) fn to_faer(&self) -> Mat<C64> {
        Mat::from_fn(self.rows, self.cols, |r, c| self[(r, c)])
    }

    pub(crate) fn from_faer(m: faer::MatRef<'_, C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
    }

    fn require_square(&self, what: &str) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "{what} needs a square matrix, got {}x{}",
                self.rows, self.cols
            )))
        }
    }

    /// Eigenvalues of a general (non-normal) square matrix.
    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        self.require_square("eigenvalues")?;
        self.to_faer()
            .eigenvalues()
            .map_err(|e| Error::Decomposition(format!("{e:?}")))
    }

    /// Eigenvalues of a Hermitian matrix in ascending order.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        self.require_square("hermitian_eigenvalues")?;
        let h = self.hermitian_part();
        h.to_faer()
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .map_err(|e| Error::Decomposition(format!("{e:?}")))
    }

    /// Full eigendecomposition with biorthogonal left vectors.
    pub fn eigen(&self) -> Result<SpectralDecomposition> {
        self.require_square("eigen")?;
        let n = self.rows;
        let evd = self
            .to_faer()
            .eigen()
            .map_err(|e| Error::Decomposition(format!("{e:?}")))?;
        let diag = evd.S().column_vector();
        let values: Vec<C64> = (0..n).map(|i| diag[i]).collect();
        let right = Self::from_faer(evd.U());
        let left = right.inverse()?;
        Ok(SpectralDecomposition {
            values,
            right,
            left,
        })
    }

    /// Inverse through partially pivoted LU. Fails on (numerically)
    /// singular input.
    pub fn inverse(&self) -> Result<Self> {
        self.require_square("inverse")?;
        let inv = Self::from_faer(self.to_faer().partial_piv_lu().inverse().as_ref());
        if inv.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Decomposition("singular matrix".into()));
        }
        Ok(inv)
    }

    /// Singular values in non-increasing order.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        let svd = self
            .to_faer()
            .svd()
            .map_err(|e| Error::Decomposition(format!("{e:?}")))?;
        let s = svd.S().column_vector();
        Ok((0..s.nrows()).map(|i| s[i].re).collect())
    }

    /// Orthonormal basis of the numerical null space: right singular
    /// vectors whose singular value is at most `rel_tol * σ_max`.
    pub fn null_space(&self, rel_tol: f64) -> Result<Vec<Vec<C64>>> {
        self.require_square("null_space")?;
        let svd = self
            .to_faer()
            .svd()
            .map_err(|e| Error::Decomposition(format!("{e:?}")))?;
        let s = svd.S().column_vector();
        let v = svd.V();
        let sigma_max = if s.nrows() > 0 { s[0].re } else { 0.0 };
        let cutoff = rel_tol * sigma_max.max(f64::MIN_POSITIVE);
        let mut basis = Vec::new();
        for k in 0..s.nrows() {
            if s[k].re <= cutoff {
                basis.push((0..v.nrows()).map(|r| v[(r, k)]).collect());
            }
        }
        Ok(basis)
    }

    /// Matrix exponential by scaling and squaring with a truncated Taylor
    /// series. Adequate for the small, well-scaled generators used here.
    pub fn expm(&self) -> Result<Self> {
        self.require_square("expm")?;
        let n = self.rows;
        let norm = (0..n)
            .map(|r| (0..n).map(|c| self[(r, c)].norm()).sum::<f64>())
            .fold(0.0, f64::max);
        let squarings = if norm > 0.5 {
            (norm / 0.5).log2().ceil() as u32
        } else {
            0
        };
        let scaled = self.scale(re(0.5f64.powi(squarings as i32)));
        let mut sum = Self::identity(n);
        let mut term = Self::identity(n);
        for k in 1..=20 {
            term = term.matmul(&scaled)?.scale(re(1.0 / k as f64));
            sum = &sum + &term;
            if term.max_abs() < 1e-18 * sum.max_abs() {
                break;
            }
        }
        for _ in 0..squarings {
            sum = sum.matmul(&sum)?;
        }
        Ok(sum)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        assert!(r < self.rows && c < self.cols, "index ({r}, {c}) out of bounds");
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        assert!(r < self.rows && c < self.cols, "index ({r}, {c}) out of bounds");
        &mut self.data[r * self.cols + c]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in add");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in sub");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.map(|z| -z)
    }
}

/// Panics on inner-dimension mismatch; use [`ComplexMatrix::matmul`] for
/// the fallible form.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("inner dimensions must agree")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Eigenvalues with right eigenvectors (columns of `right`) and the dual
/// left eigenvectors (rows of `left`), normalized so `left * right = I`.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub values: Vec<C64>,
    pub right: ComplexMatrix,
    pub left: ComplexMatrix,
}

impl SpectralDecomposition {
    /// `exp(A t) x` reconstructed from the eigensystem.
    pub fn propagate(&self, x: &[C64], t: f64) -> Result<Vec<C64>> {
        let coeffs = self.left.matvec(x)?;
        let weighted: Vec<C64> = coeffs
            .iter()
            .zip(&self.values)
            .map(|(c, l)| c * (l * t).exp())
            .collect();
        self.right.matvec(&weighted)
    }

    /// Condition number estimate of the eigenvector basis (∞-norm).
    pub fn basis_condition(&self) -> f64 {
        inf_norm(&self.right) * inf_norm(&self.left)
    }
}

fn inf_norm(m: &ComplexMatrix) -> f64 {
    (0..m.rows())
        .map(|r| (0..m.cols()).map(|c| m[(r, c)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Greedy matching of two multisets of complex numbers; returns the largest
/// pairwise distance, or infinity when the lengths differ.
pub fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (idx, d) = b
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, y)| (i, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("lengths agree");
        used[idx] = true;
        worst = worst.max(d);
    }
    worst
}

/// Distance from `z` to the nearest element of `set`.
pub fn nearest_distance(z: C64, set: &[C64]) -> f64 {
    set.iter().map(|w| (z - w).norm()).fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2(a: f64, b: f64, c: f64, d: f64) -> ComplexMatrix {
        ComplexMatrix::from_rows(&[[re(a), re(b)], [re(c), re(d)]])
    }

    #[test]
    fn matmul_and_identity() {
        let a = m2(1.0, 2.0, 3.0, 4.0);
        let id = ComplexMatrix::identity(2);
        assert!(a.matmul(&id).unwrap().approx_eq(&a, 0.0));
        let sq = &a * &a;
        assert!(sq.approx_eq(&m2(7.0, 10.0, 15.0, 22.0), 1e-14));
    }

    #[test]
    fn matmul_rejects_bad_shapes() {
        let a = ComplexMatrix::zeros(2, 3);
        assert!(matches!(a.matmul(&a), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn kron_identity_and_trace() {
        let i6 = ComplexMatrix::identity(2).kron(&ComplexMatrix::identity(3));
        assert!(i6.approx_eq(&ComplexMatrix::identity(6), 0.0));
        let p = ComplexMatrix::diag(&[ZERO, ONE]).kron(&ComplexMatrix::identity(2));
        assert!((p.trace() - re(2.0)).norm() < 1e-15);
    }

    #[test]
    fn eigenvalues_of_rotation() {
        let m = m2(0.0, -1.0, 1.0, 0.0);
        let ev = m.eigenvalues().unwrap();
        assert!(multiset_distance(&ev, &[I, -I]) < 1e-12);
    }

    #[test]
    fn eigen_is_biorthogonal() {
        let m = ComplexMatrix::from_rows(&[
            [re(1.0), C64::new(0.5, 0.2), re(0.0)],
            [re(0.3), C64::new(-2.0, 1.0), re(1.0)],
            [C64::new(0.0, 0.7), re(0.1), re(0.4)],
        ]);
        let sd = m.eigen().unwrap();
        let prod = sd.left.matmul(&sd.right).unwrap();
        assert!(prod.approx_eq(&ComplexMatrix::identity(3), 1e-12));
        for (k, &l) in sd.values.iter().enumerate() {
            let v: Vec<C64> = (0..3).map(|r| sd.right[(r, k)]).collect();
            let mv = m.matvec(&v).unwrap();
            for r in 0..3 {
                assert!((mv[r] - l * v[r]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn expm_matches_eigen_propagation() {
        let m = ComplexMatrix::from_rows(&[[re(-1.0), C64::new(0.0, 2.0)], [C64::new(0.0, 2.0), re(-3.0)]]);
        let e = m.scale(re(0.7)).expm().unwrap();
        let sd = m.eigen().unwrap();
        let x = [ONE, ZERO];
        let via_eigen = sd.propagate(&x, 0.7).unwrap();
        assert!((e[(0, 0)] - via_eigen[0]).norm() < 1e-12);
        assert!((e[(1, 0)] - via_eigen[1]).norm() < 1e-12);
    }

    #[test]
    fn null_space_of_projector() {
        let p = ComplexMatrix::diag(&[ONE, ZERO, ONE]);
        let ns = p.null_space(1e-12).unwrap();
        assert_eq!(ns.len(), 1);
        assert!((ns[0][1].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn multiset_distance_detects_mismatch() {
        assert_eq!(multiset_distance(&[ONE], &[ONE, ONE]), f64::INFINITY);
        assert!(multiset_distance(&[ONE, I], &[I, ONE]) < 1e-15);
        assert!(multiset_distance(&[ONE, ONE], &[ONE, I]) > 1.0);
    }
}
