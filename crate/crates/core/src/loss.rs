//! Exact solution of the cavity photon-loss scenario.
//!
//! The loss Liouvillian is generated by the non-Hermitian Hamiltonian
//! `K = H - iκa†a/2`, which splits into 2×2 blocks in the basis
//! `|n,1⟩ = |g,n⟩`, `|n,2⟩ = |e,n-1⟩` (plus the 1×1 vacuum block).
//! Liouvillian eigenvalues are `λ = -i(ε_j⁽ⁿ⁾ - ε_k⁽ᵐ⁾*)`.
//!
//! Blocks are diagonalized by a complex rotation `R` with `RᵀR = I`, so
//! right eigenvectors are the columns of `R` and left eigenvectors are the
//! same columns used without conjugation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{number_op, lift_cavity, DensityMatrix, HilbertDims, EXCITED, GROUND};
use crate::linalg::{re, ComplexMatrix, C64, I, ONE, ZERO};
use crate::model::{hamiltonian, ModelParams};
use crate::series::{check_grid, TimeSeries};

/// Relative distance `|1 + χ_n|` below which a block is treated as sitting
/// on its exceptional point.
pub const EXCEPTIONAL_POINT_GUARD: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct KBlock {
    pub n: usize,
    /// 2×2 for `n ≥ 1`, the 1×1 zero matrix for `n = 0`.
    pub matrix: ComplexMatrix,
    /// `χ_n = 16g²n/(2δ+iκ)²`; `None` when `2δ + iκ = 0`.
    pub chi: Option<C64>,
    pub eps1: C64,
    /// Absent for the vacuum block.
    pub eps2: Option<C64>,
}

impl KBlock {
    /// `max(|ε₁+ε₂ - Tr K|, |ε₁ε₂ - det K|)` for `n ≥ 1`, `|ε₁|` for `n = 0`.
    pub fn vieta_residual(&self) -> f64 {
        match self.eps2 {
            None => self.eps1.norm(),
            Some(eps2) => {
                let m = &self.matrix;
                let tr = m[(0, 0)] + m[(1, 1)];
                let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
                (self.eps1 + eps2 - tr).norm().max((self.eps1 * eps2 - det).norm())
            }
        }
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        std::iter::once(self.eps1).chain(self.eps2).collect()
    }

    /// `|1 + χ_n|`, zero on the exceptional point.
    pub fn exceptional_distance(&self) -> f64 {
        match self.chi {
            Some(chi) if self.n > 0 => (ONE + chi).norm(),
            _ => f64::INFINITY,
        }
    }
}

/// Block `n` of `K` with its eigenvalues
/// `ε_j = (2δ + iκ - 2inκ)/4 + (-1)^j (2δ+iκ)/4 · √(1+χ_n)`,
/// principal square root.
pub fn k_block(p: &ModelParams, n: usize) -> KBlock {
    if n == 0 {
        return KBlock {
            n,
            matrix: ComplexMatrix::zeros(1, 1),
            chi: Some(ZERO),
            eps1: ZERO,
            eps2: None,
        };
    }
    let nf = n as f64;
    let coupling = re(p.g * nf.sqrt());
    let matrix = ComplexMatrix::from_rows(&[
        [C64::new(0.0, -nf * p.kappa / 2.0), coupling],
        [coupling, C64::new(p.delta, -(nf - 1.0) * p.kappa / 2.0)],
    ]);
    let base = C64::new(2.0 * p.delta, p.kappa);
    let center = (base - I * (2.0 * nf * p.kappa)) / 4.0;
    let (chi, half_split) = if base == ZERO {
        // δ = κ = 0: plain Jaynes-Cummings doublet ±g√n.
        (None, re(p.g * nf.sqrt()))
    } else {
        let chi = re(16.0 * p.g * p.g * nf) / (base * base);
        (Some(chi), base / 4.0 * (ONE + chi).sqrt())
    };
    KBlock {
        n,
        matrix,
        chi,
        eps1: center - half_split,
        eps2: Some(center + half_split),
    }
}

/// `K = H - iκ a†a / 2` on the joint space.
pub fn effective_hamiltonian(p: &ModelParams) -> ComplexMatrix {
    let h = hamiltonian(p);
    let n_op = lift_cavity(&p.dims, &number_op(&p.dims)).expect("dims agree");
    &h - &n_op.scale(I * (p.kappa / 2.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiouvillianEigenvalue {
    pub n: usize,
    pub m: usize,
    pub j: usize,
    pub k: usize,
    pub value: C64,
}

/// All `λ_{j,k}^{(n,m)} = -i(ε_j⁽ⁿ⁾ - ε_k⁽ᵐ⁾*)` for `0 ≤ n, m ≤ n_max`.
pub fn liouvillian_spectrum_loss(p: &ModelParams, n_max: usize) -> Result<Vec<LiouvillianEigenvalue>> {
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    let blocks: Vec<KBlock> = (0..=n_max).map(|n| k_block(p, n)).collect();
    let mut out = Vec::new();
    for bn in &blocks {
        for bm in &blocks {
            for (j, ej) in bn.eigenvalues().into_iter().enumerate() {
                for (k, ek) in bm.eigenvalues().into_iter().enumerate() {
                    out.push(LiouvillianEigenvalue {
                        n: bn.n,
                        m: bm.n,
                        j: j + 1,
                        k: k + 1,
                        value: -I * (ej - ek.conj()),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Right and left eigenvectors of block `n` of `K`.
///
/// Coordinates are in the block basis `(|n,1⟩, |n,2⟩)`; `right[j]` is the
/// `j`-th column of `R`, and the left vector `⟨q_j|` has the same
/// components (no conjugation), so `⟨q_i|r_j⟩ = (RᵀR)_{ij} = δ_ij`.
#[derive(Clone, Debug)]
pub struct BiorthogonalPair {
    pub n: usize,
    pub values: [C64; 2],
    /// Complex mixing angle of `R = [[cos θ, -sin θ], [sin θ, cos θ]]`.
    pub theta: C64,
    pub rotation: ComplexMatrix,
    pub right: [[C64; 2]; 2],
    pub left: [[C64; 2]; 2],
}

impl BiorthogonalPair {
    /// Embeds block coordinates into the joint space of `dims`.
    pub fn embed(&self, dims: &HilbertDims, coords: &[C64; 2]) -> Result<Vec<C64>> {
        if self.n > dims.max_photons() {
            return Err(Error::DimensionMismatch(format!(
                "sector n = {} needs fock_dim > {}",
                self.n, self.n
            )));
        }
        let mut v = vec![ZERO; dims.total_dim()];
        v[dims.index(GROUND, self.n)] = coords[0];
        v[dims.index(EXCITED, self.n - 1)] = coords[1];
        Ok(v)
    }

    /// `⟨q_i|r_j⟩` as a 2×2 matrix.
    pub fn overlaps(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(2, 2, |i, j| {
            self.left[i][0] * self.right[j][0] + self.left[i][1] * self.right[j][1]
        })
    }
}

/// Biorthogonal eigensystem of block `n ≥ 1`, with
/// `θ_n = arctan[(2ε₁ + inκ) / (2g√n)]`.
///
/// Fails with [`Error::ExceptionalPoint`] when the eigenvector of `ε₁` is
/// self-orthogonal (`χ_n = -1`), where the block is a Jordan block.
pub fn eigvec_pair(p: &ModelParams, n: usize) -> Result<BiorthogonalPair> {
    if n == 0 {
        return Err(Error::InvalidParameter("the vacuum block has no 2x2 eigensystem".into()));
    }
    let block = k_block(p, n);
    let eps1 = block.eps1;
    let eps2 = block.eps2.expect("n >= 1");
    let nf = n as f64;
    let coupling = p.g * nf.sqrt();
    let theta = if coupling == 0.0 {
        ZERO
    } else {
        let tan = (2.0 * eps1 + I * (nf * p.kappa)) / (2.0 * coupling);
        // Unnormalized eigenvector (1, tan θ); its bilinear norm 1 + tan²θ
        // vanishes at the exceptional point.
        let bilinear = ONE + tan * tan;
        if bilinear.norm() < 1e-8 * (1.0 + tan.norm_sqr()) {
            let chi = block.chi.unwrap_or(ZERO);
            return Err(Error::ExceptionalPoint {
                n,
                chi_re: chi.re,
                chi_im: chi.im,
            });
        }
        tan.atan()
    };
    let (c, s) = (theta.cos(), theta.sin());
    let rotation = ComplexMatrix::from_rows(&[[c, -s], [s, c]]);
    let right = [[c, s], [-s, c]];
    Ok(BiorthogonalPair {
        n,
        values: [eps1, eps2],
        theta,
        rotation,
        right,
        left: right,
    })
}

/// Initial state `(c_g|g⟩ + c_e|e⟩) ⊗ |0⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleExcitationState {
    c_g: C64,
    c_e: C64,
}

impl SingleExcitationState {
    pub fn new(c_g: C64, c_e: C64) -> Result<Self> {
        let norm = c_g.norm_sqr() + c_e.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "|c_g|^2 + |c_e|^2 = {norm}, expected 1"
            )));
        }
        Ok(Self { c_g, c_e })
    }

    pub fn excited() -> Self {
        Self { c_g: ZERO, c_e: ONE }
    }

    pub fn ground() -> Self {
        Self { c_g: ONE, c_e: ZERO }
    }

    pub fn c_g(&self) -> C64 {
        self.c_g
    }

    pub fn c_e(&self) -> C64 {
        self.c_e
    }

    /// Joint-space ket.
    pub fn ket(&self, dims: &HilbertDims) -> Vec<C64> {
        let mut v = vec![ZERO; dims.total_dim()];
        v[dims.index(GROUND, 0)] = self.c_g;
        v[dims.index(EXCITED, 0)] = self.c_e;
        v
    }

    pub fn density_matrix(&self, dims: &HilbertDims) -> DensityMatrix {
        DensityMatrix::pure(&self.ket(dims)).expect("normalized on construction")
    }
}

/// `f(t) = [4g² e^{-iε₂t} + (iκ + 2ε₁)² e^{-iε₁t}] / [4g² + (iκ + 2ε₁)²]`
/// for the one-excitation block. Singular at the exceptional point.
pub fn amplitude_rational(p: &ModelParams, t: f64) -> C64 {
    let b = k_block(p, 1);
    let (e1, e2) = (b.eps1, b.eps2.expect("n = 1"));
    if p.g == 0.0 {
        return (-I * e2 * t).exp();
    }
    let four_g2 = re(4.0 * p.g * p.g);
    let w = (I * p.kappa + 2.0 * e1).powi(2);
    (four_g2 * (-I * e2 * t).exp() + w * (-I * e1 * t).exp()) / (four_g2 + w)
}

/// `f(t) = Σ_j (R_{2,j})² e^{-iε_j t}`, the `⟨e,0|e^{-iKt}|e,0⟩` element
/// of the one-excitation block reconstructed from its eigenvectors.
pub fn amplitude_eigvec(p: &ModelParams, t: f64) -> Result<C64> {
    let pair = eigvec_pair(p, 1)?;
    Ok((0..2)
        .map(|j| {
            let r2j = pair.rotation[(1, j)];
            r2j * r2j * (-I * pair.values[j] * t).exp()
        })
        .sum())
}

/// `Σ_j R_{2,j} e^{-iε_j t}` with the first power of `R`; gives
/// `f(0) = cos θ + sin θ ≠ 1` in general and is kept only to show that
/// the squared form is the correct one.
pub fn amplitude_eigvec_first_power(p: &ModelParams, t: f64) -> Result<C64> {
    let pair = eigvec_pair(p, 1)?;
    Ok((0..2)
        .map(|j| pair.rotation[(1, j)] * (-I * pair.values[j] * t).exp())
        .sum())
}

/// `⟨e,0|e^{-iKt}|e,0⟩` from `e^{-iε̄t}[cos Ωt - i(K₂₂ - ε̄) sin(Ωt)/Ω]`,
/// `Ω² = ((K₁₁-K₂₂)/2)² + g²`. Regular through the exceptional point,
/// where it becomes `e^{-iε̄t}[1 - i(K₂₂ - ε̄)t]`.
pub fn amplitude_confluent(p: &ModelParams, t: f64) -> C64 {
    let b = k_block(p, 1);
    let m = &b.matrix;
    let mean = (m[(0, 0)] + m[(1, 1)]) / 2.0;
    let half_gap = (m[(0, 0)] - m[(1, 1)]) / 2.0;
    let omega = (half_gap * half_gap + re(p.g * p.g)).sqrt();
    let x = omega * t;
    let sinc_t = if x.norm() < 1e-4 {
        re(t) * (ONE - x * x / 6.0)
    } else {
        x.sin() / omega
    };
    (-I * mean * t).exp() * (x.cos() - I * (m[(1, 1)] - mean) * sinc_t)
}

/// Whether block 1 lies within [`EXCEPTIONAL_POINT_GUARD`] of `χ₁ = -1`.
pub fn near_exceptional_point(p: &ModelParams) -> bool {
    k_block(p, 1).exceptional_distance() < EXCEPTIONAL_POINT_GUARD
}

/// The excited-state amplitude `f(t)`.
///
/// Uses the rational form away from the exceptional point and the
/// confluent form inside the guard band.
pub fn amplitude(p: &ModelParams, t: f64) -> Result<C64> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    if near_exceptional_point(p) {
        Ok(amplitude_confluent(p, t))
    } else {
        Ok(amplitude_rational(p, t))
    }
}

/// Reduced atomic state at time `t`:
///
/// `(1 - |c_e f|²)|g⟩⟨g| + |c_e f|²|e⟩⟨e| + c_e c_g* f |e⟩⟨g| + h.c.`
pub fn evolve_single_excitation(
    p: &ModelParams,
    psi0: &SingleExcitationState,
    t: f64,
) -> Result<DensityMatrix> {
    let f = amplitude(p, t)?;
    Ok(DensityMatrix::new_unchecked(atomic_state(psi0, f)))
}

fn atomic_state(psi0: &SingleExcitationState, f: C64) -> ComplexMatrix {
    let pe = (psi0.c_e * f).norm_sqr();
    let coh = psi0.c_e * psi0.c_g.conj() * f;
    let mut m = ComplexMatrix::zeros(2, 2);
    m[(GROUND, GROUND)] = re(1.0 - pe);
    m[(EXCITED, EXCITED)] = re(pe);
    m[(EXCITED, GROUND)] = coh;
    m[(GROUND, EXCITED)] = coh.conj();
    m
}

/// `p_e = |c_e f|²`.
pub fn excited_population(psi0: &SingleExcitationState, f: C64) -> f64 {
    (psi0.c_e * f).norm_sqr()
}

/// `P = 1 + 2|c_e|⁴|f|²(|f|² - 1)`.
pub fn purity(psi0: &SingleExcitationState, f: C64) -> f64 {
    let ce4 = psi0.c_e.norm_sqr().powi(2);
    let f2 = f.norm_sqr();
    1.0 + 2.0 * ce4 * f2 * (f2 - 1.0)
}

/// Columns `p_e`, `purity`, `re_f`, `im_f`, `abs_f2`.
pub fn atom_observables_loss(
    p: &ModelParams,
    psi0: &SingleExcitationState,
    t_grid: &[f64],
) -> Result<TimeSeries> {
    check_grid(t_grid)?;
    if near_exceptional_point(p) {
        log::warn!(
            "g = {}, delta = {}, kappa = {} is within {EXCEPTIONAL_POINT_GUARD:e} of the exceptional point; using the confluent form",
            p.g,
            p.delta,
            p.kappa
        );
    }
    let fs = t_grid
        .iter()
        .map(|&t| amplitude(p, t))
        .collect::<Result<Vec<_>>>()?;
    let mut ts = TimeSeries::new(t_grid.to_vec());
    ts.push_column("p_e", fs.iter().map(|&f| excited_population(psi0, f)).collect())?;
    ts.push_column("purity", fs.iter().map(|&f| purity(psi0, f)).collect())?;
    ts.push_column("re_f", fs.iter().map(|f| f.re).collect())?;
    ts.push_column("im_f", fs.iter().map(|f| f.im).collect())?;
    ts.push_column("abs_f2", fs.iter().map(|f| f.norm_sqr()).collect())?;
    Ok(ts)
}
