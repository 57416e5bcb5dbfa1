//! Jaynes-Cummings Hamiltonian, Lindblad dissipators and the two
//! Liouvillians (cavity dephasing, cavity photon loss).
//!
//! Units have ħ = 1. Rates and frequencies are usually quoted in units of
//! the coupling `g`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    annihilation_op, lift_cavity, lift_qubit, number_op, qubit_ops, unvectorize, vectorize,
    HilbertDims,
};
use crate::linalg::{re, ComplexMatrix, I};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Cavity photon-number dephasing, Lindblad operator `a†a`.
    Dephasing,
    /// Cavity photon loss, Lindblad operator `a`.
    Loss,
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scenario::Dephasing => f.write_str("dephasing"),
            Scenario::Loss => f.write_str("loss"),
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dephasing" => Ok(Scenario::Dephasing),
            "loss" => Ok(Scenario::Loss),
            other => Err(Error::Config(format!(
                "unknown scenario '{other}' (expected dephasing or loss)"
            ))),
        }
    }
}

/// Physical parameters plus the Fock truncation.
///
/// `gamma` is the dephasing rate and `kappa` the photon-loss rate; only the
/// one matching the chosen [`Scenario`] enters a given Liouvillian.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub g: f64,
    pub delta: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub dims: HilbertDims,
}

impl ModelParams {
    pub fn new(g: f64, delta: f64, gamma: f64, kappa: f64, fock_dim: usize) -> Result<Self> {
        let p = Self {
            g,
            delta,
            gamma,
            kappa,
            dims: HilbertDims::new(fock_dim)?,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn dephasing(g: f64, delta: f64, gamma: f64, fock_dim: usize) -> Result<Self> {
        Self::new(g, delta, gamma, 0.0, fock_dim)
    }

    pub fn loss(g: f64, delta: f64, kappa: f64, fock_dim: usize) -> Result<Self> {
        Self::new(g, delta, 0.0, kappa, fock_dim)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("g", self.g), ("gamma", self.gamma), ("kappa", self.kappa)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        if !self.delta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "delta must be finite, got {}",
                self.delta
            )));
        }
        Ok(())
    }

    pub fn with_fock_dim(mut self, fock_dim: usize) -> Result<Self> {
        self.dims = HilbertDims::new(fock_dim)?;
        Ok(self)
    }
}

/// `H = δ σ+σ- ⊗ I + g (σ+ ⊗ a + σ- ⊗ a†)` on the joint space.
pub fn hamiltonian(p: &ModelParams) -> ComplexMatrix {
    let dims = &p.dims;
    let (sp, sm) = qubit_ops();
    let a = annihilation_op(dims);
    let ad = a.adjoint();
    let detuning = lift_qubit(dims, &(&sp * &sm))
        .expect("qubit operator is 2x2")
        .scale(re(p.delta));
    let coupling = &sp.kron(&a) + &sm.kron(&ad);
    &detuning + &coupling.scale(re(p.g))
}

/// Superoperator of `ρ ↦ AρA† − ½(A†Aρ + ρA†A)` under column stacking.
pub fn dissipator_superop(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "Lindblad operator must be square, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let d = a.rows();
    let id = ComplexMatrix::identity(d);
    let ada = &a.adjoint() * a;
    let jump = a.conj().kron(a);
    let anti = &id.kron(&ada) + &ada.transpose().kron(&id);
    Ok(&jump - &anti.scale(re(0.5)))
}

/// Superoperator of `ρ ↦ -i[H, ρ]`.
pub fn commutator_superop(h: &ComplexMatrix) -> ComplexMatrix {
    let id = ComplexMatrix::identity(h.rows());
    (&id.kron(h) - &h.transpose().kron(&id)).scale(-I)
}

/// Lindblad operator of the scenario, lifted to the joint space as `I₂ ⊗ A`.
pub fn lindblad_operator(p: &ModelParams, s: Scenario) -> ComplexMatrix {
    let cav = match s {
        Scenario::Dephasing => number_op(&p.dims),
        Scenario::Loss => annihilation_op(&p.dims),
    };
    lift_cavity(&p.dims, &cav).expect("cavity operator matches dims")
}

/// Prefactor of `D[A]` in the Liouvillian.
///
/// For dephasing, `γ` is the decay rate of the coherences between the two
/// states of an excitation sector (`|g,n⟩⟨e,n-1|`, photon numbers differing
/// by one), which makes the prefactor `2γ`. For loss it is `κ`, so the
/// effective non-Hermitian Hamiltonian is `H - iκa†a/2`.
pub fn dissipation_rate(p: &ModelParams, s: Scenario) -> f64 {
    match s {
        Scenario::Dephasing => 2.0 * p.gamma,
        Scenario::Loss => p.kappa,
    }
}

/// Full Liouvillian acting on column-stacked density matrices.
pub fn liouvillian(p: &ModelParams, s: Scenario) -> ComplexMatrix {
    let unitary = commutator_superop(&hamiltonian(p));
    let rate = dissipation_rate(p, s);
    if rate == 0.0 {
        return unitary;
    }
    let diss = dissipator_superop(&lindblad_operator(p, s)).expect("operator is square");
    &unitary + &diss.scale(re(rate))
}

/// Applies a superoperator to a square matrix.
pub fn apply_superop(sup: &ComplexMatrix, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    unvectorize(&sup.matvec(&vectorize(rho))?)
}
