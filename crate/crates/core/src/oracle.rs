//! Brute-force reference solver on the truncated Fock space.
//!
//! The master equation is integrated in vectorized form, `ρ̇ = L vec(ρ)`,
//! with an adaptive Dormand-Prince 5(4) scheme and a dense
//! superoperator-vector product per stage. Spectra and steady states come
//! from dense decompositions of `L`.

use crate::error::{Error, Result};
use crate::hilbert::{
    purity, trace_out_cavity, unvectorize, vectorize, DensityMatrix, HilbertDims, EXCITED, GROUND,
};
use crate::linalg::{re, ComplexMatrix, C64, ZERO};
use crate::model::{liouvillian, ModelParams, Scenario};
use crate::series::{check_grid, TimeSeries};

/// Largest superoperator dimension accepted by the dense routines.
pub const MAX_SUPEROP_DIM: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-11,
            max_step: f64::INFINITY,
            max_steps: 5_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.max_step > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "integrator tolerances and max_step must be positive: {self:?}"
            )));
        }
        Ok(())
    }

    /// Same configuration with both tolerances scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            rel_tol: self.rel_tol * factor,
            abs_tol: self.abs_tol * factor,
            ..*self
        }
    }
}

/// States at the requested times plus integration diagnostics.
#[derive(Clone, Debug)]
pub struct MasterSolution {
    pub states: Vec<DensityMatrix>,
    /// Largest `|Tr ρ - 1|` seen at an output time.
    pub max_trace_drift: f64,
    /// Largest `max|ρ - ρ†|` seen at an output time, before symmetrization.
    pub max_herm_drift: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

// Dormand-Prince 5(4) tableau. The system is autonomous, so the nodes c_i
// never enter.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Differences between the 5th and embedded 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `ẏ = L y` from `t = 0`, reporting `y` at each entry of the
/// non-decreasing grid `ts`.
struct Dopri5<'a> {
    l: &'a ComplexMatrix,
    cfg: IntegratorConfig,
    k: [Vec<C64>; 7],
    tmp: Vec<C64>,
    y_new: Vec<C64>,
    accepted: usize,
    rejected: usize,
}

impl<'a> Dopri5<'a> {
    fn new(l: &'a ComplexMatrix, cfg: IntegratorConfig) -> Self {
        let n = l.rows();
        Self {
            l,
            cfg,
            k: std::array::from_fn(|_| vec![ZERO; n]),
            tmp: vec![ZERO; n],
            y_new: vec![ZERO; n],
            accepted: 0,
            rejected: 0,
        }
    }

    fn combine(y: &[C64], h: f64, terms: &[(f64, &[C64])], out: &mut [C64]) {
        out.copy_from_slice(y);
        for &(a, k) in terms {
            let s = h * a;
            for (o, &kv) in out.iter_mut().zip(k) {
                *o += kv * s;
            }
        }
    }

    fn norm(&self, v: &[C64]) -> f64 {
        (v.iter().map(|z| z.norm_sqr()).sum::<f64>() / v.len().max(1) as f64).sqrt()
    }

    fn initial_step(&mut self, y: &[C64]) -> f64 {
        self.l.matvec_into(y, &mut self.k[0]);
        let d0 = self.norm(y);
        let d1 = self.norm(&self.k[0]);
        let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h.min(self.cfg.max_step)
    }

    /// Advances `y` from `t` to `t_end`; `h` carries the proposed step
    /// between calls. `k[0]` must hold `L y` on entry (FSAL).
    fn advance(&mut self, y: &mut Vec<C64>, t: &mut f64, t_end: f64, h: &mut f64) -> Result<()> {
        while *t < t_end {
            if self.accepted + self.rejected >= self.cfg.max_steps {
                return Err(Error::IntegrationFailure { t: *t, step: *h });
            }
            let remaining = t_end - *t;
            let last = *h >= remaining;
            let step = if last { remaining } else { *h };
            if step < 1e-14 * t.abs().max(1.0) && !last {
                return Err(Error::IntegrationFailure { t: *t, step });
            }

            let err = self.trial_step(y, step);
            if err <= 1.0 {
                *t = if last { t_end } else { *t + step };
                std::mem::swap(y, &mut self.y_new);
                // FSAL: the last stage is L y_new.
                let k7 = std::mem::take(&mut self.k[6]);
                self.k[6] = std::mem::replace(&mut self.k[0], k7);
                self.accepted += 1;
                // A step clipped to hit an output time keeps the previous
                // proposal.
                if !last {
                    let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                    *h = (step * factor).min(self.cfg.max_step);
                }
            } else {
                self.rejected += 1;
                *h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            }
        }
        Ok(())
    }

    /// One DOPRI5 step of size `h` into `y_new`; returns the scaled error.
    fn trial_step(&mut self, y: &[C64], h: f64) -> f64 {
        let l = self.l;
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        let tmp = &mut self.tmp;
        Self::combine(y, h, &[(A21, k1)], tmp);
        l.matvec_into(tmp, k2);
        Self::combine(y, h, &[(A31, k1), (A32, k2)], tmp);
        l.matvec_into(tmp, k3);
        Self::combine(y, h, &[(A41, k1), (A42, k2), (A43, k3)], tmp);
        l.matvec_into(tmp, k4);
        Self::combine(y, h, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)], tmp);
        l.matvec_into(tmp, k5);
        Self::combine(y, h, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)], tmp);
        l.matvec_into(tmp, k6);
        Self::combine(
            y,
            h,
            &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)],
            &mut self.y_new,
        );
        l.matvec_into(&self.y_new, k7);

        let mut acc = 0.0;
        for i in 0..y.len() {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = self.cfg.abs_tol + self.cfg.rel_tol * y[i].norm().max(self.y_new[i].norm());
            acc += (e.norm() / sc).powi(2);
        }
        (acc / y.len() as f64).sqrt()
    }
}

/// Integrates `ρ̇ = L ρ` from `ρ(0) = rho0` and returns `ρ(t)` on `t_grid`.
///
/// Each output state is symmetrized, `ρ ← (ρ + ρ†)/2`, and integration
/// continues from the symmetrized state. The pre-symmetrization drift is
/// reported in [`MasterSolution::max_herm_drift`].
pub fn integrate_master(
    l: &ComplexMatrix,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    cfg: &IntegratorConfig,
) -> Result<MasterSolution> {
    cfg.validate()?;
    check_grid(t_grid)?;
    guard(l)?;
    let d = rho0.dim();
    if !l.is_square() || l.rows() != d * d {
        return Err(Error::DimensionMismatch(format!(
            "superoperator is {}x{}, state dimension is {d}",
            l.rows(),
            l.cols()
        )));
    }
    if t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("time grid must be non-decreasing".into()));
    }

    let mut solver = Dopri5::new(l, *cfg);
    let mut y = rho0.vectorize();
    let mut t = 0.0;
    let mut h = solver.initial_step(&y);
    let mut states = Vec::with_capacity(t_grid.len());
    let mut max_trace_drift: f64 = 0.0;
    let mut max_herm_drift: f64 = 0.0;

    for &t_out in t_grid {
        solver.advance(&mut y, &mut t, t_out, &mut h)?;
        let m = unvectorize(&y)?;
        let herm = m.hermiticity_error();
        let sym = m.hermitian_part();
        let drift = (sym.trace() - re(1.0)).norm();
        if herm > 1e-12 || drift > cfg.abs_tol {
            log::debug!("t = {t_out}: hermiticity drift {herm:e}, trace drift {drift:e}");
        }
        max_herm_drift = max_herm_drift.max(herm);
        max_trace_drift = max_trace_drift.max(drift);
        y = vectorize(&sym);
        l.matvec_into(&y, &mut solver.k[0]);
        states.push(DensityMatrix::new_unchecked(sym));
    }

    Ok(MasterSolution {
        states,
        max_trace_drift,
        max_herm_drift,
        accepted_steps: solver.accepted,
        rejected_steps: solver.rejected,
    })
}

/// `ρ(t) = exp(L t) ρ₀` through a dense matrix exponential. Only sensible
/// for small superoperators; used as a cross-check of the integrator.
pub fn propagate_expm(l: &ComplexMatrix, rho0: &DensityMatrix, t: f64) -> Result<ComplexMatrix> {
    guard(l)?;
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let e = l.scale(re(t)).expm()?;
    unvectorize(&e.matvec(&rho0.vectorize())?)
}

/// Population left in the two highest Fock levels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationReport {
    pub fock_dim: usize,
    pub leakage: f64,
}

impl TruncationReport {
    pub const DEFAULT_THRESHOLD: f64 = 1e-10;

    pub fn from_states(states: &[DensityMatrix], dims: &HilbertDims) -> Self {
        let top = dims.max_photons();
        let levels = [top - 1, top];
        let leakage = states
            .iter()
            .map(|rho| {
                levels
                    .iter()
                    .flat_map(|&n| [dims.index(GROUND, n), dims.index(EXCITED, n)])
                    .map(|k| rho.population(k).abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        Self {
            fock_dim: dims.fock_dim(),
            leakage,
        }
    }

    pub fn certifies(&self, threshold: f64) -> bool {
        self.leakage < threshold
    }
}

fn guard(l: &ComplexMatrix) -> Result<()> {
    if !l.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "superoperator must be square, got {}x{}",
            l.rows(),
            l.cols()
        )));
    }
    check_superop_dim(l.rows())
}

/// Rejects dense superoperators above [`MAX_SUPEROP_DIM`].
pub fn check_superop_dim(dim: usize) -> Result<()> {
    if dim > MAX_SUPEROP_DIM {
        return Err(Error::DimensionGuard {
            dim,
            max: MAX_SUPEROP_DIM,
        });
    }
    Ok(())
}

/// Full eigenvalue list of a superoperator.
pub fn superop_spectrum(l: &ComplexMatrix) -> Result<Vec<C64>> {
    guard(l)?;
    l.eigenvalues()
}

#[derive(Clone, Debug)]
pub enum SteadyState {
    Unique(DensityMatrix),
    /// Orthonormal (in the Hilbert-Schmidt sense) basis of the null space,
    /// as matrices.
    Degenerate(Vec<ComplexMatrix>),
}

const NULL_TOL: f64 = 1e-10;

/// Null space of `L`, as a unit-trace state when it is one-dimensional.
pub fn steady_state(l: &ComplexMatrix) -> Result<SteadyState> {
    guard(l)?;
    let basis = l.null_space(NULL_TOL)?;
    match basis.len() {
        0 => Err(Error::Decomposition("superoperator has no null vector".into())),
        1 => Ok(SteadyState::Unique(normalize_state(&basis[0])?)),
        _ => Ok(SteadyState::Degenerate(
            basis.iter().map(|v| unvectorize(v)).collect::<Result<_>>()?,
        )),
    }
}

fn normalize_state(v: &[C64]) -> Result<DensityMatrix> {
    let m = unvectorize(v)?;
    let tr = m.trace();
    if tr.norm() < 1e-12 {
        return Err(Error::Decomposition("null vector is traceless".into()));
    }
    DensityMatrix::new(m.scale(re(1.0) / tr).hermitian_part())
}

/// Steady state inside the block of operators `|a⟩⟨b|` with both `a` and
/// `b` carrying `n` excitations. The block must be invariant under `L`
/// (true for dephasing); its null space is then expected to be unique.
pub fn steady_state_in_sector(l: &ComplexMatrix, dims: &HilbertDims, n: usize) -> Result<DensityMatrix> {
    guard(l)?;
    let d = dims.total_dim();
    if l.rows() != d * d {
        return Err(Error::DimensionMismatch(format!(
            "superoperator is {}x{}, joint dimension is {d}",
            l.rows(),
            l.cols()
        )));
    }
    let states: Vec<usize> = (0..d).filter(|&k| dims.excitations(k) == n).collect();
    if states.is_empty() {
        return Err(Error::InvalidParameter(format!("no basis states with {n} excitations")));
    }
    let idx: Vec<usize> = states
        .iter()
        .flat_map(|&c| states.iter().map(move |&r| c * d + r))
        .collect();
    let block = l.submatrix(&idx, &idx);
    let basis = block.null_space(NULL_TOL)?;
    if basis.len() != 1 {
        return Err(Error::Decomposition(format!(
            "sector {n} has a {}-dimensional null space",
            basis.len()
        )));
    }
    let mut full = vec![ZERO; d * d];
    for (pos, &k) in idx.iter().enumerate() {
        full[k] = basis[0][pos];
    }
    normalize_state(&full)
}

/// Oracle trajectory of the atomic observables.
#[derive(Clone, Debug)]
pub struct OracleRun {
    /// Columns `p_e`, `purity`, `re_coh`, `im_coh` (the `⟨e|ρ_at|g⟩`
    /// coherence).
    pub series: TimeSeries,
    pub solution: MasterSolution,
    pub truncation: TruncationReport,
}

/// Integrates the full master equation of `scenario` and reduces to the
/// atom at every grid point.
pub fn atom_observables_oracle(
    p: &ModelParams,
    scenario: Scenario,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    cfg: &IntegratorConfig,
) -> Result<OracleRun> {
    let d = p.dims.total_dim();
    check_superop_dim(d * d)?;
    let l = liouvillian(p, scenario);
    let solution = integrate_master(&l, rho0, t_grid, cfg)?;
    let mut pe = Vec::with_capacity(t_grid.len());
    let mut pu = Vec::with_capacity(t_grid.len());
    let mut re_coh = Vec::with_capacity(t_grid.len());
    let mut im_coh = Vec::with_capacity(t_grid.len());
    for rho in &solution.states {
        let at = trace_out_cavity(rho.matrix(), &p.dims)?;
        pe.push(at[(EXCITED, EXCITED)].re);
        pu.push(purity(&at));
        re_coh.push(at[(EXCITED, GROUND)].re);
        im_coh.push(at[(EXCITED, GROUND)].im);
    }
    let mut series = TimeSeries::new(t_grid.to_vec());
    series.push_column("p_e", pe)?;
    series.push_column("purity", pu)?;
    series.push_column("re_coh", re_coh)?;
    series.push_column("im_coh", im_coh)?;
    let truncation = TruncationReport::from_states(&solution.states, &p.dims);
    Ok(OracleRun {
        series,
        solution,
        truncation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::Tolerances;
    use crate::linalg::{nearest_distance, I};

    #[test]
    fn zero_generator_keeps_state() {
        let dims = HilbertDims::new(2).unwrap();
        let rho = DensityMatrix::basis(&dims, EXCITED, 0);
        let l = ComplexMatrix::zeros(16, 16);
        let sol = integrate_master(&l, &rho, &[0.0, 1.0, 5.0], &IntegratorConfig::default()).unwrap();
        for s in &sol.states {
            assert!(s.matrix().approx_eq(rho.matrix(), 0.0));
        }
    }

    #[test]
    fn vacuum_rabi_oscillation() {
        let p = ModelParams::new(1.0, 0.0, 0.0, 0.0, 4).unwrap();
        let rho = DensityMatrix::basis(&p.dims, EXCITED, 0);
        let grid: Vec<f64> = (0..41).map(|k| k as f64 * 0.25).collect();
        let run = atom_observables_oracle(&p, Scenario::Loss, &rho, &grid, &IntegratorConfig::default())
            .unwrap();
        for (k, &t) in grid.iter().enumerate() {
            let expect = (p.g * t).cos().powi(2);
            assert!((run.series.column("p_e").unwrap()[k] - expect).abs() < 1e-8, "t={t}");
        }
        // Same answer from the Hamiltonian exponential in the 2-state subspace.
        let h = crate::model::hamiltonian(&p);
        let u = h.scale(-I * 2.0).expm().unwrap();
        let amp = u[(p.dims.index(EXCITED, 0), p.dims.index(EXCITED, 0))];
        assert!((amp.norm_sqr() - 2f64.cos().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn integrator_matches_expm() {
        let p = ModelParams::new(1.0, 0.3, 0.0, 2.0, 3).unwrap();
        let l = liouvillian(&p, Scenario::Loss);
        let rho = DensityMatrix::basis(&p.dims, EXCITED, 1);
        let sol = integrate_master(&l, &rho, &[0.7, 1.9], &IntegratorConfig::default()).unwrap();
        for (state, t) in sol.states.iter().zip([0.7, 1.9]) {
            let exact = propagate_expm(&l, &rho, t).unwrap();
            assert!(state.matrix().approx_eq(&exact, 1e-8));
        }
        assert!(sol.max_trace_drift < 1e-11);
        assert!(sol.max_herm_drift < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let dims = HilbertDims::new(2).unwrap();
        let rho = DensityMatrix::basis(&dims, EXCITED, 0);
        let l = ComplexMatrix::zeros(9, 9);
        assert!(integrate_master(&l, &rho, &[1.0], &IntegratorConfig::default()).is_err());
        let l = ComplexMatrix::zeros(16, 16);
        assert!(integrate_master(&l, &rho, &[1.0, 0.5], &IntegratorConfig::default()).is_err());
        let bad = IntegratorConfig {
            rel_tol: 0.0,
            ..Default::default()
        };
        assert!(integrate_master(&l, &rho, &[1.0], &bad).is_err());
    }

    #[test]
    fn step_budget_exhaustion_is_reported() {
        let p = ModelParams::loss(1.0, 0.0, 1000.0, 3).unwrap();
        let l = liouvillian(&p, Scenario::Loss);
        let rho = DensityMatrix::basis(&p.dims, EXCITED, 0);
        let cfg = IntegratorConfig {
            max_steps: 10,
            ..Default::default()
        };
        assert!(matches!(
            integrate_master(&l, &rho, &[10.0], &cfg),
            Err(Error::IntegrationFailure { .. })
        ));
    }

    #[test]
    fn von_neumann_spectrum() {
        let p = ModelParams::new(0.0, 1.0, 0.0, 0.0, 2).unwrap();
        let eigs = superop_spectrum(&liouvillian(&p, Scenario::Loss)).unwrap();
        for z in eigs {
            assert!(nearest_distance(z, &[ZERO, I, -I]) < 1e-12);
        }
    }

    #[test]
    fn spectrum_guard() {
        let l = ComplexMatrix::zeros(MAX_SUPEROP_DIM + 1, MAX_SUPEROP_DIM + 1);
        assert!(matches!(superop_spectrum(&l), Err(Error::DimensionGuard { .. })));
    }

    #[test]
    fn loss_steady_state_is_ground() {
        let p = ModelParams::loss(1.0, 0.8, 10.0, 4).unwrap();
        let l = liouvillian(&p, Scenario::Loss);
        let eigs = superop_spectrum(&l).unwrap();
        assert!(nearest_distance(ZERO, &eigs) < 1e-10);
        match steady_state(&l).unwrap() {
            SteadyState::Unique(rho) => {
                let g0 = DensityMatrix::basis(&p.dims, GROUND, 0);
                assert!(rho.matrix().approx_eq(g0.matrix(), 1e-8));
            }
            SteadyState::Degenerate(b) => panic!("expected unique, got {}", b.len()),
        }
    }

    #[test]
    fn dephasing_steady_state_per_sector() {
        let p = ModelParams::dephasing(1.0, 0.0, 10.0, 4).unwrap();
        let l = liouvillian(&p, Scenario::Dephasing);
        assert!(matches!(steady_state(&l).unwrap(), SteadyState::Degenerate(_)));
        let rho = steady_state_in_sector(&l, &p.dims, 1).unwrap();
        let at = trace_out_cavity(rho.matrix(), &p.dims).unwrap();
        assert!(at.approx_eq(&ComplexMatrix::diag(&[re(0.5), re(0.5)]), 1e-8));
        assert!(rho.defects().unwrap().within(&Tolerances::default()));
    }

    #[test]
    fn zero_superoperator_is_fully_degenerate() {
        match steady_state(&ComplexMatrix::zeros(4, 4)).unwrap() {
            SteadyState::Degenerate(b) => assert_eq!(b.len(), 4),
            SteadyState::Unique(_) => panic!("expected degenerate null space"),
        }
    }

    #[test]
    fn truncation_report_for_single_excitation() {
        let p = ModelParams::loss(1.0, 0.8, 3.0, 4).unwrap();
        let rho = DensityMatrix::basis(&p.dims, EXCITED, 0);
        let grid: Vec<f64> = (0..20).map(|k| k as f64 * 0.5).collect();
        let run =
            atom_observables_oracle(&p, Scenario::Loss, &rho, &grid, &IntegratorConfig::default()).unwrap();
        assert!(run.truncation.certifies(TruncationReport::DEFAULT_THRESHOLD));
        // A two-photon state does populate the top levels of fock_dim = 3.
        let p3 = p.with_fock_dim(3).unwrap();
        let rho2 = DensityMatrix::basis(&p3.dims, GROUND, 2);
        let report = TruncationReport::from_states(&[rho2], &p3.dims);
        assert!((report.leakage - 1.0).abs() < 1e-15);
    }
}
