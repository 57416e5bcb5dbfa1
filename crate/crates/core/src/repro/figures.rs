//! Figure, spectrum and validation runs.

use rayon::prelude::*;

use crate::dephasing;
use crate::error::{Error, Result};
use crate::linalg::{multiset_distance, nearest_distance, C64};
use crate::loss;
use crate::model::{liouvillian, ModelParams, Scenario};
use crate::oracle::{self, SteadyState};
use crate::series::{uniform_grid, TimeSeries};

use super::config::{Initial, Method, RunConfig};

/// Purity of a single-excitation atom must stay in `[1/2, 1]` up to this slack.
pub const PURITY_SLACK: f64 = 1e-9;

/// Observables for one dissipation ratio.
#[derive(Clone, Debug)]
pub struct RatioRun {
    pub ratio: f64,
    /// Columns prefixed by method, e.g. `p_e_exact`, `purity_oracle`,
    /// and `max_dev` when both methods ran.
    pub series: TimeSeries,
}

/// Column-label suffix for a ratio, e.g. `r10` or `r0.5`.
pub fn ratio_label(ratio: f64) -> String {
    format!("r{ratio}")
}

fn params_for(cfg: &RunConfig, ratio: f64) -> Result<ModelParams> {
    let fock_dim = cfg.fock_dim;
    match cfg.scenario {
        Scenario::Dephasing => ModelParams::dephasing(1.0, cfg.delta_over_g, ratio, fock_dim),
        Scenario::Loss => ModelParams::loss(1.0, cfg.delta_over_g, ratio, fock_dim),
    }
}

fn exact_series(cfg: &RunConfig, p: &ModelParams, grid: &[f64]) -> Result<TimeSeries> {
    match cfg.scenario {
        Scenario::Dephasing => {
            if cfg.initial != Initial::Excited {
                return Err(Error::Config(
                    "the dephasing closed form needs initial = excited".into(),
                ));
            }
            dephasing::atom_observables_dephasing(p, 1, grid)
        }
        Scenario::Loss => loss::atom_observables_loss(p, &cfg.initial.state()?, grid),
    }
}

fn oracle_series(cfg: &RunConfig, p: &ModelParams, grid: &[f64]) -> Result<TimeSeries> {
    let rho0 = cfg.initial.state()?.density_matrix(&p.dims);
    let run = oracle::atom_observables_oracle(p, cfg.scenario, &rho0, grid, &cfg.integrator())?;
    if !run.truncation.certifies(oracle::TruncationReport::DEFAULT_THRESHOLD) {
        log::warn!(
            "fock_dim {} leaks {:e} into the top levels",
            run.truncation.fock_dim,
            run.truncation.leakage
        );
    }
    Ok(run.series)
}

fn check_purity_range(series: &TimeSeries, column: &str) -> Result<()> {
    if let Some(values) = series.column(column) {
        for (&t, &v) in series.t.iter().zip(values) {
            if !(0.5 - PURITY_SLACK..=1.0 + PURITY_SLACK).contains(&v) {
                return Err(Error::Decomposition(format!(
                    "{column} = {v} at t = {t} is outside [1/2, 1]"
                )));
            }
        }
    }
    Ok(())
}

/// Runs one ratio with the configured method(s).
pub fn run_ratio(cfg: &RunConfig, ratio: f64) -> Result<RatioRun> {
    let p = params_for(cfg, ratio)?;
    let grid = uniform_grid(cfg.t_max_over_g, cfg.samples)?;
    let mut series = TimeSeries::new(grid.clone());

    let exact = if cfg.method.exact() {
        let s = exact_series(cfg, &p, &grid)?;
        series.push_column("p_e_exact", s.column("p_e").unwrap_or_default().to_vec())?;
        series.push_column("purity_exact", s.column("purity").unwrap_or_default().to_vec())?;
        let extra: &[&str] = match cfg.scenario {
            Scenario::Dephasing => &["re_h", "im_h", "purity_sector"],
            Scenario::Loss => &["re_f", "im_f", "abs_f2"],
        };
        for name in extra {
            if let Some(col) = s.column(name) {
                series.push_column(format!("{name}_exact"), col.to_vec())?;
            }
        }
        Some(s)
    } else {
        None
    };

    let orc = if cfg.method.oracle() {
        let s = oracle_series(cfg, &p, &grid)?;
        series.push_column("p_e_oracle", s.column("p_e").unwrap_or_default().to_vec())?;
        series.push_column("purity_oracle", s.column("purity").unwrap_or_default().to_vec())?;
        Some(s)
    } else {
        None
    };

    if let (Some(e), Some(o)) = (&exact, &orc) {
        series.push_column("max_dev", max_deviation(e, o)?)?;
    }

    let single_excitation = cfg.scenario == Scenario::Loss || cfg.initial == Initial::Excited;
    if single_excitation {
        check_purity_range(&series, "purity_exact")?;
        check_purity_range(&series, "purity_oracle")?;
    }
    Ok(RatioRun { ratio, series })
}

/// Pointwise `max(|Δp_e|, |ΔP|)` between two runs on the same grid.
pub fn max_deviation(a: &TimeSeries, b: &TimeSeries) -> Result<Vec<f64>> {
    let col = |s: &TimeSeries, n: &str| -> Result<Vec<f64>> {
        s.column(n)
            .map(<[f64]>::to_vec)
            .ok_or_else(|| Error::DimensionMismatch(format!("missing column '{n}'")))
    };
    if a.t != b.t {
        return Err(Error::DimensionMismatch("time grids differ".into()));
    }
    let (pa, pb) = (col(a, "p_e")?, col(b, "p_e")?);
    let (qa, qb) = (col(a, "purity")?, col(b, "purity")?);
    Ok((0..a.len())
        .map(|k| (pa[k] - pb[k]).abs().max((qa[k] - qb[k]).abs()))
        .collect())
}

/// Runs every configured ratio in parallel; results keep the ratio order.
pub fn run_figure(cfg: &RunConfig) -> Result<Vec<RatioRun>> {
    cfg.validate()?;
    cfg.ratios
        .par_iter()
        .map(|&r| run_ratio(cfg, r))
        .collect()
}

/// Cavity dephasing trajectories (`δ = 0` by default).
pub fn run_figure2(cfg: &RunConfig) -> Result<Vec<RatioRun>> {
    expect_scenario(cfg, Scenario::Dephasing)?;
    run_figure(cfg)
}

/// Photon loss trajectories (`δ/g = 0.8` by default).
pub fn run_figure3(cfg: &RunConfig) -> Result<Vec<RatioRun>> {
    expect_scenario(cfg, Scenario::Loss)?;
    run_figure(cfg)
}

fn expect_scenario(cfg: &RunConfig, want: Scenario) -> Result<()> {
    if cfg.scenario != want {
        return Err(Error::Config(format!(
            "this command runs the {want} scenario but the configuration says {}",
            cfg.scenario
        )));
    }
    Ok(())
}

/// Merges per-ratio runs into one table with `_r<ratio>` column suffixes.
pub fn combine(runs: &[RatioRun]) -> Result<TimeSeries> {
    let first = runs
        .first()
        .ok_or_else(|| Error::Config("no ratios to combine".into()))?;
    let mut out = TimeSeries::new(first.series.t.clone());
    for run in runs {
        let label = ratio_label(run.ratio);
        out.absorb(&run.series, |n| format!("{n}_{label}"))?;
    }
    Ok(out)
}

/// Eigenvalue table keyed by ratio.
#[derive(Clone, Debug)]
pub struct SpectrumTable {
    pub ratio: Vec<f64>,
    pub columns: Vec<(String, Vec<f64>)>,
}

impl SpectrumTable {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn as_series(&self) -> Result<TimeSeries> {
        let mut ts = TimeSeries::new(self.ratio.clone());
        for (n, v) in &self.columns {
            ts.push_column(n.clone(), v.clone())?;
        }
        Ok(ts)
    }
}

struct SpectrumRow(Vec<(&'static str, f64)>);

fn dephasing_row(cfg: &RunConfig, ratio: f64) -> Result<SpectrumRow> {
    let p = ModelParams::dephasing(1.0, cfg.delta_over_g, ratio, cfg.fock_dim)?;
    let n = 1;
    let ev = if p.delta == 0.0 {
        dephasing::eigenvalues_resonant(&p, n)?
    } else {
        dephasing::eigenvalues_general(&p, n)?
    };
    let mut nonzero: Vec<C64> = ev.as_array()[1..].to_vec();
    nonzero.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    let asymptote = -4.0 * p.g * p.g * n as f64 / p.gamma;
    let slow = nonzero[0];
    Ok(SpectrumRow(vec![
        ("eta", dephasing::eta(&p, n)),
        ("re_ev1", slow.re),
        ("im_ev1", slow.im),
        ("re_ev2", nonzero[1].re),
        ("im_ev2", nonzero[1].im),
        ("re_ev3", nonzero[2].re),
        ("im_ev3", nonzero[2].im),
        ("slow_asymptote", asymptote),
        ("rel_dev_asymptote", ((slow - asymptote).norm() / asymptote.abs())),
        ("residual_rel", dephasing::spectral_mismatch(&p, n)?),
    ]))
}

fn loss_row(cfg: &RunConfig, ratio: f64) -> Result<SpectrumRow> {
    let p = ModelParams::loss(1.0, cfg.delta_over_g, ratio, cfg.fock_dim)?;
    let block = loss::k_block(&p, 1);
    let (e1, e2) = (block.eps1, block.eps2.unwrap_or(block.eps1));
    let chi = block.chi.unwrap_or_default();
    let numeric_block = block.matrix.eigenvalues()?;
    let block_res = multiset_distance(&[e1, e2], &numeric_block);

    // Every closed-form Liouvillian eigenvalue must appear in the numeric spectrum.
    let n_max = p.dims.max_photons();
    let analytic = loss::liouvillian_spectrum_loss(&p, n_max)?;
    let numeric = oracle::superop_spectrum(&liouvillian(&p, Scenario::Loss))?;
    let scale = numeric.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let contained = analytic
        .iter()
        .map(|ev| nearest_distance(ev.value, &numeric))
        .fold(0.0, f64::max);

    let block_scale = numeric_block.iter().map(|z| z.norm()).fold(1.0, f64::max);
    Ok(SpectrumRow(vec![
        ("re_chi", chi.re),
        ("im_chi", chi.im),
        ("re_eps1", e1.re),
        ("im_eps1", e1.im),
        ("re_eps2", e2.re),
        ("im_eps2", e2.im),
        ("exceptional_distance", block.exceptional_distance()),
        ("residual_rel", (block_res / block_scale).max(contained / scale)),
    ]))
}

/// Closed-form eigenvalues against numeric diagonalization for every ratio.
pub fn run_spectrum_sweep(cfg: &RunConfig) -> Result<SpectrumTable> {
    cfg.validate()?;
    let rows = cfg
        .ratios
        .par_iter()
        .map(|&r| match cfg.scenario {
            Scenario::Dephasing => dephasing_row(cfg, r),
            Scenario::Loss => loss_row(cfg, r),
        })
        .collect::<Result<Vec<_>>>()?;
    let names: Vec<&str> = rows[0].0.iter().map(|(n, _)| *n).collect();
    let columns = names
        .iter()
        .enumerate()
        .map(|(k, n)| (n.to_string(), rows.iter().map(|r| r.0[k].1).collect()))
        .collect();
    Ok(SpectrumTable {
        ratio: cfg.ratios.clone(),
        columns,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            passed: value <= threshold,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Quick self-check of both scenarios: spectra, trajectories and steady states.
///
/// Uses `cfg.ratios`, `cfg.fock_dim` and the integrator tolerances; the time
/// window is `cfg.t_max_over_g` with `cfg.samples` points.
pub fn validate(cfg: &RunConfig) -> Result<ValidationReport> {
    cfg.validate()?;
    let mut report = ValidationReport::default();

    let mut deph = RunConfig::figure2();
    deph.ratios = cfg.ratios.clone();
    deph.fock_dim = cfg.fock_dim;
    let worst = deph
        .ratios
        .iter()
        .flat_map(|&r| [0.0, 0.8].map(|d| (r, d)))
        .map(|(r, d)| {
            let p = ModelParams::dephasing(1.0, d, r, cfg.fock_dim)?;
            dephasing::spectral_mismatch(&p, 1)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    report
        .checks
        .push(Check::at_most("dephasing spectrum (relative)", worst, 1e-9));

    let mut loss_cfg = RunConfig::figure3();
    loss_cfg.ratios = cfg.ratios.clone();
    loss_cfg.fock_dim = cfg.fock_dim;
    let table = run_spectrum_sweep(&loss_cfg)?;
    let worst = table
        .column("residual_rel")
        .unwrap_or_default()
        .iter()
        .copied()
        .fold(0.0, f64::max);
    report
        .checks
        .push(Check::at_most("loss spectrum containment (relative)", worst, 1e-8));

    for (name, mut run_cfg) in [("dephasing", deph), ("loss", loss_cfg)] {
        run_cfg.method = Method::Both;
        run_cfg.t_max_over_g = cfg.t_max_over_g;
        run_cfg.samples = cfg.samples;
        run_cfg.rel_tol = cfg.rel_tol;
        run_cfg.abs_tol = cfg.abs_tol;
        let runs = run_figure(&run_cfg)?;
        let worst = runs
            .iter()
            .flat_map(|r| r.series.column("max_dev").unwrap_or_default().to_vec())
            .fold(0.0, f64::max);
        report.checks.push(Check::at_most(
            format!("{name} closed form vs master equation"),
            worst,
            1e-6,
        ));
    }

    let p = ModelParams::loss(1.0, 0.8, cfg.ratios[0], cfg.fock_dim)?;
    let ss = oracle::steady_state(&liouvillian(&p, Scenario::Loss))?;
    let dev = match ss {
        SteadyState::Unique(rho) => {
            let ground = crate::hilbert::DensityMatrix::basis(&p.dims, crate::hilbert::GROUND, 0);
            rho.matrix().max_abs_diff(ground.matrix())
        }
        SteadyState::Degenerate(_) => f64::INFINITY,
    };
    report
        .checks
        .push(Check::at_most("loss steady state is |g,0>", dev, 1e-6));

    let p = ModelParams::dephasing(1.0, 0.0, cfg.ratios[0], cfg.fock_dim)?;
    let l = liouvillian(&p, Scenario::Dephasing);
    let sector = oracle::steady_state_in_sector(&l, &p.dims, 1)?;
    let mut expected = crate::linalg::ComplexMatrix::zeros(p.dims.total_dim(), p.dims.total_dim());
    expected[(p.dims.index(0, 1), p.dims.index(0, 1))] = C64::new(0.5, 0.0);
    expected[(p.dims.index(1, 0), p.dims.index(1, 0))] = C64::new(0.5, 0.0);
    let dev = sector.matrix().max_abs_diff(&expected);
    report.checks.push(Check::at_most(
        "dephasing one-excitation steady state is maximally mixed",
        dev,
        1e-6,
    ));

    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels() {
        assert_eq!(ratio_label(10.0), "r10");
        assert_eq!(ratio_label(0.5), "r0.5");
    }

    #[test]
    fn scenario_mismatch_is_config_error() {
        let cfg = RunConfig::figure3();
        assert!(matches!(run_figure2(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn combined_columns_are_suffixed() {
        let mut cfg = RunConfig::figure3();
        cfg.ratios = vec![1.0, 10.0];
        cfg.samples = 5;
        let runs = run_figure3(&cfg).unwrap();
        let all = combine(&runs).unwrap();
        assert!(all.column("p_e_exact_r1").is_some());
        assert!(all.column("abs_f2_exact_r10").is_some());
        assert_eq!(all.len(), 5);
    }

    #[test]
    fn both_methods_agree_on_small_run() {
        let mut cfg = RunConfig::figure3();
        cfg.ratios = vec![2.0];
        cfg.samples = 11;
        cfg.t_max_over_g = 3.0;
        cfg.method = Method::Both;
        let run = &run_figure(&cfg).unwrap()[0];
        let worst = run.series.column("max_dev").unwrap().iter().copied().fold(0.0, f64::max);
        assert!(worst < 1e-7, "{worst}");
    }

    #[test]
    fn spectrum_sweep_residuals_small() {
        for scenario in [Scenario::Dephasing, Scenario::Loss] {
            let cfg = RunConfig::defaults(scenario);
            let table = run_spectrum_sweep(&cfg).unwrap();
            for &r in table.column("residual_rel").unwrap() {
                assert!(r < 1e-9, "{scenario}: {r}");
            }
        }
    }
}
