use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qdyn::model::Scenario;
use qdyn::repro::config::{read_config_file, Format, Initial, Method};
use qdyn::repro::{self, Report, RunConfig};
use qdyn::Error;

#[derive(Parser)]
#[command(name = "qdyn", version, about = "Atom-cavity dynamics under dephasing and photon loss")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Atom observables under cavity dephasing (delta = 0 by default)
    Fig2(RunArgs),
    /// Atom observables under photon loss (delta/g = 0.8 by default)
    Fig3(RunArgs),
    /// Closed-form eigenvalues against numeric diagonalization
    Spectrum {
        #[arg(long, default_value = "dephasing")]
        scenario: Scenario,
        #[command(flatten)]
        args: RunArgs,
    },
    /// Run the built-in self-checks
    Validate(RunArgs),
}

#[derive(Args, Default)]
struct RunArgs {
    /// Dissipation ratio gamma/g or kappa/g; repeat or comma-separate
    #[arg(long = "ratio", value_delimiter = ',')]
    ratios: Vec<f64>,
    /// Detuning delta/g
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<f64>,
    /// End of the time window in units of 1/g
    #[arg(long)]
    tmax: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    /// `excited` or re(c_g),im(c_g),re(c_e),im(c_e)
    #[arg(long, allow_hyphen_values = true)]
    initial: Option<Initial>,
    #[arg(long)]
    method: Option<Method>,
    #[arg(long)]
    fock_dim: Option<usize>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    format: Option<Format>,
    /// Output file; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// key = value file, or a previous CSV/JSON output; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(&self, mut cfg: RunConfig) -> Result<RunConfig, Error> {
        if let Some(path) = &self.config {
            let pairs = read_config_file(path)?;
            cfg.apply_pairs(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
        }
        if !self.ratios.is_empty() {
            cfg.ratios = self.ratios.clone();
        }
        if let Some(v) = self.delta {
            cfg.delta_over_g = v;
        }
        if let Some(v) = self.tmax {
            cfg.t_max_over_g = v;
        }
        if let Some(v) = self.samples {
            cfg.samples = v;
        }
        if let Some(v) = self.initial {
            cfg.initial = v;
        }
        if let Some(v) = self.method {
            cfg.method = v;
        }
        if let Some(v) = self.fock_dim {
            cfg.fock_dim = v;
        }
        if let Some(v) = self.rel_tol {
            cfg.rel_tol = v;
        }
        if let Some(v) = self.abs_tol {
            cfg.abs_tol = v;
        }
        if let Some(v) = self.format {
            cfg.format = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn sink(&self) -> Result<Box<dyn Write>, Error> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Fig2(args) => figure(&args, "fig2", RunConfig::figure2(), Scenario::Dephasing),
        Command::Fig3(args) => figure(&args, "fig3", RunConfig::figure3(), Scenario::Loss),
        Command::Spectrum { scenario, args } => {
            let cfg = args.resolve(RunConfig::defaults(scenario))?;
            let table = repro::run_spectrum_sweep(&cfg)?.as_series()?;
            let report = Report { command: "spectrum", config: &cfg, key: "ratio", data: &table };
            let mut out = args.sink()?;
            repro::write_report(&report, &mut out)?;
            out.flush()?;
            Ok(true)
        }
        Command::Validate(args) => {
            let mut defaults = RunConfig::figure2();
            defaults.samples = 50;
            defaults.t_max_over_g = 5.0;
            let cfg = args.resolve(defaults)?;
            let report = repro::validate(&cfg)?;
            let mut out = args.sink()?;
            for c in &report.checks {
                writeln!(
                    out,
                    "{} {}: {:.3e} (threshold {:.1e})",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.threshold
                )?;
            }
            out.flush()?;
            Ok(report.passed())
        }
    }
}

fn figure(args: &RunArgs, command: &str, defaults: RunConfig, scenario: Scenario) -> Result<bool, Error> {
    let cfg = args.resolve(defaults)?;
    if cfg.scenario != scenario {
        return Err(Error::Config(format!(
            "{command} runs the {scenario} scenario but the configuration says {}",
            cfg.scenario
        )));
    }
    let runs = repro::run_figure(&cfg)?;
    let data = repro::combine(&runs)?;
    let report = Report { command, config: &cfg, key: "t_over_g", data: &data };
    let mut out = args.sink()?;
    repro::write_report(&report, &mut out)?;
    out.flush()?;
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("qdyn: {e}");
            ExitCode::from(if e.is_numerical() {
                3
            } else if matches!(e, Error::Io(_)) {
                1
            } else {
                2
            })
        }
    }
}
