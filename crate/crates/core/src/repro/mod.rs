//! Reproduction runs behind the `qdyn` command-line tool.

pub mod config;
pub mod figures;
pub mod output;

pub use config::{Format, Initial, Method, RunConfig};
pub use figures::{
    combine, run_figure, run_figure2, run_figure3, run_spectrum_sweep, validate, RatioRun,
    SpectrumTable, ValidationReport,
};
pub use output::{write_report, Report};
