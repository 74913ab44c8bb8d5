//! Experiment orchestration: JSON specs, parallel multi-seed runs,
//! cross-run aggregation, SVG charts, exact-analysis reports and the
//! `maac` command line.

pub mod aggregate;
pub mod error;
pub mod exact_report;
pub mod experiment;
pub mod plot;
pub mod seeds;
pub mod spec;

pub use aggregate::{aggregate, aggregate_files, AggregateCurve, AggregatePoint, LongRow};
pub use error::{HarnessError, Result};
pub use exact_report::{exact_report, write_report, PolicyFile, PolicySource};
pub use experiment::{replot, resolve_output, run_experiment, Manifest, RunStatus};
pub use plot::{render_svg, Series};
pub use seeds::run_seed;
pub use spec::{Cell, ExperimentSpec};
