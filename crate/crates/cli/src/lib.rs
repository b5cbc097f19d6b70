//! Experiment harness behind the `genvi` command line tool.

pub mod check;
pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

pub use check::{run_check, CheckLine, CheckReport, Status};
pub use config::{Experiment, ExperimentConfig};
pub use error::{CliError, CliResult};
pub use experiments::{run_adjoint_demo, run_fpu, run_order, run_resonance};
pub use output::{Outputs, Table};
