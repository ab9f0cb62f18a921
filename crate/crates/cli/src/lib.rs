//! Experiment harness for tensor random projections: data loading, sweep
//! orchestration and CSV output. The `trp` binary is a thin wrapper.

pub mod config;
pub mod data;
pub mod error;
pub mod experiment;
pub mod records;

pub use config::{Args, DataSource, DistChoice, Experiment, ExperimentConfig, InputVector, MapChoice};
pub use data::{gen_synthetic, load_mnist};
pub use error::{CliError, Result};
pub use experiment::{run_experiment, run_records};
pub use records::{read_csv, summarize, write_csv, write_records, ExperimentRecord};
