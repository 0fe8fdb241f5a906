//! Scenario-driven front end for `qmetro-core`: parse a scenario file, run
//! every (gamma, mode) cell, and write CSV/JSON artifacts.

pub mod emit;
pub mod error;
pub mod run;
pub mod scenario;

pub use emit::emit;
pub use error::CliError;
pub use run::{run, CellReport, Curves, QfiSweep, RunReport};
pub use scenario::{parse_scenario, Mode, Scenario};
