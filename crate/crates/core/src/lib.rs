//! Optimal distribution of quantum metrology experiments over a constrained
//! set of instrument configurations.
//!
//! The pipeline is: a [`ParamChannel`] plus families of inputs and POVMs give
//! a [`FisherTable`] of per-configuration Fisher information over a sample of
//! the unknown parameter; [`design::average_case`] and [`design::worst_case`]
//! turn it into a [`DesignDistribution`] over configurations, benchmarked
//! against [`fisher::f_max`] and the quantum Fisher information.

pub mod channel;
pub mod design;
pub mod error;
pub mod fisher;
pub mod lp;
pub mod matkernel;

pub use channel::{InputFamily, ParamChannel, PovmFamily};
pub use design::{DesignCertificate, DesignDistribution, DesignKind, ExperimentCounts, SupportEntry};
pub use error::{Error, Result};
pub use fisher::{ConfigGrid, ConfigLabel, FisherTable};
pub use lp::{LpSolution, LpStatus, StandardLp};
pub use matkernel::{CMatrix, HermEig};
pub use num_complex::Complex64;
