//! Meshfree collocation for the Poisson problem on Wendland kernels, with a
//! direct statevector simulation of a filtering-based quantum linear-system
//! solver for the resulting symmetric systems.

pub mod assembly;
pub mod error;
pub mod io;
pub mod kernel;
pub mod points;
pub mod quantum;
pub mod solve;
pub mod study;

pub use assembly::{CollocationSystem, EvaluationMatrix};
pub use error::{Error, Result};
pub use kernel::WendlandKernel;
pub use points::{Domain, PointSet};
pub use solve::{SolveMethod, SolveResult};
pub use study::{
    complexity_exponents, run_conditioning_study, run_convergence_study, run_qlsa_comparison,
    ComplexityModel, StudyConfig, StudyReport,
};
