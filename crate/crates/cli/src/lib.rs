//! Command-line front end for `mpcc-core`: problem files, commands and
//! certificate reports.

pub mod commands;
pub mod error;
pub mod problem;
pub mod report;

pub use commands::{exit, CertifyFlags, Outcome};
pub use error::{CliError, Result};
pub use problem::{ProblemFile, ToleranceOverrides};
pub use report::CertificateReport;
