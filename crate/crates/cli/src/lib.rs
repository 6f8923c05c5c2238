//! Command line front end: transition files in, stick spectra out.

pub mod cli;
pub mod error;
pub mod input;
pub mod pipeline;
pub mod report;

pub use error::{CliError, Result};
pub use input::{parse_transition, ParsedTransition, TransitionSource};
pub use pipeline::{run_exact, run_reconstruct, EnumerationOptions, ReconstructOptions};
pub use report::{write_report, Format, Method, SpectrumLine, SpectrumReport};
