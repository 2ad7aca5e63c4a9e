//! File formats, batch runs and the command line for the annihilator solver.

pub mod dto;
mod error;
pub mod report;
pub mod run;
pub mod samples;
pub mod spec;
pub mod threads;

pub use dto::{FunctionSpec, PieceSpec};
pub use error::{InputError, OutputError};
pub use run::{evaluate, run, ExitStatus, RunOutcome};
pub use samples::export_samples;
pub use spec::{Mode, ProblemSpec};
