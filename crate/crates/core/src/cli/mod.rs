//! Configuration, suite orchestration and file output behind the `covkg` binary.

pub mod config;
pub mod io;
pub mod suites;

pub use config::{RunConfig, StateChoice, Suite, ToleranceMode};
pub use suites::{converge, plotdata, verify, wick_summary};
