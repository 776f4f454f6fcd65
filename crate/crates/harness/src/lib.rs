//! Experiment harness for `lassotune-core`: scenario sweeps with deterministic
//! parallel replication, CSV output, the two worked examples, the oracle
//! risk-estimation experiment and record summaries.

pub mod config;
pub mod error;
pub mod examples;
pub mod methods;
pub mod output;
pub mod riskexp;
pub mod summary;
pub mod sweep;

pub use config::SweepSpec;
pub use error::{HarnessError, Result};
pub use methods::MethodSettings;
pub use sweep::run_sweep;
