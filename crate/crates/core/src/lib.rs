//! Structural drift detection through windowed maximum-weight forests.
//!
//! Rows are cut into fixed-length windows. Each window gets a forest over
//! the variables, weighted by penalized mutual information. Per-pair edge
//! histories are folded into codes, and a Bayesian logistic model describes
//! how the share of stable pairs evolves over time.

pub mod baseline;
pub mod dataset;
pub mod error;
pub mod exec;
pub mod forest;
pub mod inference;
pub mod mi;
pub mod seed;
pub mod stats;
pub mod transition;

pub use error::{Error, Result};
pub use exec::Execution;
