//! Scenario engine for the pmod toolkit: parses scenario files, evaluates
//! both sides of each inequality, and writes JSON reports.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engine;
pub mod error;
pub mod report;
pub mod scenario;

pub use engine::run;
pub use error::{exit, HarnessError, Result};
pub use report::{Check, Num, Report};
pub use scenario::{Scenario, Theorem};
