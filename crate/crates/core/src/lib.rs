// SPDX-License-Identifier: MIT OR Apache-2.0

//! Hand-weighted LSTM classifiers for formal-language tasks, with the
//! attribution methods used to explain them.
//!
//! The networks have known internal semantics (counters, automaton states,
//! stacks), so attribution output can be checked against what the network
//! actually computes. Start with [`builders`] for the models, [`tasks`] for
//! the languages and their oracles, and [`attribution::attribute`] or
//! [`lrp::lrp_attribute`] for explanations.

pub mod attribution;
pub mod builders;
pub mod dfa;
pub mod error;
pub mod experiments;
pub mod grad;
pub mod heatmap;
pub mod lrp;
pub mod lstm;
pub mod model;
pub mod schema;
pub mod tasks;

pub use attribution::{attribute, AttributionOptions, AttributionResult, Method};
pub use builders::ModelName;
pub use dfa::Dfa;
pub use error::{Error, Result};
pub use experiments::ExperimentReport;
pub use heatmap::Heatmap;
pub use lrp::{lrp_attribute, LrpResult};
pub use lstm::{Decoder, ForwardTrace, Gate, GateParams, LstmParameters, StepTrace};
pub use model::{Hyper, Task, WhiteBoxModel};
pub use tasks::{Closer, GeneratorConfig};
