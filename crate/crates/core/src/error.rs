// SPDX-License-Identifier: MIT OR Apache-2.0

use thiserror::Error;

/// Errors raised by model construction, evaluation and the experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    /// Shapes, hyperparameters or model/trace pairings that cannot work together.
    #[error("configuration error: {0}")]
    Config(String),

    /// A token outside the model alphabet.
    #[error("input error: unknown token {token:?} at position {position}")]
    UnknownToken { token: char, position: usize },

    /// Input that is well-formed but unusable for the requested operation.
    #[error("input error: {0}")]
    Input(String),

    /// A bracket prefix deeper than the stack the network was built with.
    #[error("input error: stack depth {depth} at position {position} exceeds capacity {capacity}")]
    Capacity { depth: usize, position: usize, capacity: usize },

    /// Rejection sampling ran out of retries.
    #[error("generation error: {0}")]
    Generation(String),
}

impl Error {
    /// True for errors caused by user input rather than configuration.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::UnknownToken { .. } | Error::Input(_) | Error::Capacity { .. } | Error::Generation(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
