// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fmt;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lstm::{self, Decoder, ForwardTrace, LstmParameters};

/// The classification task a model solves; fixes alphabet semantics and the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    /// More `a`s than `b`s.
    Counting,
    /// Contains `ab`, `bc`, `cd` or `dc` as a subsequence.
    Sp,
    /// Next closing bracket of a Dyck prefix.
    DyckPrefix,
    /// Anything else (random test networks, arbitrary automata).
    Other,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Counting => "counting",
            Task::Sp => "sp",
            Task::DyckPrefix => "dyck-prefix",
            Task::Other => "other",
        })
    }
}

/// Construction hyperparameters. `v = tanh(u)` is derived, never stored.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Hyper {
    /// Counter scale before the tanh.
    pub u: Option<f64>,
    /// Gate saturation constant.
    pub m: Option<f64>,
    /// Stack bound of the bracket network.
    pub k: Option<usize>,
}

impl Hyper {
    pub fn v(&self) -> Option<f64> {
        self.u.map(f64::tanh)
    }
}

/// An LSTM classifier together with its alphabet and construction metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct WhiteBoxModel {
    pub kind: String,
    pub task: Task,
    pub alphabet: Vec<char>,
    pub params: LstmParameters,
    pub decoder: Decoder,
    pub hyper: Hyper,
}

impl WhiteBoxModel {
    pub fn new(
        kind: impl Into<String>,
        task: Task,
        alphabet: Vec<char>,
        params: LstmParameters,
        decoder: Decoder,
        hyper: Hyper,
    ) -> Result<Self> {
        if alphabet.len() != params.input_dim() {
            return Err(Error::Config(format!(
                "alphabet has {} symbols but the LSTM reads {} features",
                alphabet.len(),
                params.input_dim()
            )));
        }
        for (idx, sym) in alphabet.iter().enumerate() {
            if alphabet[..idx].contains(sym) {
                return Err(Error::Config(format!("duplicate alphabet symbol {sym:?}")));
            }
        }
        if decoder.weight.ncols() != params.hidden_dim() {
            return Err(Error::Config(format!(
                "decoder reads {} hidden units, LSTM has {}",
                decoder.weight.ncols(),
                params.hidden_dim()
            )));
        }
        Ok(Self { kind: kind.into(), task, alphabet, params, decoder, hyper })
    }

    pub fn input_dim(&self) -> usize {
        self.params.input_dim()
    }

    pub fn hidden_dim(&self) -> usize {
        self.params.hidden_dim()
    }

    pub fn num_classes(&self) -> usize {
        self.decoder.num_classes()
    }

    pub fn labels(&self) -> &[String] {
        &self.decoder.labels
    }

    /// Looks a class up by label, falling back to a numeric index.
    pub fn resolve_class(&self, class: &str) -> Result<usize> {
        if let Some(idx) = self.decoder.class_index(class) {
            return Ok(idx);
        }
        match class.parse::<usize>() {
            Ok(idx) if idx < self.num_classes() => Ok(idx),
            _ => Err(Error::Config(format!(
                "unknown class {class:?}; expected one of {:?} or an index",
                self.decoder.labels
            ))),
        }
    }

    /// Maps each character to its one-hot index.
    ///
    /// Bracket networks also reject prefixes whose nesting depth exceeds the
    /// stack bound instead of silently overwriting the bottom of the stack.
    pub fn encode(&self, input: &str) -> Result<Vec<usize>> {
        let tokens = input
            .chars()
            .enumerate()
            .map(|(position, token)| {
                self.alphabet.iter().position(|&s| s == token).ok_or(Error::UnknownToken { token, position })
            })
            .collect::<Result<Vec<_>>>()?;
        if let (Task::DyckPrefix, Some(capacity)) = (self.task, self.hyper.k) {
            let mut depth = 0usize;
            for (position, &tok) in tokens.iter().enumerate() {
                if tok < 2 {
                    depth += 1;
                    if depth > capacity {
                        return Err(Error::Capacity { depth, position, capacity });
                    }
                } else {
                    depth = depth.saturating_sub(1);
                }
            }
        }
        Ok(tokens)
    }

    pub fn decode(&self, tokens: &[usize]) -> String {
        tokens.iter().map(|&t| self.alphabet[t]).collect()
    }

    /// T × D one-hot matrix.
    pub fn one_hot(&self, tokens: &[usize]) -> Array2<f64> {
        let mut x = Array2::zeros((tokens.len(), self.input_dim()));
        for (t, &tok) in tokens.iter().enumerate() {
            x[[t, tok]] = 1.0;
        }
        x
    }

    /// Forward pass over a real-valued input matrix (rows need not be one-hot).
    pub fn forward_matrix(&self, inputs: ArrayView2<f64>) -> Result<ForwardTrace> {
        lstm::run(&self.params, &self.decoder, inputs)
    }

    pub fn forward_tokens(&self, tokens: &[usize]) -> Result<ForwardTrace> {
        self.forward_matrix(self.one_hot(tokens).view())
    }

    pub fn forward(&self, input: &str) -> Result<ForwardTrace> {
        let tokens = self.encode(input)?;
        self.forward_tokens(&tokens)
    }

    /// Label of the highest logit, ties to the lowest class index.
    pub fn classify(&self, input: &str) -> Result<&str> {
        let trace = self.forward(input)?;
        Ok(&self.decoder.labels[trace.predicted])
    }
}
