// SPDX-License-Identifier: MIT OR Apache-2.0

//! Single-layer LSTM with a linear decoder, evaluated in double precision.
//!
//! The update is the standard one:
//!
//! ```text
//! g = tanh(W_gx x + W_gh h' + b_g)      i = σ(W_ix x + W_ih h' + b_i)
//! f = σ(W_fx x + W_fh h' + b_f)         o = σ(W_ox x + W_oh h' + b_o)
//! c = f ⊙ c' + i ⊙ g                    h = o ⊙ tanh(c)
//! ```
//!
//! Every step records its pre-activations and activations so that gradients
//! and relevance propagation can run over the stored trace without a second
//! forward pass.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Logistic sigmoid.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// The four affine maps of an LSTM cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gate {
    /// Candidate value `g`, squashed with tanh.
    Cell,
    Input,
    Forget,
    Output,
}

impl Gate {
    pub const ALL: [Gate; 4] = [Gate::Cell, Gate::Input, Gate::Forget, Gate::Output];

    pub fn symbol(self) -> &'static str {
        match self {
            Gate::Cell => "g",
            Gate::Input => "i",
            Gate::Forget => "f",
            Gate::Output => "o",
        }
    }
}

/// Weights of one gate: `z = input · x + recurrent · h_prev + bias`.
#[derive(Debug, Clone, PartialEq)]
pub struct GateParams {
    /// H × D.
    pub input: Array2<f64>,
    /// H × H.
    pub recurrent: Array2<f64>,
    /// H.
    pub bias: Array1<f64>,
}

impl GateParams {
    pub fn zeros(hidden_dim: usize, input_dim: usize) -> Self {
        Self {
            input: Array2::zeros((hidden_dim, input_dim)),
            recurrent: Array2::zeros((hidden_dim, hidden_dim)),
            bias: Array1::zeros(hidden_dim),
        }
    }

    /// A gate whose pre-activation is the constant `bias` regardless of input.
    pub fn constant(hidden_dim: usize, input_dim: usize, bias: f64) -> Self {
        let mut gate = Self::zeros(hidden_dim, input_dim);
        gate.bias.fill(bias);
        gate
    }

    fn preactivation(&self, x: ArrayView1<f64>, h_prev: ArrayView1<f64>) -> Array1<f64> {
        self.input.dot(&x) + self.recurrent.dot(&h_prev) + &self.bias
    }

    fn scaled(&self, factor: f64) -> Self {
        Self { input: &self.input * factor, recurrent: &self.recurrent * factor, bias: &self.bias * factor }
    }
}

/// All recurrent weights of a single-layer LSTM.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParameters {
    input_dim: usize,
    hidden_dim: usize,
    cell: GateParams,
    input_gate: GateParams,
    forget_gate: GateParams,
    output_gate: GateParams,
}

impl LstmParameters {
    /// Builds a parameter set, checking every shape and that all entries are finite.
    pub fn new(
        input_dim: usize,
        hidden_dim: usize,
        cell: GateParams,
        input_gate: GateParams,
        forget_gate: GateParams,
        output_gate: GateParams,
    ) -> Result<Self> {
        if hidden_dim == 0 {
            return Err(Error::Config("hidden dimension must be at least 1".into()));
        }
        for (gate, params) in Gate::ALL.iter().zip([&cell, &input_gate, &forget_gate, &output_gate]) {
            let name = gate.symbol();
            if params.input.dim() != (hidden_dim, input_dim) {
                return Err(Error::Config(format!(
                    "W_{name}x has shape {:?}, expected {:?}",
                    params.input.dim(),
                    (hidden_dim, input_dim)
                )));
            }
            if params.recurrent.dim() != (hidden_dim, hidden_dim) {
                return Err(Error::Config(format!(
                    "W_{name}h has shape {:?}, expected {:?}",
                    params.recurrent.dim(),
                    (hidden_dim, hidden_dim)
                )));
            }
            if params.bias.len() != hidden_dim {
                return Err(Error::Config(format!("b_{name} has length {}, expected {hidden_dim}", params.bias.len())));
            }
            let finite = params.input.iter().chain(params.recurrent.iter()).chain(params.bias.iter());
            if !finite.into_iter().all(|v| v.is_finite()) {
                return Err(Error::Config(format!("gate {name} has a non-finite weight")));
            }
        }
        Ok(Self { input_dim, hidden_dim, cell, input_gate, forget_gate, output_gate })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn gate(&self, gate: Gate) -> &GateParams {
        match gate {
            Gate::Cell => &self.cell,
            Gate::Input => &self.input_gate,
            Gate::Forget => &self.forget_gate,
            Gate::Output => &self.output_gate,
        }
    }

    /// Multiplies every weight and bias of one gate by `factor`.
    ///
    /// Hand-built networks are written as `σ(m · z)`; folding `m` into the
    /// stored weights keeps the trace's pre-activations equal to what the
    /// nonlinearity actually sees.
    pub(crate) fn scale_gate(&mut self, gate: Gate, factor: f64) {
        let scaled = self.gate(gate).scaled(factor);
        match gate {
            Gate::Cell => self.cell = scaled,
            Gate::Input => self.input_gate = scaled,
            Gate::Forget => self.forget_gate = scaled,
            Gate::Output => self.output_gate = scaled,
        }
    }
}

/// Linear read-out from the final hidden state.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoder {
    /// C × H.
    pub weight: Array2<f64>,
    /// C.
    pub bias: Array1<f64>,
    pub labels: Vec<String>,
}

impl Decoder {
    pub fn new(weight: Array2<f64>, bias: Array1<f64>, labels: Vec<String>) -> Result<Self> {
        let classes = weight.nrows();
        if classes < 2 {
            return Err(Error::Config(format!("decoder needs at least 2 classes, got {classes}")));
        }
        if bias.len() != classes || labels.len() != classes {
            return Err(Error::Config(format!(
                "decoder has {classes} rows but {} biases and {} labels",
                bias.len(),
                labels.len()
            )));
        }
        for (idx, label) in labels.iter().enumerate() {
            if labels[..idx].contains(label) {
                return Err(Error::Config(format!("duplicate class label {label:?}")));
            }
        }
        if !weight.iter().chain(bias.iter()).all(|v| v.is_finite()) {
            return Err(Error::Config("decoder has a non-finite weight".into()));
        }
        Ok(Self { weight, bias, labels })
    }

    pub fn num_classes(&self) -> usize {
        self.weight.nrows()
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn logits(&self, h: ArrayView1<f64>) -> Array1<f64> {
        self.weight.dot(&h) + &self.bias
    }
}

/// Everything computed during one time step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepTrace {
    pub x: Array1<f64>,
    pub z_g: Array1<f64>,
    pub z_i: Array1<f64>,
    pub z_f: Array1<f64>,
    pub z_o: Array1<f64>,
    pub g: Array1<f64>,
    pub i: Array1<f64>,
    pub f: Array1<f64>,
    pub o: Array1<f64>,
    pub c: Array1<f64>,
    pub h: Array1<f64>,
}

impl StepTrace {
    /// Recomputes every activation from the stored pre-activations and the
    /// previous cell state, returning true when all match bit for bit.
    pub fn reconstructs(&self, c_prev: ArrayView1<f64>) -> bool {
        let same = |a: &Array1<f64>, b: &Array1<f64>| a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits());
        let c = &self.f * &c_prev + &self.i * &self.g;
        let h = &self.o * &self.c.mapv(f64::tanh);
        same(&self.g, &self.z_g.mapv(f64::tanh))
            && same(&self.i, &self.z_i.mapv(sigmoid))
            && same(&self.f, &self.z_f.mapv(sigmoid))
            && same(&self.o, &self.z_o.mapv(sigmoid))
            && same(&self.c, &c)
            && same(&self.h, &h)
    }
}

/// A full forward pass: one [`StepTrace`] per input row plus the logits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForwardTrace {
    pub steps: Vec<StepTrace>,
    pub logits: Array1<f64>,
    pub predicted: usize,
}

impl ForwardTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Hidden state after step `t` (1-based); `t = 0` is the zero initial state.
    pub fn hidden(&self, t: usize, hidden_dim: usize) -> Array1<f64> {
        match t {
            0 => Array1::zeros(hidden_dim),
            _ => self.steps[t - 1].h.clone(),
        }
    }

    /// Cell state after step `t` (1-based); `t = 0` is the zero initial state.
    pub fn cell(&self, t: usize, hidden_dim: usize) -> Array1<f64> {
        match t {
            0 => Array1::zeros(hidden_dim),
            _ => self.steps[t - 1].c.clone(),
        }
    }

    /// The input rows as a T × D matrix.
    pub fn inputs(&self, input_dim: usize) -> Array2<f64> {
        let mut x = Array2::zeros((self.steps.len(), input_dim));
        for (mut row, step) in x.rows_mut().into_iter().zip(&self.steps) {
            row.assign(&step.x);
        }
        x
    }
}

/// Index of the largest logit; ties go to the lowest index.
pub fn argmax(values: ArrayView1<f64>) -> usize {
    let mut best = 0;
    for (idx, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = idx;
        }
    }
    best
}

/// One LSTM update.
pub fn lstm_step(
    params: &LstmParameters,
    x: ArrayView1<f64>,
    h_prev: ArrayView1<f64>,
    c_prev: ArrayView1<f64>,
) -> Result<StepTrace> {
    let (d, h) = (params.input_dim, params.hidden_dim);
    if x.len() != d || h_prev.len() != h || c_prev.len() != h {
        return Err(Error::Config(format!(
            "lstm_step expects x: {d}, h: {h}, c: {h}; got {}, {}, {}",
            x.len(),
            h_prev.len(),
            c_prev.len()
        )));
    }
    let z_g = params.cell.preactivation(x, h_prev);
    let z_i = params.input_gate.preactivation(x, h_prev);
    let z_f = params.forget_gate.preactivation(x, h_prev);
    let z_o = params.output_gate.preactivation(x, h_prev);
    let g = z_g.mapv(f64::tanh);
    let i = z_i.mapv(sigmoid);
    let f = z_f.mapv(sigmoid);
    let o = z_o.mapv(sigmoid);
    let c = &f * &c_prev + &i * &g;
    let h = &o * &c.mapv(f64::tanh);
    Ok(StepTrace { x: x.to_owned(), z_g, z_i, z_f, z_o, g, i, f, o, c, h })
}

/// Runs the recurrence over the rows of `inputs` (T × D) from zero initial
/// states and applies the decoder to the final hidden state.
pub fn run(params: &LstmParameters, decoder: &Decoder, inputs: ArrayView2<f64>) -> Result<ForwardTrace> {
    if inputs.ncols() != params.input_dim {
        return Err(Error::Config(format!(
            "input matrix has {} columns, model expects {}",
            inputs.ncols(),
            params.input_dim
        )));
    }
    if decoder.weight.ncols() != params.hidden_dim {
        return Err(Error::Config(format!(
            "decoder reads {} hidden units, LSTM has {}",
            decoder.weight.ncols(),
            params.hidden_dim
        )));
    }
    let mut h = Array1::zeros(params.hidden_dim);
    let mut c = Array1::zeros(params.hidden_dim);
    let mut steps = Vec::with_capacity(inputs.nrows());
    for x in inputs.rows() {
        let step = lstm_step(params, x, h.view(), c.view())?;
        h.assign(&step.h);
        c.assign(&step.c);
        steps.push(step);
    }
    let logits = decoder.logits(h.view());
    let predicted = argmax(logits.view());
    Ok(ForwardTrace { steps, logits, predicted })
}
