// SPDX-License-Identifier: MIT OR Apache-2.0

//! Closed-form weights for the four hand-built classifiers.
//!
//! Gates that are "fixed to 1" are constant pre-activations `m` (so the gate
//! is `σ(m)`, which is exactly 1.0 in double precision for `m ≳ 37`). Gates
//! written as `σ(m · z)` have `m` folded into their stored weights.

use ndarray::{array, Array1, Array2};

use crate::dfa::Dfa;
use crate::error::{Error, Result};
use crate::lstm::{Decoder, Gate, GateParams, LstmParameters};
use crate::model::{Hyper, Task, WhiteBoxModel};

pub const DEFAULT_COUNTING_U: f64 = 0.5;
pub const DEFAULT_SP_U: f64 = 0.7;
pub const DEFAULT_M: f64 = 50.0;
pub const DEFAULT_STACK_BOUND: usize = 8;
/// Counter scale of the FSA network, giving `v = tanh(1)`.
pub const FSA_U: f64 = 1.0;

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive and finite, got {value}")))
    }
}

fn labels(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// One hidden unit counting `a` as `+v` and `b` as `-v`; True iff `tanh(c) > v/2`.
pub fn build_counting_network(u: f64, m: f64) -> Result<WhiteBoxModel> {
    check_positive("u", u)?;
    check_positive("m", m)?;
    let v = u.tanh();
    let mut cell = GateParams::zeros(1, 2);
    cell.input = array![[u, -u]];
    let params = LstmParameters::new(
        2,
        1,
        cell,
        GateParams::constant(1, 2, m),
        GateParams::constant(1, 2, m),
        GateParams::constant(1, 2, m),
    )?;
    let decoder = Decoder::new(array![[1.0], [0.0]], array![0.0, v / 2.0], labels(&["True", "False"]))?;
    WhiteBoxModel::new(
        "counting",
        Task::Counting,
        vec!['a', 'b'],
        params,
        decoder,
        Hyper { u: Some(u), m: Some(m), k: None },
    )
}

/// Seven counters: four symbol counts and three counts of `b`, `c`, `d`
/// completing one of the pairs `ab`, `bc`/`dc`, `cd`.
pub fn build_sp_counter_network(u: f64, m: f64) -> Result<WhiteBoxModel> {
    check_positive("u", u)?;
    check_positive("m", m)?;
    let v = u.tanh();
    let (d, h) = (4, 7);

    let mut cell = GateParams::zeros(h, d);
    for sym in 0..d {
        cell.input[[sym, sym]] = u;
    }
    // b, c, d also feed the three subsequence counters.
    for sym in 1..d {
        cell.input[[3 + sym, sym]] = u;
    }

    // Counter #5 (…b) needs an earlier a, #6 (…c) an earlier b or d, #7 (…d) an earlier c.
    let mut input_gate = GateParams::zeros(h, d);
    for (row, col) in [(4, 0), (5, 1), (5, 3), (6, 2)] {
        input_gate.recurrent[[row, col]] = 2.0 * m;
    }
    input_gate.bias = Array1::from_vec(vec![m, m, m, m, -m, -m, -m]);

    let params =
        LstmParameters::new(d, h, cell, input_gate, GateParams::constant(h, d, m), GateParams::constant(h, d, m))?;
    let mut weight = Array2::zeros((2, h));
    for unit in 4..7 {
        weight[[0, unit]] = 1.0;
    }
    let decoder = Decoder::new(weight, array![0.0, v / 2.0], labels(&["True", "False"]))?;
    WhiteBoxModel::new(
        "sp-counter",
        Task::Sp,
        vec!['a', 'b', 'c', 'd'],
        params,
        decoder,
        Hyper { u: Some(u), m: Some(m), k: None },
    )
}

/// Hidden unit carrying the pair ⟨state, last symbol⟩.
pub fn fsa_unit(dfa: &Dfa, state: usize, symbol: usize) -> usize {
    state * dfa.alphabet().len() + symbol
}

/// Compiles a DFA into an LSTM with one hidden unit per ⟨state, symbol⟩ pair.
///
/// The forget gate clears the cell every step, the candidate marks every pair
/// whose symbol is the current input, and the input gate keeps only the pair
/// reachable from the previous state read off `h`. The zero initial state
/// stands for the start state through the input-gate bias.
///
/// Class order puts the start state's class first, so the empty input (all
/// logits zero) resolves to the start state's verdict under lowest-index
/// tie-breaking.
pub fn build_fsa_network(dfa: &Dfa, m: f64) -> Result<WhiteBoxModel> {
    check_positive("m", m)?;
    let sigma = dfa.alphabet().len();
    let states = dfa.num_states();
    let (d, h) = (sigma, states * sigma);

    let mut cell = GateParams::zeros(h, d);
    for q in 0..states {
        for x in 0..sigma {
            cell.input[[fsa_unit(dfa, q, x), x]] = FSA_U;
        }
    }

    let mut input_gate = GateParams::zeros(h, d);
    for q in 0..states {
        for x in 0..sigma {
            let row = fsa_unit(dfa, q, x);
            let bias = if dfa.next(dfa.start(), x) == q { m } else { -m };
            input_gate.bias[row] = bias;
            for q_prev in 0..states {
                let target = if dfa.next(q_prev, x) == q { m } else { -m };
                for x_prev in 0..sigma {
                    input_gate.recurrent[[row, fsa_unit(dfa, q_prev, x_prev)]] = target - bias;
                }
            }
        }
    }

    let params =
        LstmParameters::new(d, h, cell, input_gate, GateParams::constant(h, d, -m), GateParams::constant(h, d, m))?;

    let start_accepts = dfa.is_accepting(dfa.start());
    let (true_row, false_row) = if start_accepts { (0, 1) } else { (1, 0) };
    let mut weight = Array2::zeros((2, h));
    for q in 0..states {
        let row = if dfa.is_accepting(q) { true_row } else { false_row };
        for x in 0..sigma {
            weight[[row, fsa_unit(dfa, q, x)]] = 1.0;
        }
    }
    let names = if start_accepts { ["True", "False"] } else { ["False", "True"] };
    let decoder = Decoder::new(weight, Array1::zeros(2), labels(&names))?;
    WhiteBoxModel::new(
        "fsa",
        Task::Other,
        dfa.alphabet().to_vec(),
        params,
        decoder,
        Hyper { u: Some(FSA_U), m: Some(m), k: None },
    )
}

/// The FSA network compiled from [`sp_dfa`](crate::dfa::sp_dfa).
pub fn build_sp_fsa_network(m: f64) -> Result<WhiteBoxModel> {
    let mut model = build_fsa_network(&crate::dfa::sp_dfa(), m)?;
    model.kind = "sp-fsa".into();
    model.task = Task::Sp;
    Ok(model)
}

/// `T_n`: ones on the diagonal, minus ones on the superdiagonal. Maps a unary
/// encoding of `s` to the one-hot vector for `s`.
pub fn make_unary_transition_matrix(n: usize) -> Result<Array2<f64>> {
    if n == 0 {
        return Err(Error::Config("T_n needs n >= 1".into()));
    }
    let mut t = Array2::eye(n);
    for row in 0..n - 1 {
        t[[row, row + 1]] = -1.0;
    }
    Ok(t)
}

/// Empty-stack threshold of the bracket network, halfway between one and two
/// stack-height units as they appear in `h` (each saturated unit reads
/// `tanh(1)`, not 1).
pub fn empty_stack_threshold() -> f64 {
    1.5 * 1f64.tanh()
}

const EMPTY_GATE_GAIN: f64 = 4.0;

/// Bounded-stack PDA for predicting the next closing bracket.
///
/// Layout of the `2k + 1` units (0-based): `0..k-1` stack below the top,
/// `k-1` top of stack (`(` = +1, `[` = −1), `k..2k` stack height in unary,
/// `2k` empty-stack bit.
pub fn build_pda_network(k: usize, m: f64) -> Result<WhiteBoxModel> {
    if k < 2 {
        return Err(Error::Config(format!("stack bound k must be at least 2, got {k}")));
    }
    if k > 40 {
        return Err(Error::Config(format!("stack bound k = {k} overflows the 2^k push weights")));
    }
    check_positive("m", m)?;
    let (d, h) = (4, 2 * k + 1);
    let top = k - 1;
    let unary = k..2 * k;
    let empty = 2 * k;
    let t_k = make_unary_transition_matrix(k)?;
    let pow2 = |e: usize| (1u64 << e) as f64;

    let mut cell = GateParams::zeros(h, d);
    cell.input.row_mut(top).assign(&array![pow2(k), -pow2(k), 0.0, 0.0]);
    for row in unary.clone() {
        cell.input.row_mut(row).assign(&array![1.0, 1.0, 0.0, 0.0]);
    }
    cell.input.row_mut(empty).assign(&array![-2.0, -2.0, 0.0, 0.0]);
    for row in 0..top {
        cell.recurrent[[row, top]] = 1.0;
        cell.recurrent[[top, row]] = pow2(row + 1);
    }
    for col in unary.clone() {
        cell.recurrent[[empty, col]] = -1.0;
    }
    cell.bias[empty] = empty_stack_threshold();

    let mut input_gate = GateParams::zeros(h, d);
    for row in 0..top {
        input_gate.input.row_mut(row).assign(&array![0.0, 0.0, -2.0, -2.0]);
    }
    input_gate.input.row_mut(top).assign(&array![2.0, 2.0, 0.0, 0.0]);
    for r in 0..top {
        for (j, col) in unary.clone().enumerate() {
            input_gate.recurrent[[r, col]] = 2.0 * t_k[[r, j]];
            input_gate.recurrent[[k + 1 + r, col]] = 2.0 * t_k[[r, j]];
        }
    }
    // The lowest height unit opens only while the stack is empty.
    input_gate.recurrent[[k, k]] = -2.0;
    input_gate.bias.fill(-1.0);
    input_gate.bias[top] = 1.0;
    input_gate.bias[k] = 1.0;
    // The empty bit is written only when it turns on, so it reads 0 otherwise.
    // Its margin is only tanh(1) / 2, hence the extra gain on the gate.
    input_gate.input.row_mut(empty).assign(&(&cell.input.row(empty) * EMPTY_GATE_GAIN));
    input_gate.recurrent.row_mut(empty).assign(&(&cell.recurrent.row(empty) * EMPTY_GATE_GAIN));
    input_gate.bias[empty] = cell.bias[empty] * EMPTY_GATE_GAIN;

    let mut forget_gate = GateParams::zeros(h, d);
    for row in (0..top).chain(unary.clone()) {
        forget_gate.input.row_mut(row).assign(&array![2.0, 2.0, 0.0, 0.0]);
    }
    for (j, col) in unary.clone().enumerate() {
        for r in 0..top {
            forget_gate.recurrent[[r, col]] = -2.0 * t_k[[r + 1, j]];
        }
        for r in 0..k {
            forget_gate.recurrent[[k + r, col]] = -2.0 * t_k[[r, j]];
        }
    }
    forget_gate.bias.fill(1.0);
    forget_gate.bias[top] = -1.0;
    forget_gate.bias[empty] = -1.0;

    let mut params = LstmParameters::new(d, h, cell, input_gate, forget_gate, GateParams::constant(h, d, m))?;
    for gate in [Gate::Cell, Gate::Input, Gate::Forget] {
        params.scale_gate(gate, m);
    }

    let mut weight = Array2::zeros((3, h));
    weight[[0, top]] = 1.0;
    weight[[1, top]] = -1.0;
    weight[[2, empty]] = 1.0;
    let decoder = Decoder::new(weight, Array1::zeros(3), labels(&[")", "]", "None"]))?;
    WhiteBoxModel::new(
        "pda",
        Task::DyckPrefix,
        vec!['(', '[', ')', ']'],
        params,
        decoder,
        Hyper { u: None, m: Some(m), k: Some(k) },
    )
}

/// Named constructors with default hyperparameters, as used by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelName {
    Counting,
    SpCounter,
    SpFsa,
    Pda,
}

impl ModelName {
    pub const ALL: [ModelName; 4] = [ModelName::Counting, ModelName::SpCounter, ModelName::SpFsa, ModelName::Pda];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelName::Counting => "counting",
            ModelName::SpCounter => "sp-counter",
            ModelName::SpFsa => "sp-fsa",
            ModelName::Pda => "pda",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|m| m.as_str() == name).ok_or_else(|| {
            Error::Config(format!("unknown model {name:?}; expected counting, sp-counter, sp-fsa or pda"))
        })
    }

    /// Builds the model; `None` picks each hyperparameter's default.
    pub fn build(self, u: Option<f64>, m: Option<f64>, k: Option<usize>) -> Result<WhiteBoxModel> {
        let m = m.unwrap_or(DEFAULT_M);
        match self {
            ModelName::Counting => build_counting_network(u.unwrap_or(DEFAULT_COUNTING_U), m),
            ModelName::SpCounter => build_sp_counter_network(u.unwrap_or(DEFAULT_SP_U), m),
            ModelName::SpFsa => build_sp_fsa_network(m),
            ModelName::Pda => build_pda_network(k.unwrap_or(DEFAULT_STACK_BOUND), m),
        }
    }

    pub fn build_default(self) -> WhiteBoxModel {
        self.build(None, None, None).expect("default hyperparameters are valid")
    }
}
