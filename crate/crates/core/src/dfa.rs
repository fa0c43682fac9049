// SPDX-License-Identifier: MIT OR Apache-2.0

//! Deterministic finite automata: the source for FSA-network compilation and
//! an oracle in its own right.

use std::collections::{HashMap, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A complete DFA over a character alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dfa {
    alphabet: Vec<char>,
    /// `transitions[q][x]` is the successor of state `q` on symbol index `x`.
    transitions: Vec<Vec<usize>>,
    start: usize,
    accepting: Vec<bool>,
}

impl Dfa {
    pub fn new(alphabet: Vec<char>, transitions: Vec<Vec<usize>>, start: usize, accepting: Vec<bool>) -> Result<Self> {
        let states = transitions.len();
        if states == 0 || alphabet.is_empty() {
            return Err(Error::Config("a DFA needs at least one state and one symbol".into()));
        }
        if start >= states {
            return Err(Error::Config(format!("start state {start} out of range 0..{states}")));
        }
        if accepting.len() != states {
            return Err(Error::Config(format!("accepting set covers {} states, DFA has {states}", accepting.len())));
        }
        for (q, row) in transitions.iter().enumerate() {
            if row.len() != alphabet.len() {
                return Err(Error::Config(format!("transition row of state {q} is not total")));
            }
            if let Some(&bad) = row.iter().find(|&&next| next >= states) {
                return Err(Error::Config(format!("state {q} transitions to missing state {bad}")));
            }
        }
        for (idx, sym) in alphabet.iter().enumerate() {
            if alphabet[..idx].contains(sym) {
                return Err(Error::Config(format!("duplicate DFA symbol {sym:?}")));
            }
        }
        Ok(Self { alphabet, transitions, start, accepting })
    }

    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.transitions.len()
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting[q]
    }

    pub fn next(&self, q: usize, symbol: usize) -> usize {
        self.transitions[q][symbol]
    }

    /// Final state after reading symbol indices from the start state.
    pub fn run_tokens(&self, tokens: &[usize]) -> usize {
        tokens.iter().fold(self.start, |q, &x| self.next(q, x))
    }

    pub fn accepts_tokens(&self, tokens: &[usize]) -> bool {
        self.is_accepting(self.run_tokens(tokens))
    }

    pub fn accepts(&self, input: &str) -> Result<bool> {
        let tokens = input
            .chars()
            .enumerate()
            .map(|(position, token)| {
                self.alphabet.iter().position(|&s| s == token).ok_or(Error::UnknownToken { token, position })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.accepts_tokens(&tokens))
    }

    /// A uniformly random total DFA; used to check that compilation is generic.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, states: usize, alphabet: Vec<char>) -> Result<Self> {
        let transitions =
            (0..states).map(|_| (0..alphabet.len()).map(|_| rng.random_range(0..states)).collect()).collect();
        let accepting = (0..states).map(|_| rng.random_bool(0.5)).collect();
        let start = rng.random_range(0..states);
        Self::new(alphabet, transitions, start, accepting)
    }
}

const SP_ALPHABET: [char; 4] = ['a', 'b', 'c', 'd'];

/// Two-symbol subsequences that make a string True in the SP task, as index pairs.
pub(crate) const SP_PAIRS: [(usize, usize); 4] = [(0, 1), (1, 2), (2, 3), (3, 2)];

/// Whether reading `x` after having seen the symbols in `seen` completes a pair.
pub(crate) fn sp_completes(seen: u8, x: usize) -> bool {
    SP_PAIRS.iter().any(|&(y, z)| z == x && seen & (1 << y) != 0)
}

/// DFA for the SP language over {a, b, c, d}.
///
/// Non-accepting states are the sets of symbols seen so far; a symbol that
/// closes one of the pairs `ab`, `bc`, `cd`, `dc` moves to an absorbing
/// accepting sink. Only states reachable from the empty set are built, in
/// breadth-first order, so the start state is 0.
pub fn sp_dfa() -> Dfa {
    #[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
    enum State {
        Seen(u8),
        Sink,
    }
    let mut index: HashMap<State, usize> = HashMap::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::from([State::Seen(0)]);
    index.insert(State::Seen(0), 0);
    order.push(State::Seen(0));
    let mut edges: Vec<Vec<State>> = Vec::new();
    while let Some(state) = queue.pop_front() {
        let row: Vec<State> = (0..SP_ALPHABET.len())
            .map(|x| match state {
                State::Sink => State::Sink,
                State::Seen(seen) if sp_completes(seen, x) => State::Sink,
                State::Seen(seen) => State::Seen(seen | (1 << x)),
            })
            .collect();
        for &next in &row {
            if let std::collections::hash_map::Entry::Vacant(slot) = index.entry(next) {
                slot.insert(order.len());
                order.push(next);
                queue.push_back(next);
            }
        }
        edges.push(row);
    }
    let transitions = edges.iter().map(|row| row.iter().map(|s| index[s]).collect()).collect();
    let accepting = order.iter().map(|s| *s == State::Sink).collect();
    // Construction is closed over the fixed alphabet, so validation cannot fail.
    Dfa::new(SP_ALPHABET.to_vec(), transitions, 0, accepting).expect("SP automaton is well formed")
}
