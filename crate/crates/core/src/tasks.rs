// SPDX-License-Identifier: MIT OR Apache-2.0

//! Ground truth for the three tasks and seeded input generation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dfa::sp_completes;
use crate::error::{Error, Result};
use crate::model::Task;

/// Identifier written to run manifests so generated sets can be replayed.
pub const RNG_ALGORITHM: &str = "chacha8 (rand_chacha 0.9), one stream per item index";

/// True iff `x` has strictly more `a`s than `b`s.
pub fn counting_oracle(x: &str) -> bool {
    let balance: i64 = x
        .chars()
        .map(|c| match c {
            'a' => 1,
            'b' => -1,
            _ => 0,
        })
        .sum();
    balance > 0
}

fn sp_index(c: char) -> Option<usize> {
    match c {
        'a' => Some(0),
        'b' => Some(1),
        'c' => Some(2),
        'd' => Some(3),
        _ => None,
    }
}

/// True iff `x` contains `ab`, `bc`, `cd` or `dc` as a subsequence.
pub fn sp_oracle(x: &str) -> bool {
    let mut seen = 0u8;
    for sym in x.chars().filter_map(sp_index) {
        if sp_completes(seen, sym) {
            return true;
        }
        seen |= 1 << sym;
    }
    false
}

/// Correct answer for the bracket prediction task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Closer {
    Paren,
    Square,
    None,
}

impl Closer {
    pub fn label(self) -> &'static str {
        match self {
            Closer::Paren => ")",
            Closer::Square => "]",
            Closer::None => "None",
        }
    }
}

/// Depth of the stack while reading a Dyck prefix, or an error at the first
/// mismatched or unmatched closer.
fn dyck_stack(p: &str) -> Result<Vec<char>> {
    let mut stack = Vec::new();
    for (position, c) in p.chars().enumerate() {
        match c {
            '(' | '[' => stack.push(c),
            ')' | ']' => {
                let want = if c == ')' { '(' } else { '[' };
                if stack.pop() != Some(want) {
                    return Err(Error::Input(format!(
                        "{p:?} is not a Dyck prefix: unmatched {c:?} at position {position}"
                    )));
                }
            }
            token => return Err(Error::UnknownToken { token, position }),
        }
    }
    Ok(stack)
}

/// The closer matching the last unclosed bracket, or `None` when balanced.
pub fn bracket_oracle(p: &str) -> Result<Closer> {
    Ok(match dyck_stack(p)?.last() {
        Some('(') => Closer::Paren,
        Some(_) => Closer::Square,
        None => Closer::None,
    })
}

/// Maximum nesting depth reached by a Dyck prefix.
pub fn dyck_depth(p: &str) -> usize {
    p.chars()
        .scan(0i64, |d, c| {
            *d += if matches!(c, '(' | '[') { 1 } else { -1 };
            Some(*d)
        })
        .max()
        .unwrap_or(0)
        .max(0) as usize
}

/// Fewest deletions after which `x` no longer satisfies [`sp_oracle`].
///
/// Equivalently, `|x|` minus the longest subsequence of `x` that is False.
/// A False string is characterised by the set of symbols it has seen, so the
/// search keeps, for each reachable seen-set, the fewest deletions spent so
/// far; a symbol may be kept only if it does not complete a pair.
pub fn minimal_ablation_count(x: &str) -> usize {
    const UNREACHED: usize = usize::MAX;
    let mut best = [UNREACHED; 16];
    best[0] = 0;
    for sym in x.chars().filter_map(sp_index) {
        let mut next = [UNREACHED; 16];
        for (seen, &cost) in best.iter().enumerate() {
            if cost == UNREACHED {
                continue;
            }
            // Delete the symbol.
            next[seen] = next[seen].min(cost + 1);
            // Keep it if that keeps the string False.
            if !sp_completes(seen as u8, sym) {
                let kept = seen | (1 << sym);
                next[kept] = next[kept].min(cost);
            }
        }
        best = next;
    }
    best.into_iter().min().unwrap_or(0)
}

/// True iff some non-empty prefix has as many `a`s as `b`s.
pub fn has_balanced_prefix(x: &str) -> bool {
    balanced_prefix_ends(x).next().is_some()
}

/// Lengths of the non-empty prefixes with equal numbers of `a`s and `b`s.
pub fn balanced_prefix_ends(x: &str) -> impl Iterator<Item = usize> + '_ {
    x.chars()
        .scan(0i64, |d, c| {
            *d += match c {
                'a' => 1,
                'b' => -1,
                _ => 0,
            };
            Some(*d)
        })
        .enumerate()
        .filter(|&(_, d)| d == 0)
        .map(|(i, _)| i + 1)
}

/// Settings for [`generate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub task: Task,
    pub seed: u64,
    pub count: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// Counting task: keep only strings with a balanced non-empty prefix.
    pub balanced_prefix: bool,
    /// SP task: keep only strings the oracle classifies True.
    pub sp_true: bool,
    /// Dyck task: probability of closing when both moves are legal.
    pub closing_prob: f64,
    /// Dyck task: maximum nesting depth.
    pub max_depth: usize,
    /// Rejection-sampling attempts per item before giving up.
    pub retry_budget: usize,
}

impl GeneratorConfig {
    pub fn new(task: Task, seed: u64, count: usize, min_len: usize, max_len: usize) -> Self {
        Self {
            task,
            seed,
            count,
            min_len,
            max_len,
            balanced_prefix: false,
            sp_true: false,
            closing_prob: 0.5,
            max_depth: crate::builders::DEFAULT_STACK_BOUND,
            retry_budget: 10_000,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::Config("count must be at least 1".into()));
        }
        if self.min_len > self.max_len {
            return Err(Error::Config(format!("min_len {} exceeds max_len {}", self.min_len, self.max_len)));
        }
        if !(0.0..=1.0).contains(&self.closing_prob) {
            return Err(Error::Config(format!("closing_prob {} outside [0, 1]", self.closing_prob)));
        }
        if self.task == Task::DyckPrefix && self.max_depth == 0 && self.max_len > 0 {
            return Err(Error::Config("max_depth must be at least 1 for non-empty Dyck prefixes".into()));
        }
        if self.task == Task::Other {
            return Err(Error::Config("no generator for task \"other\"".into()));
        }
        Ok(())
    }
}

/// Random stream for item `index` of a run seeded with `seed`.
///
/// Each item gets its own ChaCha stream, so item `i` is the same whichever
/// worker draws it and however many items precede it.
pub fn item_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn uniform_string<R: Rng>(rng: &mut R, alphabet: &[char], len: usize) -> String {
    (0..len).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect()
}

fn dyck_prefix<R: Rng>(rng: &mut R, len: usize, closing_prob: f64, max_depth: usize) -> String {
    let mut stack = Vec::with_capacity(len);
    let mut out = String::with_capacity(len);
    for _ in 0..len {
        let close = match stack.len() {
            0 => false,
            d if d >= max_depth => true,
            _ => rng.random_bool(closing_prob),
        };
        if close {
            out.push(if stack.pop() == Some('(') { ')' } else { ']' });
        } else {
            let open = if rng.random_bool(0.5) { '(' } else { '[' };
            stack.push(open);
            out.push(open);
        }
    }
    out
}

/// Draws one item; `None` when the filter rejected every attempt.
fn generate_item(config: &GeneratorConfig, index: usize) -> Option<String> {
    let mut rng = item_rng(config.seed, index as u64);
    for _ in 0..config.retry_budget.max(1) {
        let len = rng.random_range(config.min_len..=config.max_len);
        let candidate = match config.task {
            Task::Counting => uniform_string(&mut rng, &['a', 'b'], len),
            Task::Sp => uniform_string(&mut rng, &['a', 'b', 'c', 'd'], len),
            Task::DyckPrefix => dyck_prefix(&mut rng, len, config.closing_prob, config.max_depth),
            Task::Other => return None,
        };
        let keep = match config.task {
            Task::Counting => !config.balanced_prefix || has_balanced_prefix(&candidate),
            Task::Sp => !config.sp_true || sp_oracle(&candidate),
            _ => true,
        };
        if keep {
            return Some(candidate);
        }
    }
    None
}

/// Generates `config.count` inputs, deterministic in `config.seed`.
pub fn generate(config: &GeneratorConfig) -> Result<Vec<String>> {
    config.validate()?;
    (0..config.count)
        .map(|index| {
            generate_item(config, index).ok_or_else(|| {
                Error::Generation(format!(
                    "item {index}: no string passed the filter within {} attempts",
                    config.retry_budget
                ))
            })
        })
        .collect()
}
