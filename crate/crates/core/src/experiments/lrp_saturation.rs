// SPDX-License-Identifier: MIT OR Apache-2.0

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::{to_value, ExperimentReport, Table};
use crate::builders::{build_counting_network, DEFAULT_COUNTING_U};
use crate::error::{Error, Result};
use crate::heatmap::is_blank;
use crate::lrp::{lrp_attribute, DEFAULT_EPSILON};
use crate::lstm::sigmoid;
use crate::model::Task;
use crate::tasks::{balanced_prefix_ends, counting_oracle, generate, GeneratorConfig, RNG_ALGORITHM};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LrpSaturationConfig {
    pub m_values: Vec<f64>,
    pub n: usize,
    pub seed: u64,
    pub min_len: usize,
    pub max_len: usize,
}

impl LrpSaturationConfig {
    pub fn new(seed: u64) -> Self {
        Self { m_values: (4..=12).map(f64::from).collect(), n: 1000, seed, min_len: 4, max_len: 24 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LrpSaturationRow {
    pub m: f64,
    pub sigma_m: f64,
    /// Mean cell value right after the first balanced prefix.
    pub mean_c: f64,
    /// Percent of strings classified like the oracle.
    pub accuracy: f64,
    /// Percent of strings whose first balanced prefix is blank under LRP.
    pub blank: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LrpSaturationResult {
    pub config: LrpSaturationConfig,
    pub inputs: Vec<String>,
    pub rows: Vec<LrpSaturationRow>,
}

struct ItemOutcome {
    correct: bool,
    c_at_zero: f64,
    blank: bool,
}

/// Counting network at each `m`: accuracy, the residual cell value when the
/// counter returns to zero, and how often LRP blanks a balanced prefix.
pub fn run_lrp_saturation(config: &LrpSaturationConfig) -> Result<LrpSaturationResult> {
    if let Some(bad) = config.m_values.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
        return Err(Error::Config(format!("LRP saturation needs positive m values, got {bad}")));
    }
    let mut gen = GeneratorConfig::new(Task::Counting, config.seed, config.n, config.min_len, config.max_len);
    gen.balanced_prefix = true;
    let inputs = generate(&gen)?;

    let rows = config
        .m_values
        .iter()
        .map(|&m| {
            let model = build_counting_network(DEFAULT_COUNTING_U, m)?;
            let true_class = model.resolve_class("True")?;
            let outcomes = inputs
                .par_iter()
                .map(|input| {
                    let trace = model.forward(input)?;
                    let correct =
                        model.labels()[trace.predicted] == if counting_oracle(input) { "True" } else { "False" };
                    let first = balanced_prefix_ends(input).next().expect("generator keeps balanced strings");
                    let lrp = lrp_attribute(&model, &trace, true_class, DEFAULT_EPSILON)?;
                    Ok(ItemOutcome {
                        correct,
                        c_at_zero: trace.steps[first - 1].c[0],
                        blank: is_blank(&lrp.tokens[..first]),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let n = outcomes.len() as f64;
            let percent = |count: usize| 100.0 * count as f64 / n;
            Ok(LrpSaturationRow {
                m,
                sigma_m: sigmoid(m),
                mean_c: outcomes.iter().map(|o| o.c_at_zero).sum::<f64>() / n,
                accuracy: percent(outcomes.iter().filter(|o| o.correct).count()),
                blank: percent(outcomes.iter().filter(|o| o.blank).count()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LrpSaturationResult { config: config.clone(), inputs, rows })
}

impl LrpSaturationResult {
    pub fn report(&self) -> ExperimentReport {
        let mut table = Table::new("table", &["m", "sigma_m", "mean_c", "accuracy", "blank"]);
        for r in &self.rows {
            table.push(vec![json!(r.m), json!(r.sigma_m), json!(r.mean_c), json!(r.accuracy), json!(r.blank)]);
        }
        ExperimentReport {
            experiment: "lrp-saturation".into(),
            seed: Some(self.config.seed),
            config: json!({
                "m_values": self.config.m_values,
                "n": self.config.n,
                "min_len": self.config.min_len,
                "max_len": self.config.max_len,
                "u": DEFAULT_COUNTING_U,
                "epsilon": DEFAULT_EPSILON,
                "rng": RNG_ALGORITHM,
            }),
            records: self.rows.iter().map(to_value).collect(),
            tables: vec![table],
        }
    }
}
