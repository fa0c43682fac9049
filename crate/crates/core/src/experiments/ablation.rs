// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::{mean_std, to_value, ExperimentReport, Table};
use crate::attribution::{attribute, AttributionOptions, Method};
use crate::builders::ModelName;
use crate::error::{Error, Result};
use crate::model::{Task, WhiteBoxModel};
use crate::tasks::{generate, item_rng, minimal_ablation_count, sp_oracle, GeneratorConfig, RNG_ALGORITHM};

/// Scores within this distance of the maximum count as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Keeps tie-breaking draws off the streams used to generate the inputs.
const TIE_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AblationNetwork {
    SpCounter,
    SpFsa,
}

impl AblationNetwork {
    pub const ALL: [AblationNetwork; 2] = [AblationNetwork::SpCounter, AblationNetwork::SpFsa];

    fn model(self) -> WhiteBoxModel {
        match self {
            AblationNetwork::SpCounter => ModelName::SpCounter.build_default(),
            AblationNetwork::SpFsa => ModelName::SpFsa.build_default(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AblationNetwork::SpCounter => "sp-counter",
            AblationNetwork::SpFsa => "sp-fsa",
        }
    }
}

/// What picks the next token to delete.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AblationStrategy {
    Attribution(Method),
    Random,
    Optimal,
}

impl AblationStrategy {
    pub const ALL: [AblationStrategy; 7] = [
        AblationStrategy::Attribution(Method::Occlusion),
        AblationStrategy::Attribution(Method::Saliency),
        AblationStrategy::Attribution(Method::GradientTimesInput),
        AblationStrategy::Attribution(Method::IntegratedGradients),
        AblationStrategy::Attribution(Method::Lrp),
        AblationStrategy::Random,
        AblationStrategy::Optimal,
    ];
}

impl fmt::Display for AblationStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AblationStrategy::Attribution(m) => write!(f, "{m}"),
            AblationStrategy::Random => f.write_str("random"),
            AblationStrategy::Optimal => f.write_str("optimal"),
        }
    }
}

impl FromStr for AblationStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(AblationStrategy::Random),
            "optimal" => Ok(AblationStrategy::Optimal),
            other => other.parse().map(AblationStrategy::Attribution),
        }
    }
}

/// Which class the heatmaps explain while a string is being ablated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AblationClass {
    /// Always the True class.
    True,
    /// Whatever the network predicts for the current, shortened string.
    Predicted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationConfig {
    pub seed: u64,
    pub n: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub ig_steps: usize,
    pub class: AblationClass,
}

impl AblationConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            n: 100,
            min_len: 5,
            max_len: 20,
            ig_steps: crate::attribution::DEFAULT_IG_STEPS,
            class: AblationClass::True,
        }
    }

    /// The True-classified SP strings every strategy is tested on.
    pub fn inputs(&self) -> Result<Vec<String>> {
        let mut gen = GeneratorConfig::new(Task::Sp, self.seed, self.n, self.min_len, self.max_len);
        gen.sp_true = true;
        generate(&gen)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationItem {
    pub input: String,
    pub deleted: usize,
    /// `100 · deleted / |input|`.
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationSummary {
    pub network: AblationNetwork,
    pub strategy: String,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationResult {
    pub network: AblationNetwork,
    pub strategy: AblationStrategy,
    pub items: Vec<AblationItem>,
    pub summary: AblationSummary,
}

/// Index of a maximal score, uniformly among those within [`TIE_TOLERANCE`].
fn pick_max<R: Rng>(scores: &[f64], rng: &mut R) -> usize {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] >= max - TIE_TOLERANCE).collect();
    tied[rng.random_range(0..tied.len())]
}

fn tie_rng(seed: u64, index: usize) -> ChaCha8Rng {
    item_rng(seed ^ TIE_SEED_SALT, index as u64)
}

fn ablate(
    model: &WhiteBoxModel,
    strategy: AblationStrategy,
    config: &AblationConfig,
    input: &str,
    rng: &mut ChaCha8Rng,
) -> Result<usize> {
    if let AblationStrategy::Optimal = strategy {
        return Ok(minimal_ablation_count(input));
    }
    let true_class = model.resolve_class("True")?;
    let options = AttributionOptions { ig_steps: config.ig_steps, ..Default::default() };
    let mut current: Vec<char> = input.chars().collect();
    let mut deleted = 0;
    while sp_oracle(&current.iter().collect::<String>()) {
        let victim = match strategy {
            AblationStrategy::Random => rng.random_range(0..current.len()),
            AblationStrategy::Attribution(method) => {
                let text: String = current.iter().collect();
                let tokens = model.encode(&text)?;
                let class = match config.class {
                    AblationClass::True => true_class,
                    AblationClass::Predicted => model.forward_tokens(&tokens)?.predicted,
                };
                let result = attribute(model, &tokens, method, class, options)?;
                pick_max(&result.tokens, rng)
            }
            AblationStrategy::Optimal => unreachable!(),
        };
        current.remove(victim);
        deleted += 1;
    }
    Ok(deleted)
}

/// Deletes tokens from each input, highest score first, until the SP
/// oracle rejects it, and reports the deleted share of the string.
pub fn run_ablation(
    network: AblationNetwork,
    strategy: AblationStrategy,
    config: &AblationConfig,
) -> Result<AblationResult> {
    let inputs = config.inputs()?;
    run_ablation_on(network, strategy, config, &inputs)
}

/// [`run_ablation`] on a given input set.
pub fn run_ablation_on(
    network: AblationNetwork,
    strategy: AblationStrategy,
    config: &AblationConfig,
    inputs: &[String],
) -> Result<AblationResult> {
    let model = network.model();
    let items = inputs
        .par_iter()
        .enumerate()
        .map(|(index, input)| {
            let mut rng = tie_rng(config.seed, index);
            let deleted = ablate(&model, strategy, config, input, &mut rng)?;
            let len = input.chars().count();
            Ok(AblationItem { input: input.clone(), deleted, percent: 100.0 * deleted as f64 / len as f64 })
        })
        .collect::<Result<Vec<_>>>()?;
    let (mean, std) = mean_std(&items.iter().map(|i| i.percent).collect::<Vec<_>>());
    let summary = AblationSummary { network, strategy: strategy.to_string(), mean, std };
    Ok(AblationResult { network, strategy, items, summary })
}

/// Every strategy on both SP networks, sharing one input set.
pub fn run_ablation_suite(config: &AblationConfig) -> Result<Vec<AblationResult>> {
    let inputs = config.inputs()?;
    let mut results = Vec::new();
    for network in AblationNetwork::ALL {
        for strategy in AblationStrategy::ALL {
            results.push(run_ablation_on(network, strategy, config, &inputs)?);
        }
    }
    Ok(results)
}

/// Flattens ablation runs into one report with a summary table.
pub fn ablation_report(config: &AblationConfig, results: &[AblationResult]) -> ExperimentReport {
    let mut table = Table::new("table", &["network", "strategy", "mean", "std"]);
    let mut records = Vec::new();
    for r in results {
        table.push(vec![
            json!(r.network.as_str()),
            json!(r.summary.strategy),
            json!(r.summary.mean),
            json!(r.summary.std),
        ]);
        for (index, item) in r.items.iter().enumerate() {
            records.push(json!({
                "network": r.network.as_str(),
                "strategy": r.summary.strategy,
                "index": index,
                "item": to_value(item),
            }));
        }
    }
    ExperimentReport {
        experiment: "ablation".into(),
        seed: Some(config.seed),
        config: json!({
            "n": config.n,
            "min_len": config.min_len,
            "max_len": config.max_len,
            "ig_steps": config.ig_steps,
            "class": to_value(&config.class),
            "tie_tolerance": TIE_TOLERANCE,
            "rng": RNG_ALGORITHM,
        }),
        records,
        tables: vec![table],
    }
}
