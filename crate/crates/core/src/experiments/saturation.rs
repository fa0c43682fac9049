// SPDX-License-Identifier: MIT OR Apache-2.0

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::{to_value, ExperimentReport, Table};
use crate::attribution::{gradient_times_input, integrated_gradients, saliency, DEFAULT_IG_STEPS};
use crate::builders::{build_sp_counter_network, DEFAULT_M};
use crate::error::{Error, Result};

pub const SATURATION_U_VALUES: [f64; 8] = [0.6, 0.7, 0.8, 1.0, 4.0, 8.0, 16.0, 64.0];
pub const SATURATION_INPUT: &str = "accb";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaturationRow {
    pub u: f64,
    pub v: f64,
    pub y_true: f64,
    pub saliency: Vec<f64>,
    pub gxi: Vec<f64>,
    pub ig: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaturationResult {
    pub input: String,
    pub ig_steps: usize,
    pub rows: Vec<SaturationRow>,
}

/// Rebuilds the SP counter network at each `u` and records the True logit
/// and the three gradient heatmaps for `input`.
pub fn run_saturation_sweep(u_values: &[f64], input: &str) -> Result<SaturationResult> {
    if let Some(bad) = u_values.iter().find(|u| !(u.is_finite() && **u > 0.0)) {
        return Err(Error::Config(format!("saturation sweep needs positive u values, got {bad}")));
    }
    let rows = u_values
        .par_iter()
        .map(|&u| {
            let model = build_sp_counter_network(u, DEFAULT_M)?;
            let tokens = model.encode(input)?;
            let c = model.resolve_class("True")?;
            let trace = model.forward_tokens(&tokens)?;
            Ok(SaturationRow {
                u,
                v: u.tanh(),
                y_true: trace.logits[c],
                saliency: saliency(&model, &tokens, c)?.tokens,
                gxi: gradient_times_input(&model, &tokens, c)?.tokens,
                ig: integrated_gradients(&model, &tokens, c, DEFAULT_IG_STEPS)?.tokens,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SaturationResult { input: input.into(), ig_steps: DEFAULT_IG_STEPS, rows })
}

impl SaturationResult {
    pub fn report(&self) -> ExperimentReport {
        let mut table = Table::new("table", &["u", "v", "y_true"]);
        for row in &self.rows {
            table.push(vec![json!(row.u), json!(row.v), json!(row.y_true)]);
        }
        ExperimentReport {
            experiment: "saturation".into(),
            seed: None,
            config: json!({
                "input": self.input,
                "u_values": self.rows.iter().map(|r| r.u).collect::<Vec<_>>(),
                "m": DEFAULT_M,
                "ig_steps": self.ig_steps,
            }),
            records: self.rows.iter().map(to_value).collect(),
            tables: vec![table],
        }
    }
}
