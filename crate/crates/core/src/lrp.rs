// SPDX-License-Identifier: MIT OR Apache-2.0

//! Layer-wise relevance propagation with the epsilon rule.
//!
//! Gates are treated as constants: relevance follows only `h → c → (c_prev, g)`
//! and `g → z_g → (x, h_prev, bias)`. Every bias share, decoder or gate, is
//! accumulated into a single `bias_relevance`; whatever the stabiliser absorbs
//! shows up in the conservation residual.

use ndarray::{Array1, Array2};
use serde::Serialize;

use crate::attribution::{aggregate_tokens, AttributionMeta, AttributionResult, Method};
use crate::error::{Error, Result};
use crate::lstm::{ForwardTrace, Gate};
use crate::model::WhiteBoxModel;

pub const DEFAULT_EPSILON: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LrpResult {
    pub class: usize,
    /// T × D.
    pub features: Array2<f64>,
    pub tokens: Vec<f64>,
    pub bias_relevance: f64,
    pub epsilon: f64,
    /// The logit being explained.
    pub output: f64,
    pub residual: f64,
}

impl LrpResult {
    pub fn into_attribution(self) -> AttributionResult {
        let meta = AttributionMeta {
            forward_passes: 1,
            epsilon: Some(self.epsilon),
            bias_relevance: Some(self.bias_relevance),
            conservation_residual: Some(self.residual),
            ..Default::default()
        };
        AttributionResult { method: Method::Lrp, class: self.class, features: self.features, tokens: self.tokens, meta }
    }
}

fn stabilise(z: f64, eps: f64) -> f64 {
    if z >= 0.0 {
        z + eps
    } else {
        z - eps
    }
}

/// `ŷ_c − R_bias − Σ R`.
pub fn conservation_residual(result: &LrpResult) -> f64 {
    result.output - result.bias_relevance - result.features.sum()
}

/// Explains logit `class` of `trace`, which must come from `model`.
pub fn lrp_attribute(model: &WhiteBoxModel, trace: &ForwardTrace, class: usize, epsilon: f64) -> Result<LrpResult> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Config(format!("LRP epsilon must be positive, got {epsilon}")));
    }
    if class >= model.num_classes() {
        return Err(Error::Config(format!("class index {class} out of range for {} classes", model.num_classes())));
    }
    let (d, h) = (model.input_dim(), model.hidden_dim());
    if trace.logits.len() != model.num_classes() || trace.steps.iter().any(|s| s.x.len() != d || s.h.len() != h) {
        return Err(Error::Config("trace was not produced by this model".into()));
    }

    let output = trace.logits[class];
    let steps = trace.len();
    let mut features = Array2::zeros((steps, d));

    if steps == 0 {
        // The final state is all zeros, so the logit is pure decoder bias.
        let result =
            LrpResult { class, features, tokens: Vec::new(), bias_relevance: output, epsilon, output, residual: 0.0 };
        return Ok(result);
    }

    let decoder_w = model.decoder.weight.row(class);
    let decoder_b = model.decoder.bias[class];
    let last_h = &trace.steps[steps - 1].h;
    let denom = stabilise(output, epsilon);
    let mut r_h: Array1<f64> = Array1::from_shape_fn(h, |j| decoder_w[j] * last_h[j] * output / denom);
    let mut bias_relevance = decoder_b * output / denom;

    let cell = model.params.gate(Gate::Cell);
    let mut r_c_carry: Array1<f64> = Array1::zeros(h);
    for t in (0..steps).rev() {
        let step = &trace.steps[t];
        // h = o ⊙ tanh(c) hands its relevance to c unchanged.
        let r_c = &r_h + &r_c_carry;
        let mut r_g = Array1::zeros(h);
        let mut r_c_prev = Array1::zeros(h);
        for j in 0..h {
            let c_prev = if t == 0 { 0.0 } else { trace.steps[t - 1].c[j] };
            let denom = stabilise(step.c[j], epsilon);
            r_c_prev[j] = step.f[j] * c_prev * r_c[j] / denom;
            r_g[j] = step.i[j] * step.g[j] * r_c[j] / denom;
        }

        // z_g = W x + U h_prev + b; tanh passes relevance through.
        let h_prev = if t == 0 { None } else { Some(&trace.steps[t - 1].h) };
        let mut r_h_prev = Array1::zeros(h);
        for j in 0..h {
            if r_g[j] == 0.0 {
                continue;
            }
            let scale = r_g[j] / stabilise(step.z_g[j], epsilon);
            for i in 0..d {
                features[[t, i]] += cell.input[[j, i]] * step.x[i] * scale;
            }
            if let Some(h_prev) = h_prev {
                for k in 0..h {
                    r_h_prev[k] += cell.recurrent[[j, k]] * h_prev[k] * scale;
                }
            }
            bias_relevance += cell.bias[j] * scale;
        }
        r_h = r_h_prev;
        r_c_carry = r_c_prev;
    }

    let tokens = aggregate_tokens(features.view());
    let mut result = LrpResult { class, features, tokens, bias_relevance, epsilon, output, residual: 0.0 };
    result.residual = conservation_residual(&result);
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{build_counting_network, build_sp_counter_network};

    #[test]
    fn epsilon_must_be_positive() {
        let model = build_counting_network(0.5, 50.0).unwrap();
        let trace = model.forward("ab").unwrap();
        assert!(matches!(lrp_attribute(&model, &trace, 0, 0.0), Err(Error::Config(_))));
        assert!(lrp_attribute(&model, &trace, 0, -1.0).is_err());
        assert!(lrp_attribute(&model, &trace, 5, 1e-3).is_err());
    }

    #[test]
    fn empty_input_is_all_bias() {
        let model = build_counting_network(0.5, 50.0).unwrap();
        let trace = model.forward("").unwrap();
        let r = lrp_attribute(&model, &trace, 1, DEFAULT_EPSILON).unwrap();
        assert_eq!(r.residual, 0.0);
        assert_eq!(r.bias_relevance, trace.logits[1]);
        assert!(r.tokens.is_empty());
    }

    #[test]
    fn balanced_counting_string_is_blank() {
        let model = build_counting_network(0.5, 50.0).unwrap();
        let trace = model.forward("aaabbb").unwrap();
        let r = lrp_attribute(&model, &trace, 0, DEFAULT_EPSILON).unwrap();
        assert!(r.tokens.iter().all(|s| s.abs() < 1e-5), "{:?}", r.tokens);
    }

    #[test]
    fn counting_signs() {
        let model = build_counting_network(0.5, 50.0).unwrap();
        let trace = model.forward("aaab").unwrap();
        let r = lrp_attribute(&model, &trace, 0, DEFAULT_EPSILON).unwrap();
        assert!(r.tokens[..3].iter().all(|&s| s > 0.0));
        assert!(r.tokens[3] < 0.0);
    }

    #[test]
    fn acb_credits_b_not_a() {
        let model = build_sp_counter_network(0.7, 50.0).unwrap();
        let trace = model.forward("acb").unwrap();
        let r = lrp_attribute(&model, &trace, 0, DEFAULT_EPSILON).unwrap();
        assert!(r.tokens[2] > 0.0);
        assert!(r.tokens[0].abs() < 1e-5, "{:?}", r.tokens);
    }

    #[test]
    fn residual_shrinks_with_epsilon() {
        let model = build_counting_network(0.5, 50.0).unwrap();
        let trace = model.forward("aaab").unwrap();
        let residuals: Vec<f64> =
            [1e-2, 1e-3, 1e-4].iter().map(|&e| lrp_attribute(&model, &trace, 0, e).unwrap().residual.abs()).collect();
        assert!(residuals[0] > residuals[1] && residuals[1] > residuals[2], "{residuals:?}");
    }
}
