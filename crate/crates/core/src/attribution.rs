// SPDX-License-Identifier: MIT OR Apache-2.0

//! Occlusion, saliency, gradient × input and integrated gradients.
//!
//! Every method produces a feature-level matrix `R` (T × D) and token scores
//! `r_t = Σ_i R_{t,i}`. Gradients are taken with respect to all features,
//! including the zero entries of one-hot rows.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grad::input_gradients;
use crate::lrp;
use crate::model::WhiteBoxModel;

pub const DEFAULT_IG_STEPS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Occlusion,
    Saliency,
    #[serde(rename = "gxi")]
    GradientTimesInput,
    #[serde(rename = "ig")]
    IntegratedGradients,
    Lrp,
}

impl Method {
    pub const ALL: [Method; 5] =
        [Method::Occlusion, Method::Saliency, Method::GradientTimesInput, Method::IntegratedGradients, Method::Lrp];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Occlusion => "occlusion",
            Method::Saliency => "saliency",
            Method::GradientTimesInput => "gxi",
            Method::IntegratedGradients => "ig",
            Method::Lrp => "lrp",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown method {s:?}; expected occlusion, saliency, gxi, ig or lrp")))
    }
}

/// Knobs shared by all methods; each method reads only its own.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttributionOptions {
    pub ig_steps: usize,
    pub epsilon: f64,
}

impl Default for AttributionOptions {
    fn default() -> Self {
        Self { ig_steps: DEFAULT_IG_STEPS, epsilon: lrp::DEFAULT_EPSILON }
    }
}

/// Method-specific diagnostics.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AttributionMeta {
    /// Forward passes the method ran.
    pub forward_passes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ig_steps: Option<usize>,
    /// `|Σ_t r_t − (ŷ_c(X) − ŷ_c(0))|` for integrated gradients.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub completeness_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bias_relevance: Option<f64>,
    /// `ŷ_c − R_bias − Σ R` for LRP.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conservation_residual: Option<f64>,
}

/// Relevance of every input feature and token for one output class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttributionResult {
    pub method: Method,
    pub class: usize,
    /// T × D.
    pub features: Array2<f64>,
    /// Row sums of `features`.
    pub tokens: Vec<f64>,
    pub meta: AttributionMeta,
}

impl AttributionResult {
    pub(crate) fn from_features(method: Method, class: usize, features: Array2<f64>, meta: AttributionMeta) -> Self {
        let tokens = aggregate_tokens(features.view());
        Self { method, class, features, tokens, meta }
    }
}

/// Token-level scores: the sum of each row.
pub fn aggregate_tokens(features: ArrayView2<f64>) -> Vec<f64> {
    features.sum_axis(Axis(1)).to_vec()
}

fn require_nonempty(tokens: &[usize]) -> Result<()> {
    if tokens.is_empty() {
        Err(Error::Input("attribution needs at least one token".into()))
    } else {
        Ok(())
    }
}

fn check_class(model: &WhiteBoxModel, class: usize) -> Result<()> {
    if class < model.num_classes() {
        Ok(())
    } else {
        Err(Error::Config(format!("class index {class} out of range for {} classes", model.num_classes())))
    }
}

/// `r_t = ŷ_c(X) − ŷ_c(X with row t zeroed)`, placed in the active feature
/// column of row `t`.
pub fn occlusion(model: &WhiteBoxModel, tokens: &[usize], class: usize) -> Result<AttributionResult> {
    require_nonempty(tokens)?;
    check_class(model, class)?;
    let inputs = model.one_hot(tokens);
    let full = model.forward_matrix(inputs.view())?.logits[class];
    let mut features = Array2::zeros(inputs.dim());
    let mut occluded = inputs.clone();
    for (t, &tok) in tokens.iter().enumerate() {
        occluded.row_mut(t).fill(0.0);
        let score = full - model.forward_matrix(occluded.view())?.logits[class];
        occluded.row_mut(t).assign(&inputs.row(t));
        features[[t, tok]] = score;
    }
    let meta = AttributionMeta { forward_passes: tokens.len() + 1, ..Default::default() };
    Ok(AttributionResult::from_features(Method::Occlusion, class, features, meta))
}

/// `R_{t,i} = ∂ŷ_c/∂x_i^(t)`.
pub fn saliency(model: &WhiteBoxModel, tokens: &[usize], class: usize) -> Result<AttributionResult> {
    require_nonempty(tokens)?;
    check_class(model, class)?;
    let trace = model.forward_tokens(tokens)?;
    let grad = input_gradients(model, &trace, class)?;
    let meta = AttributionMeta { forward_passes: 1, ..Default::default() };
    Ok(AttributionResult::from_features(Method::Saliency, class, grad.matrix, meta))
}

/// `R_{t,i} = X_{t,i} ∂ŷ_c/∂x_i^(t)`.
pub fn gradient_times_input(model: &WhiteBoxModel, tokens: &[usize], class: usize) -> Result<AttributionResult> {
    require_nonempty(tokens)?;
    check_class(model, class)?;
    let inputs = model.one_hot(tokens);
    gradient_times_input_matrix(model, inputs.view(), class)
}

/// Gradient × input for an arbitrary real-valued input matrix.
pub fn gradient_times_input_matrix(
    model: &WhiteBoxModel,
    inputs: ArrayView2<f64>,
    class: usize,
) -> Result<AttributionResult> {
    check_class(model, class)?;
    let trace = model.forward_matrix(inputs)?;
    let grad = input_gradients(model, &trace, class)?;
    let meta = AttributionMeta { forward_passes: 1, ..Default::default() };
    Ok(AttributionResult::from_features(Method::GradientTimesInput, class, &grad.matrix * &inputs, meta))
}

/// Integrated gradients from the all-zero baseline, trapezoid rule on `steps`
/// equal intervals of α ∈ [0, 1].
pub fn integrated_gradients(
    model: &WhiteBoxModel,
    tokens: &[usize],
    class: usize,
    steps: usize,
) -> Result<AttributionResult> {
    require_nonempty(tokens)?;
    let inputs = model.one_hot(tokens);
    integrated_gradients_matrix(model, inputs.view(), class, steps)
}

/// Integrated gradients for an arbitrary real-valued input matrix.
pub fn integrated_gradients_matrix(
    model: &WhiteBoxModel,
    inputs: ArrayView2<f64>,
    class: usize,
    steps: usize,
) -> Result<AttributionResult> {
    check_class(model, class)?;
    if steps < 2 {
        return Err(Error::Config(format!("integrated gradients needs at least 2 steps, got {steps}")));
    }
    // Each node is an independent forward/backward pass; summing the collected
    // gradients in node order keeps the result independent of scheduling.
    let node_grads = (0..=steps)
        .into_par_iter()
        .map(|s| {
            let alpha = s as f64 / steps as f64;
            let scaled = &inputs * alpha;
            let trace = model.forward_matrix(scaled.view())?;
            input_gradients(model, &trace, class).map(|g| g.matrix)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut integral = Array2::zeros(inputs.dim());
    for (s, grad) in node_grads.iter().enumerate() {
        let weight = if s == 0 || s == steps { 0.5 } else { 1.0 };
        integral.scaled_add(weight / steps as f64, grad);
    }
    let features = &integral * &inputs;

    let at_input = model.forward_matrix(inputs)?.logits[class];
    let at_baseline = model.forward_matrix(Array2::zeros(inputs.dim()).view())?.logits[class];
    let total: f64 = features.sum();
    let meta = AttributionMeta {
        forward_passes: steps + 3,
        ig_steps: Some(steps),
        completeness_residual: Some((total - (at_input - at_baseline)).abs()),
        ..Default::default()
    };
    Ok(AttributionResult::from_features(Method::IntegratedGradients, class, features, meta))
}

/// Runs `method` on `tokens` for class `class`.
pub fn attribute(
    model: &WhiteBoxModel,
    tokens: &[usize],
    method: Method,
    class: usize,
    options: AttributionOptions,
) -> Result<AttributionResult> {
    match method {
        Method::Occlusion => occlusion(model, tokens, class),
        Method::Saliency => saliency(model, tokens, class),
        Method::GradientTimesInput => gradient_times_input(model, tokens, class),
        Method::IntegratedGradients => integrated_gradients(model, tokens, class, options.ig_steps),
        Method::Lrp => {
            require_nonempty(tokens)?;
            check_class(model, class)?;
            let trace = model.forward_tokens(tokens)?;
            Ok(lrp::lrp_attribute(model, &trace, class, options.epsilon)?.into_attribution())
        }
    }
}

/// Token scores as an owned vector; convenience for callers holding an `Array1`.
pub fn token_vector(result: &AttributionResult) -> Array1<f64> {
    Array1::from_vec(result.tokens.clone())
}
