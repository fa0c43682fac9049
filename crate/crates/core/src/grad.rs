// SPDX-License-Identifier: MIT OR Apache-2.0

//! Input gradients of a logit, by backpropagation through time over a
//! recorded [`ForwardTrace`], and a central-difference oracle for testing.

use ndarray::{Array1, Array2, ArrayView2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lstm::{ForwardTrace, Gate};
use crate::model::WhiteBoxModel;

pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// `∂ŷ_c / ∂X_{t,i}` for every time step and feature.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputGradient {
    pub class: usize,
    /// T × D.
    pub matrix: Array2<f64>,
}

fn check_trace(model: &WhiteBoxModel, trace: &ForwardTrace, class: usize) -> Result<()> {
    if class >= model.num_classes() {
        return Err(Error::Config(format!("class index {class} out of range for {} classes", model.num_classes())));
    }
    let (d, h) = (model.input_dim(), model.hidden_dim());
    let consistent = trace.logits.len() == model.num_classes()
        && trace.steps.iter().all(|s| s.x.len() == d && s.h.len() == h && s.c.len() == h);
    if !consistent {
        return Err(Error::Config("trace was not produced by this model".into()));
    }
    Ok(())
}

/// Reverse-mode gradient of logit `class` with respect to every input feature,
/// evaluated at the recorded trace.
pub fn input_gradients(model: &WhiteBoxModel, trace: &ForwardTrace, class: usize) -> Result<InputGradient> {
    check_trace(model, trace, class)?;
    let (d, h) = (model.input_dim(), model.hidden_dim());
    let params = &model.params;
    let steps = trace.len();
    let mut matrix = Array2::zeros((steps, d));

    // Adjoints of h^(t) and c^(t), starting from the decoder row.
    let mut dh: Array1<f64> = model.decoder.weight.row(class).to_owned();
    let mut dc: Array1<f64> = Array1::zeros(h);

    for t in (0..steps).rev() {
        let step = &trace.steps[t];
        let c_prev = if t == 0 { Array1::zeros(h) } else { trace.steps[t - 1].c.clone() };
        let tanh_c = step.c.mapv(f64::tanh);

        // h = o ⊙ tanh(c)
        let d_o = &dh * &tanh_c;
        let dc_total = &dc + &(&dh * &step.o * &tanh_c.mapv(|v| 1.0 - v * v));
        // c = f ⊙ c_prev + i ⊙ g
        let d_f = &dc_total * &c_prev;
        let d_i = &dc_total * &step.g;
        let d_g = &dc_total * &step.i;

        let dz_g = &d_g * &step.g.mapv(|v| 1.0 - v * v);
        let dz_i = &d_i * &step.i.mapv(|v| v * (1.0 - v));
        let dz_f = &d_f * &step.f.mapv(|v| v * (1.0 - v));
        let dz_o = &d_o * &step.o.mapv(|v| v * (1.0 - v));

        let mut dx = Array1::zeros(d);
        let mut dh_prev = Array1::zeros(h);
        for (gate, dz) in Gate::ALL.iter().zip([&dz_g, &dz_i, &dz_f, &dz_o]) {
            let weights = params.gate(*gate);
            dx += &weights.input.t().dot(dz);
            dh_prev += &weights.recurrent.t().dot(dz);
        }
        matrix.row_mut(t).assign(&dx);

        dc = &dc_total * &step.f;
        dh = dh_prev;
    }
    Ok(InputGradient { class, matrix })
}

/// Central differences `(ŷ_c(X + h e) − ŷ_c(X − h e)) / 2h`, one feature at a time.
pub fn finite_difference(
    model: &WhiteBoxModel,
    inputs: ArrayView2<f64>,
    class: usize,
    step: f64,
) -> Result<InputGradient> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Config(format!("finite-difference step must be positive, got {step}")));
    }
    if class >= model.num_classes() {
        return Err(Error::Config(format!("class index {class} out of range")));
    }
    let mut probe = inputs.to_owned();
    let mut matrix = Array2::zeros(inputs.dim());
    for t in 0..inputs.nrows() {
        for i in 0..inputs.ncols() {
            let original = probe[[t, i]];
            probe[[t, i]] = original + step;
            let plus = model.forward_matrix(probe.view())?.logits[class];
            probe[[t, i]] = original - step;
            let minus = model.forward_matrix(probe.view())?.logits[class];
            probe[[t, i]] = original;
            matrix[[t, i]] = (plus - minus) / (2.0 * step);
        }
    }
    Ok(InputGradient { class, matrix })
}

/// `max |a − b| / max(1, |b|)` over all entries, with `b` the reference.
pub fn max_relative_error(actual: ArrayView2<f64>, reference: ArrayView2<f64>) -> f64 {
    actual.iter().zip(reference.iter()).map(|(a, b)| (a - b).abs() / b.abs().max(1.0)).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::build_counting_network;

    #[test]
    fn counting_false_class_has_no_gradient() {
        let model = build_counting_network(0.5, 50.0).unwrap();
        let trace = model.forward("aabab").unwrap();
        let g = input_gradients(&model, &trace, 1).unwrap();
        assert!(g.matrix.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn counting_true_class_features_cancel() {
        let model = build_counting_network(0.5, 50.0).unwrap();
        let trace = model.forward("abbaab").unwrap();
        let g = input_gradients(&model, &trace, 0).unwrap();
        for row in g.matrix.rows() {
            assert_eq!(row[0], -row[1]);
        }
    }

    #[test]
    fn single_a_matches_chain_rule() {
        // ŷ_True = tanh(tanh(u (x1 − x2))) with every gate exactly 1.
        let (u, m) = (0.5f64, 50.0);
        let model = build_counting_network(u, m).unwrap();
        let trace = model.forward("a").unwrap();
        let g = input_gradients(&model, &trace, 0).unwrap();
        let v = u.tanh();
        let expected = (1.0 - v.tanh().powi(2)) * (1.0 - v * v) * u;
        assert!((g.matrix[[0, 0]] - expected).abs() < 1e-12);
        assert!((expected - 0.31989).abs() < 1e-4);
        let fd = finite_difference(&model, model.one_hot(&[0]).view(), 0, DEFAULT_FD_STEP).unwrap();
        assert!((fd.matrix[[0, 0]] - expected).abs() < 1e-8);
    }

    #[test]
    fn class_out_of_range() {
        let model = build_counting_network(0.5, 50.0).unwrap();
        let trace = model.forward("a").unwrap();
        assert!(input_gradients(&model, &trace, 2).is_err());
        assert!(finite_difference(&model, model.one_hot(&[0]).view(), 0, 0.0).is_err());
    }

    #[test]
    fn mismatched_trace_is_rejected() {
        let counting = build_counting_network(0.5, 50.0).unwrap();
        let sp = crate::builders::build_sp_counter_network(0.7, 50.0).unwrap();
        let trace = sp.forward("ab").unwrap();
        assert!(input_gradients(&counting, &trace, 0).is_err());
    }
}
