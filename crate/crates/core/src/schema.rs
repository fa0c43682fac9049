// SPDX-License-Identifier: MIT OR Apache-2.0

//! JSON weight files.
//!
//! ```text
//! {
//!   "schema": "whitebox-lstm/v1",
//!   "kind": "counting", "task": "counting", "alphabet": ["a", "b"],
//!   "input_dim": 2, "hidden_dim": 1,
//!   "hyper": { "u": 0.5, "v": 0.4621.., "m": 50.0, "k": null },
//!   "gates": { "g": GATE, "i": GATE, "f": GATE, "o": GATE },
//!   "decoder": { "weight": MATRIX, "bias": [..], "labels": ["True", "False"] }
//! }
//! GATE   = { "input": MATRIX, "recurrent": MATRIX, "bias": [..] }
//! MATRIX = { "rows": R, "cols": C, "data": [row-major entries] }
//! ```
//!
//! `v` is written for readability and ignored on load.

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lstm::{Decoder, Gate, GateParams, LstmParameters};
use crate::model::{Hyper, Task, WhiteBoxModel};

pub const SCHEMA_ID: &str = "whitebox-lstm/v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDoc {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl MatrixDoc {
    fn from_array(a: &Array2<f64>) -> Self {
        Self { rows: a.nrows(), cols: a.ncols(), data: a.iter().copied().collect() }
    }

    fn to_array(&self, what: &str) -> Result<Array2<f64>> {
        Array2::from_shape_vec((self.rows, self.cols), self.data.clone()).map_err(|_| {
            Error::Config(format!(
                "{what}: {} entries do not fill a {}x{} matrix",
                self.data.len(),
                self.rows,
                self.cols
            ))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateDoc {
    pub input: MatrixDoc,
    pub recurrent: MatrixDoc,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GatesDoc {
    pub g: GateDoc,
    pub i: GateDoc,
    pub f: GateDoc,
    pub o: GateDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperDoc {
    pub u: Option<f64>,
    #[serde(default)]
    pub v: Option<f64>,
    pub m: Option<f64>,
    pub k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoderDoc {
    pub weight: MatrixDoc,
    pub bias: Vec<f64>,
    pub labels: Vec<String>,
}

/// On-disk form of a [`WhiteBoxModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDoc {
    pub schema: String,
    pub kind: String,
    pub task: Task,
    pub alphabet: Vec<String>,
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub hyper: HyperDoc,
    pub gates: GatesDoc,
    pub decoder: DecoderDoc,
}

fn gate_doc(g: &GateParams) -> GateDoc {
    GateDoc {
        input: MatrixDoc::from_array(&g.input),
        recurrent: MatrixDoc::from_array(&g.recurrent),
        bias: g.bias.to_vec(),
    }
}

fn gate_params(doc: &GateDoc, name: &str) -> Result<GateParams> {
    Ok(GateParams {
        input: doc.input.to_array(&format!("W_{name}x"))?,
        recurrent: doc.recurrent.to_array(&format!("W_{name}h"))?,
        bias: Array1::from_vec(doc.bias.clone()),
    })
}

impl ModelDoc {
    pub fn from_model(model: &WhiteBoxModel) -> Self {
        let p = &model.params;
        Self {
            schema: SCHEMA_ID.into(),
            kind: model.kind.clone(),
            task: model.task,
            alphabet: model.alphabet.iter().map(|c| c.to_string()).collect(),
            input_dim: model.input_dim(),
            hidden_dim: model.hidden_dim(),
            hyper: HyperDoc { u: model.hyper.u, v: model.hyper.v(), m: model.hyper.m, k: model.hyper.k },
            gates: GatesDoc {
                g: gate_doc(p.gate(Gate::Cell)),
                i: gate_doc(p.gate(Gate::Input)),
                f: gate_doc(p.gate(Gate::Forget)),
                o: gate_doc(p.gate(Gate::Output)),
            },
            decoder: DecoderDoc {
                weight: MatrixDoc::from_array(&model.decoder.weight),
                bias: model.decoder.bias.to_vec(),
                labels: model.decoder.labels.clone(),
            },
        }
    }

    pub fn into_model(self) -> Result<WhiteBoxModel> {
        if self.schema != SCHEMA_ID {
            return Err(Error::Config(format!("unsupported schema {:?}, expected {SCHEMA_ID:?}", self.schema)));
        }
        let alphabet = self
            .alphabet
            .iter()
            .map(|s| {
                let mut chars = s.chars();
                match (chars.next(), chars.next()) {
                    (Some(c), None) => Ok(c),
                    _ => Err(Error::Config(format!("alphabet symbol {s:?} is not a single character"))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let params = LstmParameters::new(
            self.input_dim,
            self.hidden_dim,
            gate_params(&self.gates.g, "g")?,
            gate_params(&self.gates.i, "i")?,
            gate_params(&self.gates.f, "f")?,
            gate_params(&self.gates.o, "o")?,
        )?;
        let decoder = Decoder::new(
            self.decoder.weight.to_array("decoder weight")?,
            Array1::from_vec(self.decoder.bias),
            self.decoder.labels,
        )?;
        let hyper = Hyper { u: self.hyper.u, m: self.hyper.m, k: self.hyper.k };
        WhiteBoxModel::new(self.kind, self.task, alphabet, params, decoder, hyper)
    }
}

pub fn to_json(model: &WhiteBoxModel) -> String {
    // Plain data with string keys; serialisation cannot fail.
    serde_json::to_string_pretty(&ModelDoc::from_model(model)).expect("model document serialises")
}

pub fn from_json(text: &str) -> Result<WhiteBoxModel> {
    let doc: ModelDoc = serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid model file: {e}")))?;
    doc.into_model()
}

pub fn save(model: &WhiteBoxModel, path: &Path) -> Result<()> {
    fs::write(path, to_json(model)).map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display())))
}

pub fn load(path: &Path) -> Result<WhiteBoxModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::ModelName;

    #[test]
    fn round_trip_is_exact() {
        for name in ModelName::ALL {
            let model = name.build_default();
            let back = from_json(&to_json(&model)).unwrap();
            assert_eq!(back, model, "{}", name.as_str());
        }
    }

    #[test]
    fn matrices_are_row_major() {
        let model = ModelName::Counting.build_default();
        let doc = ModelDoc::from_model(&model);
        assert_eq!(doc.gates.g.input.data, vec![0.5, -0.5]);
        assert_eq!((doc.decoder.weight.rows, doc.decoder.weight.cols), (2, 1));
    }

    #[test]
    fn rejects_bad_documents() {
        let model = ModelName::Counting.build_default();
        let mut doc = ModelDoc::from_model(&model);
        doc.schema = "other/v0".into();
        assert!(doc.clone().into_model().is_err());
        doc.schema = SCHEMA_ID.into();
        doc.gates.i.input.data.pop();
        assert!(doc.into_model().is_err());
        assert!(from_json("{").is_err());
    }
}
