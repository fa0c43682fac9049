// SPDX-License-Identifier: MIT OR Apache-2.0

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::{to_value, ExperimentReport, Table};
use crate::attribution::{attribute, AttributionOptions, Method};
use crate::builders::ModelName;
use crate::error::Result;
use crate::heatmap::{is_blank, Format, Heatmap};
use crate::model::{Task, WhiteBoxModel};
use crate::tasks::{bracket_oracle, counting_oracle, sp_oracle};

/// `(network, input, explained class)` for each row of the heatmap grid.
pub const QUALITATIVE_ROWS: [(ModelName, &str, &str); 25] = [
    (ModelName::Counting, "aaabb", "True"),
    (ModelName::Counting, "bbbaa", "True"),
    (ModelName::Counting, "aaabbb", "True"),
    (ModelName::Counting, "aabbb", "True"),
    (ModelName::Counting, "aaabb", "False"),
    (ModelName::Counting, "aabbb", "False"),
    (ModelName::SpCounter, "acb", "True"),
    (ModelName::SpCounter, "acbb", "True"),
    (ModelName::SpCounter, "aacb", "True"),
    (ModelName::SpCounter, "abcab", "True"),
    (ModelName::SpCounter, "aacc", "True"),
    (ModelName::SpCounter, "acb", "False"),
    (ModelName::SpCounter, "aacc", "False"),
    (ModelName::SpFsa, "acb", "True"),
    (ModelName::SpFsa, "acbb", "True"),
    (ModelName::SpFsa, "aacb", "True"),
    (ModelName::SpFsa, "abcab", "True"),
    (ModelName::SpFsa, "aacc", "True"),
    (ModelName::SpFsa, "acb", "False"),
    (ModelName::SpFsa, "aacc", "False"),
    (ModelName::Pda, "([[([", "]"),
    (ModelName::Pda, "([[([]", ")"),
    (ModelName::Pda, "([[]])", "None"),
    (ModelName::Pda, "[([][()", "]"),
    (ModelName::Pda, "[([][()", ")"),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QualitativeCell {
    pub method: Method,
    pub scores: Vec<f64>,
    pub blank: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QualitativeRow {
    /// 1-based row number in the grid.
    pub row: usize,
    pub network: &'static str,
    pub input: String,
    pub class: String,
    /// Ground truth from the task oracle.
    pub target: String,
    pub predicted: String,
    pub cells: Vec<QualitativeCell>,
}

impl QualitativeRow {
    pub fn cell(&self, method: Method) -> &QualitativeCell {
        self.cells.iter().find(|c| c.method == method).expect("every row has all five methods")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QualitativeResult {
    pub rows: Vec<QualitativeRow>,
}

fn oracle_label(model: &WhiteBoxModel, input: &str) -> Result<String> {
    let verdict = |b: bool| if b { "True" } else { "False" }.to_string();
    Ok(match model.task {
        Task::Counting => verdict(counting_oracle(input)),
        Task::Sp => verdict(sp_oracle(input)),
        Task::DyckPrefix => bracket_oracle(input)?.label().to_string(),
        Task::Other => model.classify(input)?.to_string(),
    })
}

fn run_row(row: usize, name: ModelName, input: &str, class: &str) -> Result<QualitativeRow> {
    let model = name.build_default();
    let tokens = model.encode(input)?;
    let c = model.resolve_class(class)?;
    let cells = Method::ALL
        .iter()
        .map(|&method| {
            let r = attribute(&model, &tokens, method, c, AttributionOptions::default())?;
            Ok(QualitativeCell { method, blank: is_blank(&r.tokens), scores: r.tokens })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QualitativeRow {
        row,
        network: name.as_str(),
        input: input.into(),
        class: class.into(),
        target: oracle_label(&model, input)?,
        predicted: model.classify(input)?.to_string(),
        cells,
    })
}

/// All five methods on every row of [`QUALITATIVE_ROWS`].
pub fn run_qualitative_suite() -> Result<QualitativeResult> {
    let rows = QUALITATIVE_ROWS
        .par_iter()
        .enumerate()
        .map(|(i, &(name, input, class))| run_row(i + 1, name, input, class))
        .collect::<Result<Vec<_>>>()?;
    Ok(QualitativeResult { rows })
}

impl QualitativeResult {
    pub fn report(&self) -> ExperimentReport {
        let mut grid = Table::new("grid", &["row", "network", "input", "class", "target", "method", "scores", "blank"]);
        for row in &self.rows {
            for cell in &row.cells {
                let scores = cell.scores.iter().map(|s| format!("{s:.6e}")).collect::<Vec<_>>().join(" ");
                grid.push(vec![
                    json!(row.row),
                    json!(row.network),
                    json!(row.input),
                    json!(row.class),
                    json!(row.target),
                    json!(cell.method.as_str()),
                    json!(scores),
                    json!(cell.blank),
                ]);
            }
        }
        ExperimentReport {
            experiment: "qualitative".into(),
            seed: None,
            config: json!({ "rows": QUALITATIVE_ROWS.len(), "methods": Method::ALL.map(Method::as_str) }),
            records: self.rows.iter().map(to_value).collect(),
            tables: vec![grid],
        }
    }

    /// The grid as a standalone HTML page, one heatmap per method column.
    pub fn to_html(&self) -> String {
        let mut out = String::from(
            "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>heatmaps</title></head><body>\n<table>\n<tr><th>#</th><th>network</th><th>c</th><th>target</th>",
        );
        for m in Method::ALL {
            out.push_str(&format!("<th>{m}</th>"));
        }
        out.push_str("</tr>\n");
        for row in &self.rows {
            out.push_str(&format!(
                "<tr><td>{}</td><td>{}</td><td>{}</td><td>{}</td>",
                row.row,
                row.network,
                html_text(&row.class),
                html_text(&row.target)
            ));
            for cell in &row.cells {
                let heatmap = Heatmap::from_chars(&row.input, cell.scores.clone()).expect("one score per token");
                out.push_str(&format!("<td>{}</td>", heatmap.render(Format::Html)));
            }
            out.push_str("</tr>\n");
        }
        out.push_str("</table>\n</body></html>\n");
        out
    }
}

fn html_text(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
