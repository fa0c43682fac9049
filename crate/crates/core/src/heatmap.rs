// SPDX-License-Identifier: MIT OR Apache-2.0

//! Token heatmaps: per-row normalisation and a red-gray-blue diverging colormap.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Scores below this magnitude everywhere make a heatmap blank.
pub const BLANK_THRESHOLD: f64 = 1e-5;

pub const RED: Rgb = Rgb(0.706, 0.016, 0.150);
pub const NEUTRAL: Rgb = Rgb(0.867, 0.864, 0.863);
pub const BLUE: Rgb = Rgb(0.230, 0.299, 0.754);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rgb(pub f64, pub f64, pub f64);

impl Rgb {
    fn lerp(self, other: Rgb, t: f64) -> Rgb {
        let mix = |a: f64, b: f64| a * (1.0 - t) + b * t;
        Rgb(mix(self.0, other.0), mix(self.1, other.1), mix(self.2, other.2))
    }

    pub fn to_bytes(self) -> [u8; 3] {
        [self.0, self.1, self.2].map(|c| (c.clamp(0.0, 1.0) * 255.0).round() as u8)
    }
}

/// Colour for a normalised score in [−1, 1]; values outside are clamped.
pub fn colormap(score: f64) -> Rgb {
    let s = score.clamp(-1.0, 1.0);
    if s >= 0.0 {
        NEUTRAL.lerp(RED, s)
    } else {
        NEUTRAL.lerp(BLUE, -s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Ansi,
    Html,
    Latex,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ansi" => Ok(Format::Ansi),
            "html" => Ok(Format::Html),
            "latex" | "tex" => Ok(Format::Latex),
            _ => Err(Error::Config(format!("unknown heatmap format {s:?}; expected ansi, html or latex"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Heatmap {
    pub tokens: Vec<String>,
    pub scores: Vec<f64>,
    /// Largest `|score|`; zero when blank.
    pub normalization: f64,
    pub blank: bool,
}

impl Heatmap {
    pub fn new(tokens: Vec<String>, scores: Vec<f64>) -> Result<Self> {
        if tokens.len() != scores.len() {
            return Err(Error::Input(format!("{} tokens but {} scores", tokens.len(), scores.len())));
        }
        if let Some(bad) = scores.iter().find(|s| !s.is_finite()) {
            return Err(Error::Input(format!("non-finite score {bad}")));
        }
        let blank = is_blank(&scores);
        let normalization = if blank { 0.0 } else { scores.iter().fold(0.0f64, |m, s| m.max(s.abs())) };
        Ok(Self { tokens, scores, normalization, blank })
    }

    /// One heatmap per character of `input`.
    pub fn from_chars(input: &str, scores: Vec<f64>) -> Result<Self> {
        Self::new(input.chars().map(String::from).collect(), scores)
    }

    /// Scores divided by the row maximum; all zeros when blank.
    pub fn normalized(&self) -> Vec<f64> {
        if self.blank {
            vec![0.0; self.scores.len()]
        } else {
            self.scores.iter().map(|s| s / self.normalization).collect()
        }
    }

    pub fn colors(&self) -> Vec<Rgb> {
        self.normalized().into_iter().map(colormap).collect()
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Ansi => self.to_ansi(),
            Format::Html => self.to_html(),
            Format::Latex => self.to_latex(),
        }
    }

    /// 24-bit background colours with black text.
    pub fn to_ansi(&self) -> String {
        let mut out = String::new();
        for (tok, rgb) in self.tokens.iter().zip(self.colors()) {
            let [r, g, b] = rgb.to_bytes();
            let _ = write!(out, "\x1b[38;2;0;0;0;48;2;{r};{g};{b}m{tok}\x1b[0m");
        }
        out
    }

    pub fn to_html(&self) -> String {
        let mut out = String::from("<div class=\"heatmap\">");
        for ((tok, rgb), score) in self.tokens.iter().zip(self.colors()).zip(&self.scores) {
            let [r, g, b] = rgb.to_bytes();
            let _ = write!(
                out,
                "<span style=\"background-color: rgb({r}, {g}, {b}); font-family: monospace; font-weight: bold\" title=\"{score:e}\">{}</span>",
                escape_html(tok)
            );
        }
        out.push_str("</div>");
        out
    }

    pub fn to_latex(&self) -> String {
        self.tokens
            .iter()
            .zip(self.colors())
            .map(|(tok, Rgb(r, g, b))| {
                format!("\\textcolor[rgb]{{{r:.3},{g:.3},{b:.3}}}{{\\textbf{{{}}}}}", escape_latex(tok))
            })
            .collect()
    }
}

pub fn is_blank(scores: &[f64]) -> bool {
    scores.iter().all(|s| s.abs() < BLANK_THRESHOLD)
}

fn escape_html(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
    out
}

fn escape_latex(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\textbackslash{}"),
            '{' | '}' | '#' | '$' | '%' | '&' | '_' => {
                out.push('\\');
                out.push(c);
            }
            '~' => out.push_str("\\textasciitilde{}"),
            '^' => out.push_str("\\textasciicircum{}"),
            _ => out.push(c),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.chars().map(String::from).collect()
    }

    #[test]
    fn tiny_scores_are_blank() {
        let h = Heatmap::new(toks("abc"), vec![3e-6; 3]).unwrap();
        assert!(h.blank);
        assert_eq!(h.normalization, 0.0);
        assert!(h.colors().iter().all(|&c| c == NEUTRAL));
        assert!(!Heatmap::new(toks("ab"), vec![0.0, 1e-5]).unwrap().blank);
    }

    #[test]
    fn endpoints_hit_anchor_colours() {
        let h = Heatmap::new(toks("xyz"), vec![1.0, -1.0, 0.0]).unwrap();
        assert_eq!(h.colors(), vec![RED, BLUE, NEUTRAL]);
        let half = colormap(0.5);
        assert!((half.0 - (NEUTRAL.0 + RED.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn normalisation_is_per_row() {
        let h = Heatmap::new(toks("ab"), vec![0.2, -0.1]).unwrap();
        assert_eq!(h.normalized(), vec![1.0, -0.5]);
    }

    #[test]
    fn length_mismatch_is_an_input_error() {
        assert!(matches!(Heatmap::new(toks("ab"), vec![1.0]), Err(Error::Input(_))));
    }

    #[test]
    fn html_escapes_tokens() {
        let h = Heatmap::new(vec!["<".into(), "&".into()], vec![1.0, -1.0]).unwrap();
        let html = h.to_html();
        assert!(html.contains("&lt;") && html.contains("&amp;"));
        assert_eq!(html.matches("<span").count(), html.matches("</span>").count());
    }

    #[test]
    fn latex_matches_textcolor_form() {
        let h = Heatmap::new(toks("a"), vec![1.0]).unwrap();
        assert_eq!(h.to_latex(), "\\textcolor[rgb]{0.706,0.016,0.150}{\\textbf{a}}");
        let h = Heatmap::new(vec!["_".into()], vec![0.0]).unwrap();
        assert!(h.to_latex().contains("\\_"));
    }

    #[test]
    fn ansi_uses_truecolor() {
        let h = Heatmap::new(toks("a"), vec![-1.0]).unwrap();
        assert!(h.to_ansi().contains("48;2;59;76;192"));
    }
}
