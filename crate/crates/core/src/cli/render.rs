//! Markdown and plain-text rendering of reports, comparisons and ablations.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{CorpusScores, EvalReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Md,
    Txt,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "md" | "markdown" => Ok(Format::Md),
            "txt" | "text" => Ok(Format::Txt),
            _ => Err(Error::Unknown {
                what: "format",
                value: s.to_string(),
                expected: "md, txt".into(),
            }),
        }
    }
}

/// A header row plus body rows; the first column is left-aligned and the
/// rest right-aligned unless `left` says otherwise.
#[derive(Debug, Clone)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub left: Vec<bool>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        let left = (0..headers.len()).map(|i| i == 0).collect();
        Table {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
            left,
        }
    }

    pub fn left_aligned(mut self, columns: &[usize]) -> Self {
        for &c in columns {
            self.left[c] = true;
        }
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Md => self.markdown(),
            Format::Txt => self.text(),
        }
    }

    fn markdown(&self) -> String {
        let cell = |s: &str| s.replace('|', "\\|");
        let mut out = String::new();
        let line = |cells: &[String]| format!("| {} |\n", cells.iter().map(|c| cell(c)).collect::<Vec<_>>().join(" | "));
        out.push_str(&line(&self.headers));
        let rule: Vec<String> = self
            .left
            .iter()
            .map(|&l| if l { ":---".to_string() } else { "---:".to_string() })
            .collect();
        out.push_str(&format!("|{}|\n", rule.join("|")));
        for r in &self.rows {
            out.push_str(&line(r));
        }
        out
    }

    fn text(&self) -> String {
        let width = |i: usize| {
            self.rows
                .iter()
                .map(|r| r[i].chars().count())
                .chain(std::iter::once(self.headers[i].chars().count()))
                .max()
                .unwrap_or(0)
        };
        let widths: Vec<usize> = (0..self.headers.len()).map(width).collect();
        let line = |cells: &[String]| {
            let parts: Vec<String> = cells
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    if self.left[i] {
                        format!("{c:<w$}", w = widths[i])
                    } else {
                        format!("{c:>w$}", w = widths[i])
                    }
                })
                .collect();
            parts.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = line(&self.headers);
        let total = widths.iter().sum::<usize>() + 2 * widths.len().saturating_sub(1);
        out.push_str(&"-".repeat(total));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&line(r));
        }
        out
    }
}

pub fn score(x: f64) -> String {
    format!("{x:.4}")
}

fn heading(format: Format, level: usize, text: &str) -> String {
    match format {
        Format::Md => format!("{} {text}\n\n", "#".repeat(level)),
        Format::Txt => format!("{text}\n{}\n\n", if level == 1 { "=" } else { "-" }.repeat(text.chars().count())),
    }
}

/// `BLEU / METEOR / ROUGE-L` table for one corpus.
pub fn corpus_table(scores: &CorpusScores) -> Table {
    let mut t = Table::new(&["Samples", "BLEU", "METEOR", "ROUGE-L"]);
    t.push(vec![
        scores.count.to_string(),
        score(scores.bleu),
        score(scores.meteor),
        score(scores.rouge_l),
    ]);
    t
}

fn bleu_n_table(scores: &CorpusScores) -> Table {
    let headers: Vec<String> = (1..=scores.bleu_n.len()).map(|n| format!("BLEU-{n}")).collect();
    let refs: Vec<&str> = headers.iter().map(String::as_str).collect();
    let mut t = Table::new(&refs);
    t.left[0] = false;
    t.push(scores.bleu_n.iter().map(|&b| score(b)).collect());
    t
}

/// Corpus scores, answer-length slices and one qualitative row per sample.
pub fn render_report(report: &EvalReport, format: Format) -> String {
    let mut out = heading(format, 1, "Evaluation report");
    out.push_str(&corpus_table(&report.corpus).render(format));
    out.push('\n');
    out.push_str(&bleu_n_table(&report.corpus).render(format));
    out.push('\n');

    out.push_str(&heading(format, 2, "Scores by answer length"));
    let mut slices = Table::new(&["Answer words", "Fraction", "Samples", "BLEU", "METEOR", "ROUGE-L"]);
    for s in &report.slices {
        slices.push(vec![
            s.bucket.clone(),
            score(s.fraction),
            s.scores.count.to_string(),
            score(s.scores.bleu),
            score(s.scores.meteor),
            score(s.scores.rouge_l),
        ]);
    }
    out.push_str(&slices.render(format));
    out.push('\n');

    out.push_str(&heading(format, 2, "Qualitative comparison"));
    let mut q = Table::new(&["Image", "OCR token", "Ground truth", "Generated", "Exact match"]).left_aligned(&[1, 2, 3, 4]);
    for s in &report.samples {
        q.push(vec![
            s.image_id.clone(),
            s.ocr_text.clone(),
            s.references.join(" / "),
            s.candidate.clone(),
            if s.exact_match { "yes" } else { "no" }.to_string(),
        ]);
    }
    out.push_str(&q.render(format));
    out
}

/// One method row of a cross-dataset comparison.
#[derive(Debug, Clone)]
pub struct ComparisonRow<'a> {
    pub method: String,
    /// Scores per dataset column, `None` when that run is missing.
    pub scores: Vec<Option<&'a CorpusScores>>,
}

/// Methods as rows, and BLEU / METEOR / ROUGE-L under each dataset.
pub fn render_comparison(datasets: &[&str], rows: &[ComparisonRow<'_>], format: Format) -> String {
    let mut headers = vec!["Method".to_string()];
    for d in datasets {
        for m in ["BLEU", "METEOR", "ROUGE-L"] {
            headers.push(if datasets.len() > 1 { format!("{d} {m}") } else { m.to_string() });
        }
    }
    let refs: Vec<&str> = headers.iter().map(String::as_str).collect();
    let mut t = Table::new(&refs);
    for r in rows {
        let mut cells = vec![r.method.clone()];
        for s in &r.scores {
            match s {
                Some(s) => cells.extend([score(s.bleu), score(s.meteor), score(s.rouge_l)]),
                None => cells.extend(std::iter::repeat_n("-".to_string(), 3)),
            }
        }
        t.push(cells);
    }
    t.render(format)
}

pub(crate) fn push_heading(out: &mut String, format: Format, level: usize, text: &str) {
    let _ = write!(out, "{}", heading(format, level, text));
}
