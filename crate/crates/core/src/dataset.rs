// SPDX-License-Identifier: MIT OR Apache-2.0

//! Prompt datasets and accuracy reports.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::EnsembleModel;
use crate::error::{RadarError, Result};
use crate::features::{FeatureRow, FEATURE_NAMES};
use crate::scoring::ScoreSet;
use crate::trace::Label;

pub const BUNDLED_TRAIN: &str = include_str!("../data/train.jsonl");
pub const BUNDLED_TEST: &str = include_str!("../data/test.jsonl");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    ClearRecall,
    ClearReasoning,
    Challenging,
    ComplexReasoning,
    Train,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::ClearRecall,
        Category::ClearReasoning,
        Category::Challenging,
        Category::ComplexReasoning,
        Category::Train,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::ClearRecall => "clear_recall",
            Category::ClearReasoning => "clear_reasoning",
            Category::Challenging => "challenging",
            Category::ComplexReasoning => "complex_reasoning",
            Category::Train => "train",
        }
    }

    /// Row title in the rendered report.
    pub fn title(self) -> &'static str {
        match self {
            Category::ClearRecall => "Clear Recall",
            Category::ClearReasoning => "Clear Reasoning",
            Category::Challenging => "Challenging Cases",
            Category::ComplexReasoning => "Complex Reasoning",
            Category::Train => "Training",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Category {
    type Err = RadarError;

    fn from_str(s: &str) -> Result<Self> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| RadarError::InvalidInput(format!("unknown category {s:?}")))
    }
}

/// Whether a prompt was published as-is or written to fill the published
/// composition counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Verbatim,
    Reconstructed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PromptRecord {
    pub prompt: String,
    pub label: Label,
    pub category: Category,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

/// Parses JSONL; blank lines are skipped and errors carry 1-based line numbers.
pub fn parse_dataset(text: &str) -> Result<Vec<PromptRecord>> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| RadarError::Dataset { line: i + 1, message };
        let rec: PromptRecord = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
        if rec.prompt.trim().is_empty() {
            return Err(bad("empty prompt".into()));
        }
        records.push(rec);
    }
    Ok(records)
}

pub fn load_dataset(path: &Path) -> Result<Vec<PromptRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| RadarError::io(path, e))?;
    parse_dataset(&text)
}

pub fn bundled_train() -> Vec<PromptRecord> {
    parse_dataset(BUNDLED_TRAIN).expect("bundled training set parses")
}

pub fn bundled_test() -> Vec<PromptRecord> {
    parse_dataset(BUNDLED_TEST).expect("bundled test set parses")
}

/// Stable id for the record on 1-based `line` of a dataset named `stem`.
pub fn prompt_id(stem: &str, line: usize) -> String {
    format!("{stem}-{line:03}")
}

/// Record counts by label and by category.
pub fn composition(records: &[PromptRecord]) -> (BTreeMap<Label, usize>, BTreeMap<Category, usize>) {
    let mut by_label = BTreeMap::new();
    let mut by_category = BTreeMap::new();
    for r in records {
        *by_label.entry(r.label).or_insert(0) += 1;
        *by_category.entry(r.category).or_insert(0) += 1;
    }
    (by_label, by_category)
}

/// Exact `correct / total` count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub correct: usize,
    pub total: usize,
}

impl Tally {
    /// `None` when empty.
    pub fn accuracy(&self) -> Option<f64> {
        (self.total > 0).then(|| self.correct as f64 / self.total as f64)
    }

    /// `100%` when perfect, otherwise one decimal place.
    pub fn percent(&self) -> String {
        match self.accuracy() {
            None => "n/a".into(),
            Some(_) if self.correct == self.total => "100%".into(),
            Some(a) => format!("{:.1}%", 100.0 * a),
        }
    }

    fn add(&mut self, correct: bool) {
        self.total += 1;
        self.correct += usize::from(correct);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryTally {
    pub category: String,
    #[serde(flatten)]
    pub tally: Tally,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LabelTallies {
    pub recall: Tally,
    pub reasoning: Tally,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExamplePrediction {
    pub prompt_id: String,
    pub label: Label,
    pub category: Option<String>,
    pub predicted: Label,
    pub confidence: f64,
    pub mean_probability: f64,
    pub scores: ScoreSet,
}

impl ExamplePrediction {
    pub fn correct(&self) -> bool {
        self.label == self.predicted
    }
}

pub const UNCATEGORIZED: &str = "uncategorized";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub radar_version: String,
    pub overall: Tally,
    pub by_label: LabelTallies,
    pub by_category: Vec<CategoryTally>,
    /// `confusion[actual][predicted]`, index 0 = recall, 1 = reasoning.
    pub confusion: [[usize; 2]; 2],
    pub predictions: Vec<ExamplePrediction>,
}

fn category_rank(name: &str) -> (usize, &str) {
    match name.parse::<Category>() {
        Ok(c) => (c as usize, ""),
        Err(_) if name == UNCATEGORIZED => (usize::MAX, ""),
        Err(_) => (Category::ALL.len(), name),
    }
}

fn class_index(l: Label) -> usize {
    if l.is_recall() {
        0
    } else {
        1
    }
}

impl EvaluationReport {
    pub fn from_predictions(predictions: Vec<ExamplePrediction>) -> Result<Self> {
        if predictions.is_empty() {
            return Err(RadarError::Empty("nothing to evaluate".into()));
        }
        let mut overall = Tally::default();
        let mut by_label = LabelTallies::default();
        let mut categories: BTreeMap<String, Tally> = BTreeMap::new();
        let mut confusion = [[0; 2]; 2];
        for p in &predictions {
            let ok = p.correct();
            overall.add(ok);
            match p.label {
                Label::Recall => by_label.recall.add(ok),
                Label::Reasoning => by_label.reasoning.add(ok),
            }
            let cat = p.category.clone().unwrap_or_else(|| UNCATEGORIZED.into());
            categories.entry(cat).or_default().add(ok);
            confusion[class_index(p.label)][class_index(p.predicted)] += 1;
        }
        let mut by_category: Vec<CategoryTally> = categories
            .into_iter()
            .map(|(category, tally)| CategoryTally { category, tally })
            .collect();
        by_category.sort_by(|a, b| category_rank(&a.category).cmp(&category_rank(&b.category)));
        Ok(EvaluationReport {
            radar_version: env!("CARGO_PKG_VERSION").into(),
            overall,
            by_label,
            by_category,
            confusion,
            predictions,
        })
    }

    /// Aligned two-section table: overall and per-label accuracy, then
    /// per-category accuracy with counts.
    pub fn render_table(&self) -> String {
        let overall = [
            ("Overall Accuracy", self.overall.percent()),
            ("Recall Tasks", self.by_label.recall.percent()),
            ("Reasoning Tasks", self.by_label.reasoning.percent()),
        ];
        let categories: Vec<(String, String)> = self
            .by_category
            .iter()
            .map(|c| {
                let title = c
                    .category
                    .parse::<Category>()
                    .map(|k| k.title().to_string())
                    .unwrap_or_else(|_| c.category.clone());
                (
                    title,
                    format!("{} ({}/{})", c.tally.percent(), c.tally.correct, c.tally.total),
                )
            })
            .collect();
        let width = overall
            .iter()
            .map(|(t, _)| t.len())
            .chain(categories.iter().map(|(t, _)| t.len()))
            .max()
            .unwrap_or(0);

        let mut out = String::new();
        let title = "RADAR Performance Results";
        let _ = writeln!(out, "{title}\n{}\n", "=".repeat(title.len()));
        let _ = writeln!(out, "Overall Performance");
        for (t, v) in &overall {
            let _ = writeln!(out, "  {t:<width$}  {v}");
        }
        let _ = writeln!(out, "\nCategory-wise Performance");
        for (t, v) in &categories {
            let _ = writeln!(out, "  {t:<width$}  {v}");
        }
        out
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        Ok(crate::jsonfmt::to_vec_pretty(self)?)
    }
}

/// Predicts every row and tallies the results. Rows must carry labels.
pub fn evaluate(model: &EnsembleModel, rows: &[FeatureRow]) -> Result<EvaluationReport> {
    if rows.is_empty() {
        return Err(RadarError::Empty("no labeled rows to evaluate".into()));
    }
    let predictions = rows
        .par_iter()
        .map(|row| {
            let label = row
                .label
                .ok_or_else(|| RadarError::InvalidInput(format!("row {:?} has no label", row.prompt_id)))?;
            let p = model.predict(&row.features)?;
            Ok(ExamplePrediction {
                prompt_id: row.prompt_id.clone(),
                label,
                category: row.category.clone(),
                predicted: p.label,
                confidence: p.confidence,
                mean_probability: p.mean_probability,
                scores: p.scores,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    EvaluationReport::from_predictions(predictions)
}

/// Per-example CSV: ids, prediction, scores, then the 37 features.
/// `rows` must be the rows the report was computed from, in order.
pub fn write_prediction_csv<W: Write>(writer: W, rows: &[FeatureRow], report: &EvaluationReport) -> Result<()> {
    if rows.len() != report.predictions.len() {
        return Err(RadarError::InvalidInput(format!(
            "{} rows but {} predictions",
            rows.len(),
            report.predictions.len()
        )));
    }
    let err = |e: csv::Error| RadarError::Malformed(format!("prediction CSV: {e}"));
    let mut w = csv::Writer::from_writer(writer);
    let head = [
        "prompt_id",
        "label",
        "category",
        "predicted",
        "confidence",
        "mean_probability",
        "rds",
        "rci",
        "mechanistic",
        "circuit",
    ];
    w.write_record(head.iter().chain(FEATURE_NAMES.iter())).map_err(err)?;
    for (row, p) in rows.iter().zip(&report.predictions) {
        let mut rec = vec![
            p.prompt_id.clone(),
            p.label.to_string(),
            p.category.clone().unwrap_or_default(),
            p.predicted.to_string(),
            p.confidence.to_string(),
            p.mean_probability.to_string(),
            p.scores.rds.to_string(),
            p.scores.rci.to_string(),
            p.scores.mechanistic.to_string(),
            p.scores.circuit.to_string(),
        ];
        rec.extend(row.features.0.iter().map(f64::to_string));
        w.write_record(&rec).map_err(err)?;
    }
    w.flush().map_err(|e| RadarError::Malformed(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pred(label: Label, predicted: Label, category: &str) -> ExamplePrediction {
        ExamplePrediction {
            prompt_id: String::new(),
            label,
            category: Some(category.into()),
            predicted,
            confidence: 0.5,
            mean_probability: 0.5,
            scores: ScoreSet {
                rds: 0.0,
                rci: 0.0,
                mechanistic: 0.0,
                circuit: 0.0,
            },
        }
    }

    #[test]
    fn bundled_composition() {
        let (labels, cats) = composition(&bundled_train());
        assert_eq!(labels[&Label::Recall], 15);
        assert_eq!(labels[&Label::Reasoning], 15);
        assert_eq!(cats[&Category::Train], 30);

        let test = bundled_test();
        assert_eq!(test.len(), 100);
        let (_, cats) = composition(&test);
        assert_eq!(cats[&Category::ClearRecall], 20);
        assert_eq!(cats[&Category::ClearReasoning], 20);
        assert_eq!(cats[&Category::Challenging], 30);
        assert_eq!(cats[&Category::ComplexReasoning], 30);
    }

    #[test]
    fn bundled_verbatim_samples() {
        let train = bundled_train();
        let verbatim: Vec<(&str, Label)> = train
            .iter()
            .filter(|r| r.provenance == Some(Provenance::Verbatim))
            .map(|r| (r.prompt.as_str(), r.label))
            .collect();
        assert_eq!(verbatim.len(), 4);
        assert!(verbatim.contains(&("2 + 2 equals", Label::Recall)));
        let test = bundled_test();
        let sum = test
            .iter()
            .find(|r| r.prompt == "What is the sum of 10 and 15?")
            .unwrap();
        assert_eq!((sum.label, sum.category), (Label::Reasoning, Category::Challenging));
        assert_eq!(
            test.iter()
                .filter(|r| r.provenance == Some(Provenance::Verbatim))
                .count(),
            4
        );
        assert!(train.iter().chain(&test).all(|r| r.provenance.is_some()));
    }

    #[test]
    fn missing_label_names_the_line() {
        let text = "{\"prompt\":\"a\",\"label\":\"recall\",\"category\":\"train\"}\n\n{\"prompt\":\"b\",\"category\":\"train\"}\n";
        match parse_dataset(text) {
            Err(RadarError::Dataset { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("label"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_category_and_empty_prompt() {
        let bad_cat = "{\"prompt\":\"a\",\"label\":\"recall\",\"category\":\"easy\"}";
        assert!(matches!(
            parse_dataset(bad_cat),
            Err(RadarError::Dataset { line: 1, .. })
        ));
        let empty = "{\"prompt\":\" \",\"label\":\"recall\",\"category\":\"train\"}";
        assert!(matches!(parse_dataset(empty), Err(RadarError::Dataset { line: 1, .. })));
    }

    #[test]
    fn perfect_predictions() {
        let preds = vec![
            pred(Label::Recall, Label::Recall, "clear_recall"),
            pred(Label::Reasoning, Label::Reasoning, "complex_reasoning"),
        ];
        let r = EvaluationReport::from_predictions(preds).unwrap();
        assert_eq!(r.overall.accuracy(), Some(1.0));
        assert!(r.by_category.iter().all(|c| c.tally.correct == c.tally.total));
        assert_eq!(r.confusion, [[1, 0], [0, 1]]);
    }

    #[test]
    fn empty_report_is_an_error() {
        assert!(matches!(
            EvaluationReport::from_predictions(vec![]),
            Err(RadarError::Empty(_))
        ));
    }

    #[test]
    fn percent_format() {
        assert_eq!(Tally { correct: 20, total: 20 }.percent(), "100%");
        assert_eq!(Tally { correct: 23, total: 30 }.percent(), "76.7%");
        assert_eq!(Tally { correct: 0, total: 0 }.percent(), "n/a");
    }

    #[test]
    fn categories_sort_canonically() {
        let preds = vec![
            pred(Label::Recall, Label::Recall, "zeta"),
            pred(Label::Recall, Label::Recall, "challenging"),
            pred(Label::Recall, Label::Recall, "clear_recall"),
        ];
        let r = EvaluationReport::from_predictions(preds).unwrap();
        let names: Vec<&str> = r.by_category.iter().map(|c| c.category.as_str()).collect();
        assert_eq!(names, ["clear_recall", "challenging", "zeta"]);
    }
}
