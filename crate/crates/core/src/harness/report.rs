//! Experiment reports: accuracy per class and per evaluation condition with
//! sample counts, the exact configuration echoed back plus its hash, and
//! deterministic emission as JSON, CSV, or a markdown table.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CellStats {
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

impl CellStats {
    pub fn new(correct: usize, total: usize) -> Self {
        CellStats {
            correct,
            total,
            accuracy: correct as f64 / total as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExperimentReport {
    pub cue: String,
    pub classes: Vec<String>,
    pub n_train: usize,
    pub n_test: usize,
    pub overall: CellStats,
    pub per_class: BTreeMap<String, CellStats>,
    pub per_condition: BTreeMap<String, CellStats>,
    pub config_echo: serde_json::Value,
    pub config_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_seconds: Option<f64>,
}

impl ExperimentReport {
    /// Structural sanity: accuracies in range, every cell backed by samples.
    pub fn validate(&self) -> Result<()> {
        if self.per_condition.is_empty() {
            return Err(Error::EmptySplit {
                split: "test".into(),
            });
        }
        let cells = std::iter::once(&self.overall)
            .chain(self.per_class.values())
            .chain(self.per_condition.values());
        for cell in cells {
            if cell.total == 0 {
                return Err(Error::Manifest("report cell without samples".into()));
            }
            if !(0.0..=1.0).contains(&cell.accuracy) {
                return Err(Error::Manifest("accuracy out of [0, 1]".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Markdown,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(Error::Manifest(format!("unknown report format {other:?}"))),
        }
    }
}

fn to_csv(report: &ExperimentReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["section", "key", "correct", "total", "accuracy"])?;
    let mut write = |section: &str, key: &str, cell: &CellStats| -> Result<()> {
        w.write_record([
            section,
            key,
            &cell.correct.to_string(),
            &cell.total.to_string(),
            &format!("{:.6}", cell.accuracy),
        ])?;
        Ok(())
    };
    write("overall", "", &report.overall)?;
    for (label, cell) in &report.per_class {
        write("class", label, cell)?;
    }
    for (cond, cell) in &report.per_condition {
        write("condition", cond, cell)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Manifest(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Manifest(e.to_string()))
}

fn to_markdown(report: &ExperimentReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("# Detection report: {} cue\n\n", report.cue));
    out.push_str(&format!(
        "- classes: {}\n- train entries: {}\n- test entries: {}\n- config hash: `{}`\n",
        report.classes.join(", "),
        report.n_train,
        report.n_test,
        report.config_hash
    ));
    if let Some(rt) = report.runtime_seconds {
        out.push_str(&format!("- runtime: {rt:.2} s\n"));
    }
    out.push_str(&format!(
        "\n| overall accuracy | n |\n| --- | --- |\n| {:.4} | {} |\n",
        report.overall.accuracy, report.overall.total
    ));
    out.push_str("\n| class | accuracy | n |\n| --- | --- | --- |\n");
    for (label, cell) in &report.per_class {
        out.push_str(&format!(
            "| {label} | {:.4} | {} |\n",
            cell.accuracy, cell.total
        ));
    }
    out.push_str("\n| condition | accuracy | n |\n| --- | --- | --- |\n");
    for (cond, cell) in &report.per_condition {
        out.push_str(&format!(
            "| {cond} | {:.4} | {} |\n",
            cell.accuracy, cell.total
        ));
    }
    out
}

/// Write the report in the requested format. Output is a pure function of
/// the report contents, so fixed-config runs produce byte-identical files.
/// Renders a validated report to the requested format.
pub fn render_report(report: &ExperimentReport, format: ReportFormat) -> Result<String> {
    report.validate()?;
    Ok(match format {
        ReportFormat::Json => serde_json::to_string_pretty(report)?,
        ReportFormat::Csv => to_csv(report)?,
        ReportFormat::Markdown => to_markdown(report),
    })
}

pub fn emit_report(report: &ExperimentReport, format: ReportFormat, path: &Path) -> Result<()> {
    let text = render_report(report, format)?;
    std::fs::write(path, text)?;
    Ok(())
}

pub fn report_from_json(path: &Path) -> Result<ExperimentReport> {
    let bytes = std::fs::read(path)?;
    let report: ExperimentReport = serde_json::from_slice(&bytes)?;
    report.validate()?;
    Ok(report)
}
