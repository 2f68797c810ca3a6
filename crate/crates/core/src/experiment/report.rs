use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ExperimentConfig;
use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub rows: usize,
    pub dim: usize,
    pub classes: usize,
}

impl DatasetSummary {
    pub fn of(ds: &Dataset) -> Self {
        Self {
            rows: ds.len(),
            dim: ds.dim(),
            classes: ds.n_classes(),
        }
    }
}

/// Accuracy series of one method; accuracies are fractions in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub name: String,
    pub title: String,
    pub accuracies: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation (n − 1) over √R; 0 for a single run.
    pub stderr: f64,
    pub wall_clock_secs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSeeds {
    pub run: usize,
    pub seed: u64,
    pub methods: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub dataset: DatasetSummary,
    pub runs: usize,
    pub single_run: bool,
    pub protocol: String,
    pub methods: Vec<MethodResult>,
    pub seeds: Vec<RunSeeds>,
}

impl ExperimentReport {
    pub fn method(&self, name: &str) -> Option<&MethodResult> {
        self.methods.iter().find(|m| m.name == name)
    }

    /// Copy with every wall-clock field zeroed, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        for m in &mut r.methods {
            m.wall_clock_secs.iter_mut().for_each(|t| *t = 0.0);
        }
        r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: usize,
    pub config: ExperimentConfig,
    pub methods: Vec<MethodResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub parameter: String,
    pub grid: Vec<usize>,
    pub dataset: DatasetSummary,
    pub points: Vec<SweepPoint>,
    /// Per method, max − min of the mean accuracies across the grid.
    pub ranges: BTreeMap<String, f64>,
}

impl SweepReport {
    pub(crate) fn new(
        parameter: &str,
        grid: Vec<usize>,
        dataset: DatasetSummary,
        points: Vec<SweepPoint>,
    ) -> Self {
        let mut ranges = BTreeMap::new();
        if let Some(first) = points.first() {
            for m in &first.methods {
                let means: Vec<f64> = points
                    .iter()
                    .filter_map(|p| p.methods.iter().find(|r| r.name == m.name))
                    .map(|r| r.mean)
                    .collect();
                let hi = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let lo = means.iter().copied().fold(f64::INFINITY, f64::min);
                ranges.insert(m.name.clone(), hi - lo);
            }
        }
        Self {
            parameter: parameter.to_string(),
            grid,
            dataset,
            points,
            ranges,
        }
    }

    /// Mean accuracy of `method` at each grid point.
    pub fn means(&self, method: &str) -> Vec<f64> {
        self.points
            .iter()
            .filter_map(|p| p.methods.iter().find(|m| m.name == method))
            .map(|m| m.mean)
            .collect()
    }

    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        for p in &mut r.points {
            for m in &mut p.methods {
                m.wall_clock_secs.iter_mut().for_each(|t| *t = 0.0);
            }
        }
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Table,
    Csv,
    Json,
}

/// `"88.04 ± 0.107"` from a mean and standard error given in percent.
pub fn format_cell(mean_pct: f64, stderr_pct: f64) -> String {
    format!("{mean_pct:.2} ± {stderr_pct:.3}")
}

fn cell(m: &MethodResult) -> String {
    format_cell(100.0 * m.mean, 100.0 * m.stderr)
}

fn csv_text(header: &[&str], rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| Error::Config(format!("csv output: {e}"));
    w.write_record(header).map_err(fail)?;
    for r in rows {
        w.write_record(&r).map_err(fail)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Config(format!("csv output: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
}

/// Renders a report in each of the output formats.
pub trait Emit: Serialize {
    fn table(&self) -> String;

    fn csv(&self) -> Result<String>;

    fn json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    fn render(&self, format: ReportFormat) -> Result<String> {
        match format {
            ReportFormat::Table => Ok(self.table()),
            ReportFormat::Csv => self.csv(),
            ReportFormat::Json => self.json(),
        }
    }
}

impl Emit for ExperimentReport {
    fn table(&self) -> String {
        let cells: Vec<String> = self.methods.iter().map(cell).collect();
        let name_w = self
            .methods
            .iter()
            .map(|m| m.title.len())
            .max()
            .unwrap_or(0)
            .max(6);
        let cell_w = cells
            .iter()
            .map(|c| c.chars().count())
            .max()
            .unwrap_or(0)
            .max(12);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<name_w$}  {:>cell_w$}  {:>10}",
            "Method", "Accuracy (%)", "Time (s)"
        );
        for (m, c) in self.methods.iter().zip(&cells) {
            let secs: f64 = m.wall_clock_secs.iter().sum();
            let pad = cell_w + c.len() - c.chars().count();
            let _ = writeln!(out, "{:<name_w$}  {:>pad$}  {:>10.2}", m.title, c, secs);
        }
        let _ = writeln!(
            out,
            "\n{} run(s), master seed {}; {}",
            self.runs, self.config.master_seed, self.protocol
        );
        if self.single_run {
            let _ = writeln!(out, "single run: standard errors are reported as 0");
        }
        out
    }

    /// `record,method,run,value` rows: one accuracy per (method, run), then
    /// mean and stderr summaries.
    fn csv(&self) -> Result<String> {
        let mut rows = Vec::new();
        for m in &self.methods {
            for (r, a) in m.accuracies.iter().enumerate() {
                rows.push(vec![
                    "accuracy".into(),
                    m.name.clone(),
                    r.to_string(),
                    a.to_string(),
                ]);
            }
        }
        for m in &self.methods {
            rows.push(vec![
                "mean".into(),
                m.name.clone(),
                String::new(),
                m.mean.to_string(),
            ]);
            rows.push(vec![
                "stderr".into(),
                m.name.clone(),
                String::new(),
                m.stderr.to_string(),
            ]);
        }
        csv_text(&["record", "method", "run", "value"], rows)
    }
}

impl Emit for SweepReport {
    fn table(&self) -> String {
        let Some(first) = self.points.first() else {
            return String::new();
        };
        let value_w = self.parameter.len().max(6);
        let mut out = String::new();
        let _ = write!(out, "{:<value_w$}", self.parameter);
        for m in &first.methods {
            let _ = write!(out, "  {:>16}", m.title);
        }
        out.push('\n');
        for p in &self.points {
            let _ = write!(out, "{:<value_w$}", p.value);
            for m in &p.methods {
                let c = cell(m);
                let pad = 16 + c.len() - c.chars().count();
                let _ = write!(out, "  {c:>pad$}");
            }
            out.push('\n');
        }
        out.push_str("\nrange (max - min of mean accuracy, percentage points):");
        for m in &first.methods {
            if let Some(r) = self.ranges.get(&m.name) {
                let _ = write!(out, " {} {:.3}", m.title, 100.0 * r);
            }
        }
        out.push('\n');
        out
    }

    /// `record,value,method,run,accuracy` rows per grid point.
    fn csv(&self) -> Result<String> {
        let mut rows = Vec::new();
        for p in &self.points {
            for m in &p.methods {
                for (r, a) in m.accuracies.iter().enumerate() {
                    rows.push(vec![
                        "accuracy".into(),
                        p.value.to_string(),
                        m.name.clone(),
                        r.to_string(),
                        a.to_string(),
                    ]);
                }
                rows.push(vec![
                    "mean".into(),
                    p.value.to_string(),
                    m.name.clone(),
                    String::new(),
                    m.mean.to_string(),
                ]);
                rows.push(vec![
                    "stderr".into(),
                    p.value.to_string(),
                    m.name.clone(),
                    String::new(),
                    m.stderr.to_string(),
                ]);
            }
        }
        for (name, r) in &self.ranges {
            rows.push(vec![
                "range".into(),
                String::new(),
                name.clone(),
                String::new(),
                r.to_string(),
            ]);
        }
        csv_text(
            &["record", self.parameter.as_str(), "method", "run", "value"],
            rows,
        )
    }
}

/// Writes the rendered report to `path`, or to standard output when `None`.
pub fn emit_report(report: &impl Emit, format: ReportFormat, path: Option<&Path>) -> Result<()> {
    let text = report.render(format)?;
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}
