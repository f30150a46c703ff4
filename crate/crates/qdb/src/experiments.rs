//! Two-stage gamble datasets and model-reproduction reports: built-in
//! experiment tables, CSV/JSON ingestion, per-row QDB fitting, Markov and
//! BAE comparison columns, error metrics, and report serialization.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{bae_fit, bae_predict, markov_total_probability, BaselineError};
use crate::model::{fit_h, run_pipeline, InterferenceSign, ModelError, QdbParams};

/// Errors raised by dataset ingestion and report assembly.
#[derive(Debug, Error)]
pub enum ExperimentError {
    /// The data file could not be read.
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    /// A field failed to parse (line numbers are 1-based and count the
    /// header).
    #[error("parse error at line {line}, field {field}: {message}")]
    ParseError {
        line: usize,
        field: String,
        message: String,
    },
    /// A parsed row violated the dataset invariants.
    #[error("invariant violation in row {row}: {message}")]
    InvariantViolation { row: String, message: String },
    /// Metrics require at least one row.
    #[error("report contains no rows")]
    EmptyReport,
    /// Propagated model error.
    #[error(transparent)]
    Model(#[from] ModelError),
    /// Propagated baseline error.
    #[error(transparent)]
    Baseline(#[from] BaselineError),
}

/// Face category of a categorization-decision trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FaceType {
    /// Wide faces (mostly categorized as the "good" group).
    #[serde(rename = "W")]
    Wide,
    /// Narrow faces (mostly "bad"; the disjunction effect is strong here).
    #[serde(rename = "N")]
    Narrow,
}

impl FaceType {
    /// The single-letter code used in data files.
    pub fn code(self) -> &'static str {
        match self {
            Self::Wide => "W",
            Self::Narrow => "N",
        }
    }

    fn parse(text: &str) -> Option<Self> {
        match text {
            "W" => Some(Self::Wide),
            "N" => Some(Self::Narrow),
            _ => None,
        }
    }
}

impl fmt::Display for FaceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// One observed dataset row: priors, conditionals, and the printed total
/// and unknown-condition attack probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    /// Study identifier.
    #[serde(rename = "dataset")]
    pub dataset_id: String,
    /// Wide or narrow face.
    pub face_type: FaceType,
    /// P(G): probability the face is categorized as the good group.
    pub p_g: f64,
    /// P(A|G): attack probability given the good categorization.
    pub p_a_given_g: f64,
    /// P(B) = 1 − P(G) (as printed; tables round to 2 decimals).
    pub p_b: f64,
    /// P(A|B): attack probability given the bad categorization.
    pub p_a_given_b: f64,
    /// P_T: the printed total-probability value.
    pub p_t: f64,
    /// P(A): the observed unknown-condition attack probability.
    pub p_a: f64,
}

impl ExperimentRow {
    /// Builds and validates a row.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        dataset_id: &str,
        face_type: FaceType,
        p_g: f64,
        p_a_given_g: f64,
        p_b: f64,
        p_a_given_b: f64,
        p_t: f64,
        p_a: f64,
    ) -> Result<Self, ExperimentError> {
        let row = Self {
            dataset_id: dataset_id.to_string(),
            face_type,
            p_g,
            p_a_given_g,
            p_b,
            p_a_given_b,
            p_t,
            p_a,
        };
        row.validate()?;
        Ok(row)
    }

    /// Identifier used in error messages: dataset plus face code.
    pub fn row_id(&self) -> String {
        format!("{} {}", self.dataset_id, self.face_type.code())
    }

    /// Checks the row invariants: every probability in [0, 1] and
    /// p_g + p_b = 1 within 0.01 (source tables are rounded to 2 decimals).
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let fields = [
            ("p_g", self.p_g),
            ("p_a_given_g", self.p_a_given_g),
            ("p_b", self.p_b),
            ("p_a_given_b", self.p_a_given_b),
            ("p_t", self.p_t),
            ("p_a", self.p_a),
        ];
        for (name, value) in fields {
            if !(0.0..=1.0).contains(&value) {
                return Err(ExperimentError::InvariantViolation {
                    row: self.row_id(),
                    message: format!("{name} = {value} outside [0, 1]"),
                });
            }
        }
        if (self.p_g + self.p_b - 1.0).abs() > 0.01 {
            return Err(ExperimentError::InvariantViolation {
                row: self.row_id(),
                message: format!("p_g + p_b = {} differs from 1", self.p_g + self.p_b),
            });
        }
        Ok(())
    }
}

/// Supported dataset file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    /// CSV with the exact header
    /// `dataset,face_type,p_g,p_a_given_g,p_b,p_a_given_b,p_t,p_a`.
    Csv,
    /// A JSON array of row objects with the same field names.
    Json,
}

/// The exact CSV header for dataset rows.
pub const CSV_HEADER: &str = "dataset,face_type,p_g,p_a_given_g,p_b,p_a_given_b,p_t,p_a";

/// The built-in experiment tables: five categorization-decision studies plus
/// their average, each with a wide-face and a narrow-face row.
pub fn builtin_datasets() -> Vec<ExperimentRow> {
    let raw: [(&str, FaceType, [f64; 6]); 12] = [
        ("townsend2000", FaceType::Wide, [0.84, 0.35, 0.16, 0.52, 0.37, 0.39]),
        ("townsend2000", FaceType::Narrow, [0.17, 0.41, 0.83, 0.63, 0.59, 0.69]),
        ("busemeyer2009", FaceType::Wide, [0.80, 0.37, 0.20, 0.53, 0.40, 0.39]),
        ("busemeyer2009", FaceType::Narrow, [0.20, 0.45, 0.80, 0.64, 0.60, 0.69]),
        ("wang2016_exp1", FaceType::Wide, [0.78, 0.39, 0.22, 0.52, 0.42, 0.42]),
        ("wang2016_exp1", FaceType::Narrow, [0.21, 0.41, 0.79, 0.58, 0.54, 0.59]),
        ("wang2016_exp2", FaceType::Wide, [0.78, 0.33, 0.22, 0.53, 0.37, 0.37]),
        ("wang2016_exp2", FaceType::Narrow, [0.24, 0.37, 0.76, 0.61, 0.55, 0.60]),
        ("wang2016_exp3", FaceType::Wide, [0.77, 0.34, 0.23, 0.58, 0.40, 0.39]),
        ("wang2016_exp3", FaceType::Narrow, [0.24, 0.33, 0.76, 0.66, 0.58, 0.62]),
        ("average", FaceType::Wide, [0.79, 0.36, 0.21, 0.54, 0.39, 0.39]),
        ("average", FaceType::Narrow, [0.21, 0.39, 0.79, 0.62, 0.57, 0.64]),
    ];
    raw.into_iter()
        .map(|(id, face, [p_g, p_a_given_g, p_b, p_a_given_b, p_t, p_a])| {
            ExperimentRow::new(id, face, p_g, p_a_given_g, p_b, p_a_given_b, p_t, p_a)
                .expect("built-in rows satisfy the invariants")
        })
        .collect()
}

/// Loads and validates dataset rows from a CSV or JSON file. An empty file
/// is a valid empty dataset. Row order is preserved.
pub fn load_rows(path: &Path, format: DataFormat) -> Result<Vec<ExperimentRow>, ExperimentError> {
    let content = std::fs::read_to_string(path).map_err(|e| ExperimentError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    if content.trim().is_empty() {
        return Ok(Vec::new());
    }
    let rows = match format {
        DataFormat::Csv => parse_csv_rows(&content)?,
        DataFormat::Json => parse_json_rows(&content)?,
    };
    for row in &rows {
        row.validate()?;
    }
    Ok(rows)
}

fn parse_csv_rows(content: &str) -> Result<Vec<ExperimentRow>, ExperimentError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(content.as_bytes());

    let headers = reader.headers().map_err(|e| ExperimentError::ParseError {
        line: 1,
        field: "header".into(),
        message: e.to_string(),
    })?;
    let expected: Vec<&str> = CSV_HEADER.split(',').collect();
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(ExperimentError::ParseError {
            line: 1,
            field: "header".into(),
            message: format!("expected header {CSV_HEADER:?}, got {:?}", got.join(",")),
        });
    }

    let field_names = ["p_g", "p_a_given_g", "p_b", "p_a_given_b", "p_t", "p_a"];
    let mut rows = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let line = index + 2;
        let record = record.map_err(|e| ExperimentError::ParseError {
            line,
            field: "record".into(),
            message: e.to_string(),
        })?;
        if record.len() != 8 {
            return Err(ExperimentError::ParseError {
                line,
                field: "record".into(),
                message: format!("expected 8 fields, got {}", record.len()),
            });
        }
        let dataset_id = record[0].to_string();
        let face_type =
            FaceType::parse(&record[1]).ok_or_else(|| ExperimentError::ParseError {
                line,
                field: "face_type".into(),
                message: format!("expected W or N, got {:?}", &record[1]),
            })?;
        let mut values = [0.0f64; 6];
        for (slot, name) in field_names.iter().enumerate() {
            values[slot] =
                record[slot + 2]
                    .parse::<f64>()
                    .map_err(|e| ExperimentError::ParseError {
                        line,
                        field: (*name).into(),
                        message: format!("{e}: {:?}", &record[slot + 2]),
                    })?;
        }
        rows.push(ExperimentRow {
            dataset_id,
            face_type,
            p_g: values[0],
            p_a_given_g: values[1],
            p_b: values[2],
            p_a_given_b: values[3],
            p_t: values[4],
            p_a: values[5],
        });
    }
    Ok(rows)
}

fn parse_json_rows(content: &str) -> Result<Vec<ExperimentRow>, ExperimentError> {
    serde_json::from_str::<Vec<ExperimentRow>>(content).map_err(|e| {
        ExperimentError::ParseError {
            line: e.line(),
            field: "json".into(),
            message: e.to_string(),
        }
    })
}

/// Observed quantities for one row, carrying both the printed total
/// probability and its recomputation from the printed conditionals (the two
/// differ by source-table rounding; neither is privileged).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservedValues {
    pub p_g: f64,
    pub p_a_given_g: f64,
    pub p_b: f64,
    pub p_a_given_b: f64,
    /// P_T as printed in the source table.
    pub p_t_printed: f64,
    /// P_T recomputed from the printed priors and conditionals.
    pub p_t_recomputed: f64,
    pub p_a: f64,
}

/// Fitted QDB outputs for one row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QdbRowReport {
    /// Fitted payoff parameter for the first belief.
    pub h1: f64,
    /// Fitted payoff parameter for the second belief.
    pub h2: f64,
    /// Model P(A|G); absent when the prior is degenerate.
    pub p_cond_target_b1: Option<f64>,
    /// Model P(A|B); absent when the prior is degenerate.
    pub p_cond_target_b2: Option<f64>,
    /// Model total probability P_T.
    pub p_total: f64,
    /// Interference-corrected unknown-condition prediction P(A).
    pub p_unknown: f64,
    /// Entanglement degree γ.
    pub gamma: f64,
    /// Interference term.
    pub interference: f64,
    /// Deng entropy of the known-condition BPA.
    pub ed_known: f64,
    /// Deng entropy of the unknown-condition BPA.
    pub ed_unknown: f64,
    /// True if the prediction had to be clamped into [0, 1].
    pub clamped: bool,
}

/// Fitted BAE outputs for one row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaeRowReport {
    /// Fitted payoff parameter for the first belief.
    pub h_g: f64,
    /// Fitted payoff parameter for the second belief.
    pub h_b: f64,
    /// Fitted entanglement strength.
    pub c: f64,
    /// Model P(A|G) at the fitted coupling.
    pub p_cond_target_b1: f64,
    /// Model P(A|B) at the fitted coupling.
    pub p_cond_target_b2: f64,
    /// Total-probability combination of the model conditionals.
    pub p_total: f64,
    /// Unknown-condition prediction.
    pub p_unknown: f64,
    /// |p_unknown − observed P(A)| after fitting.
    pub residual: f64,
    /// True when the residual met the fit tolerance.
    pub converged: bool,
}

/// One report row: observed values plus whichever model outputs were
/// computed for it (fit failures are recorded per-row instead of aborting
/// the report).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowReport {
    pub dataset: String,
    pub face_type: FaceType,
    pub observed: ObservedValues,
    /// The classical Markov prediction (always available).
    pub markov: f64,
    pub qdb: Option<QdbRowReport>,
    pub qdb_error: Option<String>,
    pub bae: Option<BaeRowReport>,
    pub bae_error: Option<String>,
}

/// Mean and maximum absolute error of one model's P(A) predictions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelErrorStats {
    pub mean_abs_error: f64,
    pub max_abs_error: f64,
    /// Number of rows contributing (rows where the model produced a
    /// prediction).
    pub rows: usize,
}

/// Per-model aggregate error metrics; a model absent from every row has no
/// stats.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ErrorMetrics {
    pub markov: Option<ModelErrorStats>,
    pub qdb: Option<ModelErrorStats>,
    pub bae: Option<ModelErrorStats>,
}

/// Report metadata: evolution time, interference sign, library version.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportMeta {
    pub t: f64,
    pub sign: i8,
    pub version: String,
}

/// A full reproduction/comparison report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionReport {
    pub rows: Vec<RowReport>,
    pub aggregate: ErrorMetrics,
    pub meta: ReportMeta,
}

fn fit_qdb_row(
    row: &ExperimentRow,
    t: f64,
    sign: InterferenceSign,
) -> Result<QdbRowReport, ExperimentError> {
    let h1 = fit_h(row.p_a_given_g, t)?;
    let h2 = fit_h(row.p_a_given_b, t)?;
    let params = QdbParams::new(h1, h2, row.p_g)?.with_t(t)?.with_sign(sign);
    let result = run_pipeline(&params)?;
    Ok(QdbRowReport {
        h1,
        h2,
        p_cond_target_b1: result.p_cond_target_b1,
        p_cond_target_b2: result.p_cond_target_b2,
        p_total: result.p_total,
        p_unknown: result.p_unknown,
        gamma: result.gamma,
        interference: result.interference,
        ed_known: result.ed_known,
        ed_unknown: result.ed_unknown,
        clamped: result.clamped,
    })
}

fn fit_bae_row(row: &ExperimentRow, t: f64) -> Result<BaeRowReport, ExperimentError> {
    let fit = bae_fit(row, t)?;
    let prediction = bae_predict(&fit.params)?;
    Ok(BaeRowReport {
        h_g: fit.params.h_g(),
        h_b: fit.params.h_b(),
        c: fit.params.c(),
        p_cond_target_b1: prediction.p_cond_target_b1,
        p_cond_target_b2: prediction.p_cond_target_b2,
        p_total: prediction.p_total,
        p_unknown: prediction.p_unknown,
        residual: fit.residual,
        converged: fit.converged,
    })
}

fn build_report(
    rows: &[ExperimentRow],
    t: f64,
    sign: InterferenceSign,
    fit_wide: bool,
    with_bae: bool,
) -> Result<PredictionReport, ExperimentError> {
    for row in rows {
        row.validate()?;
    }
    let mut reports = Vec::with_capacity(rows.len());
    for row in rows {
        let markov = markov_total_probability(row.p_g, row.p_a_given_g, row.p_a_given_b)?;
        let observed = ObservedValues {
            p_g: row.p_g,
            p_a_given_g: row.p_a_given_g,
            p_b: row.p_b,
            p_a_given_b: row.p_a_given_b,
            p_t_printed: row.p_t,
            p_t_recomputed: markov,
            p_a: row.p_a,
        };
        let fit_this_row = fit_wide || row.face_type == FaceType::Narrow;
        let (qdb, qdb_error) = if fit_this_row {
            match fit_qdb_row(row, t, sign) {
                Ok(report) => (Some(report), None),
                Err(err) => (None, Some(err.to_string())),
            }
        } else {
            (None, None)
        };
        let (bae, bae_error) = if with_bae && fit_this_row {
            match fit_bae_row(row, t) {
                Ok(report) => (Some(report), None),
                Err(err) => (None, Some(err.to_string())),
            }
        } else {
            (None, None)
        };
        reports.push(RowReport {
            dataset: row.dataset_id.clone(),
            face_type: row.face_type,
            observed,
            markov,
            qdb,
            qdb_error,
            bae,
            bae_error,
        });
    }
    let aggregate = if reports.is_empty() {
        ErrorMetrics::default()
    } else {
        aggregate_metrics(&reports)
    };
    Ok(PredictionReport {
        rows: reports,
        aggregate,
        meta: ReportMeta {
            t,
            sign: sign.signum(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
    })
}

/// Fits and runs the QDB model on each row (narrow rows only, unless
/// enabled for wide rows via [`reproduce_qdb_with`]), reporting observed
/// values, the Markov column, and all QDB quantities. Fit failures
/// (unreachable conditionals) are recorded on their row; other rows are
/// still processed. Deterministic: identical inputs give identical reports.
pub fn reproduce_qdb(
    rows: &[ExperimentRow],
    t: f64,
    sign: InterferenceSign,
) -> Result<PredictionReport, ExperimentError> {
    build_report(rows, t, sign, false, false)
}

/// [`reproduce_qdb`] with wide-row fitting switched on or off explicitly.
pub fn reproduce_qdb_with(
    rows: &[ExperimentRow],
    t: f64,
    sign: InterferenceSign,
    fit_wide: bool,
) -> Result<PredictionReport, ExperimentError> {
    build_report(rows, t, sign, fit_wide, false)
}

/// Like [`reproduce_qdb`] but additionally fits the BAE baseline per row,
/// so reports carry Markov, QDB, and BAE columns side by side.
pub fn compare_models(
    rows: &[ExperimentRow],
    t: f64,
    sign: InterferenceSign,
) -> Result<PredictionReport, ExperimentError> {
    build_report(rows, t, sign, false, true)
}

/// [`compare_models`] with wide-row fitting switched on or off explicitly.
pub fn compare_models_with(
    rows: &[ExperimentRow],
    t: f64,
    sign: InterferenceSign,
    fit_wide: bool,
) -> Result<PredictionReport, ExperimentError> {
    build_report(rows, t, sign, fit_wide, true)
}

fn stats_over(errors: &[f64]) -> Option<ModelErrorStats> {
    if errors.is_empty() {
        return None;
    }
    let mean = errors.iter().sum::<f64>() / errors.len() as f64;
    let max = errors.iter().fold(0.0f64, |acc, e| acc.max(*e));
    Some(ModelErrorStats {
        mean_abs_error: mean,
        max_abs_error: max,
        rows: errors.len(),
    })
}

fn aggregate_metrics(rows: &[RowReport]) -> ErrorMetrics {
    let markov_errors: Vec<f64> = rows
        .iter()
        .map(|r| (r.markov - r.observed.p_a).abs())
        .collect();
    let qdb_errors: Vec<f64> = rows
        .iter()
        .filter_map(|r| r.qdb.as_ref().map(|q| (q.p_unknown - r.observed.p_a).abs()))
        .collect();
    let bae_errors: Vec<f64> = rows
        .iter()
        .filter_map(|r| r.bae.as_ref().map(|b| (b.p_unknown - r.observed.p_a).abs()))
        .collect();
    ErrorMetrics {
        markov: stats_over(&markov_errors),
        qdb: stats_over(&qdb_errors),
        bae: stats_over(&bae_errors),
    }
}

/// Mean and maximum absolute error of each model's P(A) prediction against
/// the observed P(A), over the rows where that model produced a prediction.
pub fn error_metrics(report: &PredictionReport) -> Result<ErrorMetrics, ExperimentError> {
    if report.rows.is_empty() {
        return Err(ExperimentError::EmptyReport);
    }
    Ok(aggregate_metrics(&report.rows))
}

/// Serializes a report as pretty-printed JSON (full float precision).
pub fn report_to_json(report: &PredictionReport) -> String {
    let mut text =
        serde_json::to_string_pretty(report).expect("report serialization cannot fail");
    text.push('\n');
    text
}

fn opt_cell(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

/// Serializes a report as a flat CSV (full float precision; absent model
/// columns are empty).
pub fn report_to_csv(report: &PredictionReport) -> String {
    let mut out = String::from(
        "dataset,face_type,p_g,p_a_given_g,p_b,p_a_given_b,p_t_printed,p_t_recomputed,p_a,\
         markov,qdb_h1,qdb_h2,qdb_p_a_given_g,qdb_p_a_given_b,qdb_p_t,qdb_p_a,qdb_gamma,\
         qdb_interference,bae_h_g,bae_h_b,bae_c,bae_p_t,bae_p_a,bae_residual\n",
    );
    for row in &report.rows {
        let o = &row.observed;
        let q = row.qdb.as_ref();
        let b = row.bae.as_ref();
        let cells: Vec<String> = vec![
            row.dataset.clone(),
            row.face_type.code().to_string(),
            o.p_g.to_string(),
            o.p_a_given_g.to_string(),
            o.p_b.to_string(),
            o.p_a_given_b.to_string(),
            o.p_t_printed.to_string(),
            o.p_t_recomputed.to_string(),
            o.p_a.to_string(),
            row.markov.to_string(),
            opt_cell(q.map(|q| q.h1)),
            opt_cell(q.map(|q| q.h2)),
            opt_cell(q.and_then(|q| q.p_cond_target_b1)),
            opt_cell(q.and_then(|q| q.p_cond_target_b2)),
            opt_cell(q.map(|q| q.p_total)),
            opt_cell(q.map(|q| q.p_unknown)),
            opt_cell(q.map(|q| q.gamma)),
            opt_cell(q.map(|q| q.interference)),
            opt_cell(b.map(|b| b.h_g)),
            opt_cell(b.map(|b| b.h_b)),
            opt_cell(b.map(|b| b.c)),
            opt_cell(b.map(|b| b.p_total)),
            opt_cell(b.map(|b| b.p_unknown)),
            opt_cell(b.map(|b| b.residual)),
        ];
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Emits the comparison chart data series (one narrow row each):
/// `dataset,observed,markov,qdb,bae` with 6-decimal values.
pub fn chart_csv(report: &PredictionReport) -> String {
    let mut out = String::from("dataset,observed,markov,qdb,bae\n");
    for row in &report.rows {
        if row.face_type != FaceType::Narrow {
            continue;
        }
        let qdb = row
            .qdb
            .as_ref()
            .map(|q| format!("{:.6}", q.p_unknown))
            .unwrap_or_default();
        let bae = row
            .bae
            .as_ref()
            .map(|b| format!("{:.6}", b.p_unknown))
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{:.6},{:.6},{},{}\n",
            row.dataset, row.observed.p_a, row.markov, qdb, bae
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;
    use std::io::Write;

    fn narrow(id: &str) -> ExperimentRow {
        builtin_datasets()
            .into_iter()
            .find(|r| r.dataset_id == id && r.face_type == FaceType::Narrow)
            .unwrap()
    }

    #[test]
    fn builtin_tables_have_twelve_valid_rows() {
        let rows = builtin_datasets();
        assert_eq!(rows.len(), 12);
        for row in &rows {
            row.validate().unwrap();
        }
        assert_eq!(rows.iter().filter(|r| r.face_type == FaceType::Wide).count(), 6);

        let townsend = narrow("townsend2000");
        assert_eq!(
            (townsend.p_g, townsend.p_a_given_g, townsend.p_b,
             townsend.p_a_given_b, townsend.p_t, townsend.p_a),
            (0.17, 0.41, 0.83, 0.63, 0.59, 0.69)
        );
        let busemeyer = narrow("busemeyer2009");
        assert_eq!(
            (busemeyer.p_g, busemeyer.p_a_given_g, busemeyer.p_b,
             busemeyer.p_a_given_b, busemeyer.p_t, busemeyer.p_a),
            (0.20, 0.45, 0.80, 0.64, 0.60, 0.69)
        );
        let average = narrow("average");
        assert_eq!(
            (average.p_g, average.p_a_given_g, average.p_b,
             average.p_a_given_b, average.p_t, average.p_a),
            (0.21, 0.39, 0.79, 0.62, 0.57, 0.64)
        );
    }

    #[test]
    fn row_validation_rejects_bad_probabilities_and_priors() {
        let err = ExperimentRow::new("x", FaceType::Narrow, 1.2, 0.5, -0.2, 0.5, 0.5, 0.5)
            .unwrap_err();
        assert!(matches!(err, ExperimentError::InvariantViolation { .. }));

        let err = ExperimentRow::new("x", FaceType::Narrow, 0.4, 0.5, 0.4, 0.5, 0.5, 0.5)
            .unwrap_err();
        match err {
            ExperimentError::InvariantViolation { row, message } => {
                assert_eq!(row, "x N");
                assert!(message.contains("p_g + p_b"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    fn write_temp(content: &str, suffix: &str) -> tempfile::NamedTempFile {
        let mut file = tempfile::Builder::new().suffix(suffix).tempfile().unwrap();
        file.write_all(content.as_bytes()).unwrap();
        file.flush().unwrap();
        file
    }

    #[test]
    fn csv_loading_round_trips_the_builtin_narrow_rows() {
        let mut content = String::from(CSV_HEADER);
        content.push('\n');
        for row in builtin_datasets()
            .iter()
            .filter(|r| r.face_type == FaceType::Narrow)
        {
            content.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                row.dataset_id, row.face_type.code(), row.p_g, row.p_a_given_g,
                row.p_b, row.p_a_given_b, row.p_t, row.p_a
            ));
        }
        let file = write_temp(&content, ".csv");
        let rows = load_rows(file.path(), DataFormat::Csv).unwrap();
        assert_eq!(rows.len(), 6);
        let builtin: Vec<ExperimentRow> = builtin_datasets()
            .into_iter()
            .filter(|r| r.face_type == FaceType::Narrow)
            .collect();
        assert_eq!(rows, builtin);
    }

    #[test]
    fn csv_loading_reports_precise_parse_errors() {
        let file = write_temp("wrong,header\n", ".csv");
        match load_rows(file.path(), DataFormat::Csv).unwrap_err() {
            ExperimentError::ParseError { line, field, .. } => {
                assert_eq!(line, 1);
                assert_eq!(field, "header");
            }
            other => panic!("unexpected error {other:?}"),
        }

        let content = format!("{CSV_HEADER}\nt,N,0.17,oops,0.83,0.63,0.59,0.69\n");
        let file = write_temp(&content, ".csv");
        match load_rows(file.path(), DataFormat::Csv).unwrap_err() {
            ExperimentError::ParseError { line, field, .. } => {
                assert_eq!(line, 2);
                assert_eq!(field, "p_a_given_g");
            }
            other => panic!("unexpected error {other:?}"),
        }

        let content = format!("{CSV_HEADER}\nt,Q,0.17,0.41,0.83,0.63,0.59,0.69\n");
        let file = write_temp(&content, ".csv");
        match load_rows(file.path(), DataFormat::Csv).unwrap_err() {
            ExperimentError::ParseError { field, .. } => assert_eq!(field, "face_type"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn csv_loading_reports_invariant_violations_with_row_ids() {
        let content = format!("{CSV_HEADER}\nbad,N,1.2,0.41,0.83,0.63,0.59,0.69\n");
        let file = write_temp(&content, ".csv");
        match load_rows(file.path(), DataFormat::Csv).unwrap_err() {
            ExperimentError::InvariantViolation { row, .. } => assert_eq!(row, "bad N"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn empty_files_load_as_empty_datasets() {
        let file = write_temp("", ".csv");
        assert!(load_rows(file.path(), DataFormat::Csv).unwrap().is_empty());
        let file = write_temp("\n  \n", ".json");
        assert!(load_rows(file.path(), DataFormat::Json).unwrap().is_empty());
    }

    #[test]
    fn json_loading_round_trips_and_rejects_malformed_documents() {
        let rows = vec![narrow("townsend2000"), narrow("average")];
        let text = serde_json::to_string(&rows).unwrap();
        let file = write_temp(&text, ".json");
        let loaded = load_rows(file.path(), DataFormat::Json).unwrap();
        assert_eq!(loaded, rows);

        let file = write_temp("{ not json", ".json");
        assert!(matches!(
            load_rows(file.path(), DataFormat::Json).unwrap_err(),
            ExperimentError::ParseError { .. }
        ));
    }

    #[test]
    fn missing_files_surface_io_errors() {
        let err = load_rows(Path::new("/nonexistent/nope.csv"), DataFormat::Csv).unwrap_err();
        assert!(matches!(err, ExperimentError::Io { .. }));
    }

    #[test]
    fn reproduction_matches_the_published_narrow_row() {
        let report = reproduce_qdb(
            &[narrow("townsend2000")],
            FRAC_PI_2,
            InterferenceSign::Positive,
        )
        .unwrap();
        let qdb = report.rows[0].qdb.as_ref().unwrap();
        assert_abs_diff_eq!(qdb.p_cond_target_b1.unwrap(), 0.4100, epsilon = 2e-3);
        assert_abs_diff_eq!(qdb.p_cond_target_b2.unwrap(), 0.6301, epsilon = 2e-3);
        assert_abs_diff_eq!(qdb.p_total, 0.5926, epsilon = 2e-3);
        assert_abs_diff_eq!(qdb.p_unknown, 0.6715, epsilon = 2e-3);
        assert_abs_diff_eq!(report.rows[0].observed.p_t_recomputed, 0.5926, epsilon = 1e-12);
        assert_abs_diff_eq!(report.rows[0].observed.p_t_printed, 0.59, epsilon = 1e-12);
    }

    #[test]
    fn reproduction_fits_conditionals_exactly_for_all_narrow_rows() {
        let rows: Vec<ExperimentRow> = builtin_datasets()
            .into_iter()
            .filter(|r| r.face_type == FaceType::Narrow)
            .collect();
        let report = reproduce_qdb(&rows, FRAC_PI_2, InterferenceSign::Positive).unwrap();
        assert_eq!(report.rows.len(), 6);
        for (row, observed) in report.rows.iter().zip(&rows) {
            let qdb = row.qdb.as_ref().expect("narrow rows are fitted");
            assert_abs_diff_eq!(
                qdb.p_cond_target_b1.unwrap(),
                observed.p_a_given_g,
                epsilon = 1e-6
            );
            assert_abs_diff_eq!(
                qdb.p_cond_target_b2.unwrap(),
                observed.p_a_given_b,
                epsilon = 1e-6
            );
            assert!(qdb.interference > 0.0);
        }
    }

    #[test]
    fn wide_rows_are_reported_but_not_fitted_by_default() {
        let rows = builtin_datasets();
        let report = reproduce_qdb(&rows, FRAC_PI_2, InterferenceSign::Positive).unwrap();
        for row in &report.rows {
            match row.face_type {
                FaceType::Wide => {
                    assert!(row.qdb.is_none());
                    assert!(row.qdb_error.is_none());
                }
                FaceType::Narrow => assert!(row.qdb.is_some()),
            }
        }

        let fitted =
            reproduce_qdb_with(&rows, FRAC_PI_2, InterferenceSign::Positive, true).unwrap();
        for row in &fitted.rows {
            assert!(row.qdb.is_some(), "row {} not fitted", row.dataset);
        }
    }

    #[test]
    fn symmetric_synthetic_row_reproduces_the_midpoint() {
        let row = ExperimentRow::new("symmetric", FaceType::Narrow, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5)
            .unwrap();
        let report = reproduce_qdb(&[row], FRAC_PI_2, InterferenceSign::Positive).unwrap();
        let qdb = report.rows[0].qdb.as_ref().unwrap();
        assert_abs_diff_eq!(qdb.p_total, 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(qdb.p_cond_target_b1.unwrap(), 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(qdb.gamma, 0.129733106795312, epsilon = 1e-9);
    }

    #[test]
    fn unreachable_targets_are_surfaced_per_row() {
        let bad = ExperimentRow::new("bad", FaceType::Narrow, 0.5, 0.1, 0.5, 0.63, 0.37, 0.4)
            .unwrap();
        let good = narrow("townsend2000");
        let report =
            reproduce_qdb(&[bad, good], FRAC_PI_2, InterferenceSign::Positive).unwrap();
        assert!(report.rows[0].qdb.is_none());
        assert!(report.rows[0].qdb_error.as_ref().unwrap().contains("unreachable"));
        assert!(report.rows[1].qdb.is_some());
    }

    #[test]
    fn comparison_adds_markov_and_bae_columns() {
        let report = compare_models(
            &builtin_datasets(),
            FRAC_PI_2,
            InterferenceSign::Positive,
        )
        .unwrap();
        for row in &report.rows {
            match row.face_type {
                FaceType::Narrow => {
                    let bae = row.bae.as_ref().expect("narrow rows gain a BAE fit");
                    // Both quantum models predict more attacking than the
                    // classical total probability.
                    assert!(bae.p_unknown > row.markov);
                    assert!(row.qdb.as_ref().unwrap().p_unknown > row.markov);
                }
                FaceType::Wide => assert!(row.bae.is_none()),
            }
        }
        let townsend = &report.rows[1];
        assert_abs_diff_eq!(townsend.markov, 0.5926, epsilon = 1e-12);
        let bae = townsend.bae.as_ref().unwrap();
        assert!(bae.p_unknown > bae.p_total);
        assert_abs_diff_eq!(bae.p_unknown, 0.69, epsilon = 1e-3);

        let wide_townsend = &report.rows[0];
        assert_abs_diff_eq!(wide_townsend.markov, 0.3772, epsilon = 1e-12);
    }

    #[test]
    fn error_metrics_match_hand_computation() {
        let row = ExperimentRow::new("synthetic", FaceType::Narrow, 0.5, 0.4, 0.5, 0.6, 0.5, 0.52)
            .unwrap();
        let report = reproduce_qdb(&[row], FRAC_PI_2, InterferenceSign::Positive).unwrap();
        let metrics = error_metrics(&report).unwrap();
        let markov = metrics.markov.unwrap();
        assert_abs_diff_eq!(markov.mean_abs_error, 0.02, epsilon = 1e-12);
        assert_abs_diff_eq!(markov.max_abs_error, 0.02, epsilon = 1e-12);
        assert_eq!(markov.rows, 1);

        let perfect =
            ExperimentRow::new("perfect", FaceType::Narrow, 0.5, 0.4, 0.5, 0.6, 0.5, 0.5)
                .unwrap();
        let report = reproduce_qdb(&[perfect], FRAC_PI_2, InterferenceSign::Positive).unwrap();
        let metrics = error_metrics(&report).unwrap();
        assert_abs_diff_eq!(metrics.markov.unwrap().mean_abs_error, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn qdb_error_stays_below_the_replication_threshold() {
        let rows: Vec<ExperimentRow> = builtin_datasets()
            .into_iter()
            .filter(|r| r.face_type == FaceType::Narrow && r.dataset_id != "average")
            .collect();
        assert_eq!(rows.len(), 5);
        let report = reproduce_qdb(&rows, FRAC_PI_2, InterferenceSign::Positive).unwrap();
        let metrics = error_metrics(&report).unwrap();
        let qdb = metrics.qdb.unwrap();
        assert_eq!(qdb.rows, 5);
        assert!(qdb.mean_abs_error < 0.03, "MAE {}", qdb.mean_abs_error);
        assert_abs_diff_eq!(qdb.mean_abs_error, 0.0219, epsilon = 5e-4);
    }

    #[test]
    fn empty_reports_are_rejected_by_metrics_but_still_serialize() {
        let report = reproduce_qdb(&[], FRAC_PI_2, InterferenceSign::Positive).unwrap();
        assert!(matches!(
            error_metrics(&report).unwrap_err(),
            ExperimentError::EmptyReport
        ));
        assert!(report_to_json(&report).contains("\"rows\": []"));
    }

    #[test]
    fn reports_are_deterministic_and_carry_metadata() {
        let rows = builtin_datasets();
        let a = compare_models(&rows, FRAC_PI_2, InterferenceSign::Positive).unwrap();
        let b = compare_models(&rows, FRAC_PI_2, InterferenceSign::Positive).unwrap();
        assert_eq!(report_to_json(&a), report_to_json(&b));
        assert_eq!(a.meta.sign, 1);
        assert_abs_diff_eq!(a.meta.t, FRAC_PI_2, epsilon = 0.0);
        assert_eq!(a.meta.version, env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn chart_data_covers_the_narrow_series() {
        let report = compare_models(
            &builtin_datasets(),
            FRAC_PI_2,
            InterferenceSign::Positive,
        )
        .unwrap();
        let chart = chart_csv(&report);
        let lines: Vec<&str> = chart.lines().collect();
        assert_eq!(lines[0], "dataset,observed,markov,qdb,bae");
        assert_eq!(lines.len(), 7);
        assert!(lines[1].starts_with("townsend2000,0.690000,0.592600,"));
        for line in &lines[1..] {
            assert_eq!(line.split(',').count(), 5);
        }
    }

    #[test]
    fn report_csv_has_full_precision_and_empty_cells_for_unfitted_models() {
        let report = reproduce_qdb(
            &builtin_datasets(),
            FRAC_PI_2,
            InterferenceSign::Positive,
        )
        .unwrap();
        let csv = report_to_csv(&report);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 13);
        assert!(lines[0].starts_with("dataset,face_type,p_g,"));
        // Wide rows: no qdb/bae cells.
        assert!(lines[1].contains(",,"));
        // Narrow rows carry fitted values.
        assert!(lines[2].starts_with("townsend2000,N,0.17,0.41,0.83,0.63,0.59,0.5926,0.69,"));
    }
}
