//! Delimited-text ingestion and report serialization.
//!
//! Reports are schema-versioned JSON; unknown fields are ignored on read so
//! golden files stay forward compatible. CSV output uses period decimal
//! separators and 17 significant digits, which round-trips f64 exactly.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::ScreeningReport;
use crate::stats::ScreeningParams;
use crate::waterfall::{Trajectory, WaterfallCurves};
use crate::zscore::DataMatrix;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    SamplesAsRows,
    VariablesAsRows,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    FailOnMissing,
    DropColumns,
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub delimiter: u8,
    pub has_header: bool,
    pub orientation: Orientation,
    pub missing_policy: MissingPolicy,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            delimiter: b',',
            has_header: true,
            orientation: Orientation::SamplesAsRows,
            missing_policy: MissingPolicy::FailOnMissing,
        }
    }
}

/// Ingestion outcome: the matrix plus any columns dropped for missing data.
#[derive(Debug, Clone)]
pub struct LoadedMatrix {
    pub data: DataMatrix,
    pub dropped: Vec<String>,
}

fn is_missing_token(token: &str) -> bool {
    matches!(
        token.to_ascii_lowercase().as_str(),
        "" | "na" | "nan" | "null"
    )
}

/// Parse a delimited file into a DataMatrix, oriented samples-as-rows.
///
/// Labels come from the header under `SamplesAsRows`; otherwise they are
/// generated as v0001, v0002, …. Row/column positions in errors are 1-based
/// file coordinates (the header line counts).
pub fn load_matrix(path: &Path, opts: &IngestOptions) -> Result<LoadedMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(false)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_path(path)?;

    let mut rows: Vec<Vec<Option<f64>>> = Vec::new();
    let mut header: Option<Vec<String>> = None;
    let mut parse_failures: Vec<(usize, usize, String)> = Vec::new();
    for (line_idx, record) in reader.records().enumerate() {
        let record = record?;
        if line_idx == 0 && opts.has_header {
            header = Some(record.iter().map(|s| s.to_string()).collect());
            continue;
        }
        let mut row = Vec::with_capacity(record.len());
        for (col_idx, cell) in record.iter().enumerate() {
            if is_missing_token(cell) {
                row.push(None);
            } else {
                match cell.parse::<f64>() {
                    Ok(v) => row.push(Some(v)),
                    Err(_) => {
                        parse_failures.push((line_idx + 1, col_idx + 1, cell.to_string()));
                        row.push(None);
                    }
                }
            }
        }
        rows.push(row);
    }
    if let Some((row, column, token)) = parse_failures.into_iter().next() {
        return Err(Error::ParseError { row, column, token });
    }
    if rows.is_empty() || rows[0].is_empty() {
        return Err(Error::EmptyMatrix);
    }

    // orient samples-as-rows
    let cells: Vec<Vec<Option<f64>>> = match opts.orientation {
        Orientation::SamplesAsRows => rows,
        Orientation::VariablesAsRows => {
            let nr = rows.len();
            let nc = rows[0].len();
            (0..nc)
                .map(|c| (0..nr).map(|r| rows[r][c]).collect())
                .collect()
        }
    };
    let n = cells.len();
    let p = cells[0].len();
    let labels: Vec<String> = match (opts.orientation, header) {
        (Orientation::SamplesAsRows, Some(h)) => {
            if h.len() != p {
                return Err(Error::DimensionMismatch(format!(
                    "header has {} fields but rows have {p}",
                    h.len()
                )));
            }
            h
        }
        // under variables-as-rows the header names samples, which the matrix
        // does not keep
        _ => (0..p).map(|j| format!("v{:04}", j + 1)).collect(),
    };

    let mut missing_columns: Vec<usize> = Vec::new();
    for j in 0..p {
        if (0..n).any(|i| cells[i][j].is_none()) {
            missing_columns.push(j);
        }
    }
    let mut dropped = Vec::new();
    let keep: Vec<usize> = match opts.missing_policy {
        MissingPolicy::FailOnMissing => {
            if !missing_columns.is_empty() {
                return Err(Error::MissingData(
                    missing_columns.iter().map(|&j| labels[j].clone()).collect(),
                ));
            }
            (0..p).collect()
        }
        MissingPolicy::DropColumns => {
            dropped = missing_columns.iter().map(|&j| labels[j].clone()).collect();
            (0..p).filter(|j| !missing_columns.contains(j)).collect()
        }
    };
    if keep.is_empty() {
        return Err(Error::EmptyMatrix);
    }

    let values = DMatrix::from_fn(n, keep.len(), |i, jj| cells[i][keep[jj]].unwrap());
    let kept_labels: Vec<String> = keep.iter().map(|&j| labels[j].clone()).collect();
    Ok(LoadedMatrix {
        data: DataMatrix::new(values, kept_labels)?,
        dropped,
    })
}

/// Run provenance written next to every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub input_path: String,
    pub input_sha256: String,
    pub tool_version: String,
    pub engine: String,
    pub threads: usize,
    pub elapsed_seconds: f64,
    pub parameters: ScreeningParams,
    pub dropped_columns: Vec<String>,
}

/// Everything `screen` produces for one run.
#[derive(Debug, Clone)]
pub struct ReportBundle {
    pub report: ScreeningReport,
    pub waterfall: WaterfallCurves,
    pub provenance: Provenance,
}

/// On-disk shape of report.json.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ReportFile {
    schema_version: String,
    #[serde(flatten)]
    report: ScreeningReport,
}

pub fn report_to_json(report: &ScreeningReport) -> Result<String> {
    let file = ReportFile {
        schema_version: SCHEMA_VERSION.to_string(),
        report: report.clone(),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn read_report(path: &Path) -> Result<ScreeningReport> {
    let text = fs::read_to_string(path)?;
    let file: ReportFile = serde_json::from_str(&text)?;
    Ok(file.report)
}

/// Fixed float formatting for CSV: 17 significant digits, locale independent.
fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_waterfall_csv<W: Write>(out: W, curves: &WaterfallCurves) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "delta",
        "rank",
        "vertex_label",
        "rho_i_delta",
        "lambda_value",
        "p_value",
    ])?;
    for (delta, curve) in &curves.curves {
        for (rank, point) in curve.iter().enumerate() {
            w.write_record([
                delta.to_string(),
                (rank + 1).to_string(),
                point.label.clone(),
                fmt_float(point.rho),
                fmt_float(point.lambda),
                fmt_float(point.p_value),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_trajectory_csv<W: Write>(out: W, traj: &Trajectory) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["delta", "vertex_label", "rho_i_delta", "lambda_value", "p_value"])?;
    for point in &traj.points {
        w.write_record([
            point.delta.to_string(),
            traj.label.clone(),
            fmt_float(point.rho),
            fmt_float(point.lambda),
            fmt_float(point.p_value),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Write report.json, waterfall.csv and provenance.json into `dir`.
/// Identical bundles produce byte-identical files.
pub fn write_report(bundle: &ReportBundle, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("report.json"), report_to_json(&bundle.report)?)?;
    let file = fs::File::create(dir.join("waterfall.csv"))?;
    write_waterfall_csv(file, &bundle.waterfall)?;
    fs::write(
        dir.join("provenance.json"),
        serde_json::to_string_pretty(&bundle.provenance)?,
    )?;
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{screen, GraphEngine};
    use crate::stats::{ScreeningMode, ScreeningParams};
    use crate::testutil::random_data;
    use crate::waterfall::build_waterfall;
    use crate::zscore::u_scores_from_data;
    use std::io::Write as _;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn loads_simple_csv_with_header() {
        let f = write_temp("a,b\n1,2\n2,4\n3,6\n");
        let loaded = load_matrix(f.path(), &IngestOptions::default()).unwrap();
        assert_eq!(loaded.data.n(), 3);
        assert_eq!(loaded.data.p(), 2);
        assert_eq!(loaded.data.labels(), ["a", "b"]);
        assert_eq!(loaded.data.values()[(2, 1)], 6.0);
        assert!(loaded.dropped.is_empty());
    }

    #[test]
    fn missing_token_fails_by_default() {
        let f = write_temp("a,b\n1,2\n2,NA\n3,6\n");
        match load_matrix(f.path(), &IngestOptions::default()) {
            Err(Error::MissingData(labels)) => assert_eq!(labels, vec!["b"]),
            other => panic!("expected MissingData, got {other:?}"),
        }
    }

    #[test]
    fn drop_columns_policy_records_removals() {
        let f = write_temp("a,b,c\n1,2,9\n2,NA,8\n3,6,7\n");
        let opts = IngestOptions {
            missing_policy: MissingPolicy::DropColumns,
            ..IngestOptions::default()
        };
        let loaded = load_matrix(f.path(), &opts).unwrap();
        assert_eq!(loaded.data.p(), 2);
        assert_eq!(loaded.data.labels(), ["a", "c"]);
        assert_eq!(loaded.dropped, vec!["b"]);
    }

    #[test]
    fn variables_as_rows_is_the_transpose() {
        let samples = write_temp("1,2\n2,4\n3,6\n");
        let variables = write_temp("1,2,3\n2,4,6\n");
        let base = IngestOptions {
            has_header: false,
            ..IngestOptions::default()
        };
        let a = load_matrix(samples.path(), &base).unwrap();
        let b = load_matrix(
            variables.path(),
            &IngestOptions {
                has_header: false,
                orientation: Orientation::VariablesAsRows,
                ..IngestOptions::default()
            },
        )
        .unwrap();
        assert_eq!(a.data.values(), b.data.values());
        assert_eq!(a.data.labels(), b.data.labels()); // both generated
    }

    #[test]
    fn parse_error_reports_file_coordinates() {
        let f = write_temp("a,b\n1,2\n2,oops\n3,6\n");
        match load_matrix(f.path(), &IngestOptions::default()) {
            Err(Error::ParseError { row, column, token }) => {
                assert_eq!((row, column), (3, 2));
                assert_eq!(token, "oops");
            }
            other => panic!("expected ParseError, got {other:?}"),
        }
    }

    #[test]
    fn empty_input_is_rejected() {
        let f = write_temp("");
        assert!(matches!(
            load_matrix(f.path(), &IngestOptions::default()),
            Err(Error::EmptyMatrix)
        ));
    }

    fn sample_report(rho: f64) -> ScreeningReport {
        let x = random_data(3, 9, 40);
        let u = u_scores_from_data(&x).unwrap();
        let params = ScreeningParams::new(u.n(), u.p(), 1, rho, ScreeningMode::Correlation);
        screen(&u, rho, &params, GraphEngine::Exact).unwrap()
    }

    #[test]
    fn empty_report_serializes_with_empty_counts_and_header_only_csv() {
        let report = sample_report(1.0);
        let json = report_to_json(&report).unwrap();
        assert!(json.contains("\"counts\": {}"));
        let mut csv_bytes = Vec::new();
        write_waterfall_csv(&mut csv_bytes, &build_waterfall(&report)).unwrap();
        let text = String::from_utf8(csv_bytes).unwrap();
        assert_eq!(
            text.trim_end(),
            "delta,rank,vertex_label,rho_i_delta,lambda_value,p_value"
        );
    }

    #[test]
    fn report_round_trips_byte_identically() {
        let report = sample_report(0.5);
        assert!(report.d_max >= 1);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        let json = report_to_json(&report).unwrap();
        fs::write(&path, &json).unwrap();
        let reread = read_report(&path).unwrap();
        assert_eq!(report, reread);
        assert_eq!(report_to_json(&reread).unwrap(), json);

        // waterfall regenerated from the reread report is byte-identical
        let mut a = Vec::new();
        write_waterfall_csv(&mut a, &build_waterfall(&report)).unwrap();
        let mut b = Vec::new();
        write_waterfall_csv(&mut b, &build_waterfall(&reread)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unknown_fields_are_ignored_on_read() {
        let report = sample_report(0.5);
        let json = report_to_json(&report).unwrap();
        let mut value: serde_json::Value = serde_json::from_str(&json).unwrap();
        value["future_field"] = serde_json::json!({"ignored": true});
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        fs::write(&path, serde_json::to_string(&value).unwrap()).unwrap();
        let reread = read_report(&path).unwrap();
        assert_eq!(report, reread);
    }

    #[test]
    fn waterfall_csv_row_counts_match_report_counts() {
        let report = sample_report(0.45);
        let wf = build_waterfall(&report);
        let mut bytes = Vec::new();
        write_waterfall_csv(&mut bytes, &wf).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        for (delta, _) in &wf.curves {
            let rows = text
                .lines()
                .skip(1)
                .filter(|l| l.starts_with(&format!("{delta},")))
                .count();
            assert_eq!(rows, report.count_at(*delta));
        }
    }

    #[test]
    fn float_format_is_17_significant_digits() {
        assert_eq!(fmt_float(0.26), "2.6000000000000001e-1");
        assert_eq!(fmt_float(1.0), "1.0000000000000000e0");
        let v = 1.7501761859645114e-5;
        assert_eq!(fmt_float(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn sha256_is_stable() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
