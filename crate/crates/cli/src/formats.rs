//! Input and output file formats.
//!
//! CSV files are UTF-8 with a header row. Numbers are plain decimals; blank
//! lines are skipped and surrounding whitespace in a field is ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use lwr_core::capacity::CapacityStudy;
use lwr_core::model::ScenarioSet;
use lwr_core::projects::AdditiveProjectInstance;
use lwr_core::robust::ProbabilityPolytope;
use lwr_core::{build_cost_matrix, CostMatrix};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

pub fn read_input(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

struct Row {
    line: usize,
    label: String,
    values: Vec<f64>,
}

/// Header plus labelled numeric rows, with row lengths checked against the header.
struct Table {
    header: Vec<String>,
    rows: Vec<Row>,
}

fn parse_error(path: &Path, line: usize, column: usize, message: impl Into<String>) -> CliError {
    CliError::Parse { path: path.to_path_buf(), line, column, message: message.into() }
}

fn invalid(path: &Path, line: Option<usize>, source: lwr_core::Error) -> CliError {
    CliError::Invalid { path: path.to_path_buf(), line, source }
}

fn read_table(text: &str, path: &Path, first: &str) -> CliResult<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_error(path, line, 1, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        records.push((line, record));
    }
    let mut records = records.into_iter();
    let (_, header) = records.next().ok_or_else(|| parse_error(path, 1, 1, "missing header row"))?;
    if header.get(0) != Some(first) {
        return Err(parse_error(path, 1, 1, format!("header must start with `{first}`")));
    }
    let header: Vec<String> = header.iter().map(str::to_string).collect();
    let mut rows: Vec<Row> = Vec::new();
    let mut last_line = 1;
    for (line, record) in records {
        last_line = line;
        if record.len() != header.len() {
            return Err(invalid(
                path,
                Some(line),
                lwr_core::Error::DimensionMismatch(format!("{} fields, header has {}", record.len(), header.len())),
            ));
        }
        let label = record[0].to_string();
        if label.is_empty() {
            return Err(parse_error(path, line, 1, "empty label"));
        }
        if rows.iter().any(|r| r.label == label) {
            return Err(invalid(path, Some(line), lwr_core::Error::DuplicateLabel(label)));
        }
        let values = record
            .iter()
            .enumerate()
            .skip(1)
            .map(|(col, field)| {
                field
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| parse_error(path, line, col + 1, format!("`{field}` is not a finite number")))
            })
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(Row { line, label, values });
    }
    if rows.is_empty() {
        return Err(parse_error(path, last_line + 1, 1, format!("no {first} rows")));
    }
    Ok(Table { header, rows })
}

/// Parses `scenario,<decision...>` followed by one row of costs per scenario.
pub fn cost_matrix_from_str(text: &str, path: &Path) -> CliResult<CostMatrix> {
    let table = read_table(text, path, "scenario")?;
    let decisions = table.header[1..].to_vec();
    let names: Vec<String> = table.rows.iter().map(|r| r.label.clone()).collect();
    let rows = table.rows.into_iter().map(|r| r.values).collect();
    build_cost_matrix(names, decisions, rows).map_err(|e| invalid(path, Some(1), e))
}

pub fn parse_cost_csv(path: &Path) -> CliResult<CostMatrix> {
    cost_matrix_from_str(&read_input(path)?, path)
}

/// Writes a cost matrix in the format read by [`parse_cost_csv`]. Numbers are
/// printed in their shortest round-tripping form.
pub fn write_cost_csv(matrix: &CostMatrix) -> String {
    let mut out = String::from("scenario");
    for d in matrix.decisions().iter() {
        let _ = write!(out, ",{d}");
    }
    out.push('\n');
    for (i, s) in matrix.scenarios().iter().enumerate() {
        out.push_str(s);
        for v in matrix.row(i) {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// Parses `scenario,<project...>[,W]`; a final `W` column holds base costs.
pub fn project_instance_from_str(text: &str, path: &Path) -> CliResult<AdditiveProjectInstance> {
    let table = read_table(text, path, "scenario")?;
    let has_base = table.header.last().is_some_and(|h| h == "W") && table.header.len() > 1;
    let width = table.header.len() - 1 - usize::from(has_base);
    let projects = table.header[1..1 + width].to_vec();
    let scenarios: Vec<String> = table.rows.iter().map(|r| r.label.clone()).collect();
    let base = has_base.then(|| table.rows.iter().map(|r| r.values[width]).collect());
    let incremental = table.rows.into_iter().map(|mut r| {
        r.values.truncate(width);
        r.values
    });
    AdditiveProjectInstance::new(projects, scenarios, incremental.collect(), base).map_err(|e| invalid(path, Some(1), e))
}

pub fn parse_projects_csv(path: &Path) -> CliResult<AdditiveProjectInstance> {
    project_instance_from_str(&read_input(path)?, path)
}

/// Parses `scenario,W` rows and orders them like `scenarios`.
pub fn base_costs_from_str(text: &str, path: &Path, scenarios: &ScenarioSet) -> CliResult<Vec<f64>> {
    let table = read_table(text, path, "scenario")?;
    if table.header.len() != 2 || table.header[1] != "W" {
        return Err(parse_error(path, 1, 2, "base-cost header must be `scenario,W`"));
    }
    let mut base = vec![None; scenarios.len()];
    for row in &table.rows {
        let i = scenarios
            .position(&row.label)
            .ok_or_else(|| invalid(path, Some(row.line), lwr_core::Error::UnknownScenario(row.label.clone())))?;
        base[i] = Some(row.values[0]);
    }
    base.into_iter()
        .enumerate()
        .map(|(i, w)| {
            w.ok_or_else(|| {
                invalid(
                    path,
                    None,
                    lwr_core::Error::DimensionMismatch(format!("no base cost for scenario `{}`", scenarios.get(i))),
                )
            })
        })
        .collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintDocument {
    constraints: Vec<BTreeMap<String, f64>>,
}

fn json_error(path: &Path, e: serde_json::Error) -> CliError {
    parse_error(path, e.line(), e.column(), e.to_string())
}

/// Parses `{"constraints": [{scenario: coefficient, ...}, ...]}`; each row
/// means `Σ coefficient·p ≤ 0`.
pub fn polytope_from_str(text: &str, path: &Path, scenarios: &ScenarioSet) -> CliResult<ProbabilityPolytope> {
    let doc: ConstraintDocument = serde_json::from_str(text).map_err(|e| json_error(path, e))?;
    ProbabilityPolytope::from_labeled_rows(scenarios.clone(), doc.constraints.into_iter().map(|r| r.into_iter().collect()))
        .map_err(|e| invalid(path, None, e))
}

pub fn parse_constraints_json(path: &Path, scenarios: &ScenarioSet) -> CliResult<ProbabilityPolytope> {
    polytope_from_str(&read_input(path)?, path, scenarios)
}

/// Parses `{"voll", "cone", "bounds": [lo, hi], "scenarios": [{"name", "a", "E", "lambda"}]}`.
pub fn capacity_study_from_str(text: &str, path: &Path) -> CliResult<CapacityStudy> {
    let study: CapacityStudy = serde_json::from_str(text).map_err(|e| json_error(path, e))?;
    study.validate().map_err(|e| invalid(path, None, e))?;
    Ok(study)
}

pub fn parse_capacity_json(path: &Path) -> CliResult<CapacityStudy> {
    capacity_study_from_str(&read_input(path)?, path)
}
