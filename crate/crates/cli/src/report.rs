use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// How `actual` is compared with `expected`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    /// `|actual − expected| ≤ tolerance`
    Eq,
    /// `actual ≤ expected + tolerance`
    Le,
    /// `actual ≥ expected − tolerance`
    Ge,
    /// `actual > expected + tolerance`
    Gt,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Quantity {
    Number(f64),
    Text(String),
}

#[derive(Clone, Debug, Serialize)]
pub struct Record {
    pub name: String,
    pub relation: Relation,
    pub expected: Quantity,
    pub actual: Quantity,
    pub tolerance: f64,
    pub pass: bool,
    /// What the check establishes, in words.
    pub reference: String,
}

impl Record {
    pub fn number(
        name: impl Into<String>,
        relation: Relation,
        expected: f64,
        actual: f64,
        tolerance: f64,
        reference: &str,
    ) -> Self {
        let pass = match relation {
            Relation::Eq => (actual - expected).abs() <= tolerance,
            Relation::Le => actual <= expected + tolerance,
            Relation::Ge => actual >= expected - tolerance,
            Relation::Gt => actual > expected + tolerance,
        };
        Record {
            name: name.into(),
            relation,
            expected: Quantity::Number(expected),
            actual: Quantity::Number(actual),
            tolerance,
            pass,
            reference: reference.into(),
        }
    }

    /// A defect that must vanish: `|defect| ≤ tolerance`.
    pub fn defect(name: impl Into<String>, defect: f64, tolerance: f64, reference: &str) -> Self {
        Record::number(name, Relation::Eq, 0.0, defect, tolerance, reference)
    }

    /// Symbolic comparison whose pass flag comes from a separately measured defect.
    pub fn text(
        name: impl Into<String>,
        expected: String,
        actual: String,
        defect: f64,
        tolerance: f64,
        reference: &str,
    ) -> Self {
        Record {
            name: name.into(),
            relation: Relation::Eq,
            expected: Quantity::Text(expected),
            actual: Quantity::Text(actual),
            tolerance,
            pass: defect <= tolerance,
            reference: reference.into(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentRow {
    pub word: String,
    pub combinatorial: f64,
    pub matrix: f64,
    pub delta: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GapRow {
    pub f_size: usize,
    pub lambda_min: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum Table {
    Moments(Vec<MomentRow>),
    Gap(Vec<GapRow>),
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub suite: String,
    pub version: String,
    pub pass: bool,
    pub seed: u64,
    /// Seeds handed to individual checks, derived from `seed`.
    pub derived_seeds: BTreeMap<String, u64>,
    pub config: RunConfig,
    pub records: Vec<Record>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Table>,
}

impl Report {
    pub fn new(
        suite: &str,
        config: &RunConfig,
        mut records: Vec<Record>,
        derived_seeds: BTreeMap<String, u64>,
        table: Option<Table>,
    ) -> Self {
        records.sort_by(|a, b| a.name.cmp(&b.name));
        Report {
            schema_version: SCHEMA_VERSION,
            suite: suite.into(),
            version: format!("qgauss {}", env!("CARGO_PKG_VERSION")),
            pass: records.iter().all(|r| r.pass),
            seed: config.seed,
            derived_seeds,
            config: config.clone(),
            records,
            table,
        }
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> Result<(), CliError> {
        serde_json::to_writer_pretty(&mut w, self).map_err(|e| CliError::Output(e.to_string()))?;
        writeln!(w).map_err(|e| CliError::Output(e.to_string()))
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), CliError> {
        let mut out = csv::Writer::from_writer(w);
        let res = match &self.table {
            Some(Table::Moments(rows)) => rows.iter().try_for_each(|r| out.serialize(r)),
            Some(Table::Gap(rows)) => rows.iter().try_for_each(|r| out.serialize(r)),
            None => {
                return Err(CliError::Config(
                    "CSV output is only available for tabular sweeps (moments, gap)".into(),
                ))
            }
        };
        res.and_then(|_| out.flush().map_err(csv::Error::from))
            .map_err(|e| CliError::Output(e.to_string()))
    }
}
