//! CSV ingestion, cohort partitioning and aggregation to transition counts.
//!
//! Input formats (comma separated, UTF-8, header row mandatory):
//!
//! ```text
//! micro records   birth_year,father_class,child_class[,weight]
//! income records  wave_year,birth_year,occ_class,income
//! cohorts         label,birth_from,birth_to
//! ```
//!
//! Class codes are `W`, `M`, `U` (case-insensitive). Malformed rows are
//! skipped and reported with their line number; a file where more than half
//! of the rows are rejected is refused as a whole.

pub mod report;

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::class::OccClass;
use crate::estimation::TransitionCounts;

pub use report::{read_report, write_report, ReportDocument, ReportFormat};

/// Birth and wave years outside this range are rejected as malformed.
pub const YEAR_RANGE: std::ops::RangeInclusive<i32> = 1800..=2100;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("cannot open `{path}`: {source}")]
    Open { path: PathBuf, source: std::io::Error },
    #[error("cannot write `{path}`: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing required column `{0}`")]
    MissingColumn(&'static str),
    #[error("{rejected} of {total} rows rejected; first problem: {first}")]
    TooManyRejected { rejected: usize, total: usize, first: String },
    #[error("cohort `{0}` contains no records")]
    EmptyCohort(String),
    #[error("invalid cohort configuration: {0}")]
    InvalidCohorts(String),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid matrix or counts: {0}")]
    Counts(String),
}

/// One father–child pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MicroRecord {
    pub birth_year: i32,
    pub father_class: OccClass,
    pub child_class: OccClass,
    pub weight: f64,
}

impl MicroRecord {
    pub fn new(birth_year: i32, father_class: OccClass, child_class: OccClass) -> Self {
        Self { birth_year, father_class, child_class, weight: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncomeRecord {
    pub wave_year: i32,
    pub birth_year: i32,
    pub occ_class: OccClass,
    pub income: f64,
}

/// Children born in `birth_from..=birth_to`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohortSpec {
    pub label: String,
    pub birth_from: i32,
    pub birth_to: i32,
}

impl CohortSpec {
    pub fn new(label: impl Into<String>, birth_from: i32, birth_to: i32) -> Self {
        Self { label: label.into(), birth_from, birth_to }
    }

    pub fn contains(&self, birth_year: i32) -> bool {
        (self.birth_from..=self.birth_to).contains(&birth_year)
    }
}

/// The three cohorts 1940–1951, 1952–1965 and 1966–1977.
pub fn default_cohorts() -> Vec<CohortSpec> {
    vec![CohortSpec::new("I", 1940, 1951), CohortSpec::new("II", 1952, 1965), CohortSpec::new("III", 1966, 1977)]
}

pub fn validate_cohorts(cohorts: &[CohortSpec]) -> Result<(), IoError> {
    if cohorts.is_empty() {
        return Err(IoError::InvalidCohorts("no cohorts defined".into()));
    }
    for c in cohorts {
        if c.birth_from > c.birth_to {
            return Err(IoError::InvalidCohorts(format!("cohort `{}` has birth_from > birth_to", c.label)));
        }
    }
    for (i, a) in cohorts.iter().enumerate() {
        for b in &cohorts[i + 1..] {
            if a.label == b.label {
                return Err(IoError::InvalidCohorts(format!("duplicate label `{}`", a.label)));
            }
            if a.birth_from <= b.birth_to && b.birth_from <= a.birth_to {
                return Err(IoError::InvalidCohorts(format!("cohorts `{}` and `{}` overlap", a.label, b.label)));
            }
        }
    }
    Ok(())
}

/// A row that could not be parsed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Parsed<T> {
    pub records: Vec<T>,
    pub rejected: Vec<Rejection>,
}

fn open(path: &Path) -> Result<File, IoError> {
    File::open(path).map_err(|source| IoError::Open { path: path.to_path_buf(), source })
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader)
}

struct Columns {
    headers: Vec<String>,
}

impl Columns {
    fn find(&self, name: &'static str) -> Option<usize> {
        self.headers.iter().position(|h| h.eq_ignore_ascii_case(name))
    }

    fn require(&self, name: &'static str) -> Result<usize, IoError> {
        self.find(name).ok_or(IoError::MissingColumn(name))
    }
}

fn field<'r>(record: &'r csv::StringRecord, idx: usize, name: &str) -> Result<&'r str, String> {
    match record.get(idx) {
        Some(s) if !s.is_empty() => Ok(s),
        _ => Err(format!("missing value for `{name}`")),
    }
}

fn parse_year(record: &csv::StringRecord, idx: usize, name: &str) -> Result<i32, String> {
    let raw = field(record, idx, name)?;
    let year: i32 = raw.parse().map_err(|_| format!("`{name}` = `{raw}` is not an integer year"))?;
    if !YEAR_RANGE.contains(&year) {
        return Err(format!("`{name}` = {year} outside {}..={}", YEAR_RANGE.start(), YEAR_RANGE.end()));
    }
    Ok(year)
}

fn parse_class(record: &csv::StringRecord, idx: usize, name: &str) -> Result<OccClass, String> {
    let raw = field(record, idx, name)?;
    raw.parse().map_err(|e| format!("`{name}`: {e}"))
}

fn parse_number(record: &csv::StringRecord, idx: usize, name: &str) -> Result<f64, String> {
    let raw = field(record, idx, name)?;
    let v: f64 = raw.parse().map_err(|_| format!("`{name}` = `{raw}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("`{name}` is not finite"));
    }
    Ok(v)
}

fn finish<T>(records: Vec<T>, rejected: Vec<Rejection>) -> Result<Parsed<T>, IoError> {
    let total = records.len() + rejected.len();
    if rejected.len() * 2 > total {
        let first = format!("line {}: {}", rejected[0].line, rejected[0].reason);
        return Err(IoError::TooManyRejected { rejected: rejected.len(), total, first });
    }
    Ok(Parsed { records, rejected })
}

pub fn parse_micro_csv(path: impl AsRef<Path>) -> Result<Parsed<MicroRecord>, IoError> {
    parse_micro_reader(open(path.as_ref())?)
}

pub fn parse_micro_reader<R: Read>(reader: R) -> Result<Parsed<MicroRecord>, IoError> {
    let mut rdr = csv_reader(reader);
    let cols = Columns { headers: rdr.headers()?.iter().map(str::to_string).collect() };
    let birth = cols.require("birth_year")?;
    let father = cols.require("father_class")?;
    let child = cols.require("child_class")?;
    let weight = cols.find("weight");

    let mut records = Vec::new();
    let mut rejected = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let parsed = (|| {
            let w = match weight {
                Some(idx) if row.get(idx).is_some_and(|s| !s.is_empty()) => parse_number(&row, idx, "weight")?,
                _ => 1.0,
            };
            if w < 0.0 {
                return Err(format!("negative weight {w}"));
            }
            Ok(MicroRecord {
                birth_year: parse_year(&row, birth, "birth_year")?,
                father_class: parse_class(&row, father, "father_class")?,
                child_class: parse_class(&row, child, "child_class")?,
                weight: w,
            })
        })();
        match parsed {
            Ok(r) => records.push(r),
            Err(reason) => rejected.push(Rejection { line, reason }),
        }
    }
    finish(records, rejected)
}

pub fn write_micro_csv<W: Write>(records: &[MicroRecord], writer: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["birth_year", "father_class", "child_class", "weight"])?;
    for r in records {
        w.write_record([
            r.birth_year.to_string(),
            r.father_class.code().to_string(),
            r.child_class.code().to_string(),
            r.weight.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn parse_income_csv(path: impl AsRef<Path>) -> Result<Parsed<IncomeRecord>, IoError> {
    parse_income_reader(open(path.as_ref())?)
}

pub fn parse_income_reader<R: Read>(reader: R) -> Result<Parsed<IncomeRecord>, IoError> {
    let mut rdr = csv_reader(reader);
    let cols = Columns { headers: rdr.headers()?.iter().map(str::to_string).collect() };
    let wave = cols.require("wave_year")?;
    let birth = cols.require("birth_year")?;
    let class = cols.require("occ_class")?;
    let income = cols.require("income")?;

    let mut records = Vec::new();
    let mut rejected = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let parsed = (|| {
            let value = parse_number(&row, income, "income")?;
            if value <= 0.0 {
                return Err(format!("nonpositive income {value}"));
            }
            Ok(IncomeRecord {
                wave_year: parse_year(&row, wave, "wave_year")?,
                birth_year: parse_year(&row, birth, "birth_year")?,
                occ_class: parse_class(&row, class, "occ_class")?,
                income: value,
            })
        })();
        match parsed {
            Ok(r) => records.push(r),
            Err(reason) => rejected.push(Rejection { line, reason }),
        }
    }
    finish(records, rejected)
}

pub fn write_income_csv<W: Write>(records: &[IncomeRecord], writer: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["wave_year", "birth_year", "occ_class", "income"])?;
    for r in records {
        w.write_record([
            r.wave_year.to_string(),
            r.birth_year.to_string(),
            r.occ_class.code().to_string(),
            r.income.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn parse_cohorts(path: impl AsRef<Path>) -> Result<Vec<CohortSpec>, IoError> {
    parse_cohorts_reader(open(path.as_ref())?)
}

pub fn parse_cohorts_reader<R: Read>(reader: R) -> Result<Vec<CohortSpec>, IoError> {
    let mut rdr = csv_reader(reader);
    let cols = Columns { headers: rdr.headers()?.iter().map(str::to_string).collect() };
    let label = cols.require("label")?;
    let from = cols.require("birth_from")?;
    let to = cols.require("birth_to")?;
    let mut cohorts = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let parse = || -> Result<CohortSpec, String> {
            Ok(CohortSpec {
                label: field(&row, label, "label")?.to_string(),
                birth_from: parse_year(&row, from, "birth_from")?,
                birth_to: parse_year(&row, to, "birth_to")?,
            })
        };
        cohorts.push(parse().map_err(|e| IoError::InvalidCohorts(format!("line {line}: {e}")))?);
    }
    validate_cohorts(&cohorts)?;
    Ok(cohorts)
}

/// Sums record weights into the (father, child) cells for records born
/// inside the cohort.
pub fn aggregate_counts(records: &[MicroRecord], cohort: &CohortSpec) -> Result<TransitionCounts, IoError> {
    let mut cells = [[0.0; 3]; 3];
    let mut any = false;
    for r in records.iter().filter(|r| cohort.contains(r.birth_year)) {
        cells[r.father_class.index()][r.child_class.index()] += r.weight;
        any = true;
    }
    if !any {
        return Err(IoError::EmptyCohort(cohort.label.clone()));
    }
    TransitionCounts::new(cells).map_err(|e| IoError::Counts(e.to_string()))
}

/// Reads a 3×3 matrix from a file: either a JSON array of rows or three
/// comma-separated lines of three numbers (`#` starts a comment).
pub fn parse_matrix_file(path: impl AsRef<Path>) -> Result<[[f64; 3]; 3], IoError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Open { path: path.to_path_buf(), source })?;
    parse_matrix_text(&text)
}

pub fn parse_matrix_text(text: &str) -> Result<[[f64; 3]; 3], IoError> {
    if text.trim_start().starts_with('[') {
        return Ok(serde_json::from_str(text)?);
    }
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let values: Result<Vec<f64>, _> = line.split(',').map(|v| v.trim().parse::<f64>()).collect();
        match values {
            Ok(v) if v.len() == 3 => rows.push([v[0], v[1], v[2]]),
            _ => return Err(IoError::Counts(format!("line {}: expected three numbers, got `{line}`", n + 1))),
        }
    }
    rows.try_into().map_err(|r: Vec<[f64; 3]>| IoError::Counts(format!("expected 3 rows, got {}", r.len())))
}
