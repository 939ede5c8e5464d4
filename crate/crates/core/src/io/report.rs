//! Machine-readable result documents.
//!
//! Two on-disk formats:
//!
//! - `document`: pretty-printed JSON of [`ReportDocument`] at full precision.
//!   Reading it back reproduces every number.
//! - `delimited`: one CSV row per value, `cohort,item,from,to,value`.
//!   Matrix entries carry class codes in `from`/`to` and are printed to 4
//!   decimals; indexes and parameters to 3; standard errors (item prefixed
//!   `se:`) and premia to 4.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::IoError;
use crate::class::OccClass;
use crate::estimation::{BootstrapSummary, CohortEstimate, EstimateVector, PremiaReport};
use crate::matrix::{ClassShares, TransitionMatrix};
use crate::model::{MobilityIndexes, ModelParams};

pub const TOOL_NAME: &str = "occmob";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Document,
    Delimited,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "document" | "json" => Ok(Self::Document),
            "delimited" | "csv" => Ok(Self::Delimited),
            other => Err(format!("unknown format `{other}` (expected document or delimited)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub tool: String,
    pub version: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replications: Option<usize>,
    /// Input rows skipped as malformed.
    #[serde(default)]
    pub rejected_rows: usize,
    pub cohorts: Vec<CohortSection>,
}

impl ReportDocument {
    pub fn new(command: &str) -> Self {
        Self {
            tool: TOOL_NAME.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed: None,
            replications: None,
            rejected_rows: 0,
            cohorts: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSet {
    #[serde(rename = "P")]
    pub p: TransitionMatrix,
    #[serde(rename = "R")]
    pub r: TransitionMatrix,
    #[serde(rename = "Q")]
    pub q: TransitionMatrix,
    /// The linear-program solution before any amendment.
    #[serde(rename = "R_lp")]
    pub r_lp: TransitionMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShareSet {
    pub fathers: ClassShares,
    pub children: ClassShares,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amended: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amendment_passes: Option<usize>,
    /// `max |Q·R − P|`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qr_residual: Option<f64>,
    /// `max |children − Pᵀ·fathers|`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub share_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub successful_replicates: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dropped_replicates: Option<usize>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSection {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub birth_years: Option<(i32, i32)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observations: Option<f64>,
    /// The matrix a parameter identification was run on.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_matrix: Option<TransitionMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrices: Option<MatrixSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shares: Option<ShareSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub indexes: Option<MobilityIndexes>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ModelParams>,
    /// Failed parameter conditions; empty when the parameters are valid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validity: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub standard_errors: Option<EstimateVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub premia: Option<PremiaReport>,
    #[serde(default)]
    pub diagnostics: Diagnostics,
}

impl CohortSection {
    pub fn empty(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            birth_years: None,
            observations: None,
            input_matrix: None,
            matrices: None,
            shares: None,
            indexes: None,
            params: None,
            validity: None,
            standard_errors: None,
            premia: None,
            diagnostics: Diagnostics::default(),
        }
    }

    /// Fills matrices, shares, indexes, parameters and decomposition diagnostics.
    pub fn with_estimate(mut self, est: &CohortEstimate) -> Self {
        let d = &est.decomposition;
        self.observations = Some(est.observations);
        self.matrices = Some(MatrixSet { p: d.p, r: d.r, q: d.q, r_lp: d.r_lp });
        self.shares = Some(ShareSet { fathers: d.fathers, children: d.children });
        self.indexes = Some(est.indexes);
        self.params = Some(est.identification.params);
        self.validity = Some(est.identification.validity.messages());
        self.diagnostics.amended = Some(d.amended);
        self.diagnostics.amendment_passes = Some(d.passes);
        self.diagnostics.qr_residual = Some(d.qr_residual);
        self.diagnostics.share_residual = Some(d.share_residual);
        self
    }

    pub fn with_bootstrap(mut self, summary: &BootstrapSummary) -> Self {
        self.standard_errors = Some(summary.se);
        self.diagnostics.successful_replicates = Some(summary.successful);
        self.diagnostics.dropped_replicates = Some(summary.dropped);
        self.diagnostics.warnings.extend(summary.warnings.iter().map(ToString::to_string));
        self
    }
}

pub fn write_report(doc: &ReportDocument, path: impl AsRef<Path>, format: ReportFormat) -> Result<(), IoError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| IoError::Write { path: path.to_path_buf(), source })?;
    let mut out = BufWriter::new(file);
    write_report_to(doc, &mut out, format)?;
    out.flush().map_err(|source| IoError::Write { path: path.to_path_buf(), source })
}

pub fn write_report_to<W: Write>(doc: &ReportDocument, out: W, format: ReportFormat) -> Result<(), IoError> {
    match format {
        ReportFormat::Document => {
            serde_json::to_writer_pretty(out, doc)?;
            Ok(())
        }
        ReportFormat::Delimited => write_delimited(doc, out),
    }
}

pub fn read_report(path: impl AsRef<Path>) -> Result<ReportDocument, IoError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| IoError::Open { path: path.to_path_buf(), source })?;
    Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
}

fn write_delimited<W: Write>(doc: &ReportDocument, out: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["cohort", "item", "from", "to", "value"])?;
    for c in &doc.cohorts {
        let label = c.label.as_str();
        let mut scalar = |item: &str, value: String| w.write_record([label, item, "", "", value.as_str()]);
        if let Some(n) = c.observations {
            scalar("observations", format!("{n}"))?;
        }
        if let Some(ix) = &c.indexes {
            for (name, v) in MobilityIndexes::NAMES.iter().zip(ix.to_array()) {
                scalar(name, format!("{v:.3}"))?;
            }
        }
        if let Some(p) = &c.params {
            for (name, v) in ModelParams::NAMES.iter().zip(p.to_array()) {
                scalar(name, format!("{v:.3}"))?;
            }
        }
        if let Some(msgs) = &c.validity {
            scalar("valid", (msgs.is_empty()).to_string())?;
        }
        if let Some(se) = &c.standard_errors {
            for (name, v) in EstimateVector::NAMES.iter().zip(se.to_array()) {
                scalar(&format!("se:{name}"), format!("{v:.4}"))?;
            }
        }
        if let Some(pr) = &c.premia {
            for (name, v) in PremiaReport::RATIO_NAMES.iter().zip(pr.ratios()) {
                scalar(name, v.map_or_else(|| "NA".to_string(), |v| format!("{v:.4}")))?;
            }
        }
        if let Some(m) = &c.input_matrix {
            for from in OccClass::ALL {
                for to in OccClass::ALL {
                    let v = format!("{:.4}", m.get(from, to));
                    w.write_record([label, "input", from.code(), to.code(), v.as_str()])?;
                }
            }
        }
        if let Some(m) = &c.matrices {
            for (name, mat) in [("P", &m.p), ("R", &m.r), ("Q", &m.q), ("R_lp", &m.r_lp)] {
                for from in OccClass::ALL {
                    for to in OccClass::ALL {
                        let v = format!("{:.4}", mat.get(from, to));
                        w.write_record([label, name, from.code(), to.code(), v.as_str()])?;
                    }
                }
            }
        }
        if let Some(s) = &c.shares {
            for (name, shares) in [("fathers", &s.fathers), ("children", &s.children)] {
                for class in OccClass::ALL {
                    let v = format!("{:.4}", shares.get(class));
                    w.write_record([label, name, class.code(), "", v.as_str()])?;
                }
            }
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `(cohort, item, from, to)`.
pub type DelimitedKey = (String, String, String, String);

/// Values of a delimited report keyed by [`DelimitedKey`].
pub fn parse_delimited(text: &str) -> Result<BTreeMap<DelimitedKey, String>, IoError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut out = BTreeMap::new();
    for row in rdr.records() {
        let row = row?;
        let get = |i: usize| row.get(i).unwrap_or("").to_string();
        out.insert((get(0), get(1), get(2), get(3)), get(4));
    }
    Ok(out)
}
