//! Subcommand implementations. Each returns a [`CommandOutput`]; writing the
//! report file is left to [`execute`].

use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use occmob_core::estimation::{self, bootstrap, estimate_p, income_premia, premium_interpretation, CohortEstimate};
use occmob_core::io::report::CohortSection;
use occmob_core::io::{
    aggregate_counts, default_cohorts, parse_cohorts, parse_income_csv, parse_matrix_text, parse_micro_csv,
    read_report, validate_cohorts, write_micro_csv, write_report, CohortSpec, IoError, MicroRecord, Rejection,
    ReportDocument,
};
use occmob_core::model::{build_true_matrix, i_opp_from_params, identify_params};
use occmob_core::simulator::{simulate_cohort, SimConfig, SimError};
use occmob_core::{ClassShares, OccClass, TransitionMatrix};

use crate::config::{SimulateConfig, DEFAULT_BIRTH_YEAR};
use crate::{BootstrapArgs, CliError, Command, EstimateArgs, IdentifyArgs, PremiaArgs, SimulateArgs, DEFAULT_SEED};

/// Rejected rows listed individually before the rest are summarized.
const MAX_LISTED_REJECTIONS: usize = 10;

#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub summary: String,
    /// Warnings and skipped inputs, printed to stderr.
    pub notes: Vec<String>,
    pub report: Option<ReportDocument>,
}

pub fn execute(command: &Command) -> Result<CommandOutput, CliError> {
    let (result, output) = match command {
        Command::Estimate(a) => (estimate(a), Some(&a.output)),
        Command::Identify(a) => (identify(a), Some(&a.output)),
        Command::Simulate(a) => (simulate(a), None),
        Command::Bootstrap(a) => (run_bootstrap(a), Some(&a.output)),
        Command::Premia(a) => (premia(a), Some(&a.output)),
    };
    let out = result?;
    if let (Some(opts), Some(doc)) = (output, &out.report) {
        if let Some(path) = &opts.out {
            write_report(doc, path, opts.format)?;
        }
    }
    Ok(out)
}

fn load_cohorts(path: Option<&Path>) -> Result<Vec<CohortSpec>, CliError> {
    match path {
        Some(p) => Ok(parse_cohorts(p)?),
        None => {
            let c = default_cohorts();
            validate_cohorts(&c)?;
            Ok(c)
        }
    }
}

fn rejection_notes(rejected: &[Rejection], notes: &mut Vec<String>) {
    for r in rejected.iter().take(MAX_LISTED_REJECTIONS) {
        notes.push(format!("skipped line {}: {}", r.line, r.reason));
    }
    if rejected.len() > MAX_LISTED_REJECTIONS {
        notes.push(format!("... and {} more skipped lines", rejected.len() - MAX_LISTED_REJECTIONS));
    }
}

fn load_micro(path: &Path, weights: bool, notes: &mut Vec<String>) -> Result<(Vec<MicroRecord>, usize), CliError> {
    let parsed = parse_micro_csv(path)?;
    rejection_notes(&parsed.rejected, notes);
    let mut records = parsed.records;
    if !weights {
        records.iter_mut().for_each(|r| r.weight = 1.0);
    }
    Ok((records, parsed.rejected.len()))
}

fn section_for(cohort: &CohortSpec) -> CohortSection {
    let mut s = CohortSection::empty(cohort.label.clone());
    s.birth_years = Some((cohort.birth_from, cohort.birth_to));
    s
}

fn matrix_rows(out: &mut String, mats: &[(&str, &TransitionMatrix)]) {
    let _ = write!(out, "     ");
    for (name, _) in mats {
        let _ = write!(out, "{name:<24}");
    }
    out.push('\n');
    for from in OccClass::ALL {
        let _ = write!(out, "  {}  ", from.code());
        for (_, m) in mats {
            let row: Vec<String> = OccClass::ALL.iter().map(|&to| format!("{:.4}", m.get(from, to))).collect();
            let _ = write!(out, "{:<24}", row.join(" "));
        }
        out.push('\n');
    }
}

fn describe_estimate(
    out: &mut String,
    cohort: &CohortSpec,
    est: &CohortEstimate,
    se: Option<&estimation::EstimateVector>,
) {
    let d = &est.decomposition;
    let _ = writeln!(
        out,
        "cohort {} (born {}-{}), {} observations",
        cohort.label, cohort.birth_from, cohort.birth_to, est.observations
    );
    matrix_rows(out, &[("P", &d.p), ("R", &d.r), ("Q", &d.q)]);
    let point = est.vector().to_array();
    let se = se.map(|s| s.to_array());
    let mut line = |range: std::ops::Range<usize>, decimals: usize| {
        let parts: Vec<String> = range
            .map(|k| {
                let name = estimation::EstimateVector::NAMES[k];
                match &se {
                    Some(s) => format!("{name} {:.decimals$} ({:.3})", point[k], s[k]),
                    None => format!("{name} {:.decimals$}", point[k]),
                }
            })
            .collect();
        let _ = writeln!(out, "  {}", parts.join("  "));
    };
    line(0..5, 3);
    line(5..11, 3);
    let validity = &est.identification.validity;
    let _ = writeln!(out, "  parameters: {validity}");
    let _ = writeln!(
        out,
        "  diagnostics: amended {}, passes {}, max|QR-P| {:.2e}, max|c-P'f| {:.2e}\n",
        d.amended, d.passes, d.qr_residual, d.share_residual
    );
}

pub fn estimate(args: &EstimateArgs) -> Result<CommandOutput, CliError> {
    let cohorts = load_cohorts(args.cohorts.as_deref())?;
    let mut notes = Vec::new();
    let (records, rejected) = load_micro(&args.input, args.weights, &mut notes)?;
    let mut doc = ReportDocument::new("estimate");
    doc.rejected_rows = rejected;
    let mut summary = String::new();
    for cohort in &cohorts {
        let counts = match aggregate_counts(&records, cohort) {
            Ok(c) => c,
            Err(IoError::EmptyCohort(label)) => {
                notes.push(format!("cohort `{label}` has no records; skipped"));
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let est =
            estimation::estimate(&counts).map_err(|e| CliError::Compute(format!("cohort `{}`: {e}", cohort.label)))?;
        describe_estimate(&mut summary, cohort, &est, None);
        doc.cohorts.push(section_for(cohort).with_estimate(&est));
    }
    if doc.cohorts.is_empty() {
        return Err(CliError::Compute("no cohort contains any records".into()));
    }
    Ok(CommandOutput { summary, notes, report: Some(doc) })
}

pub fn run_bootstrap(args: &BootstrapArgs) -> Result<CommandOutput, CliError> {
    let cohorts = load_cohorts(args.cohorts.as_deref())?;
    let mut notes = Vec::new();
    let (records, rejected) = load_micro(&args.input, args.weights, &mut notes)?;
    let replications = args.replications as usize;
    let mut doc = ReportDocument::new("bootstrap");
    doc.seed = Some(args.seed);
    doc.replications = Some(replications);
    doc.rejected_rows = rejected;
    let mut summary = format!("bootstrap: {replications} replications, seed {}\n\n", args.seed);
    for cohort in &cohorts {
        if !records.iter().any(|r| cohort.contains(r.birth_year)) {
            notes.push(format!("cohort `{}` has no records; skipped", cohort.label));
            continue;
        }
        let s = bootstrap(&records, cohort, replications, args.seed)
            .map_err(|e| CliError::Compute(format!("cohort `{}`: {e}", cohort.label)))?;
        notes.extend(s.warnings.iter().map(|w| format!("cohort `{}`: {w}", cohort.label)));
        describe_estimate(&mut summary, cohort, &s.estimate, Some(&s.se));
        doc.cohorts.push(section_for(cohort).with_estimate(&s.estimate).with_bootstrap(&s));
    }
    if doc.cohorts.is_empty() {
        return Err(CliError::Compute("no cohort contains any records".into()));
    }
    Ok(CommandOutput { summary, notes, report: Some(doc) })
}

fn identify_one(label: &str, q: TransitionMatrix, summary: &mut String) -> Result<CohortSection, CliError> {
    let id = identify_params(&q).map_err(|e| CliError::Compute(format!("{label}: {e}")))?;
    let p = id.params;
    let i_true = 1.0 - q.trace() / 3.0;
    let i_opp = i_opp_from_params(&p);
    let _ = writeln!(summary, "{label}");
    for (name, v) in occmob_core::ModelParams::NAMES.iter().zip(p.to_array()) {
        let _ = writeln!(summary, "  {name:<12} {v:.4}");
    }
    let _ = writeln!(summary, "  i_true {i_true:.3}  i_opp {i_opp:.3}  i_loi {:.3}", i_opp - i_true);
    let _ = writeln!(summary, "  parameters: {}\n", id.validity);
    let mut section = CohortSection::empty(label);
    section.input_matrix = Some(q);
    section.params = Some(p);
    section.validity = Some(id.validity.messages());
    Ok(section)
}

pub fn identify(args: &IdentifyArgs) -> Result<CommandOutput, CliError> {
    let path = &args.input;
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot open `{}`: {e}", path.display())))?;
    let mut doc = ReportDocument::new("identify");
    let mut summary = String::new();
    if text.trim_start().starts_with('{') {
        let report = read_report(path)?;
        for section in &report.cohorts {
            if args.cohort.as_ref().is_some_and(|c| c != &section.label) {
                continue;
            }
            if let Some(m) = &section.matrices {
                doc.cohorts.push(identify_one(&section.label, m.q, &mut summary)?);
            }
        }
        if doc.cohorts.is_empty() {
            return Err(CliError::Input(format!("`{}` has no matching cohort with a Q matrix", path.display())));
        }
    } else {
        if args.cohort.is_some() {
            return Err(CliError::Usage("--cohort only applies when the input is a report".into()));
        }
        let rows = parse_matrix_text(&text)?;
        let q = TransitionMatrix::new(rows).map_err(|e| CliError::Input(format!("`{}`: {e}", path.display())))?;
        doc.cohorts.push(identify_one("input", q, &mut summary)?);
    }
    Ok(CommandOutput { summary, notes: Vec::new(), report: Some(doc) })
}

pub fn simulate(args: &SimulateArgs) -> Result<CommandOutput, CliError> {
    let cfg = SimulateConfig::load(&args.config)?;
    let population = args
        .population
        .or(cfg.population)
        .ok_or_else(|| CliError::Usage("population not given (flag --population or config key)".into()))?;
    if population == 0 {
        return Err(CliError::Usage("population must be positive".into()));
    }
    let seed = args.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    let fathers = ClassShares::new(cfg.fathers).map_err(|e| CliError::Input(format!("fathers: {e}")))?;
    let resolved = cfg.resolve()?;
    let params = resolved.params;

    let mut summary = String::new();
    let mut notes = Vec::new();
    if let Some(t) = resolved.thresholds {
        let _ = writeln!(
            summary,
            "thresholds from primitives: lambda_M {:.4}  lambda_U {:.4}  lambda_WU {:.4}  ordering {}",
            t.lambda_m,
            t.lambda_u,
            t.lambda_wu,
            if t.valid { "holds" } else { "VIOLATED" }
        );
        if !t.valid {
            notes.push("threshold ordering lambda_U > lambda_WU > lambda_M does not hold".into());
        }
    }
    let report = params.validate();
    if !report.is_valid() {
        return Err(CliError::Input(format!("invalid parameters: {report}")));
    }
    let q = build_true_matrix(&params).map_err(|e| CliError::Input(e.to_string()))?;
    let sim = SimConfig { params, fathers, population, seed };
    let counts = simulate_cohort(&sim).map_err(|e| match e {
        SimError::EmptyPopulation => CliError::Usage(e.to_string()),
        other => CliError::Input(other.to_string()),
    })?;
    let p = estimate_p(&counts)?;
    let _ = writeln!(summary, "simulated {population} children, seed {seed}");
    matrix_rows(&mut summary, &[("theoretical Q", &q), ("empirical P", &p)]);
    let _ = writeln!(summary, "max |P - Q| = {:.5}", p.max_abs_diff(&q));

    if let Some(path) = &args.out {
        let birth_year = cfg.birth_year.unwrap_or(DEFAULT_BIRTH_YEAR);
        let mut records = Vec::with_capacity(9);
        for f in OccClass::ALL {
            for c in OccClass::ALL {
                records.push(MicroRecord { weight: counts.get(f, c), ..MicroRecord::new(birth_year, f, c) });
            }
        }
        let file =
            File::create(path).map_err(|e| CliError::Input(format!("cannot write `{}`: {e}", path.display())))?;
        write_micro_csv(&records, BufWriter::new(file))?;
        let _ = writeln!(summary, "counts written to {} (weighted records, born {birth_year})", path.display());
    }
    Ok(CommandOutput { summary, notes, report: None })
}

pub fn premia(args: &PremiaArgs) -> Result<CommandOutput, CliError> {
    let cohorts = load_cohorts(args.cohorts.as_deref())?;
    let parsed = parse_income_csv(&args.input)?;
    let mut notes = Vec::new();
    rejection_notes(&parsed.rejected, &mut notes);
    let mut doc = ReportDocument::new("premia");
    doc.rejected_rows = parsed.rejected.len();
    let mut summary = String::new();
    for cohort in &cohorts {
        if !parsed.records.iter().any(|r| cohort.contains(r.birth_year)) {
            notes.push(format!("cohort `{}` has no income records; skipped", cohort.label));
            continue;
        }
        let report = income_premia(&parsed.records, cohort)
            .map_err(|e| CliError::Compute(format!("cohort `{}`: {e}", cohort.label)))?;
        let _ = writeln!(summary, "cohort {} ({} waves)", cohort.label, report.waves.len());
        for (name, v) in occmob_core::estimation::PremiaReport::RATIO_NAMES.iter().zip(report.ratios()) {
            match v {
                Some(v) => {
                    let _ = writeln!(summary, "  {name:<14} {v:.4}");
                }
                None => {
                    let _ = writeln!(summary, "  {name:<14} undefined");
                }
            }
        }
        if let Some(r) = report.mean_ratio_mw {
            if let Ok(v) = premium_interpretation(r, 1000.0) {
                let _ = writeln!(summary, "  1000 in the Working class corresponds to {v:.2} in the Middle class");
            }
        }
        if report.degenerate {
            notes.push(format!("cohort `{}`: some ratios are undefined (zero denominator)", cohort.label));
        }
        summary.push('\n');
        let mut section = section_for(cohort);
        section.observations = Some(report.pooled.iter().map(|m| m.n as f64).sum());
        section.premia = Some(report);
        doc.cohorts.push(section);
    }
    if doc.cohorts.is_empty() {
        return Err(CliError::Compute("no cohort contains any income records".into()));
    }
    Ok(CommandOutput { summary, notes, report: Some(doc) })
}
