//! Income premia from a panel of incomes.
//!
//! For each wave and class the mean and standard deviation of log income
//! are computed (classes with fewer than two observations in a wave are
//! skipped for that wave). Waves are pooled by averaging the means and the
//! standard deviations with the per-(class, wave) counts as weights; the
//! pooled variance is the square of the pooled standard deviation.

use serde::{Deserialize, Serialize};

use super::EstimationError;
use crate::class::OccClass;
use crate::io::{CohortSpec, IncomeRecord};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMoments {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveBreakdown {
    pub wave_year: i32,
    /// Working, Middle, Upper; `None` when fewer than two observations.
    pub classes: [Option<ClassMoments>; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PremiaReport {
    pub cohort: String,
    pub waves: Vec<WaveBreakdown>,
    pub pooled: [ClassMoments; 3],
    /// `mean_M / mean_W` of log income.
    pub mean_ratio_mw: Option<f64>,
    /// `mean_U / mean_M`.
    pub mean_ratio_um: Option<f64>,
    /// `σ²_M / σ²_W`.
    pub var_ratio_mw: Option<f64>,
    /// `σ²_U / σ²_M`.
    pub var_ratio_um: Option<f64>,
    /// Some ratio has a zero denominator and is reported as undefined.
    pub degenerate: bool,
}

impl PremiaReport {
    pub const RATIO_NAMES: [&'static str; 4] = ["mean_ratio_MW", "mean_ratio_UM", "var_ratio_MW", "var_ratio_UM"];

    pub fn ratios(&self) -> [Option<f64>; 4] {
        [self.mean_ratio_mw, self.mean_ratio_um, self.var_ratio_mw, self.var_ratio_um]
    }
}

fn moments(values: &[f64]) -> Option<ClassMoments> {
    let n = values.len();
    if n < 2 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    let sd = (ss / (n - 1) as f64).sqrt();
    // Identical values can leave rounding residue in the mean.
    let sd = if sd <= 1e-12 * mean.abs().max(1.0) { 0.0 } else { sd };
    Some(ClassMoments { n, mean, sd })
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den != 0.0).then(|| num / den)
}

pub fn income_premia(incomes: &[IncomeRecord], cohort: &CohortSpec) -> Result<PremiaReport, EstimationError> {
    let mut waves: Vec<i32> = incomes.iter().filter(|r| cohort.contains(r.birth_year)).map(|r| r.wave_year).collect();
    if waves.is_empty() {
        return Err(EstimationError::EmptyCohort(cohort.label.clone()));
    }
    waves.sort_unstable();
    waves.dedup();

    let mut breakdown = Vec::with_capacity(waves.len());
    for &wave in &waves {
        let classes = OccClass::ALL.map(|class| {
            let logs: Vec<f64> = incomes
                .iter()
                .filter(|r| r.wave_year == wave && r.occ_class == class && cohort.contains(r.birth_year))
                .map(|r| r.income.ln())
                .collect();
            moments(&logs)
        });
        breakdown.push(WaveBreakdown { wave_year: wave, classes });
    }

    let mut pooled = [ClassMoments { n: 0, mean: 0.0, sd: 0.0 }; 3];
    for class in OccClass::ALL {
        let k = class.index();
        let usable: Vec<ClassMoments> = breakdown.iter().filter_map(|w| w.classes[k]).collect();
        let n: usize = usable.iter().map(|m| m.n).sum();
        if n == 0 {
            return Err(EstimationError::Premia(format!(
                "no wave has at least two {class} incomes in cohort `{}`",
                cohort.label
            )));
        }
        let weight = |m: &ClassMoments| m.n as f64 / n as f64;
        pooled[k] = ClassMoments {
            n,
            mean: usable.iter().map(|m| weight(m) * m.mean).sum(),
            sd: usable.iter().map(|m| weight(m) * m.sd).sum(),
        };
    }

    let [w, m, u] = pooled;
    let ratios = [
        ratio(m.mean, w.mean),
        ratio(u.mean, m.mean),
        ratio(m.sd * m.sd, w.sd * w.sd),
        ratio(u.sd * u.sd, m.sd * m.sd),
    ];
    Ok(PremiaReport {
        cohort: cohort.label.clone(),
        waves: breakdown,
        pooled,
        mean_ratio_mw: ratios[0],
        mean_ratio_um: ratios[1],
        var_ratio_mw: ratios[2],
        var_ratio_um: ratios[3],
        degenerate: ratios.iter().any(Option::is_none),
    })
}

/// Income in the higher class implied by a log-income ratio: a class whose
/// mean log income is `ratio` times the lower class's turns `base_income`
/// into `base_income^ratio`.
pub fn premium_interpretation(ratio: f64, base_income: f64) -> Result<f64, EstimationError> {
    if !(base_income > 0.0) || !base_income.is_finite() {
        return Err(EstimationError::Premia(format!("base income must be positive, got {base_income}")));
    }
    if !ratio.is_finite() {
        return Err(EstimationError::Premia(format!("ratio must be finite, got {ratio}")));
    }
    Ok(base_income.powf(ratio))
}
