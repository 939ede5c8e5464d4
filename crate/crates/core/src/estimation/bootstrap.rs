//! Nonparametric bootstrap over micro records.
//!
//! Replicate `r` resamples the cohort's records with replacement using
//! random stream `r`, so results are identical for any thread count.

use std::fmt;

use rand::Rng;
use rayon::prelude::*;

use super::{estimate, CohortEstimate, EstimateVector, EstimationError, TransitionCounts};
use crate::io::{CohortSpec, MicroRecord};
use crate::rng::StreamFactory;

/// Fewer successful replicates than this triggers a warning.
pub const LOW_REPLICATION_THRESHOLD: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub enum BootstrapWarning {
    /// One successful replicate: standard errors are reported as zero.
    SingleReplicate,
    LowReplications(usize),
    DroppedReplicates(usize),
}

impl fmt::Display for BootstrapWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SingleReplicate => f.write_str("single replicate: standard errors are degenerate (reported as 0)"),
            Self::LowReplications(n) => {
                write!(f, "only {n} replicates (< {LOW_REPLICATION_THRESHOLD}); standard errors are imprecise")
            }
            Self::DroppedReplicates(n) => write!(f, "{n} replicates failed to estimate and were dropped"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapSummary {
    pub replications: usize,
    pub successful: usize,
    pub dropped: usize,
    pub seed: u64,
    pub estimate: CohortEstimate,
    pub point: EstimateVector,
    /// Sample standard deviation (divisor `n − 1`) over successful replicates.
    pub se: EstimateVector,
    pub warnings: Vec<BootstrapWarning>,
}

/// Bootstrap standard errors for one cohort of micro records.
pub fn bootstrap(
    records: &[MicroRecord],
    cohort: &CohortSpec,
    replications: usize,
    seed: u64,
) -> Result<BootstrapSummary, EstimationError> {
    let sample: Vec<&MicroRecord> = records.iter().filter(|r| cohort.contains(r.birth_year)).collect();
    if sample.is_empty() {
        return Err(EstimationError::EmptyCohort(cohort.label.clone()));
    }
    let mut full = TransitionCounts::zeros();
    for r in &sample {
        full.add(r.father_class, r.child_class, r.weight);
    }
    run(&full, replications, seed, |rng, counts| {
        for _ in 0..sample.len() {
            let r = sample[rng.random_range(0..sample.len())];
            counts.add(r.father_class, r.child_class, r.weight);
        }
    })
}

/// Bootstrap from an aggregated table: each replicate redraws `total`
/// observations from the cells in proportion to their counts. Equivalent to
/// resampling unit-weight micro records.
pub fn bootstrap_counts(
    counts: &TransitionCounts,
    replications: usize,
    seed: u64,
) -> Result<BootstrapSummary, EstimationError> {
    let cells = counts.cells();
    let mut cumulative = [0.0; 9];
    let mut acc = 0.0;
    for (k, slot) in cumulative.iter_mut().enumerate() {
        acc += cells[k / 3][k % 3];
        *slot = acc;
    }
    let total = acc;
    if total <= 0.0 {
        return Err(EstimationError::EmptyCounts);
    }
    let draws = total.round().max(1.0) as usize;
    run(counts, replications, seed, |rng, out| {
        let mut tally = [0u64; 9];
        for _ in 0..draws {
            let u = rng.random::<f64>() * total;
            let k = cumulative.partition_point(|&c| c <= u).min(8);
            tally[k] += 1;
        }
        for (k, n) in tally.into_iter().enumerate() {
            out.add(crate::OccClass::ALL[k / 3], crate::OccClass::ALL[k % 3], n as f64);
        }
    })
}

fn run<F>(
    full: &TransitionCounts,
    replications: usize,
    seed: u64,
    resample: F,
) -> Result<BootstrapSummary, EstimationError>
where
    F: Fn(&mut crate::rng::StreamRng, &mut TransitionCounts) + Sync,
{
    if replications == 0 {
        return Err(EstimationError::NoReplications);
    }
    let point_estimate = estimate(full)?;
    let factory = StreamFactory::new(seed);
    let results: Vec<Result<EstimateVector, EstimationError>> = (0..replications)
        .into_par_iter()
        .map(|r| {
            let mut rng = factory.stream(r as u64);
            let mut counts = TransitionCounts::zeros();
            resample(&mut rng, &mut counts);
            estimate(&counts).map(|e| e.vector())
        })
        .collect();

    let mut successes = Vec::with_capacity(replications);
    let mut first_error = None;
    for res in results {
        match res {
            Ok(v) => successes.push(v.to_array()),
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    if successes.is_empty() {
        let msg = first_error.map(|e| e.to_string()).unwrap_or_default();
        return Err(EstimationError::AllReplicatesFailed(replications, msg));
    }

    let n = successes.len();
    let mut warnings = Vec::new();
    let se = if n == 1 {
        warnings.push(BootstrapWarning::SingleReplicate);
        [0.0; 11]
    } else {
        std::array::from_fn(|k| {
            let mean = successes.iter().map(|s| s[k]).sum::<f64>() / n as f64;
            let ss: f64 = successes.iter().map(|s| (s[k] - mean).powi(2)).sum();
            (ss / (n - 1) as f64).sqrt()
        })
    };
    if n < LOW_REPLICATION_THRESHOLD {
        warnings.push(BootstrapWarning::LowReplications(n));
    }
    let dropped = replications - n;
    if dropped > 0 {
        warnings.push(BootstrapWarning::DroppedReplicates(dropped));
    }
    Ok(BootstrapSummary {
        replications,
        successful: n,
        dropped,
        seed,
        point: point_estimate.vector(),
        estimate: point_estimate,
        se: EstimateVector::from_array(se),
        warnings,
    })
}
