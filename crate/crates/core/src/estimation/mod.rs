//! From transition counts to `P`, `R` and `Q`.
//!
//! `P` is the row-normalized count table. `R` maximizes its trace subject to
//! mapping the fathers' class distribution onto the children's
//! (`Rᵀ·f = c`, rows summing to one), which is a 9-variable linear program.
//! `Q = P·R⁻¹`. When `Q` has negative entries an iterative amendment
//! alternates between clipping `Q` and re-deriving `R` until `Q` is
//! nonnegative.

mod bootstrap;
mod premia;

pub use bootstrap::{bootstrap, bootstrap_counts, BootstrapSummary, BootstrapWarning, LOW_REPLICATION_THRESHOLD};
pub use premia::{income_premia, premium_interpretation, ClassMoments, PremiaReport, WaveBreakdown};

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::class::OccClass;
use crate::lp::{solve_lp, LinearProgram, LpError, LpStatus};
use crate::matrix::{ClassShares, MatrixError, TransitionMatrix};
use crate::model::{identify_params, indexes_with_params, Identification, MobilityIndexes, ModelError, ModelParams};

/// Negative entries of `Q` down to this magnitude are treated as rounding.
pub const NEGATIVITY_TOLERANCE: f64 = 1e-9;
/// Passes of the amendment loop before giving up.
pub const MAX_AMENDMENT_PASSES: usize = 5;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EstimationError {
    #[error("invalid counts: {0}")]
    InvalidCounts(String),
    #[error("no observations")]
    EmptyCounts,
    #[error("no observations with a {0} father; P is undefined")]
    EmptyParentClass(OccClass),
    #[error("share of {0} fathers is zero; merge classes or widen the cohort")]
    ZeroFatherShare(OccClass),
    #[error("structural-mobility program failed: {0:?}")]
    Lp(LpStatus),
    #[error("linear program rejected: {0}")]
    LpInput(#[from] LpError),
    #[error("decomposition failed: {0}")]
    Decomposition(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("cohort `{0}` contains no records")]
    EmptyCohort(String),
    #[error("replications must be at least 1")]
    NoReplications,
    #[error("all {0} bootstrap replicates failed; first error: {1}")]
    AllReplicatesFailed(usize, String),
    #[error("premia: {0}")]
    Premia(String),
}

/// Weighted (father, child) frequencies; rows are father classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionCounts([[f64; 3]; 3]);

impl TransitionCounts {
    /// Cells must be finite and nonnegative. Empty rows are allowed here and
    /// rejected by [`estimate_p`].
    pub fn new(cells: [[f64; 3]; 3]) -> Result<Self, EstimationError> {
        for (i, row) in cells.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(EstimationError::InvalidCounts(format!("cell ({i}, {j}) = {v}")));
                }
            }
        }
        Ok(Self(cells))
    }

    pub fn zeros() -> Self {
        Self([[0.0; 3]; 3])
    }

    pub fn add(&mut self, father: OccClass, child: OccClass, weight: f64) {
        self.0[father.index()][child.index()] += weight;
    }

    pub fn get(&self, father: OccClass, child: OccClass) -> f64 {
        self.0[father.index()][child.index()]
    }

    pub fn cells(&self) -> [[f64; 3]; 3] {
        self.0
    }

    pub fn total(&self) -> f64 {
        self.0.iter().flatten().sum()
    }

    pub fn row_totals(&self) -> [f64; 3] {
        self.0.map(|row| row.iter().sum())
    }

    pub fn col_totals(&self) -> [f64; 3] {
        std::array::from_fn(|j| self.0.iter().map(|row| row[j]).sum())
    }
}

/// Row-normalized counts.
pub fn estimate_p(counts: &TransitionCounts) -> Result<TransitionMatrix, EstimationError> {
    for (class, total) in OccClass::ALL.into_iter().zip(counts.row_totals()) {
        if total <= 0.0 {
            return Err(EstimationError::EmptyParentClass(class));
        }
    }
    Ok(TransitionMatrix::from_row_weights(counts.cells())?)
}

/// Fathers' (row margin) and children's (column margin) class shares.
pub fn shares_from_counts(counts: &TransitionCounts) -> Result<(ClassShares, ClassShares), EstimationError> {
    let total = counts.total();
    if total <= 0.0 {
        return Err(EstimationError::EmptyCounts);
    }
    let fathers = ClassShares::new(counts.row_totals().map(|v| v / total))?;
    let children = ClassShares::new(counts.col_totals().map(|v| v / total))?;
    Ok((fathers, children))
}

/// The linear program behind [`solve_r`]: variables `r_ij` at `3i + j`.
pub fn structural_program(fathers: &ClassShares, children: &ClassShares) -> Result<LinearProgram, LpError> {
    let f = fathers.as_array();
    let c = children.as_array();
    let mut objective = vec![0.0; 9];
    for i in 0..3 {
        objective[3 * i + i] = -1.0;
    }
    let mut rows = Vec::with_capacity(6);
    let mut rhs = Vec::with_capacity(6);
    for j in 0..3 {
        let mut a = vec![0.0; 9];
        for i in 0..3 {
            a[3 * i + j] = f[i];
        }
        rows.push(a);
        rhs.push(c[j]);
    }
    for i in 0..3 {
        let mut a = vec![0.0; 9];
        a[3 * i..3 * i + 3].fill(1.0);
        rows.push(a);
        rhs.push(1.0);
    }
    LinearProgram::new(objective, rows, rhs)
}

/// Trace-maximizing structural matrix carrying `fathers` to `children`.
pub fn solve_r(fathers: &ClassShares, children: &ClassShares) -> Result<TransitionMatrix, EstimationError> {
    for class in OccClass::ALL {
        if fathers.get(class) <= 0.0 {
            return Err(EstimationError::ZeroFatherShare(class));
        }
    }
    let sol = solve_lp(&structural_program(fathers, children)?);
    if !sol.is_optimal() {
        return Err(EstimationError::Lp(sol.status));
    }
    let m = Matrix3::from_row_slice(&sol.x);
    Ok(TransitionMatrix::from_clamped(&m, NEGATIVITY_TOLERANCE)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amendment {
    pub q: TransitionMatrix,
    pub r: TransitionMatrix,
    pub amended: bool,
    pub passes: usize,
}

fn clip_and_normalize(m: &Matrix3<f64>, what: &str) -> Result<Matrix3<f64>, EstimationError> {
    let mut out = m.map(|v| v.max(0.0));
    for i in 0..3 {
        let sum = out.row(i).sum();
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(EstimationError::Decomposition(format!("{what} row {i} has no positive mass")));
        }
        out.row_mut(i).unscale_mut(sum);
    }
    Ok(out)
}

fn inverse(m: &Matrix3<f64>, what: &str) -> Result<Matrix3<f64>, EstimationError> {
    m.try_inverse().ok_or_else(|| EstimationError::Decomposition(format!("{what} is singular")))
}

/// `Q = P·R⁻¹`, amended when it has negative entries.
///
/// Each pass clips `Q` at zero and row-normalizes it, sets `R = Q⁻¹·P`,
/// clips and row-normalizes that `R`, and recomputes `Q = P·R⁻¹`. Clipping
/// `R` matters: its rows already sum to one, so normalizing alone would
/// leave it unchanged.
pub fn amend_decomposition(p: &TransitionMatrix, r0: &TransitionMatrix) -> Result<Amendment, EstimationError> {
    let pm = p.as_matrix();
    let mut q = pm * inverse(r0.as_matrix(), "R")?;
    if q.min() >= -NEGATIVITY_TOLERANCE {
        let q = TransitionMatrix::from_clamped(&q, NEGATIVITY_TOLERANCE)?;
        return Ok(Amendment { q, r: *r0, amended: false, passes: 0 });
    }
    for pass in 1..=MAX_AMENDMENT_PASSES {
        let q_clipped = clip_and_normalize(&q, "clipped Q")?;
        let r_raw = inverse(&q_clipped, "clipped Q")? * pm;
        let r = clip_and_normalize(&r_raw, "amended R")?;
        q = pm * inverse(&r, "amended R")?;
        if q.min() >= -NEGATIVITY_TOLERANCE {
            return Ok(Amendment {
                q: TransitionMatrix::from_clamped(&q, NEGATIVITY_TOLERANCE)?,
                r: TransitionMatrix::from_clamped(&r, NEGATIVITY_TOLERANCE)?,
                amended: true,
                passes: pass,
            });
        }
    }
    Err(EstimationError::Decomposition(format!(
        "Q still has negative entries after {MAX_AMENDMENT_PASSES} amendment passes (min {:.3e})",
        q.min()
    )))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    pub p: TransitionMatrix,
    pub q: TransitionMatrix,
    pub r: TransitionMatrix,
    /// The linear-program solution before amendment.
    pub r_lp: TransitionMatrix,
    pub fathers: ClassShares,
    pub children: ClassShares,
    pub amended: bool,
    pub passes: usize,
    /// `max |Q·R − P|`.
    pub qr_residual: f64,
    /// `max |children − Pᵀ·fathers|`.
    pub share_residual: f64,
}

pub fn decompose(counts: &TransitionCounts) -> Result<Decomposition, EstimationError> {
    let p = estimate_p(counts)?;
    let (fathers, children) = shares_from_counts(counts)?;
    let r_lp = solve_r(&fathers, &children)?;
    let Amendment { q, r, amended, passes } = amend_decomposition(&p, &r_lp)?;
    let qr_residual = (q.as_matrix() * r.as_matrix() - p.as_matrix()).abs().max();
    let implied = p.propagate(&fathers);
    let share_residual = (0..3).map(|j| (implied[j] - children.as_array()[j]).abs()).fold(0.0, f64::max);
    Ok(Decomposition { p, q, r, r_lp, fathers, children, amended, passes, qr_residual, share_residual })
}

/// Everything estimated for one cohort.
#[derive(Debug, Clone, PartialEq)]
pub struct CohortEstimate {
    pub observations: f64,
    pub decomposition: Decomposition,
    pub identification: Identification,
    pub indexes: MobilityIndexes,
}

impl CohortEstimate {
    pub fn vector(&self) -> EstimateVector {
        EstimateVector::new(&self.indexes, &self.identification.params)
    }
}

pub fn estimate(counts: &TransitionCounts) -> Result<CohortEstimate, EstimationError> {
    let decomposition = decompose(counts)?;
    let identification = identify_params(&decomposition.q)?;
    let indexes = indexes_with_params(&decomposition.p, &decomposition.q, &identification.params)?;
    Ok(CohortEstimate { observations: counts.total(), decomposition, identification, indexes })
}

/// The eleven bootstrapped statistics: five indexes and six parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateVector {
    pub i_obs: f64,
    pub i_os: f64,
    pub i_true: f64,
    pub i_opp: f64,
    pub i_loi: f64,
    pub lambda_m: f64,
    pub lambda_u: f64,
    pub theta_max: f64,
    pub theta_min: f64,
    pub theta_m_max: f64,
    pub theta_m_min: f64,
}

impl EstimateVector {
    pub const NAMES: [&'static str; 11] = [
        "i_obs",
        "i_os",
        "i_true",
        "i_opp",
        "i_loi",
        "lambda_M",
        "lambda_U",
        "theta_max",
        "theta_min",
        "theta_M_max",
        "theta_M_min",
    ];

    pub fn new(indexes: &MobilityIndexes, params: &ModelParams) -> Self {
        let mut v = [0.0; 11];
        v[..5].copy_from_slice(&indexes.to_array());
        v[5..].copy_from_slice(&params.to_array());
        Self::from_array(v)
    }

    pub fn to_array(&self) -> [f64; 11] {
        [
            self.i_obs,
            self.i_os,
            self.i_true,
            self.i_opp,
            self.i_loi,
            self.lambda_m,
            self.lambda_u,
            self.theta_max,
            self.theta_min,
            self.theta_m_max,
            self.theta_m_min,
        ]
    }

    pub fn from_array(v: [f64; 11]) -> Self {
        Self {
            i_obs: v[0],
            i_os: v[1],
            i_true: v[2],
            i_opp: v[3],
            i_loi: v[4],
            lambda_m: v[5],
            lambda_u: v[6],
            theta_max: v[7],
            theta_min: v[8],
            theta_m_max: v[9],
            theta_m_min: v[10],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cohort_one() -> TransitionCounts {
        TransitionCounts::new([[937.0, 789.0, 168.0], [353.0, 984.0, 302.0], [17.0, 74.0, 121.0]]).unwrap()
    }

    #[test]
    fn p_is_row_normalized_counts() {
        let p = estimate_p(&cohort_one()).unwrap();
        assert!((p.entry(0, 0) - 937.0 / 1894.0).abs() < 1e-15);
        assert!((p.entry(2, 2) - 121.0 / 212.0).abs() < 1e-15);
    }

    #[test]
    fn empty_father_row_is_an_error() {
        let counts = TransitionCounts::new([[1.0, 0.0, 0.0], [0.0; 3], [0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(estimate_p(&counts), Err(EstimationError::EmptyParentClass(OccClass::Middle)));
        assert!(TransitionCounts::new([[-1.0, 0.0, 0.0], [0.0; 3], [0.0; 3]]).is_err());
    }

    #[test]
    fn equal_shares_give_identity_r() {
        let s = ClassShares::new([0.3, 0.4, 0.3]).unwrap();
        let r = solve_r(&s, &s).unwrap();
        assert!(r.max_abs_diff(&TransitionMatrix::identity()) < 1e-12);
    }

    #[test]
    fn zero_father_share_is_rejected() {
        let f = ClassShares::new([0.5, 0.5, 0.0]).unwrap();
        let c = ClassShares::new([0.3, 0.4, 0.3]).unwrap();
        assert_eq!(solve_r(&f, &c), Err(EstimationError::ZeroFatherShare(OccClass::Upper)));
    }

    #[test]
    fn r_maps_fathers_onto_children() {
        let (f, c) = shares_from_counts(&cohort_one()).unwrap();
        let r = solve_r(&f, &c).unwrap();
        let mapped = r.propagate(&f);
        for j in 0..3 {
            assert!((mapped[j] - c.as_array()[j]).abs() < 1e-12);
        }
        // Growing classes keep all their sons; the shrinking Working class
        // sends the surplus upward.
        assert!((r.trace() - (2.0 + 1307.0 / 1894.0)).abs() < 1e-12);
    }

    #[test]
    fn decomposition_reproduces_p() {
        let d = decompose(&cohort_one()).unwrap();
        assert!(d.qr_residual < 1e-9, "{}", d.qr_residual);
        assert!(d.share_residual < 1e-12);
        assert!(d.q.as_matrix().min() >= 0.0);
    }

    #[test]
    fn unamended_path_keeps_lp_solution() {
        let p = TransitionMatrix::new([[0.8, 0.2, 0.0], [0.1, 0.8, 0.1], [0.0, 0.2, 0.8]]).unwrap();
        let a = amend_decomposition(&p, &TransitionMatrix::identity()).unwrap();
        assert!(!a.amended);
        assert_eq!(a.passes, 0);
        assert!(a.q.max_abs_diff(&p) < 1e-15);
    }

    #[test]
    fn estimate_vector_roundtrips_arrays() {
        let v: [f64; 11] = std::array::from_fn(|i| i as f64);
        assert_eq!(EstimateVector::from_array(v).to_array(), v);
    }
}
