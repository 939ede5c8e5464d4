//! Row-stochastic 3×3 matrices and class share vectors.
//!
//! Both types validate on construction. Inputs whose rows (or total) miss 1
//! by at most [`INGEST_TOLERANCE`] are accepted and renormalized exactly, so
//! that values copied from two-decimal tables and floating-point products
//! can be used interchangeably.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::class::OccClass;

/// Largest accepted deviation of a row sum (or share total) from 1.
pub const INGEST_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MatrixError {
    #[error("entry ({row}, {col}) = {value} is not a probability")]
    InvalidEntry { row: usize, col: usize, value: f64 },
    #[error("row {row} sums to {sum}, not 1 (tolerance {INGEST_TOLERANCE})")]
    RowSum { row: usize, sum: f64 },
    #[error("row {row} has no positive mass")]
    EmptyRow { row: usize },
    #[error("share {index} = {value} is not a proportion")]
    InvalidShare { index: usize, value: f64 },
    #[error("shares sum to {sum}, not 1 (tolerance {INGEST_TOLERANCE})")]
    ShareSum { sum: f64 },
}

/// Father→child transition matrix; rows are parent classes, columns child classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[[f64; 3]; 3]", into = "[[f64; 3]; 3]")]
pub struct TransitionMatrix(Matrix3<f64>);

impl TransitionMatrix {
    /// Validates a row-stochastic matrix. Rows within [`INGEST_TOLERANCE`]
    /// of 1 are renormalized.
    pub fn new(rows: [[f64; 3]; 3]) -> Result<Self, MatrixError> {
        check_entries(&rows)?;
        for (i, row) in rows.iter().enumerate() {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > INGEST_TOLERANCE {
                return Err(MatrixError::RowSum { row: i, sum });
            }
        }
        Self::from_row_weights(rows)
    }

    /// Row-normalizes nonnegative weights (counts, or rounded two-decimal tables).
    pub fn from_row_weights(rows: [[f64; 3]; 3]) -> Result<Self, MatrixError> {
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(MatrixError::InvalidEntry { row: i, col: j, value: v });
                }
            }
        }
        let mut m = Matrix3::zeros();
        for (i, row) in rows.iter().enumerate() {
            let sum: f64 = row.iter().sum();
            if sum <= 0.0 {
                return Err(MatrixError::EmptyRow { row: i });
            }
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v / sum;
            }
        }
        Ok(Self(m))
    }

    /// Wraps entries that are row-stochastic by construction. Used by the
    /// closed-form builders where renormalizing would perturb exact values.
    pub(crate) fn from_exact(m: Matrix3<f64>) -> Self {
        debug_assert!((0..3).all(|i| (m.row(i).sum() - 1.0).abs() < 1e-9));
        Self(m)
    }

    /// Clamps entries in `[-clamp, 0)` to zero and row-normalizes. Fails if a
    /// more negative entry remains.
    pub(crate) fn from_clamped(m: &Matrix3<f64>, clamp: f64) -> Result<Self, MatrixError> {
        let mut rows = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let v = m[(i, j)];
                if !v.is_finite() || v < -clamp {
                    return Err(MatrixError::InvalidEntry { row: i, col: j, value: v });
                }
                rows[i][j] = v.max(0.0);
            }
        }
        Self::from_row_weights(rows)
    }

    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    pub fn get(&self, from: OccClass, to: OccClass) -> f64 {
        self.0[(from.index(), to.index())]
    }

    /// Entry by zero-based position.
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.0[(row, col)]
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn rows(&self) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.0[(i, j)];
            }
        }
        out
    }

    pub fn as_matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    /// Maximum absolute elementwise difference.
    pub fn max_abs_diff(&self, other: &TransitionMatrix) -> f64 {
        (self.0 - other.0).abs().max()
    }

    pub fn try_inverse(&self) -> Option<Matrix3<f64>> {
        self.0.try_inverse()
    }

    /// Distribution of children given the fathers' distribution: `Pᵀ·s`.
    pub fn propagate(&self, shares: &ClassShares) -> [f64; 3] {
        let v = self.0.transpose() * Vector3::from(shares.as_array());
        [v[0], v[1], v[2]]
    }
}

impl TryFrom<[[f64; 3]; 3]> for TransitionMatrix {
    type Error = MatrixError;

    fn try_from(rows: [[f64; 3]; 3]) -> Result<Self, Self::Error> {
        Self::new(rows)
    }
}

impl From<TransitionMatrix> for [[f64; 3]; 3] {
    fn from(m: TransitionMatrix) -> Self {
        m.rows()
    }
}

fn check_entries(rows: &[[f64; 3]; 3]) -> Result<(), MatrixError> {
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() || !(0.0..=1.0 + INGEST_TOLERANCE).contains(&v) {
                return Err(MatrixError::InvalidEntry { row: i, col: j, value: v });
            }
        }
    }
    Ok(())
}

/// Proportions of individuals in each class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct ClassShares([f64; 3]);

impl ClassShares {
    pub fn new(shares: [f64; 3]) -> Result<Self, MatrixError> {
        for (i, &v) in shares.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(MatrixError::InvalidShare { index: i, value: v });
            }
        }
        let sum: f64 = shares.iter().sum();
        if (sum - 1.0).abs() > INGEST_TOLERANCE {
            return Err(MatrixError::ShareSum { sum });
        }
        Ok(Self(shares.map(|v| v / sum)))
    }

    pub fn get(&self, class: OccClass) -> f64 {
        self.0[class.index()]
    }

    pub fn as_array(&self) -> [f64; 3] {
        self.0
    }
}

impl TryFrom<[f64; 3]> for ClassShares {
    type Error = MatrixError;

    fn try_from(v: [f64; 3]) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<ClassShares> for [f64; 3] {
    fn from(s: ClassShares) -> Self {
        s.0
    }
}
